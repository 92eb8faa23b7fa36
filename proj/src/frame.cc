#include "bnvc/frame.h"

#include <algorithm>
#include <cmath>

#include "bnvc/error.h"

namespace bnvc {

Image::Image(int w, int h, std::uint8_t fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw UsageError("image dimensions must be positive");
  planes.assign(3 * pixel_count(), fill);
}

Tensor image_to_tensor(const Image &image) {
  Tensor t({3, image.height, image.width});
  for (std::size_t i = 0; i < image.planes.size(); ++i) t[i] = image.planes[i] / 255.0;
  return t;
}

Image tensor_to_image(const Tensor &t) {
  require_rank(t, 3, "tensor_to_image");
  if (t.dim(0) != 3) throw ShapeError("tensor_to_image: expected 3 channels");
  Image img(t.dim(2), t.dim(1));
  for (std::size_t i = 0; i < t.size(); ++i) {
    double v = std::nearbyint(t[i] * 255.0);
    if (!(v >= 0.0)) v = 0.0;
    img.planes[i] = static_cast<std::uint8_t>(std::min(v, 255.0));
  }
  return img;
}

}  // namespace bnvc
