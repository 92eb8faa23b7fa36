#ifndef BNVC_FRAME_H_
#define BNVC_FRAME_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "bnvc/tensor.h"

namespace bnvc {

// 8-bit planar RGB picture: all R samples, then G, then B, rows top first.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> planes;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t &at(int c, int y, int x) {
    return planes[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  std::uint8_t at(int c, int y, int x) const {
    return planes[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool operator==(const Image &) const = default;
};

// Samples scaled to [0, 1], shape 3 x H x W.
Tensor image_to_tensor(const Image &image);
// Rounds 255 * t to the nearest integer and clamps to [0, 255].
Image tensor_to_image(const Tensor &t);

// Dense 2 x H x W displacement field in pixels, current -> reference:
// channel 0 horizontal, channel 1 vertical.
using MotionField = Tensor;

struct Frame {
  int index = 0;
  Image pixels;
  std::optional<Tensor> feature;  // C0 x H x W
  std::optional<MotionField> flow;  // decoded motion to the previous frame
};

}  // namespace bnvc

#endif  // BNVC_FRAME_H_
