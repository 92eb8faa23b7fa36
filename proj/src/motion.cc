#include "bnvc/motion.h"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "bnvc/error.h"

namespace bnvc {

long block_sad(const Image &current, const Image &reference, int bx, int by,
               int block, int dx, int dy) {
  long sad = 0;
  const int w = current.width, h = current.height;
  for (int c = 0; c < 3; ++c) {
    for (int y = by; y < std::min(by + block, h); ++y) {
      const int ry = std::clamp(y + dy, 0, h - 1);
      for (int x = bx; x < std::min(bx + block, w); ++x) {
        const int rx = std::clamp(x + dx, 0, w - 1);
        sad += std::abs(static_cast<int>(current.at(c, y, x)) -
                        static_cast<int>(reference.at(c, ry, rx)));
      }
    }
  }
  return sad;
}

MotionField estimate_motion(const Image &current, const Image &reference,
                            const BlockSearch &search) {
  if (current.width != reference.width || current.height != reference.height) {
    throw UsageError("estimate_motion: frame sizes differ");
  }
  if (search.block <= 0 || search.range < 0) {
    throw UsageError("estimate_motion: invalid search parameters");
  }
  if (current.width % search.block != 0 || current.height % search.block != 0) {
    throw UsageError("estimate_motion: frame size not divisible by block size");
  }
  const int w = current.width, h = current.height, r = search.range;
  MotionField flow({2, h, w});
  for (int by = 0; by < h; by += search.block) {
    for (int bx = 0; bx < w; bx += search.block) {
      long best = std::numeric_limits<long>::max();
      int best_mag = 0, best_dx = 0, best_dy = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          long sad = block_sad(current, reference, bx, by, search.block, dx, dy);
          int mag = dx * dx + dy * dy;
          if (sad < best || (sad == best && mag < best_mag)) {
            best = sad;
            best_mag = mag;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }
      for (int y = by; y < by + search.block; ++y) {
        for (int x = bx; x < bx + search.block; ++x) {
          flow.at(0, y, x) = best_dx;
          flow.at(1, y, x) = best_dy;
        }
      }
    }
  }
  return flow;
}

MotionField compose_flows(const MotionField &outer, const MotionField &inner) {
  require_same_shape(outer, inner, "compose_flows");
  MotionField out = warp_bilinear_forward(inner, outer);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += outer[i];
  return out;
}

Var compose_flows(Var outer, Var inner) {
  return add(outer, warp_bilinear(inner, outer));
}

}  // namespace bnvc
