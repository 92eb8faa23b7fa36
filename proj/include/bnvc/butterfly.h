#ifndef BNVC_BUTTERFLY_H_
#define BNVC_BUTTERFLY_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bnvc/graph.h"
#include "bnvc/params.h"

namespace bnvc {

enum class FusionMode : std::uint8_t {
  kButterfly = 0,
  kTogether = 1,     // concat all references, one shared U-path
  kIndependent = 2,  // per-reference U-paths, concat after upsampling
};

std::string to_string(FusionMode mode);
FusionMode parse_fusion_mode(const std::string &text);

struct Widths {
  std::array<int, 3> c{16, 24, 32};
  int at(int scale) const { return c.at(scale); }
  bool operator==(const Widths &) const = default;
};

// Per-reference features at full, half and quarter resolution.
struct FeaturePyramid {
  std::array<Var, 3> levels;
};

// Fused temporal context at full, half and quarter resolution.
struct ContextPyramid {
  std::array<Var, 3> levels;
};

// Independent downsampling of one warped reference feature (C0 x H x W).
// Parameters are private to reference slot `slot`.
FeaturePyramid downsample_stage(Binder &b, Var warped, int slot,
                                const Widths &widths,
                                const std::string &prefix = "bfly.down");

// Grid propagation over (reference, scale), coarsest row first. Row 2 runs
// oldest->newest, row 1 newest->oldest, row 0 oldest->newest. Each node
// fuses its own pyramid level, the upsampled node of the row below and the
// previous node of its row (zeros at the row start). The last node of each
// row is the context at that scale.
ContextPyramid grid_fuse(Binder &b, const std::vector<FeaturePyramid> &pyramids,
                         const Widths &widths);

// `warped` ordered oldest->newest; all C0 x H x W with H, W divisible by 4.
ContextPyramid butterfly_forward(Binder &b, const std::vector<Var> &warped,
                                 FusionMode mode, const Widths &widths);

struct Probe {
  double magnitude = 1.0;
  int half_size = 2;  // square of side 2*half_size centered in the frame
};

// || C0(with probe on reference j) - C0(without) ||_2, inference mode.
double occlusion_sensitivity(ParamStore &weights, const std::vector<Tensor> &warped,
                             int reference, FusionMode mode, const Widths &widths,
                             const Probe &probe = {});

}  // namespace bnvc

#endif  // BNVC_BUTTERFLY_H_
