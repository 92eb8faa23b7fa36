#include "bnvc/butterfly.h"

#include <cmath>

#include "bnvc/error.h"
#include "bnvc/layers.h"

namespace bnvc {

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::kButterfly: return "butterfly";
    case FusionMode::kTogether: return "together";
    case FusionMode::kIndependent: return "independent";
  }
  return "unknown";
}

FusionMode parse_fusion_mode(const std::string &text) {
  if (text == "butterfly") return FusionMode::kButterfly;
  if (text == "together") return FusionMode::kTogether;
  if (text == "independent") return FusionMode::kIndependent;
  throw UsageError("unknown fusion mode '" + text + "'");
}

namespace {

void check_divisible(Var x) {
  const Tensor &t = x.value();
  require_rank(t, 3, "butterfly input");
  if (t.dim(1) % 4 != 0 || t.dim(2) % 4 != 0) {
    throw UsageError("butterfly: spatial size " + shape_str(t.shape()) +
                     " not divisible by 4");
  }
}

Var node(Binder &b, const std::string &name, const std::vector<Var> &inputs,
         int cout) {
  Var h = leaky_relu(conv(b, name + ".in", concat_channels(inputs), cout));
  return res_block(b, name + ".res", h);
}

Var up_to(Var x, Var like) { return bilinear_resize(x, like.dim(1), like.dim(2)); }

// Upsampling half of a U-path: coarse to fine, skip from the same scale.
std::array<Var, 3> upsample_path(Binder &b, const std::string &prefix,
                                 const std::array<Var, 3> &down,
                                 const Widths &widths) {
  std::array<Var, 3> up;
  up[2] = node(b, prefix + ".2", {down[2]}, widths.at(2));
  up[1] = node(b, prefix + ".1", {down[1], up_to(up[2], down[1])}, widths.at(1));
  up[0] = node(b, prefix + ".0", {down[0], up_to(up[1], down[0])}, widths.at(0));
  return up;
}

}  // namespace

FeaturePyramid downsample_stage(Binder &b, Var warped, int slot,
                                const Widths &widths, const std::string &prefix) {
  check_divisible(warped);
  const std::string p = prefix + "." + std::to_string(slot);
  FeaturePyramid out;
  out.levels[0] = res_block(b, p + ".r0", warped);
  Var d1 = leaky_relu(conv(b, p + ".s1", out.levels[0], widths.at(1), 2));
  out.levels[1] = res_block(b, p + ".r1", d1);
  Var d2 = leaky_relu(conv(b, p + ".s2", out.levels[1], widths.at(2), 2));
  out.levels[2] = res_block(b, p + ".r2", d2);
  return out;
}

ContextPyramid grid_fuse(Binder &b, const std::vector<FeaturePyramid> &pyramids,
                         const Widths &widths) {
  const int n = static_cast<int>(pyramids.size());
  if (n < 1) throw UsageError("grid_fuse: no reference pyramids");
  for (int s = 0; s < 3; ++s) {
    for (int j = 1; j < n; ++j) {
      if (pyramids[j].levels[s].shape() != pyramids[0].levels[s].shape()) {
        throw ShapeError("grid_fuse: pyramid level " + std::to_string(s) +
                         " shape mismatch across references");
      }
    }
  }
  Graph &g = b.graph();
  std::vector<std::array<Var, 3>> grid(n);
  ContextPyramid ctx;
  for (int s = 2; s >= 0; --s) {
    const bool forward = (s != 1);
    const Var &like = pyramids[0].levels[s];
    Var prev = zeros_like_plane(g, widths.at(s), like.dim(1), like.dim(2));
    for (int step = 0; step < n; ++step) {
      const int j = forward ? step : n - 1 - step;
      std::vector<Var> in{pyramids[j].levels[s]};
      if (s < 2) in.push_back(up_to(grid[j][s + 1], like));
      in.push_back(prev);
      grid[j][s] = node(b, "bfly.grid." + std::to_string(s), in, widths.at(s));
      prev = grid[j][s];
    }
    ctx.levels[s] = prev;
  }
  return ctx;
}

ContextPyramid butterfly_forward(Binder &b, const std::vector<Var> &warped,
                                 FusionMode mode, const Widths &widths) {
  if (warped.empty()) throw UsageError("butterfly: no references");
  for (const Var &w : warped) {
    check_divisible(w);
    if (w.shape() != warped[0].shape()) {
      throw ShapeError("butterfly: reference feature shapes differ");
    }
    if (w.dim(0) != widths.at(0)) {
      throw ShapeError("butterfly: reference features must have C0 = " +
                       std::to_string(widths.at(0)) + " channels");
    }
  }
  const int n = static_cast<int>(warped.size());
  switch (mode) {
    case FusionMode::kButterfly: {
      std::vector<FeaturePyramid> pyr;
      pyr.reserve(n);
      for (int j = 0; j < n; ++j) pyr.push_back(downsample_stage(b, warped[j], j, widths));
      return grid_fuse(b, pyr, widths);
    }
    case FusionMode::kTogether: {
      const std::string p = "bfly.tog";
      std::array<Var, 3> down;
      Var d0 = leaky_relu(conv(b, p + ".in", concat_channels(warped), widths.at(0)));
      down[0] = res_block(b, p + ".r0", d0);
      down[1] = res_block(b, p + ".r1",
                          leaky_relu(conv(b, p + ".s1", down[0], widths.at(1), 2)));
      down[2] = res_block(b, p + ".r2",
                          leaky_relu(conv(b, p + ".s2", down[1], widths.at(2), 2)));
      auto up = upsample_path(b, p + ".up", down, widths);
      return ContextPyramid{up};
    }
    case FusionMode::kIndependent: {
      std::array<std::vector<Var>, 3> per_scale;
      for (int j = 0; j < n; ++j) {
        FeaturePyramid pyr = downsample_stage(b, warped[j], j, widths);
        auto up = upsample_path(b, "bfly.ind.up." + std::to_string(j), pyr.levels,
                                widths);
        for (int s = 0; s < 3; ++s) per_scale[s].push_back(up[s]);
      }
      ContextPyramid ctx;
      for (int s = 0; s < 3; ++s) {
        ctx.levels[s] = node(b, "bfly.ind.fuse." + std::to_string(s), per_scale[s],
                             widths.at(s));
      }
      return ctx;
    }
  }
  throw UsageError("butterfly: bad fusion mode");
}

double occlusion_sensitivity(ParamStore &weights, const std::vector<Tensor> &warped,
                             int reference, FusionMode mode, const Widths &widths,
                             const Probe &probe) {
  if (reference < 0 || reference >= static_cast<int>(warped.size())) {
    throw UsageError("occlusion_sensitivity: reference index out of range");
  }
  auto context0 = [&](const std::vector<Tensor> &in) {
    Graph g(Graph::Mode::kInference);
    Binder b(g, weights, false);
    std::vector<Var> vars;
    for (const Tensor &t : in) vars.push_back(g.input(t));
    return butterfly_forward(b, vars, mode, widths).levels[0].value();
  };
  Tensor base = context0(warped);
  std::vector<Tensor> probed = warped;
  Tensor &t = probed[reference];
  const int h = t.dim(1), w = t.dim(2);
  const int cy = h / 2, cx = w / 2;
  for (int c = 0; c < t.dim(0); ++c) {
    for (int y = std::max(0, cy - probe.half_size); y < std::min(h, cy + probe.half_size); ++y) {
      for (int x = std::max(0, cx - probe.half_size); x < std::min(w, cx + probe.half_size); ++x) {
        t.at(c, y, x) += probe.magnitude;
      }
    }
  }
  Tensor with = context0(probed);
  double s = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    double d = with[i] - base[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace bnvc
