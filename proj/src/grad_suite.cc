#include "bnvc/grad_suite.h"

#include <array>
#include <cmath>
#include <functional>
#include <random>

#include "bnvc/butterfly.h"
#include "bnvc/entropy.h"
#include "bnvc/graph.h"
#include "bnvc/model.h"
#include "bnvc/motion.h"
#include "bnvc/synth.h"

namespace bnvc {

namespace {

Tensor uniform(const Shape &shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(shape);
  for (double &v : t.data()) v = d(rng);
  return t;
}

Var weighted_sum(Var y, std::uint64_t seed) {
  Var r = y.graph->input(uniform(y.shape(), seed));
  return sum(mul(y, r));
}

struct OpCase {
  const char *name;
  std::function<std::vector<Tensor>(std::uint64_t)> inputs;
  ScalarClosure fn;
};

std::vector<OpCase> op_cases() {
  return {
      {"conv2d stride 1",
       [](std::uint64_t s) {
         return std::vector<Tensor>{uniform({2, 5, 6}, s), uniform({3, 2, 3, 3}, s + 1),
                                    uniform({3}, s + 2)};
       },
       [](const std::vector<Var> &v) { return weighted_sum(conv2d(v[0], v[1], v[2], 1, 1), 1); }},
      {"conv2d stride 2",
       [](std::uint64_t s) {
         return std::vector<Tensor>{uniform({2, 7, 6}, s), uniform({2, 2, 3, 3}, s + 1),
                                    uniform({2}, s + 2)};
       },
       [](const std::vector<Var> &v) { return weighted_sum(conv2d(v[0], v[1], v[2], 2, 1), 2); }},
      {"leaky_relu", [](std::uint64_t s) { return std::vector<Tensor>{uniform({3, 4, 4}, s)}; },
       [](const std::vector<Var> &v) { return weighted_sum(leaky_relu(v[0]), 3); }},
      {"add sub mul",
       [](std::uint64_t s) {
         return std::vector<Tensor>{uniform({2, 3, 3}, s), uniform({2, 3, 3}, s + 1)};
       },
       [](const std::vector<Var> &v) {
         return weighted_sum(mul(add(v[0], v[1]), sub(v[0], v[1])), 4);
       }},
      {"scale add_scalar square", [](std::uint64_t s) { return std::vector<Tensor>{uniform({7}, s)}; },
       [](const std::vector<Var> &v) {
         return weighted_sum(square(add_scalar(scale(v[0], -1.7), 0.3)), 5);
       }},
      {"softplus exp", [](std::uint64_t s) { return std::vector<Tensor>{uniform({9}, s, -3.0, 3.0)}; },
       [](const std::vector<Var> &v) { return weighted_sum(add(softplus(v[0]), exp(v[0])), 6); }},
      {"concat slice",
       [](std::uint64_t s) {
         return std::vector<Tensor>{uniform({2, 3, 3}, s), uniform({1, 3, 3}, s + 1)};
       },
       [](const std::vector<Var> &v) {
         return weighted_sum(slice_channels(concat_channels({v[0], v[1], v[0]}), 1, 4), 7);
       }},
      {"bilinear_resize up", [](std::uint64_t s) { return std::vector<Tensor>{uniform({2, 3, 4}, s)}; },
       [](const std::vector<Var> &v) { return weighted_sum(bilinear_resize(v[0], 6, 8), 8); }},
      {"bilinear_resize down", [](std::uint64_t s) { return std::vector<Tensor>{uniform({2, 6, 5}, s)}; },
       [](const std::vector<Var> &v) { return weighted_sum(bilinear_resize(v[0], 3, 2), 9); }},
      {"warp_bilinear",
       [](std::uint64_t s) {
         return std::vector<Tensor>{uniform({2, 5, 6}, s), uniform({2, 5, 6}, s + 1, -2.5, 2.5)};
       },
       [](const std::vector<Var> &v) { return weighted_sum(warp_bilinear(v[0], v[1]), 10); }},
      {"mean mse",
       [](std::uint64_t s) {
         return std::vector<Tensor>{uniform({2, 3, 3}, s), uniform({2, 3, 3}, s + 1)};
       },
       [](const std::vector<Var> &v) { return add(mse(v[0], v[1]), mean(v[0])); }},
      {"gaussian_bits",
       [](std::uint64_t s) {
         return std::vector<Tensor>{uniform({12}, s, -4.0, 4.0), uniform({12}, s + 1),
                                    uniform({12}, s + 2, 0.2, 3.0)};
       },
       [](const std::vector<Var> &v) { return gaussian_bits(v[0], v[1], v[2]); }},
      {"logistic_bits",
       [](std::uint64_t s) {
         return std::vector<Tensor>{uniform({2, 3, 3}, s, -4.0, 4.0), uniform({2}, s + 1),
                                    uniform({2}, s + 2, -1.0, 1.0)};
       },
       [](const std::vector<Var> &v) { return logistic_bits(v[0], v[1], v[2]); }},
  };
}

GradSuiteEntry fusion_case(FusionMode mode, const GradSuiteOptions &o) {
  const Widths w{{8, 12, 16}};
  ParamStore store(o.seed + 6);
  std::vector<Tensor> refs;
  for (int j = 0; j < 4; ++j) refs.push_back(uniform({8, 16, 16}, o.seed + 50 + 31 * j));
  {
    Graph g(Graph::Mode::kInference);
    Binder b(g, store, false);
    std::vector<Var> in;
    for (const Tensor &t : refs) in.push_back(g.input(t));
    butterfly_forward(b, in, mode, w);
  }
  int k = 0;
  for (const std::string &name : store.names()) {
    if (name.size() > 2 && name.compare(name.size() - 2, 2, ".b") == 0) {
      Tensor &t = store.get(name);
      t = uniform(t.shape(), o.seed + 123 + k++, -0.1, 0.1);
    }
  }
  store.freeze();
  std::array<Tensor, 3> probe{uniform({8, 16, 16}, o.seed + 60), uniform({12, 8, 8}, o.seed + 61),
                              uniform({16, 4, 4}, o.seed + 62)};
  ScalarClosure fn = [&](const std::vector<Var> &in) {
    Graph &g = *in[0].graph;
    Binder b(g, store, false);
    ContextPyramid c = butterfly_forward(b, in, mode, w);
    Var total = sum(mul(c.levels[0], g.input(probe[0])));
    for (int s = 1; s < 3; ++s) total = add(total, sum(mul(c.levels[s], g.input(probe[s]))));
    return total;
  };
  GradCheckOptions opt;
  opt.tol = o.op_tol;
  opt.max_coords = 96;
  opt.seed = o.seed + 9;
  return {"fusion " + to_string(mode), grad_check(fn, refs, opt)};
}

GradSuiteEntry pipeline_case(const GradSuiteOptions &o) {
  ModelConfig cfg = ModelConfig::toy();
  ParamStore store = init_model(cfg, o.seed + 21);
  SynthConfig sc;
  sc.width = sc.height = 16;
  sc.frames = 3;
  std::vector<Image> seq = generate_sequence(sc, o.seed + 12);
  MotionField motion = estimate_motion(seq[2], seq[1], {8, 4});
  Tensor prev_flow({2, 16, 16});
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) prev_flow.at(c, y, x) = 0.8 * std::sin(0.3 * x + c) + 0.5 * std::cos(0.2 * y);
  Tensor prev_feature = uniform({cfg.widths.c[0], 16, 16}, o.seed + 4);

  ScalarClosure fn = [&](const std::vector<Var> &in) {
    Graph &g = *in[0].graph;
    Binder b(g, store);
    PFrameInput p;
    p.height = p.width = 16;
    p.current = in[0];
    p.motion = motion;
    p.dpb = {{in[1], Var{}, Var{}}, {g.input(image_to_tensor(seq[1])), in[2], g.input(prev_flow)}};
    p.policy = DuplicationPolicy::kNear;
    NoiseCoder coder(o.seed + 5);
    PFrameOutput out = p_frame_forward(b, cfg, p, coder);
    return add(scale(mse(out.recon, in[0]), 1024.0), scale(coder.total_bits(), 1.0 / 256));
  };
  GradCheckOptions opt;
  opt.tol = o.pipeline_tol;
  opt.max_coords = 120;
  opt.seed = o.seed + 3;
  return {"p-frame objective 16x16",
          grad_check(fn, {image_to_tensor(seq[2]), image_to_tensor(seq[0]), prev_feature}, opt)};
}

}  // namespace

std::vector<GradSuiteEntry> run_grad_suite(const GradSuiteOptions &options) {
  std::vector<GradSuiteEntry> out;
  GradCheckOptions opt;
  opt.tol = options.op_tol;
  for (const OpCase &c : op_cases()) {
    GradSuiteEntry e{c.name, {}};
    e.report.pass = true;
    for (int s = 0; s < options.seeds; ++s) {
      GradCheckReport r = grad_check(c.fn, c.inputs(options.seed + 1000 + 17 * s), opt);
      e.report.max_rel_err = std::max(e.report.max_rel_err, r.max_rel_err);
      e.report.coords_checked += r.coords_checked;
      if (!r.pass) {
        e.report.pass = false;
        if (e.report.failure.empty()) e.report.failure = r.failure;
      }
    }
    out.push_back(std::move(e));
  }
  if (options.pipeline) {
    for (FusionMode m : {FusionMode::kButterfly, FusionMode::kTogether, FusionMode::kIndependent}) {
      out.push_back(fusion_case(m, options));
    }
    out.push_back(pipeline_case(options));
  }
  return out;
}

}  // namespace bnvc
