#include "bnvc/train.h"

#include <cmath>
#include <random>

#include "bnvc/error.h"
#include "bnvc/model.h"
#include "bnvc/motion.h"

namespace bnvc {

void Adam::step(ParamStore &store, const std::map<std::string, Tensor> &grads) {
  ++t_;
  double scale_g = 1.0;
  if (cfg_.clip_norm > 0.0) {
    double n2 = 0.0;
    for (const auto &[name, g] : grads) {
      for (double v : g.data()) n2 += v * v;
    }
    const double norm = std::sqrt(n2);
    if (norm > cfg_.clip_norm) scale_g = cfg_.clip_norm / norm;
  }
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (const auto &[name, g] : grads) {
    Tensor &p = store.get(name);
    require_same_shape(p, g, "Adam gradient");
    auto &m = m_[name];
    auto &v = v_[name];
    if (m.empty()) {
      m.assign(p.size(), 0.0);
      v.assign(p.size(), 0.0);
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i] * scale_g;
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
      p[i] -= cfg_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
    }
  }
}

namespace {

struct Window {
  const std::vector<Image> *frames;
  int start;
};

std::vector<Window> windows(const std::vector<std::vector<Image>> &dataset, int rollout,
                            int stride) {
  std::vector<Window> out;
  for (const auto &seq : dataset) {
    const int n = static_cast<int>(seq.size());
    for (int s = 0; s + rollout < n; s += stride) out.push_back({&seq, s});
  }
  return out;
}

}  // namespace

TrainResult train_toy(const TrainConfig &config, const std::vector<std::vector<Image>> &dataset,
                      const ProgressFn &progress) {
  if (config.steps < 0 || config.rollout < 1 || config.start_stride < 1) {
    throw UsageError("train_toy: invalid schedule");
  }
  const double lambda = lambda_for_index(config.lambda_index);
  TrainResult res{Model::seeded(config.model, config.seed, config.lambda_index), {}};
  if (config.steps == 0) return res;
  std::vector<Window> pool = windows(dataset, config.rollout, config.start_stride);
  if (pool.empty()) throw UsageError("train_toy: dataset has no complete rollout window");
  const int H = pool[0].frames->at(0).height, W = pool[0].frames->at(0).width;
  const double pixels = static_cast<double>(H) * W;
  const BlockSearch search = block_search_for(W, H);

  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ull);
  Adam adam(config.adam);
  ParamStore &store = res.model.weights;
  for (int step = 0; step < config.steps; ++step) {
    const Window &win = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    const std::vector<Image> &seq = *win.frames;
    if (seq[win.start].width != W || seq[win.start].height != H) {
      throw UsageError("train_toy: dataset frame sizes differ");
    }
    Graph g(Graph::Mode::kTrain);
    Binder b(g, store, true);
    std::vector<RefState> dpb{{g.input(image_to_tensor(seq[win.start])), Var{}, Var{}}};
    Image newest = seq[win.start];
    Var loss;
    double bits = 0.0, mse_sum = 0.0;
    for (int k = 1; k <= config.rollout; ++k) {
      const Image &cur = seq[win.start + k];
      PFrameInput in;
      in.height = H;
      in.width = W;
      in.current = g.input(image_to_tensor(cur));
      in.motion = estimate_motion(cur, newest, search);
      in.dpb = dpb;
      in.policy = config.policy;
      NoiseCoder coder(rng());
      PFrameOutput out = p_frame_forward(b, config.model, in, coder);
      Var d = mse(out.recon, in.current);
      Var term = add(scale(d, lambda), scale(coder.total_bits(), 1.0 / pixels));
      loss = loss.valid() ? add(loss, term) : term;
      bits += coder.total_bits().value()[0];
      mse_sum += d.value()[0];
      dpb.push_back({out.recon, out.feature, out.flow});
      if (static_cast<int>(dpb.size()) > config.model.n_ref) dpb.erase(dpb.begin());
      newest = tensor_to_image(out.recon.value());
    }
    const double lv = loss.value()[0];
    if (!std::isfinite(lv)) {
      throw NumericError("train_toy: non-finite loss at step " + std::to_string(step));
    }
    g.backward(loss);
    std::map<std::string, Tensor> grads;
    for (const auto &[name, var] : b.bound()) grads.emplace(name, g.grad(var));
    for (const auto &[name, t] : grads) {
      if (!t.all_finite()) {
        throw NumericError("train_toy: non-finite gradient at step " + std::to_string(step));
      }
    }
    adam.step(store, grads);
    TrainLogEntry e{step, lv, bits / (pixels * config.rollout), mse_sum / config.rollout};
    res.log.push_back(e);
    if (progress) progress(e);
  }
  store.snap_to_float();
  return res;
}

double smoothed_loss(const std::vector<TrainLogEntry> &log, bool last, int window) {
  if (log.empty() || window < 1) throw UsageError("smoothed_loss: empty log");
  const int n = static_cast<int>(log.size());
  const int w = std::min(window, n);
  const int begin = last ? n - w : 0;
  double s = 0.0;
  for (int i = begin; i < begin + w; ++i) s += log[i].loss;
  return s / w;
}

RolloutEval evaluate_rollout(const Model &model, const std::vector<Image> &frames,
                             DuplicationPolicy policy, double lambda) {
  if (frames.size() < 2) throw UsageError("evaluate_rollout: need at least two frames");
  DecodedBuffer dpb(model.config.n_ref);
  Frame intra;
  intra.index = 0;
  intra.pixels = frames[0];
  dpb.push(intra);
  RolloutEval ev;
  const double pixels = static_cast<double>(frames[0].pixel_count());
  for (std::size_t t = 1; t < frames.size(); ++t) {
    EncodedFrame e = encode_frame(frames[t], dpb, model, policy);
    double bits = 0.0;
    for (const auto &p : e.record.payloads) bits += 8.0 * p.size();
    double se = 0.0;
    for (std::size_t i = 0; i < frames[t].planes.size(); ++i) {
      double d = (static_cast<double>(frames[t].planes[i]) - e.recon.pixels.planes[i]) / 255.0;
      se += d * d;
    }
    ev.mse.push_back(se / frames[t].planes.size());
    ev.bpp.push_back(bits / pixels);
    ev.objective += lambda * ev.mse.back() + ev.bpp.back();
    dpb.push(std::move(e.recon));
  }
  return ev;
}

}  // namespace bnvc
