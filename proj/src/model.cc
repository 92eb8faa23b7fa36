#include "bnvc/model.h"

#include <cmath>

#include "bnvc/error.h"
#include "bnvc/layers.h"
#include "bnvc/motion.h"

namespace bnvc {

ModelConfig ModelConfig::toy() {
  ModelConfig c;
  c.widths = Widths{{8, 12, 16}};
  c.mv_latent = 8;
  c.mv_hyper = 4;
  c.ctx_latent = 16;
  c.ctx_hyper = 8;
  return c;
}

nlohmann::json ModelConfig::to_json() const {
  return {{"widths", widths.c},       {"mv_latent", mv_latent},
          {"mv_hyper", mv_hyper},     {"ctx_latent", ctx_latent},
          {"ctx_hyper", ctx_hyper},   {"n_ref", n_ref},
          {"fusion", to_string(fusion)}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json &j) {
  try {
    ModelConfig c;
    c.widths.c = j.at("widths").get<std::array<int, 3>>();
    c.mv_latent = j.at("mv_latent").get<int>();
    c.mv_hyper = j.at("mv_hyper").get<int>();
    c.ctx_latent = j.at("ctx_latent").get<int>();
    c.ctx_hyper = j.at("ctx_hyper").get<int>();
    c.n_ref = j.at("n_ref").get<int>();
    c.fusion = parse_fusion_mode(j.at("fusion").get<std::string>());
    for (int w : c.widths.c) {
      if (w < 1) throw CorruptionError("model config: non-positive width");
    }
    if (c.n_ref < 1 || c.mv_latent < 1 || c.mv_hyper < 1 || c.ctx_latent < 1 ||
        c.ctx_hyper < 1) {
      throw CorruptionError("model config: non-positive size");
    }
    return c;
  } catch (const nlohmann::json::exception &e) {
    throw CorruptionError(std::string("model config: ") + e.what());
  } catch (const UsageError &e) {
    throw CorruptionError(std::string("model config: ") + e.what());
  }
}

int half_extent(int n) { return (n + 1) / 2; }

// ---------------------------------------------------------------------------
// Latent coders

Var NoiseCoder::noisy(Var v) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Tensor noise(v.shape());
  for (double &x : noise.data()) x = u(rng_);
  return add(v, v.graph->input(std::move(noise)));
}

void NoiseCoder::accumulate(Var bits) { total_ = total_.valid() ? add(total_, bits) : bits; }

Var NoiseCoder::factorized(int, Var z, Var loc, Var log_scale, const Shape &) {
  if (!z.valid()) throw UsageError("NoiseCoder needs analysis latents");
  Var zq = noisy(z);
  accumulate(logistic_bits(zq, loc, log_scale));
  return zq;
}

Var NoiseCoder::conditional(int, Var y, Var mean, Var scale) {
  if (!y.valid()) throw UsageError("NoiseCoder needs analysis latents");
  Var yq = noisy(y);
  accumulate(gaussian_bits(yq, mean, scale));
  return yq;
}

std::vector<QuantizedCdf> factorized_cdfs(const Tensor &log_scale, const Shape &shape) {
  if (shape.size() != 3 || static_cast<int>(log_scale.size()) != shape[0]) {
    throw ShapeError("factorized_cdfs: parameter/shape mismatch");
  }
  const std::size_t plane = static_cast<std::size_t>(shape[1]) * shape[2];
  std::vector<QuantizedCdf> out;
  out.reserve(shape[0] * plane);
  for (int c = 0; c < shape[0]; ++c) {
    QuantizedCdf cdf = build_logistic_cdf({0.0, std::exp(log_scale[c])});
    out.insert(out.end(), plane, cdf);
  }
  return out;
}

std::vector<QuantizedCdf> conditional_cdfs(const Tensor &scale) {
  std::vector<QuantizedCdf> out;
  out.reserve(scale.size());
  for (double s : scale.data()) out.push_back(build_gaussian_cdf({0.0, s}));
  return out;
}

namespace {

// Per-element location for the factorized prior: the channel's loc.
std::vector<double> channel_locations(const Tensor &loc, const Shape &shape) {
  const std::size_t plane = static_cast<std::size_t>(shape[1]) * shape[2];
  std::vector<double> out;
  out.reserve(shape[0] * plane);
  for (int c = 0; c < shape[0]; ++c) out.insert(out.end(), plane, loc[c]);
  return out;
}

Var from_symbols(Graph &g, const Shape &shape, const std::vector<int> &symbols,
                 std::span<const double> centers) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = symbols[i] + centers[i];
  return g.input(std::move(t));
}

}  // namespace

Var RoundingEncoder::factorized(int stream, Var z, Var loc, Var log_scale,
                                const Shape &shape) {
  if (!z.valid()) throw UsageError("RoundingEncoder needs analysis latents");
  if (z.shape() != shape) throw ShapeError("hyper latent shape mismatch");
  std::vector<QuantizedCdf> cdfs = factorized_cdfs(log_scale.value(), shape);
  std::vector<double> centers = channel_locations(loc.value(), shape);
  std::vector<int> symbols(z.value().size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    int s = static_cast<int>(std::nearbyint(z.value()[i] - centers[i]));
    int c = cdfs[i].clamp(s);
    clamped_ += (c != s);
    symbols[i] = c;
  }
  Var out = from_symbols(*z.graph, shape, symbols, centers);
  symbols_[stream].insert(symbols_[stream].end(), symbols.begin(), symbols.end());
  cdfs_[stream].insert(cdfs_[stream].end(), cdfs.begin(), cdfs.end());
  return out;
}

Var RoundingEncoder::conditional(int stream, Var y, Var mean, Var scale) {
  if (!y.valid()) throw UsageError("RoundingEncoder needs analysis latents");
  require_same_shape(y.value(), mean.value(), "conditional latent");
  std::vector<QuantizedCdf> cdfs = conditional_cdfs(scale.value());
  const Tensor &mu = mean.value();
  std::vector<int> symbols(mu.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    int s = static_cast<int>(std::nearbyint(y.value()[i] - mu[i]));
    int c = cdfs[i].clamp(s);
    clamped_ += (c != s);
    symbols[i] = c;
  }
  Var out = from_symbols(*y.graph, mu.shape(), symbols, mu.data());
  symbols_[stream].insert(symbols_[stream].end(), symbols.begin(), symbols.end());
  cdfs_[stream].insert(cdfs_[stream].end(), cdfs.begin(), cdfs.end());
  return out;
}

std::array<std::vector<std::uint8_t>, kStreamCount> RoundingEncoder::payloads() const {
  std::array<std::vector<std::uint8_t>, kStreamCount> out;
  for (int s = 0; s < kStreamCount; ++s) out[s] = range_encode(symbols_[s], cdfs_[s]);
  return out;
}

double RoundingEncoder::ideal_bits() const {
  double bits = 0.0;
  for (int s = 0; s < kStreamCount; ++s) bits += bnvc::ideal_bits(symbols_[s], cdfs_[s]);
  return bits;
}

Var PayloadDecoder::factorized(int stream, Var, Var loc, Var log_scale, const Shape &shape) {
  std::vector<QuantizedCdf> cdfs = factorized_cdfs(log_scale.value(), shape);
  std::vector<double> centers = channel_locations(loc.value(), shape);
  std::vector<int> symbols = range_decode(payloads_[stream], cdfs, cdfs.size());
  return from_symbols(*loc.graph, shape, symbols, centers);
}

Var PayloadDecoder::conditional(int stream, Var, Var mean, Var scale) {
  std::vector<QuantizedCdf> cdfs = conditional_cdfs(scale.value());
  std::vector<int> symbols = range_decode(payloads_[stream], cdfs, cdfs.size());
  return from_symbols(*mean.graph, mean.shape(), symbols, mean.value().data());
}

// ---------------------------------------------------------------------------
// Network

Var extract_features(Binder &b, const ModelConfig &cfg, Var pixels) {
  const int c0 = cfg.widths.at(0);
  return conv(b, "feat.1", leaky_relu(conv(b, "feat.0", pixels, c0)), c0);
}

namespace {

struct GaussianHead {
  Var mean;
  Var scale;
};

GaussianHead split_head(Var params, int channels) {
  return {slice_channels(params, 0, channels),
          softplus(slice_channels(params, channels, 2 * channels))};
}

}  // namespace

Var code_motion(Binder &b, const ModelConfig &cfg, Var motion, int height, int width,
                LatentCoder &coder) {
  const int h2 = half_extent(height), w2 = half_extent(width);
  const int h4 = half_extent(h2), w4 = half_extent(w2);
  const int h8 = half_extent(h4), w8 = half_extent(w4);
  const int m = cfg.mv_latent;
  Var y, z;
  if (motion.valid()) {
    Var v = scale(motion, 0.25);
    y = conv_out(b, "mv.enc.1", leaky_relu(conv(b, "mv.enc.0", v, m, 2)), m, 2);
    z = conv_out(b, "mv.hyp.enc", y, cfg.mv_hyper, 2);
  }
  Var loc = b.get("mv.prior.loc", {cfg.mv_hyper}, Init::zero());
  Var log_scale = b.get("mv.prior.log_scale", {cfg.mv_hyper}, Init::zero());
  Var zq = coder.factorized(kMvHyper, z, loc, log_scale, {cfg.mv_hyper, h8, w8});
  Var hd = leaky_relu(conv(b, "mv.hyp.dec.0", bilinear_resize(zq, h4, w4), m));
  GaussianHead head = split_head(conv_out(b, "mv.hyp.dec.1", hd, 2 * m), m);
  Var yq = coder.conditional(kMvMain, y, head.mean, head.scale);
  Var d = leaky_relu(conv(b, "mv.dec.0", bilinear_resize(yq, h2, w2), m));
  return scale(conv_out(b, "mv.dec.1", bilinear_resize(d, height, width), 2), 4.0);
}

PFrameOutput p_frame_forward(Binder &b, const ModelConfig &cfg, const PFrameInput &in,
                             LatentCoder &coder) {
  const int H = in.height, W = in.width;
  if (H <= 0 || W <= 0 || H % 4 != 0 || W % 4 != 0) {
    throw UsageError("frame size " + std::to_string(W) + "x" + std::to_string(H) +
                     " not divisible by 4");
  }
  const int m = static_cast<int>(in.dpb.size());
  if (m == 0) throw UsageError("p_frame_forward: empty decoded buffer");
  Graph &g = b.graph();
  const Widths &w = cfg.widths;

  Var motion;
  if (in.current.valid()) {
    if (in.motion.shape() != Shape{2, H, W}) throw ShapeError("motion field shape mismatch");
    motion = g.input(in.motion);
  }
  PFrameOutput out;
  out.flow = code_motion(b, cfg, motion, H, W, coder);

  std::vector<int> slots = reference_slots(m, cfg.n_ref, in.policy);
  int oldest = m - 1;
  for (int p : slots) oldest = std::min(oldest, p);

  // Cumulative flow from the current frame to each buffer position.
  std::vector<Var> cumulative(m);
  cumulative[m - 1] = out.flow;
  for (int p = m - 2; p >= oldest; --p) {
    Var step = in.dpb[p + 1].flow;
    if (!step.valid()) throw UsageError("decoded buffer entry without motion");
    cumulative[p] = compose_flows(cumulative[p + 1], step);
  }

  std::vector<Var> warped_at(m);
  std::vector<Var> warped;
  for (int p : slots) {
    if (!warped_at[p].valid()) {
      const RefState &r = in.dpb[p];
      Var f = r.feature.valid() ? r.feature : extract_features(b, cfg, r.pixels);
      warped_at[p] = warp_bilinear(f, cumulative[p]);
    }
    warped.push_back(warped_at[p]);
  }
  out.context = butterfly_forward(b, warped, cfg.fusion, w);
  const Var &c0 = out.context.levels[0];
  const Var &c1 = out.context.levels[1];
  const Var &c2 = out.context.levels[2];

  const int L = cfg.ctx_latent;
  Var y, z;
  if (in.current.valid()) {
    Var e0 = leaky_relu(conv(b, "ctx.enc.0", concat_channels({in.current, c0}), w.at(1), 2));
    Var e1 = leaky_relu(conv(b, "ctx.enc.1", concat_channels({e0, c1}), w.at(2), 2));
    y = conv_out(b, "ctx.enc.2", concat_channels({e1, c2}), L);
    z = conv_out(b, "ctx.hyp.enc", y, cfg.ctx_hyper, 2);
  }
  const int h4 = H / 4, w4 = W / 4;
  Var loc = b.get("ctx.prior.loc", {cfg.ctx_hyper}, Init::zero());
  Var log_scale = b.get("ctx.prior.log_scale", {cfg.ctx_hyper}, Init::zero());
  Var zq = coder.factorized(kCtxHyper, z, loc, log_scale,
                            {cfg.ctx_hyper, half_extent(h4), half_extent(w4)});
  Var hd = leaky_relu(conv(b, "ctx.hyp.dec.0", bilinear_resize(zq, h4, w4), w.at(2)));
  Var hp = leaky_relu(conv(b, "ctx.hyp.dec.1", concat_channels({hd, c2}), w.at(2)));
  GaussianHead head = split_head(conv_out(b, "ctx.hyp.dec.2", hp, 2 * L), L);
  Var yq = coder.conditional(kCtxMain, y, head.mean, head.scale);

  Var d0 = leaky_relu(conv(b, "ctx.dec.0", concat_channels({yq, c2}), w.at(2)));
  Var d1 = leaky_relu(conv(b, "ctx.dec.1",
                           concat_channels({bilinear_resize(d0, H / 2, W / 2), c1}), w.at(1)));
  Var fhat = conv(b, "ctx.dec.2", bilinear_resize(d1, H, W), w.at(0));

  Var h = leaky_relu(conv(b, "gen.in", concat_channels({fhat, c0}), w.at(0)));
  h = res_block(b, "gen.res.0", h);
  out.feature = res_block(b, "gen.res.1", h);
  out.recon = conv_out(b, "gen.out", out.feature, 3);
  return out;
}

ParamStore init_model(const ModelConfig &cfg, std::uint64_t seed) {
  ParamStore store(seed);
  Graph g(Graph::Mode::kInference);
  Binder b(g, store, false);
  const int n = 16;
  PFrameInput in;
  in.height = in.width = n;
  in.current = g.input(Tensor({3, n, n}, 0.0));
  in.motion = MotionField({2, n, n}, 0.0);
  in.dpb.push_back({g.input(Tensor({3, n, n}, 0.0)), Var{}, Var{}});
  NoiseCoder coder(seed);
  p_frame_forward(b, cfg, in, coder);
  store.snap_to_float();
  store.freeze();
  return store;
}

}  // namespace bnvc
