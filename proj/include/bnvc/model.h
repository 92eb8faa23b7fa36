#ifndef BNVC_MODEL_H_
#define BNVC_MODEL_H_

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "json.hpp"

#include "bnvc/butterfly.h"
#include "bnvc/dpb.h"
#include "bnvc/entropy.h"
#include "bnvc/frame.h"
#include "bnvc/graph.h"
#include "bnvc/params.h"

namespace bnvc {

struct ModelConfig {
  Widths widths;
  int mv_latent = 16;
  int mv_hyper = 8;
  int ctx_latent = 32;
  int ctx_hyper = 16;
  int n_ref = 4;
  FusionMode fusion = FusionMode::kButterfly;

  // Reduced widths for fast training on small frames.
  static ModelConfig toy();

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json &j);
  bool operator==(const ModelConfig &) const = default;
};

// The four entropy-coded streams of a P-frame, in coding order.
enum Stream : int { kMvHyper = 0, kMvMain = 1, kCtxHyper = 2, kCtxMain = 3 };
constexpr int kStreamCount = 4;

// Turns analysis latents into their quantized stand-ins. On the decoding
// side the latent argument is invalid and the value comes from the payload.
class LatentCoder {
 public:
  virtual ~LatentCoder() = default;
  // Per-channel logistic prior; `shape` is the latent shape C x h x w.
  virtual Var factorized(int stream, Var z, Var loc, Var log_scale, const Shape &shape) = 0;
  // Gaussian prior with per-element mean and scale.
  virtual Var conditional(int stream, Var y, Var mean, Var scale) = 0;
};

// Training relaxation: additive U(-0.5, 0.5) noise, differentiable bits.
class NoiseCoder : public LatentCoder {
 public:
  explicit NoiseCoder(std::uint64_t seed) : rng_(seed) {}

  Var factorized(int stream, Var z, Var loc, Var log_scale, const Shape &shape) override;
  Var conditional(int stream, Var y, Var mean, Var scale) override;

  // Sum of all rate terms recorded so far (scalar); invalid if none.
  Var total_bits() const { return total_; }

 private:
  Var noisy(Var v);
  void accumulate(Var bits);

  std::mt19937_64 rng_;
  Var total_;
};

// Symbols are coded relative to the predicted location: s = round(y - mean),
// reconstruction s + mean, clamped into the table support.
class RoundingEncoder : public LatentCoder {
 public:
  Var factorized(int stream, Var z, Var loc, Var log_scale, const Shape &shape) override;
  Var conditional(int stream, Var y, Var mean, Var scale) override;

  std::array<std::vector<std::uint8_t>, kStreamCount> payloads() const;
  // Sum of -log2 p over every coded symbol.
  double ideal_bits() const;
  // Symbols moved into the support by clamping.
  std::size_t clamped_count() const { return clamped_; }

 private:
  std::array<std::vector<int>, kStreamCount> symbols_;
  std::array<std::vector<QuantizedCdf>, kStreamCount> cdfs_;
  std::size_t clamped_ = 0;
};

class PayloadDecoder : public LatentCoder {
 public:
  explicit PayloadDecoder(const std::array<std::vector<std::uint8_t>, kStreamCount> &payloads)
    : payloads_(payloads) {}

  Var factorized(int stream, Var z, Var loc, Var log_scale, const Shape &shape) override;
  Var conditional(int stream, Var y, Var mean, Var scale) override;

 private:
  const std::array<std::vector<std::uint8_t>, kStreamCount> &payloads_;
};

std::vector<QuantizedCdf> factorized_cdfs(const Tensor &log_scale, const Shape &shape);
std::vector<QuantizedCdf> conditional_cdfs(const Tensor &scale);

// One decoded-buffer entry as seen by the network.
struct RefState {
  Var pixels;   // 3 x H x W in [0, 1]
  Var feature;  // C0 x H x W; invalid -> extracted from pixels
  Var flow;     // decoded motion to the previous entry; invalid for intra
};

struct PFrameInput {
  Var current;         // 3 x H x W; invalid when decoding
  MotionField motion;  // block-matching estimate; empty when decoding
  std::vector<RefState> dpb;  // oldest -> newest
  DuplicationPolicy policy = DuplicationPolicy::kNear;
  int height = 0;
  int width = 0;
};

struct PFrameOutput {
  Var recon;    // continuous reconstruction 3 x H x W
  Var feature;  // F for the decoded buffer
  Var flow;     // decoded motion
  ContextPyramid context;
};

Var extract_features(Binder &b, const ModelConfig &cfg, Var pixels);

// Motion autoencoder; `motion` is ignored (may be invalid) when decoding.
Var code_motion(Binder &b, const ModelConfig &cfg, Var motion, int height, int width,
                LatentCoder &coder);

PFrameOutput p_frame_forward(Binder &b, const ModelConfig &cfg, const PFrameInput &in,
                             LatentCoder &coder);

// Creates every parameter with seeded initial values (float32-snapped).
ParamStore init_model(const ModelConfig &cfg, std::uint64_t seed);

// Latent extents for an H x W frame.
int half_extent(int n);

}  // namespace bnvc

#endif  // BNVC_MODEL_H_
