#ifndef BNVC_TRAIN_H_
#define BNVC_TRAIN_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bnvc/codec.h"
#include "bnvc/synth.h"

namespace bnvc {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 0.0;  // global gradient norm limit; 0 disables
};

// Adam over the tensors of a ParamStore, moments keyed by name.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : cfg_(config) {}
  // `grads` maps parameter names to gradients of their shapes.
  void step(ParamStore &store, const std::map<std::string, Tensor> &grads);
  int steps() const { return t_; }

 private:
  AdamConfig cfg_;
  int t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

struct TrainConfig {
  ModelConfig model = ModelConfig::toy();
  int lambda_index = 2;
  int steps = 2000;
  std::uint64_t seed = 7;
  int rollout = 4;        // P-frames after each intra frame
  int start_stride = 4;   // rollout starts at multiples of this
  DuplicationPolicy policy = DuplicationPolicy::kNear;
  AdamConfig adam;
};

struct TrainLogEntry {
  int step = 0;
  double loss = 0.0;        // sum over the rollout of lambda * mse + bpp
  double bpp = 0.0;         // mean estimated bits per pixel of a P-frame
  double mse = 0.0;         // mean P-frame MSE on the [0, 1] scale
};

struct TrainResult {
  Model model;
  std::vector<TrainLogEntry> log;
};

using ProgressFn = std::function<void(const TrainLogEntry &)>;

// End-to-end training over I + `rollout` P-frame windows with noise-relaxed
// quantization and backpropagation through the whole window. Throws
// NumericError naming the step on a non-finite loss.
TrainResult train_toy(const TrainConfig &config, const std::vector<std::vector<Image>> &dataset,
                      const ProgressFn &progress = {});

// Mean of the first and last `window` logged losses.
double smoothed_loss(const std::vector<TrainLogEntry> &log, bool last, int window = 100);

struct RolloutEval {
  std::vector<double> mse;   // per P-frame, [0, 1] scale, 8-bit reconstructions
  std::vector<double> bpp;   // per P-frame, actual payload bits / pixels
  double objective = 0.0;    // sum of lambda * mse + bpp
};

// Codes `frames[0]` as intra and the rest as P-frames with the real coder.
RolloutEval evaluate_rollout(const Model &model, const std::vector<Image> &frames,
                             DuplicationPolicy policy, double lambda);

}  // namespace bnvc

#endif  // BNVC_TRAIN_H_
