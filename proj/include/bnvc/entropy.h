#ifndef BNVC_ENTROPY_H_
#define BNVC_ENTROPY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "bnvc/graph.h"

namespace bnvc {

constexpr int kCdfPrecisionBits = 16;
constexpr std::uint32_t kCdfTotal = 1u << kCdfPrecisionBits;
constexpr double kScaleFloor = 0.04;
constexpr double kTailScales = 16.0;
// Caps the support half-width so every bucket can hold frequency >= 1.
constexpr int kMaxHalfWidth = 4096;
// Lower bound on a bin probability inside the differentiable rate terms.
constexpr double kLikelihoodFloor = 1e-9;

// Integer frequency table over [s_min, s_max] totalling 2^16.
class QuantizedCdf {
 public:
  QuantizedCdf() = default;
  // Validates: every frequency >= 1 and the sum is exactly 2^16.
  QuantizedCdf(int s_min, std::vector<std::uint32_t> freq);

  static QuantizedCdf uniform(int s_min, int count);

  int s_min() const { return s_min_; }
  int s_max() const { return s_min_ + static_cast<int>(freq_.size()) - 1; }
  int symbol_count() const { return static_cast<int>(freq_.size()); }
  bool contains(int s) const { return s >= s_min() && s <= s_max(); }
  std::uint32_t freq(int s) const { return freq_[s - s_min_]; }
  // Cumulative frequency below bucket index i (0-based); cum(count) == 2^16.
  std::uint32_t cum(int i) const { return cum_[i]; }
  const std::vector<std::uint32_t> &frequencies() const { return freq_; }
  int clamp(int s) const;

  bool operator==(const QuantizedCdf &) const = default;

 private:
  int s_min_ = 0;
  std::vector<std::uint32_t> freq_;
  std::vector<std::uint32_t> cum_;
};

struct GaussianParams {
  double mean = 0.0;
  double scale = 1.0;
  double clamped_scale() const { return scale < kScaleFloor ? kScaleFloor : scale; }
};

struct LogisticParams {
  double loc = 0.0;
  double scale = 1.0;
  double clamped_scale() const { return scale < kScaleFloor ? kScaleFloor : scale; }
};

struct Support {
  int s_min;
  int s_max;
};

// [round(mean - 16 scale), round(mean + 16 scale)], at least one symbol each
// side of the rounded mean, half-width capped at kMaxHalfWidth.
Support default_support(double mean, double scale);

// Bin masses P(s) for s in `support`, tail mass folded into the end buckets.
std::vector<double> gaussian_bin_masses(const GaussianParams &p, Support support);
std::vector<double> logistic_bin_masses(const LogisticParams &p, Support support);

// Rounds masses to 16-bit frequencies (minimum 1) and corrects the total on
// the largest bucket; if that bucket cannot absorb an excess, the remainder
// is taken from the next largest buckets in turn.
QuantizedCdf quantize_masses(int s_min, const std::vector<double> &masses);

QuantizedCdf build_gaussian_cdf(const GaussianParams &p, Support support);
QuantizedCdf build_gaussian_cdf(const GaussianParams &p);
QuantizedCdf build_logistic_cdf(const LogisticParams &p, Support support);
QuantizedCdf build_logistic_cdf(const LogisticParams &p);

// 32-bit range coder: 64-bit low register with carry propagation into the
// emitted bytes, range kept in [2^24, 2^32), exact 64-bit interval
// partition, 4-byte flush. Output bytes are most significant first.
class RangeEncoder {
 public:
  void encode(int symbol, const QuantizedCdf &cdf);
  std::vector<std::uint8_t> finish();

 private:
  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::vector<std::uint8_t> out_;
  bool finished_ = false;
};

class RangeDecoder {
 public:
  // Throws CorruptionError when the payload is shorter than the flush.
  explicit RangeDecoder(std::span<const std::uint8_t> payload);
  int decode(const QuantizedCdf &cdf);
  // Throws CorruptionError unless every byte was consumed.
  void finish() const;

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
};

std::vector<std::uint8_t> range_encode(std::span<const int> symbols,
                                       std::span<const QuantizedCdf> cdfs);
std::vector<int> range_decode(std::span<const std::uint8_t> payload,
                              std::span<const QuantizedCdf> cdfs,
                              std::size_t count);

// Ideal code length sum(-log2 freq/2^16) of integer symbols under the tables
// the coder uses.
double ideal_bits(std::span<const int> symbols, std::span<const QuantizedCdf> cdfs);

// Differentiable rate terms (scalar bits) for continuous, noise-relaxed
// values. `scale` is clamped at kScaleFloor; likelihoods at kLikelihoodFloor.
Var gaussian_bits(Var values, Var mean, Var scale);
// `loc` and `log_scale` hold one entry per channel of `values` (C x H x W).
Var logistic_bits(Var values, Var loc, Var log_scale);

// Scalar bin probability helpers; shared by the rate terms and tests.
double gaussian_bin_probability(double value, double mean, double scale);
double logistic_bin_probability(double value, double loc, double scale);

}  // namespace bnvc

#endif  // BNVC_ENTROPY_H_
