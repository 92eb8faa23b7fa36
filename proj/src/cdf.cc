#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "bnvc/entropy.h"
#include "bnvc/error.h"

namespace bnvc {

namespace {

// Upper-tail functions keep precision for bins far from the center.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }
double logistic_cdf(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logistic_sf(double x) { return 1.0 / (1.0 + std::exp(x)); }

template <typename Cdf, typename Sf>
std::vector<double> bin_masses(double center, double scale, Support support,
                               Cdf cdf, Sf sf) {
  if (support.s_max < support.s_min) throw UsageError("empty CDF support");
  std::vector<double> m;
  m.reserve(support.s_max - support.s_min + 1);
  for (int s = support.s_min; s <= support.s_max; ++s) {
    double lo = (s - 0.5 - center) / scale;
    double hi = (s + 0.5 - center) / scale;
    const bool first = s == support.s_min, last = s == support.s_max;
    double p;
    if (s - center >= 0.0) {
      double a = first ? 1.0 : sf(lo);
      double b = last ? 0.0 : sf(hi);
      p = a - b;
    } else {
      double a = last ? 1.0 : cdf(hi);
      double b = first ? 0.0 : cdf(lo);
      p = a - b;
    }
    m.push_back(p);
  }
  return m;
}

}  // namespace

QuantizedCdf::QuantizedCdf(int s_min, std::vector<std::uint32_t> freq)
  : s_min_(s_min), freq_(std::move(freq)) {
  if (freq_.empty()) throw UsageError("empty CDF support");
  cum_.resize(freq_.size() + 1);
  cum_[0] = 0;
  for (std::size_t i = 0; i < freq_.size(); ++i) {
    if (freq_[i] < 1) throw UsageError("CDF bucket with zero frequency");
    cum_[i + 1] = cum_[i] + freq_[i];
  }
  if (cum_.back() != kCdfTotal) {
    throw UsageError("CDF frequencies sum to " + std::to_string(cum_.back()));
  }
}

QuantizedCdf QuantizedCdf::uniform(int s_min, int count) {
  if (count < 1 || kCdfTotal % static_cast<std::uint32_t>(count) != 0) {
    throw UsageError("uniform CDF needs a power-of-two symbol count");
  }
  return QuantizedCdf(s_min, std::vector<std::uint32_t>(count, kCdfTotal / count));
}

int QuantizedCdf::clamp(int s) const { return std::clamp(s, s_min(), s_max()); }

Support default_support(double mean, double scale) {
  double half = std::ceil(kTailScales * scale);
  half = std::clamp(half, 1.0, static_cast<double>(kMaxHalfWidth));
  int c = static_cast<int>(std::lround(mean));
  int h = static_cast<int>(half);
  return {c - h, c + h};
}

std::vector<double> gaussian_bin_masses(const GaussianParams &p, Support support) {
  return bin_masses(p.mean, p.clamped_scale(), support, normal_cdf, normal_sf);
}

std::vector<double> logistic_bin_masses(const LogisticParams &p, Support support) {
  return bin_masses(p.loc, p.clamped_scale(), support, logistic_cdf, logistic_sf);
}

QuantizedCdf quantize_masses(int s_min, const std::vector<double> &masses) {
  if (masses.empty()) throw UsageError("empty CDF support");
  if (masses.size() > kCdfTotal) throw UsageError("CDF support too large");
  std::vector<std::int64_t> f(masses.size());
  std::int64_t total = 0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    double q = std::floor(masses[i] * kCdfTotal + 0.5);
    f[i] = std::max<std::int64_t>(1, static_cast<std::int64_t>(q));
    total += f[i];
  }
  std::int64_t diff = static_cast<std::int64_t>(kCdfTotal) - total;
  auto largest = [&f]() {
    return static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
  };
  if (diff >= 0) {
    f[largest()] += diff;
  } else {
    while (diff < 0) {
      std::size_t i = largest();
      std::int64_t take = std::min(-diff, f[i] - 1);
      if (take <= 0) throw UsageError("CDF support too large to quantize");
      f[i] -= take;
      diff += take;
    }
  }
  std::vector<std::uint32_t> out(f.begin(), f.end());
  return QuantizedCdf(s_min, std::move(out));
}

QuantizedCdf build_gaussian_cdf(const GaussianParams &p, Support support) {
  return quantize_masses(support.s_min, gaussian_bin_masses(p, support));
}

QuantizedCdf build_gaussian_cdf(const GaussianParams &p) {
  return build_gaussian_cdf(p, default_support(p.mean, p.clamped_scale()));
}

QuantizedCdf build_logistic_cdf(const LogisticParams &p, Support support) {
  return quantize_masses(support.s_min, logistic_bin_masses(p, support));
}

QuantizedCdf build_logistic_cdf(const LogisticParams &p) {
  return build_logistic_cdf(p, default_support(p.loc, p.clamped_scale()));
}

double ideal_bits(std::span<const int> symbols, std::span<const QuantizedCdf> cdfs) {
  if (symbols.size() != cdfs.size()) {
    throw UsageError("ideal_bits: symbol/CDF count mismatch");
  }
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (!cdfs[i].contains(symbols[i])) {
      throw UsageError("ideal_bits: symbol outside CDF support");
    }
    bits -= std::log2(static_cast<double>(cdfs[i].freq(symbols[i])) / kCdfTotal);
  }
  return bits;
}

}  // namespace bnvc
