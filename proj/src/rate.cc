#include <cmath>
#include <numbers>

#include "bnvc/entropy.h"
#include "bnvc/error.h"

namespace bnvc {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double phi(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
double pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
double dsigmoid(double x) {
  double s = sigmoid(x);
  return s * (1.0 - s);
}

// Bin mass and its partials w.r.t. distance v = |value - center| and scale.
struct BinMass {
  double p, dp_dv, dp_ds;
};

BinMass gaussian_mass(double v, double s) {
  double u = (0.5 - v) / s, l = (-0.5 - v) / s;
  BinMass m;
  m.p = phi(u) - phi(l);
  m.dp_dv = (pdf(l) - pdf(u)) / s;
  m.dp_ds = -(pdf(u) * u - pdf(l) * l) / s;
  return m;
}

BinMass logistic_mass(double v, double s) {
  double u = (0.5 - v) / s, l = (-0.5 - v) / s;
  BinMass m;
  m.p = sigmoid(u) - sigmoid(l);
  m.dp_dv = (dsigmoid(l) - dsigmoid(u)) / s;
  m.dp_ds = -(dsigmoid(u) * u - dsigmoid(l) * l) / s;
  return m;
}

}  // namespace

double gaussian_bin_probability(double value, double mean, double scale) {
  double s = scale < kScaleFloor ? kScaleFloor : scale;
  return gaussian_mass(std::abs(value - mean), s).p;
}

double logistic_bin_probability(double value, double loc, double scale) {
  double s = scale < kScaleFloor ? kScaleFloor : scale;
  return logistic_mass(std::abs(value - loc), s).p;
}

Var gaussian_bits(Var values, Var mean, Var scale) {
  const Tensor &y = values.value();
  require_same_shape(y, mean.value(), "gaussian_bits mean");
  require_same_shape(y, scale.value(), "gaussian_bits scale");
  const Tensor &mu = mean.value();
  const Tensor &sc = scale.value();
  double bits = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double s = sc[i] < kScaleFloor ? kScaleFloor : sc[i];
    double p = gaussian_mass(std::abs(y[i] - mu[i]), s).p;
    bits -= std::log2(p < kLikelihoodFloor ? kLikelihoodFloor : p);
  }
  if (!std::isfinite(bits)) throw NumericError("gaussian_bits: non-finite rate");
  return values.graph->record(
      Tensor(Shape{}, bits), {values, mean, scale},
      [values, mean, scale](Graph &g, int self) {
        const double gout = g.out_grad(self)[0];
        const Tensor &y = g.value(values);
        const Tensor &mu = g.value(mean);
        const Tensor &sc = g.value(scale);
        std::vector<double> *dy = g.needs_grad(values) ? &g.grad_slot(values) : nullptr;
        std::vector<double> *dm = g.needs_grad(mean) ? &g.grad_slot(mean) : nullptr;
        std::vector<double> *ds = g.needs_grad(scale) ? &g.grad_slot(scale) : nullptr;
        for (std::size_t i = 0; i < y.size(); ++i) {
          const bool clamped = sc[i] < kScaleFloor;
          double s = clamped ? kScaleFloor : sc[i];
          double d = y[i] - mu[i];
          BinMass m = gaussian_mass(std::abs(d), s);
          if (m.p < kLikelihoodFloor) continue;
          double dbits_dp = -gout / (m.p * std::numbers::ln2);
          double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
          double gd = dbits_dp * m.dp_dv * sgn;
          if (dy) (*dy)[i] += gd;
          if (dm) (*dm)[i] -= gd;
          if (ds && !clamped) (*ds)[i] += dbits_dp * m.dp_ds;
        }
      });
}

Var logistic_bits(Var values, Var loc, Var log_scale) {
  const Tensor &z = values.value();
  require_rank(z, 3, "logistic_bits values");
  const int c = z.dim(0);
  const std::size_t plane = static_cast<std::size_t>(z.dim(1)) * z.dim(2);
  if (loc.value().size() != static_cast<std::size_t>(c) ||
      log_scale.value().size() != static_cast<std::size_t>(c)) {
    throw ShapeError("logistic_bits: per-channel parameters must have " +
                     std::to_string(c) + " entries");
  }
  const Tensor &lc = loc.value();
  const Tensor &ls = log_scale.value();
  double bits = 0.0;
  for (int ch = 0; ch < c; ++ch) {
    double s = std::exp(ls[ch]);
    if (s < kScaleFloor) s = kScaleFloor;
    for (std::size_t i = 0; i < plane; ++i) {
      double p = logistic_mass(std::abs(z[ch * plane + i] - lc[ch]), s).p;
      bits -= std::log2(p < kLikelihoodFloor ? kLikelihoodFloor : p);
    }
  }
  if (!std::isfinite(bits)) throw NumericError("logistic_bits: non-finite rate");
  return values.graph->record(
      Tensor(Shape{}, bits), {values, loc, log_scale},
      [values, loc, log_scale, c, plane](Graph &g, int self) {
        const double gout = g.out_grad(self)[0];
        const Tensor &z = g.value(values);
        const Tensor &lc = g.value(loc);
        const Tensor &ls = g.value(log_scale);
        std::vector<double> *dz = g.needs_grad(values) ? &g.grad_slot(values) : nullptr;
        std::vector<double> *dl = g.needs_grad(loc) ? &g.grad_slot(loc) : nullptr;
        std::vector<double> *ds = g.needs_grad(log_scale) ? &g.grad_slot(log_scale) : nullptr;
        for (int ch = 0; ch < c; ++ch) {
          double raw = std::exp(ls[ch]);
          const bool clamped = raw < kScaleFloor;
          double s = clamped ? kScaleFloor : raw;
          for (std::size_t i = 0; i < plane; ++i) {
            std::size_t k = ch * plane + i;
            double d = z[k] - lc[ch];
            BinMass m = logistic_mass(std::abs(d), s);
            if (m.p < kLikelihoodFloor) continue;
            double dbits_dp = -gout / (m.p * std::numbers::ln2);
            double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            double gd = dbits_dp * m.dp_dv * sgn;
            if (dz) (*dz)[k] += gd;
            if (dl) (*dl)[ch] -= gd;
            if (ds && !clamped) (*ds)[ch] += dbits_dp * m.dp_ds * raw;
          }
        }
      });
}

}  // namespace bnvc
