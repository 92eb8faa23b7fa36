#include "bnvc/loss_model.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "bnvc/error.h"

namespace bnvc {

double information_decay(double i0, double beta, int delta) {
  if (delta < 0) throw UsageError("information_decay: negative distance");
  return std::pow(beta, delta) * i0;
}

double frame_loss(const std::vector<RefLoss> &refs, double alpha, double beta) {
  if (refs.empty()) throw UsageError("frame_loss: no references");
  double s = 0.0;
  for (const RefLoss &r : refs) {
    if (r.distance < 1) throw UsageError("frame_loss: reference distance must be >= 1");
    s += r.loss * (1.0 - std::pow(beta, r.distance));
  }
  return (1.0 + alpha) / static_cast<double>(refs.size()) * s;
}

TotalLoss total_loss(const LossModelParams &p) {
  if (!(p.beta > 0.0 && p.beta < 1.0)) throw UsageError("total_loss: beta must be in (0, 1)");
  if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha)) throw UsageError("total_loss: alpha must be >= 0");
  if (p.n_ref < 1 || p.frames < 1) throw UsageError("total_loss: n_ref and frames must be >= 1");
  TotalLoss out;
  out.per_frame.push_back(p.l1);
  for (int t = 2; t <= p.frames; ++t) {
    // Decoded P-frames 1..t-1, at most n_ref of them retained.
    const int first = std::max(1, t - p.n_ref);
    const int m = t - first;
    std::vector<RefLoss> refs;
    for (int pos : reference_slots(m, p.n_ref, p.policy)) {
      const int frame = first + pos;
      refs.push_back({out.per_frame[frame - 1], t - frame});
    }
    out.per_frame.push_back(frame_loss(refs, p.alpha, p.beta));
  }
  for (double v : out.per_frame) out.total += v;
  return out;
}

namespace expanded {

std::vector<double> further_frames(double alpha, double beta, double l1) {
  const double a = alpha, b = beta;
  double L1f = l1;
  double L2f = (4 * L1f * (1 - b)) / 4 * (1 + a);
  double L3f = (3 * L1f * (1 - b * b) + L2f * (1 - b)) / 4 * (1 + a);
  double L4f = (2 * L1f * (1 - b * b * b) + L2f * (1 - b * b) + L3f * (1 - b)) / 4 * (1 + a);
  return {L1f, L2f, L3f, L4f};
}

std::vector<double> near_frames(double alpha, double beta, double l1) {
  const double a = alpha, b = beta;
  double L1n = l1;
  double L2n = (4 * L1n * (1 - b)) / 4 * (1 + a);
  double L3n = (L1n * (1 - b * b) + 3 * L2n * (1 - b)) / 4 * (1 + a);
  double L4n = (L1n * (1 - b * b * b) + L2n * (1 - b * b) + 2 * L3n * (1 - b)) / 4 * (1 + a);
  return {L1n, L2n, L3n, L4n};
}

double further_total(double alpha, double beta, double l1) {
  const double a = alpha, b = beta;
  return l1 * (1 + (1 - b) * (1 + a) + 3 * (1 - b * b) * (1 + a) / 4 +
               (1 - b) * (1 - b) * (1 + a) * (1 + a) / 4 +
               2 * (1 - b * b * b) * (1 + a) / 4 +
               (1 - b) * (1 - b * b) * (1 + a) * (1 + a) / 4 +
               3 * (1 - b) * (1 - b * b) * (1 + a) * (1 + a) / 16 +
               (1 - b) * (1 - b) * (1 - b) * (1 + a) * (1 + a) * (1 + a) / 16);
}

double near_total(double alpha, double beta, double l1) {
  const double a = alpha, b = beta;
  return l1 * (1 + (1 - b) * (1 + a) + (1 - b * b) * (1 + a) / 4 +
               3 * (1 - b) * (1 - b) * (1 + a) * (1 + a) / 4 +
               (1 - b * b * b) * (1 + a) / 4 +
               (1 - b) * (1 - b * b) * (1 + a) * (1 + a) / 4 +
               (1 - b) * (1 - b * b) * (1 + a) * (1 + a) / 8 +
               3 * (1 - b) * (1 - b) * (1 - b) * (1 + a) * (1 + a) * (1 + a) / 8);
}

}  // namespace expanded

ThresholdCoefficients threshold_coefficients(double beta) {
  const double b = beta;
  return {5 * (1 - b) * (1 - b) * (1 - b), -9 * b * b * b + 17 * b * b - 27 * b + 17,
          2 * b * b * b - 28 * b * b - 30 * b};
}

double threshold_alpha(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw UsageError("threshold_alpha: beta must be in (0, 1)");
  const auto [a, b, c] = threshold_coefficients(beta);
  const double disc = b * b - 4 * a * c;
  if (disc < 0.0) throw NumericError("threshold_alpha: negative discriminant");
  // (-b + sqrt(disc)) / 2a rewritten so neither branch subtracts nearly
  // equal quantities.
  const double sq = std::sqrt(disc);
  if (b >= 0.0) return (2 * c) / (-b - sq);
  return (-b + sq) / (2 * a);
}

double policy_gap(double alpha, double beta) {
  LossModelParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.policy = DuplicationPolicy::kFurther;
  const double further = total_loss(p).total;
  p.policy = DuplicationPolicy::kNear;
  return further - total_loss(p).total;
}

std::optional<double> critical_alpha_numeric(double beta, double alpha_max) {
  if (!(alpha_max > 0.0)) throw UsageError("critical_alpha_numeric: alpha_max must be > 0");
  const int steps = std::max(1, static_cast<int>(std::ceil(alpha_max / 1e-3)));
  double lo = alpha_max / steps;
  double glo = policy_gap(lo, beta);
  if (glo == 0.0) return lo;
  for (int i = 2; i <= steps; ++i) {
    const double hi = alpha_max * i / steps;
    const double ghi = policy_gap(hi, beta);
    if ((glo < 0.0) != (ghi < 0.0) || ghi == 0.0) {
      double a = lo, b = hi;
      while (b - a > 1e-12) {
        const double mid = 0.5 * (a + b);
        const double gm = policy_gap(mid, beta);
        if ((gm < 0.0) == (glo < 0.0) && gm != 0.0) {
          a = mid;
        } else {
          b = mid;
        }
      }
      return 0.5 * (a + b);
    }
    lo = hi;
    glo = ghi;
  }
  return std::nullopt;
}

std::vector<PolicyCell> policy_compare_grid(const std::vector<double> &alphas,
                                            const std::vector<double> &betas) {
  std::vector<double> as = alphas, bs = betas;
  std::sort(as.begin(), as.end());
  std::sort(bs.begin(), bs.end());
  std::vector<PolicyCell> out;
  for (double beta : bs) {
    const double thr = threshold_alpha(beta);
    for (double alpha : as) {
      LossModelParams p;
      p.alpha = alpha;
      p.beta = beta;
      p.policy = DuplicationPolicy::kNear;
      const double n = total_loss(p).total;
      p.policy = DuplicationPolicy::kFurther;
      const double f = total_loss(p).total;
      const bool near_wins = n < f;
      const bool predicted = alpha > 0.0 && alpha < thr;
      out.push_back({alpha, beta, n, f, f - n, thr, near_wins == predicted});
    }
  }
  return out;
}

double agreement_fraction(const std::vector<PolicyCell> &cells) {
  if (cells.empty()) return 1.0;
  std::size_t ok = 0;
  for (const PolicyCell &c : cells) ok += c.agrees;
  return static_cast<double>(ok) / cells.size();
}

void write_policy_csv(std::ostream &out, const std::vector<PolicyCell> &cells) {
  std::ostringstream s;
  s << std::setprecision(17);
  s << "alpha,beta,total_near,total_further,g,threshold,agrees\n";
  for (const PolicyCell &c : cells) {
    s << c.alpha << ',' << c.beta << ',' << c.total_near << ',' << c.total_further << ','
      << c.gap << ',' << c.threshold << ',' << (c.agrees ? 1 : 0) << '\n';
  }
  out << s.str();
}

}  // namespace bnvc
