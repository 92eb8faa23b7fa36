#ifndef BNVC_LOSS_MODEL_H_
#define BNVC_LOSS_MODEL_H_

#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "bnvc/dpb.h"

namespace bnvc {

// Error-accumulation model of a low-delay intra period: every P-frame loses
// a fraction (1 - beta^d) of each reference's accumulated loss, grown by
// (1 + alpha) per frame.
struct LossModelParams {
  double alpha = 0.5;
  double beta = 0.5;
  int n_ref = 4;
  int frames = 4;  // P-frames in the period
  DuplicationPolicy policy = DuplicationPolicy::kNear;
  double l1 = 1.0;  // loss of the first P-frame
};

double information_decay(double i0, double beta, int delta);

struct RefLoss {
  double loss;
  int distance;
};

// (1 + alpha) / n * sum_r L_r (1 - beta^d_r)
double frame_loss(const std::vector<RefLoss> &refs, double alpha, double beta);

struct TotalLoss {
  std::vector<double> per_frame;
  double total = 0.0;
};

// Reference slots follow reference_slots(): kNear repeats the newest
// decoded frame, kFurther the oldest.
TotalLoss total_loss(const LossModelParams &params);

// Four-reference, four-frame closed forms, term for term.
namespace expanded {
std::vector<double> further_frames(double alpha, double beta, double l1 = 1.0);
std::vector<double> near_frames(double alpha, double beta, double l1 = 1.0);
double further_total(double alpha, double beta, double l1 = 1.0);
double near_total(double alpha, double beta, double l1 = 1.0);
}  // namespace expanded

struct ThresholdCoefficients {
  double a, b, c;
};

ThresholdCoefficients threshold_coefficients(double beta);
// Positive root of a x^2 + b x + c, evaluated without cancellation.
double threshold_alpha(double beta);

// total(kFurther) - total(kNear) for four references over four P-frames.
double policy_gap(double alpha, double beta);

// Root of policy_gap on (0, alpha_max] by bisection to 1e-12, or nullopt
// when no sign change is found on a 1e-3 scan.
std::optional<double> critical_alpha_numeric(double beta, double alpha_max = 1.0);

struct PolicyCell {
  double alpha, beta;
  double total_near, total_further, gap, threshold;
  // Recurrence verdict (near < further) equals closed-form verdict
  // (alpha < threshold).
  bool agrees;
};

// Cells ordered by (beta, alpha).
std::vector<PolicyCell> policy_compare_grid(const std::vector<double> &alphas,
                                            const std::vector<double> &betas);
double agreement_fraction(const std::vector<PolicyCell> &cells);

void write_policy_csv(std::ostream &out, const std::vector<PolicyCell> &cells);

}  // namespace bnvc

#endif  // BNVC_LOSS_MODEL_H_
