#ifndef BNVC_GRAD_SUITE_H_
#define BNVC_GRAD_SUITE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bnvc/grad_check.h"

namespace bnvc {

struct GradSuiteOptions {
  int seeds = 3;             // repetitions of each op-level case
  double op_tol = 1e-4;
  double pipeline_tol = 1e-3;
  bool pipeline = true;      // include fusion passes and a full P-frame
  std::uint64_t seed = 0;
};

struct GradSuiteEntry {
  std::string name;
  GradCheckReport report;
};

// Finite-difference checks of every differentiable op, the three fusion
// modes, and one complete P-frame rate-distortion objective at 16 x 16.
std::vector<GradSuiteEntry> run_grad_suite(const GradSuiteOptions &options = {});

}  // namespace bnvc

#endif  // BNVC_GRAD_SUITE_H_
