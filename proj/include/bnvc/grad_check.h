#ifndef BNVC_GRAD_CHECK_H_
#define BNVC_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bnvc/graph.h"

namespace bnvc {

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool pass = false;
  std::size_t coords_checked = 0;
  // Coordinates re-measured with smaller steps after missing the tolerance.
  std::size_t coords_refined = 0;
  // Empty on success; otherwise why the check could not complete.
  std::string failure;
};

// Maps graph inputs (one Var per entry of `inputs`, same order) to a scalar.
using ScalarClosure = std::function<Var(const std::vector<Var> &)>;

struct GradCheckOptions {
  double eps = 1e-5;
  double tol = 1e-4;
  // 0 checks every coordinate; otherwise a seeded sample of this many.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
  // A coordinate that misses `tol` is re-measured with eps / 10, eps / 100,
  // ... up to this many times; a kink inside the stencil shrinks out of
  // it, a wrong gradient does not.
  int refinements = 2;
};

// Compares reverse-mode gradients with central differences. Relative error
// per coordinate is |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const ScalarClosure &fn,
                           const std::vector<Tensor> &inputs,
                           const GradCheckOptions &options = {});

}  // namespace bnvc

#endif  // BNVC_GRAD_CHECK_H_
