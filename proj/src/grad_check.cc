#include "bnvc/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include "bnvc/error.h"

namespace bnvc {

namespace {

double evaluate(const ScalarClosure &fn, const std::vector<Tensor> &inputs) {
  Graph g(Graph::Mode::kInference);
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor &t : inputs) vars.push_back(g.input(t));
  Var out = fn(vars);
  if (out.value().size() != 1) throw ShapeError("grad_check: closure is not scalar");
  return out.value()[0];
}

}  // namespace

GradCheckReport grad_check(const ScalarClosure &fn,
                           const std::vector<Tensor> &inputs,
                           const GradCheckOptions &options) {
  GradCheckReport report;
  std::vector<Tensor> analytic;
  try {
    Graph g(Graph::Mode::kTrain);
    std::vector<Var> vars;
    for (const Tensor &t : inputs) vars.push_back(g.input(t, true));
    Var out = fn(vars);
    if (out.value().size() != 1) {
      throw ShapeError("grad_check: closure is not scalar");
    }
    if (!std::isfinite(out.value()[0])) {
      report.failure = "non-finite output in analytic pass";
      return report;
    }
    g.backward(out);
    for (const Var &v : vars) analytic.push_back(g.grad(v));
  } catch (const NumericError &e) {
    report.failure = e.what();
    return report;
  }

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = 0; j < inputs[i].size(); ++j) coords.emplace_back(i, j);
  }
  if (options.max_coords > 0 && coords.size() > options.max_coords) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coords);
    std::sort(coords.begin(), coords.end());
  }

  std::vector<Tensor> work = inputs;
  auto central = [&](std::size_t i, std::size_t j, double eps, bool &finite) {
    const double orig = work[i][j];
    work[i][j] = orig + eps;
    double fp = evaluate(fn, work);
    work[i][j] = orig - eps;
    double fm = evaluate(fn, work);
    work[i][j] = orig;
    finite = std::isfinite(fp) && std::isfinite(fm);
    return (fp - fm) / (2.0 * eps);
  };
  for (auto [i, j] : coords) {
    const double a = analytic[i][j];
    double err = 0.0, eps = options.eps;
    for (int attempt = 0; attempt <= options.refinements; ++attempt, eps /= 10.0) {
      bool finite = true;
      const double num = central(i, j, eps, finite);
      if (!finite) {
        report.failure = "non-finite output in finite-difference pass";
        report.pass = false;
        return report;
      }
      const double e = std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-8});
      err = attempt == 0 ? e : std::min(err, e);
      if (err <= options.tol) break;
      if (attempt == 0 && options.refinements > 0) ++report.coords_refined;
    }
    report.max_rel_err = std::max(report.max_rel_err, err);
    ++report.coords_checked;
  }
  report.pass = report.max_rel_err <= options.tol;
  return report;
}

}  // namespace bnvc
