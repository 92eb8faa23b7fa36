#ifndef BNVC_TESTS_TEST_UTIL_H_
#define BNVC_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <random>

#include "bnvc/tensor.h"

namespace bnvc::testing {

inline Tensor random_tensor(const Shape &shape, std::uint64_t seed,
                            double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(shape);
  for (double &v : t.data()) v = d(rng);
  return t;
}

}  // namespace bnvc::testing

#endif  // BNVC_TESTS_TEST_UTIL_H_
