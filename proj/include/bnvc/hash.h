#ifndef BNVC_HASH_H_
#define BNVC_HASH_H_

#include <cstdint>
#include <span>

namespace bnvc {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

// 64-bit FNV-1a. Each step is a bijection of the state, so any single-byte
// change in the input changes the digest.
inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                             std::uint64_t state = kFnvOffset) {
  for (std::uint8_t b : bytes) {
    state ^= b;
    state *= kFnvPrime;
  }
  return state;
}

}  // namespace bnvc

#endif  // BNVC_HASH_H_
