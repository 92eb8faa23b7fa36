#ifndef BNVC_ERROR_H_
#define BNVC_ERROR_H_

#include <stdexcept>
#include <string>

namespace bnvc {

// Caller violated a precondition (bad shape, bad argument, wrong mode).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string &what) : std::invalid_argument(what) {}
};

class ShapeError : public UsageError {
 public:
  explicit ShapeError(const std::string &what) : UsageError(what) {}
};

// Input data is malformed: truncated payloads, checksum mismatch, bad
// container fields, refused model/header combinations.
class CorruptionError : public std::runtime_error {
 public:
  explicit CorruptionError(const std::string &what)
    : std::runtime_error(what) {}
};

// Bitstream and model disagree (weights hash, policy, fusion mode).
class MismatchError : public CorruptionError {
 public:
  explicit MismatchError(const std::string &what) : CorruptionError(what) {}
};

// Numerical failure during training or evaluation (non-finite values).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace bnvc

#endif  // BNVC_ERROR_H_
