#include "bnvc/dpb.h"

#include "bnvc/error.h"

namespace bnvc {

std::string to_string(DuplicationPolicy policy) {
  return policy == DuplicationPolicy::kNear ? "near" : "further";
}

DuplicationPolicy parse_policy(const std::string &text) {
  if (text == "near") return DuplicationPolicy::kNear;
  if (text == "further") return DuplicationPolicy::kFurther;
  throw UsageError("unknown duplication policy '" + text + "'");
}

std::vector<int> reference_slots(int m, int n, DuplicationPolicy policy) {
  if (m < 1) throw UsageError("reference_slots: no decoded frames");
  if (n < 1) throw UsageError("reference_slots: need at least one slot");
  std::vector<int> slots;
  if (m >= n) {
    for (int i = m - n; i < m; ++i) slots.push_back(i);
    return slots;
  }
  const int pad = n - m;
  if (policy == DuplicationPolicy::kFurther) slots.assign(pad, 0);
  for (int i = 0; i < m; ++i) slots.push_back(i);
  if (policy == DuplicationPolicy::kNear) slots.insert(slots.end(), pad, m - 1);
  return slots;
}

DecodedBuffer::DecodedBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw UsageError("decoded buffer capacity must be >= 1");
}

void DecodedBuffer::push(Frame frame) {
  if (!frames_.empty() && frame.index <= frames_.back().index) {
    throw UsageError("decoded buffer: frame indices must increase");
  }
  frames_.push_back(std::move(frame));
  while (static_cast<int>(frames_.size()) > capacity_) frames_.pop_front();
}

const Frame &DecodedBuffer::newest() const {
  if (frames_.empty()) throw UsageError("decoded buffer is empty");
  return frames_.back();
}

std::vector<ReferenceSlot> build_reference_set(const DecodedBuffer &dpb, int n,
                                               DuplicationPolicy policy) {
  if (dpb.empty()) throw UsageError("build_reference_set: empty decoded buffer");
  std::vector<ReferenceSlot> out;
  const int m = dpb.size();
  for (int p : reference_slots(m, n, policy)) {
    out.push_back({&dpb.at(p), p, m - p});
  }
  return out;
}

}  // namespace bnvc
