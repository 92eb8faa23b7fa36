#ifndef BNVC_DPB_H_
#define BNVC_DPB_H_

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "bnvc/frame.h"

namespace bnvc {

enum class DuplicationPolicy : std::uint8_t { kNear = 0, kFurther = 1 };

std::string to_string(DuplicationPolicy policy);
DuplicationPolicy parse_policy(const std::string &text);

// Positions (0 = oldest) into a buffer of m decoded frames filling n
// reference slots, oldest -> newest. With m < n, kNear repeats the newest
// frame and kFurther the oldest; with m >= n the newest n are used.
std::vector<int> reference_slots(int m, int n, DuplicationPolicy policy);

// Most recent decoded frames, oldest first.
class DecodedBuffer {
 public:
  explicit DecodedBuffer(int capacity = 4);

  // Drops the oldest entry once full. Indices must increase strictly.
  void push(Frame frame);
  void clear() { frames_.clear(); }

  int size() const { return static_cast<int>(frames_.size()); }
  bool empty() const { return frames_.empty(); }
  int capacity() const { return capacity_; }
  const Frame &at(int i) const { return frames_.at(i); }
  Frame &at(int i) { return frames_.at(i); }
  const Frame &newest() const;

 private:
  int capacity_;
  std::deque<Frame> frames_;
};

struct ReferenceSlot {
  const Frame *frame = nullptr;
  int position = 0;  // index into the buffer
  int distance = 0;  // time steps back from the current frame
};

// Reference list for a frame coded right after the buffer's newest entry.
std::vector<ReferenceSlot> build_reference_set(const DecodedBuffer &dpb, int n,
                                               DuplicationPolicy policy);

}  // namespace bnvc

#endif  // BNVC_DPB_H_
