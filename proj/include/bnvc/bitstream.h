#ifndef BNVC_BITSTREAM_H_
#define BNVC_BITSTREAM_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bnvc/butterfly.h"
#include "bnvc/dpb.h"
#include "bnvc/frame.h"
#include "bnvc/model.h"

namespace bnvc {

constexpr std::uint8_t kBitstreamVersion = 1;

struct SequenceHeader {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t n_ref = 4;
  DuplicationPolicy policy = DuplicationPolicy::kNear;
  FusionMode fusion = FusionMode::kButterfly;
  std::uint16_t intra_period = 32;
  std::uint8_t lambda_index = 0;
  std::uint64_t weights_hash = 0;

  bool operator==(const SequenceHeader &) const = default;
};

using Payloads = std::array<std::vector<std::uint8_t>, kStreamCount>;

struct FrameRecord {
  enum class Type : std::uint8_t { kIntra = 0, kInter = 1 };
  Type type = Type::kIntra;
  Image intra;        // kIntra
  Payloads payloads;  // kInter: mv hyper, mv main, ctx hyper, ctx main

  bool operator==(const FrameRecord &) const = default;
};

struct Bitstream {
  SequenceHeader header;
  std::vector<FrameRecord> records;
};

// Layout, little-endian throughout:
//   "BNVC" version width height n_ref policy fusion intra_period
//   lambda_index weights_hash | fnv1a64(header bytes)
//   per record: type, then raw planes (intra) or four u32-length-prefixed
//   payloads (inter) | fnv1a64(record bytes)
std::vector<std::uint8_t> serialize(const Bitstream &stream);
// Verifies every checksum and length before returning. Throws
// CorruptionError on any inconsistency.
Bitstream parse_bitstream(std::span<const std::uint8_t> bytes);

// Serialized size of one record including its checksum.
std::size_t record_size(const FrameRecord &record);
constexpr std::size_t kHeaderSize = 4 + 1 + 2 + 2 + 1 + 1 + 1 + 2 + 1 + 8 + 8;

}  // namespace bnvc

#endif  // BNVC_BITSTREAM_H_
