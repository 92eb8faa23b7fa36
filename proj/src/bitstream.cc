#include "bnvc/bitstream.h"

#include <cstring>

#include "bnvc/error.h"
#include "bnvc/hash.h"

namespace bnvc {

namespace {

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t> &out) : out_(out) {}
  template <typename T>
  void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    }
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  // Appends the checksum of everything written since `mark`.
  void checksum(std::size_t mark) {
    put<std::uint64_t>(fnv1a64(std::span(out_).subspan(mark)));
  }
  std::size_t size() const { return out_.size(); }

 private:
  std::vector<std::uint8_t> &out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  template <typename T>
  T get(const char *what) {
    need(sizeof(T), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::span<const std::uint8_t> take(std::size_t n, const char *what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  void verify(std::size_t mark, const char *what) {
    std::uint64_t expect = fnv1a64(in_.subspan(mark, pos_ - mark));
    if (get<std::uint64_t>(what) != expect) {
      throw CorruptionError(std::string(what) + ": checksum mismatch");
    }
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n, const char *what) const {
    if (in_.size() - pos_ < n) throw CorruptionError(std::string(what) + ": truncated");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t record_size(const FrameRecord &record) {
  std::size_t n = 1 + 8;
  if (record.type == FrameRecord::Type::kIntra) return n + record.intra.planes.size();
  for (const auto &p : record.payloads) n += 4 + p.size();
  return n;
}

std::vector<std::uint8_t> serialize(const Bitstream &stream) {
  const SequenceHeader &h = stream.header;
  std::vector<std::uint8_t> out;
  Writer w(out);
  w.bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t *>("BNVC"), 4));
  w.put<std::uint8_t>(kBitstreamVersion);
  w.put(h.width);
  w.put(h.height);
  w.put(h.n_ref);
  w.put(static_cast<std::uint8_t>(h.policy));
  w.put(static_cast<std::uint8_t>(h.fusion));
  w.put(h.intra_period);
  w.put(h.lambda_index);
  w.put(h.weights_hash);
  w.checksum(0);
  for (const FrameRecord &r : stream.records) {
    const std::size_t mark = w.size();
    w.put(static_cast<std::uint8_t>(r.type));
    if (r.type == FrameRecord::Type::kIntra) {
      if (r.intra.width != h.width || r.intra.height != h.height) {
        throw UsageError("serialize: intra frame size differs from header");
      }
      w.bytes(r.intra.planes);
    } else {
      for (const auto &p : r.payloads) {
        w.put(static_cast<std::uint32_t>(p.size()));
        w.bytes(p);
      }
    }
    w.checksum(mark);
  }
  return out;
}

Bitstream parse_bitstream(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  Bitstream s;
  SequenceHeader &h = s.header;
  auto magic = r.take(4, "header");
  if (std::memcmp(magic.data(), "BNVC", 4) != 0) throw CorruptionError("not a BNVC bitstream");
  if (r.get<std::uint8_t>("header") != kBitstreamVersion) {
    throw CorruptionError("unsupported bitstream version");
  }
  h.width = r.get<std::uint16_t>("header");
  h.height = r.get<std::uint16_t>("header");
  h.n_ref = r.get<std::uint8_t>("header");
  std::uint8_t policy = r.get<std::uint8_t>("header");
  std::uint8_t fusion = r.get<std::uint8_t>("header");
  h.intra_period = r.get<std::uint16_t>("header");
  h.lambda_index = r.get<std::uint8_t>("header");
  h.weights_hash = r.get<std::uint64_t>("header");
  r.verify(0, "header");
  if (policy > 1) throw CorruptionError("header: bad policy");
  if (fusion > 2) throw CorruptionError("header: bad fusion mode");
  if (h.width == 0 || h.height == 0 || h.width % 4 || h.height % 4) {
    throw CorruptionError("header: bad frame size");
  }
  if (h.n_ref == 0 || h.intra_period == 0 || h.lambda_index > 3) {
    throw CorruptionError("header: bad coding parameters");
  }
  h.policy = static_cast<DuplicationPolicy>(policy);
  h.fusion = static_cast<FusionMode>(fusion);

  const std::size_t plane_bytes = 3ull * h.width * h.height;
  while (!r.done()) {
    const std::size_t mark = r.pos();
    FrameRecord rec;
    std::uint8_t type = r.get<std::uint8_t>("record");
    if (type == 0) {
      rec.type = FrameRecord::Type::kIntra;
      auto px = r.take(plane_bytes, "intra record");
      rec.intra.width = h.width;
      rec.intra.height = h.height;
      rec.intra.planes.assign(px.begin(), px.end());
    } else if (type == 1) {
      rec.type = FrameRecord::Type::kInter;
      for (auto &p : rec.payloads) {
        std::uint32_t len = r.get<std::uint32_t>("inter record");
        auto b = r.take(len, "inter record");
        p.assign(b.begin(), b.end());
      }
    } else {
      throw CorruptionError("record: unknown type");
    }
    r.verify(mark, "record");
    if (s.records.empty() && rec.type != FrameRecord::Type::kIntra) {
      throw CorruptionError("first record is not intra");
    }
    s.records.push_back(std::move(rec));
  }
  return s;
}

}  // namespace bnvc
