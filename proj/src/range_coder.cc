#include <string>

#include "bnvc/entropy.h"
#include "bnvc/error.h"

namespace bnvc {

namespace {

constexpr std::uint32_t kRenormBound = 1u << 24;
constexpr std::uint64_t kCarry = 1ull << 32;

std::uint32_t bound(std::uint32_t range, std::uint32_t cum) {
  return static_cast<std::uint32_t>(
      (static_cast<std::uint64_t>(range) * cum) >> kCdfPrecisionBits);
}

}  // namespace

void RangeEncoder::encode(int symbol, const QuantizedCdf &cdf) {
  if (finished_) throw UsageError("RangeEncoder used after finish()");
  if (!cdf.contains(symbol)) {
    throw UsageError("range_encode: symbol " + std::to_string(symbol) +
                     " outside support [" + std::to_string(cdf.s_min()) + "," +
                     std::to_string(cdf.s_max()) + "]");
  }
  const int i = symbol - cdf.s_min();
  std::uint32_t lo = bound(range_, cdf.cum(i));
  std::uint32_t hi = bound(range_, cdf.cum(i + 1));
  low_ += lo;
  range_ = hi - lo;
  if (low_ >= kCarry) {
    low_ -= kCarry;
    for (auto it = out_.rbegin(); it != out_.rend(); ++it) {
      if (*it != 0xFF) {
        ++*it;
        break;
      }
      *it = 0;
    }
  }
  while (range_ < kRenormBound) {
    out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
    low_ = (low_ << 8) & 0xFFFFFFFFull;
    range_ <<= 8;
  }
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  if (finished_) throw UsageError("RangeEncoder finished twice");
  finished_ = true;
  for (int i = 0; i < 4; ++i) {
    out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
    low_ = (low_ << 8) & 0xFFFFFFFFull;
  }
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> payload) : in_(payload) {
  if (in_.size() < 4) throw CorruptionError("range payload shorter than flush");
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= in_.size()) throw CorruptionError("range payload truncated");
  return in_[pos_++];
}

int RangeDecoder::decode(const QuantizedCdf &cdf) {
  if (code_ >= range_) throw CorruptionError("range payload inconsistent");
  int lo = 0, hi = cdf.symbol_count();
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (bound(range_, cdf.cum(mid)) <= code_) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  std::uint32_t b0 = bound(range_, cdf.cum(lo));
  std::uint32_t b1 = bound(range_, cdf.cum(lo + 1));
  code_ -= b0;
  range_ = b1 - b0;
  while (range_ < kRenormBound) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
  return cdf.s_min() + lo;
}

void RangeDecoder::finish() const {
  if (pos_ != in_.size()) throw CorruptionError("trailing bytes in range payload");
}

std::vector<std::uint8_t> range_encode(std::span<const int> symbols,
                                       std::span<const QuantizedCdf> cdfs) {
  if (symbols.size() != cdfs.size()) {
    throw UsageError("range_encode: symbol/CDF count mismatch");
  }
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) enc.encode(symbols[i], cdfs[i]);
  return enc.finish();
}

std::vector<int> range_decode(std::span<const std::uint8_t> payload,
                              std::span<const QuantizedCdf> cdfs,
                              std::size_t count) {
  if (cdfs.size() != count) throw UsageError("range_decode: CDF count mismatch");
  RangeDecoder dec(payload);
  std::vector<int> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(dec.decode(cdfs[i]));
  dec.finish();
  return out;
}

}  // namespace bnvc
