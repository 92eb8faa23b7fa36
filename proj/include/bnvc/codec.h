#ifndef BNVC_CODEC_H_
#define BNVC_CODEC_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnvc/bitstream.h"
#include "bnvc/dpb.h"
#include "bnvc/frame.h"
#include "bnvc/model.h"
#include "bnvc/motion.h"
#include "bnvc/params.h"

namespace bnvc {

// Trained or seeded network plus the configuration it was built with.
struct Model {
  ModelConfig config;
  ParamStore weights;
  int lambda_index = 0;

  static Model seeded(const ModelConfig &config, std::uint64_t seed, int lambda_index = 0);
  void save(const std::string &path, const nlohmann::json &extra = {}) const;
  static Model load(const std::string &path);
};

constexpr std::array<double, 4> kLambdas{256.0, 512.0, 1024.0, 2048.0};
double lambda_for_index(int index);

struct CodingSettings {
  DuplicationPolicy policy = DuplicationPolicy::kNear;
  int intra_period = 32;
};

// Block size used for an H x W frame: 8 when it divides both, else 4.
BlockSearch block_search_for(int width, int height);

struct EncodedMotion {
  std::array<std::vector<std::uint8_t>, 2> payloads;  // hyper, main
  MotionField decoded;
};

EncodedMotion encode_mv(const Model &model, const MotionField &motion);
MotionField decode_mv(const Model &model, const std::array<std::vector<std::uint8_t>, 2> &payloads,
                      int width, int height);

struct EncodedFrame {
  FrameRecord record;
  Frame recon;
  double ideal_bits = 0.0;
};

// Codes `current` against the buffer and returns the record plus the
// encoder-side reconstruction; the buffer itself is not modified.
EncodedFrame encode_frame(const Image &current, const DecodedBuffer &dpb, const Model &model,
                          DuplicationPolicy policy);
Frame decode_frame(const FrameRecord &record, const DecodedBuffer &dpb, const Model &model,
                   DuplicationPolicy policy);

struct EncodeResult {
  Bitstream stream;
  std::vector<std::uint8_t> bytes;
  std::vector<Frame> recon;  // encoder-side reconstructions
  double bpp = 0.0;          // all bytes incl. header and intra frames
};

EncodeResult encode_sequence(const std::vector<Image> &frames, const Model &model,
                             const CodingSettings &settings);

struct DecodeOptions {
  // When set, decoding is refused unless the header carries this policy.
  std::optional<DuplicationPolicy> expect_policy;
};

std::vector<Frame> decode_sequence(std::span<const std::uint8_t> bytes, const Model &model,
                                   const DecodeOptions &options = {});

double bits_per_pixel(std::size_t bytes, std::size_t frames, int width, int height);

}  // namespace bnvc

#endif  // BNVC_CODEC_H_
