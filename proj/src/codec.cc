#include "bnvc/codec.h"

#include <algorithm>
#include <limits>

#include "bnvc/error.h"

namespace bnvc {

Model Model::seeded(const ModelConfig &config, std::uint64_t seed, int lambda_index) {
  return Model{config, init_model(config, seed), lambda_index};
}

void Model::save(const std::string &path, const nlohmann::json &extra) const {
  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  meta["model"] = config.to_json();
  meta["lambda_index"] = lambda_index;
  weights.save(path, meta);
}

Model Model::load(const std::string &path) {
  nlohmann::json meta;
  ParamStore store = ParamStore::load(path, &meta);
  if (!meta.contains("model")) throw CorruptionError("weights manifest lacks model config");
  Model m{ModelConfig::from_json(meta["model"]), std::move(store), 0};
  int li = meta.value("lambda_index", 0);
  if (li < 0 || li > 3) throw CorruptionError("weights manifest: bad lambda_index");
  m.lambda_index = li;
  return m;
}

double lambda_for_index(int index) {
  if (index < 0 || index > 3) throw UsageError("lambda index must be in 0..3");
  return kLambdas[index];
}

BlockSearch block_search_for(int width, int height) {
  BlockSearch s;
  s.block = (width % 8 == 0 && height % 8 == 0) ? 8 : 4;
  return s;
}

namespace {

std::vector<RefState> ref_states(Graph &g, const DecodedBuffer &dpb) {
  std::vector<RefState> out;
  for (int i = 0; i < dpb.size(); ++i) {
    const Frame &f = dpb.at(i);
    RefState r;
    r.pixels = g.input(image_to_tensor(f.pixels));
    if (f.feature) r.feature = g.input(*f.feature);
    if (f.flow) r.flow = g.input(*f.flow);
    out.push_back(r);
  }
  return out;
}

Frame to_frame(const PFrameOutput &out, int index) {
  Frame f;
  f.index = index;
  f.pixels = tensor_to_image(out.recon.value());
  f.feature = out.feature.value();
  f.flow = out.flow.value();
  return f;
}

void check_frame_size(int width, int height) {
  if (width <= 0 || height <= 0 || width % 4 != 0 || height % 4 != 0) {
    throw UsageError("frame size " + std::to_string(width) + "x" + std::to_string(height) +
                     " must be positive multiples of 4");
  }
}

}  // namespace

EncodedMotion encode_mv(const Model &model, const MotionField &motion) {
  require_rank(motion, 3, "encode_mv");
  if (motion.dim(0) != 2) throw ShapeError("encode_mv: motion must have 2 channels");
  Graph g(Graph::Mode::kInference);
  Binder b(g, model.weights);
  RoundingEncoder coder;
  Var v = code_motion(b, model.config, g.input(motion), motion.dim(1), motion.dim(2), coder);
  Payloads p = coder.payloads();
  return {{p[kMvHyper], p[kMvMain]}, v.value()};
}

MotionField decode_mv(const Model &model, const std::array<std::vector<std::uint8_t>, 2> &payloads,
                      int width, int height) {
  Graph g(Graph::Mode::kInference);
  Binder b(g, model.weights);
  Payloads p;
  p[kMvHyper] = payloads[0];
  p[kMvMain] = payloads[1];
  PayloadDecoder coder(p);
  return code_motion(b, model.config, Var{}, height, width, coder).value();
}

EncodedFrame encode_frame(const Image &current, const DecodedBuffer &dpb, const Model &model,
                          DuplicationPolicy policy) {
  const Frame &newest = dpb.newest();
  if (current.width != newest.pixels.width || current.height != newest.pixels.height) {
    throw UsageError("encode_frame: frame size differs from references");
  }
  check_frame_size(current.width, current.height);
  Graph g(Graph::Mode::kInference);
  Binder b(g, model.weights);
  PFrameInput in;
  in.height = current.height;
  in.width = current.width;
  in.current = g.input(image_to_tensor(current));
  in.motion = estimate_motion(current, newest.pixels, block_search_for(in.width, in.height));
  in.dpb = ref_states(g, dpb);
  in.policy = policy;
  RoundingEncoder coder;
  PFrameOutput out = p_frame_forward(b, model.config, in, coder);
  EncodedFrame e;
  e.record.type = FrameRecord::Type::kInter;
  e.record.payloads = coder.payloads();
  e.recon = to_frame(out, newest.index + 1);
  e.ideal_bits = coder.ideal_bits();
  return e;
}

Frame decode_frame(const FrameRecord &record, const DecodedBuffer &dpb, const Model &model,
                   DuplicationPolicy policy) {
  if (record.type != FrameRecord::Type::kInter) throw UsageError("decode_frame: not an inter record");
  const Frame &newest = dpb.newest();
  Graph g(Graph::Mode::kInference);
  Binder b(g, model.weights);
  PFrameInput in;
  in.height = newest.pixels.height;
  in.width = newest.pixels.width;
  in.dpb = ref_states(g, dpb);
  in.policy = policy;
  PayloadDecoder coder(record.payloads);
  return to_frame(p_frame_forward(b, model.config, in, coder), newest.index + 1);
}

double bits_per_pixel(std::size_t bytes, std::size_t frames, int width, int height) {
  if (frames == 0 || width <= 0 || height <= 0) throw UsageError("bits_per_pixel: empty input");
  return 8.0 * static_cast<double>(bytes) /
         (static_cast<double>(frames) * width * height);
}

EncodeResult encode_sequence(const std::vector<Image> &frames, const Model &model,
                             const CodingSettings &settings) {
  if (frames.empty()) throw UsageError("encode_sequence: no frames");
  const int W = frames[0].width, H = frames[0].height;
  check_frame_size(W, H);
  if (W > std::numeric_limits<std::uint16_t>::max() ||
      H > std::numeric_limits<std::uint16_t>::max()) {
    throw UsageError("encode_sequence: frame too large");
  }
  for (const Image &f : frames) {
    if (f.width != W || f.height != H) throw UsageError("encode_sequence: frame sizes differ");
  }
  if (settings.intra_period < 1 || settings.intra_period > 65535) {
    throw UsageError("intra period must be in 1..65535");
  }
  if (model.config.n_ref > 255) throw UsageError("n_ref too large");

  EncodeResult res;
  SequenceHeader &h = res.stream.header;
  h.width = static_cast<std::uint16_t>(W);
  h.height = static_cast<std::uint16_t>(H);
  h.n_ref = static_cast<std::uint8_t>(model.config.n_ref);
  h.policy = settings.policy;
  h.fusion = model.config.fusion;
  h.intra_period = static_cast<std::uint16_t>(settings.intra_period);
  h.lambda_index = static_cast<std::uint8_t>(model.lambda_index);
  h.weights_hash = model.weights.hash();

  DecodedBuffer dpb(model.config.n_ref);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (t % settings.intra_period == 0) {
      dpb.clear();
      FrameRecord rec;
      rec.type = FrameRecord::Type::kIntra;
      rec.intra = frames[t];
      res.stream.records.push_back(std::move(rec));
      Frame f;
      f.index = static_cast<int>(t);
      f.pixels = frames[t];
      res.recon.push_back(f);
      dpb.push(std::move(f));
    } else {
      EncodedFrame e = encode_frame(frames[t], dpb, model, settings.policy);
      res.stream.records.push_back(std::move(e.record));
      res.recon.push_back(e.recon);
      dpb.push(std::move(e.recon));
    }
  }
  res.bytes = serialize(res.stream);
  res.bpp = bits_per_pixel(res.bytes.size(), frames.size(), W, H);
  return res;
}

std::vector<Frame> decode_sequence(std::span<const std::uint8_t> bytes, const Model &model,
                                   const DecodeOptions &options) {
  Bitstream s = parse_bitstream(bytes);
  const SequenceHeader &h = s.header;
  if (h.weights_hash != model.weights.hash()) {
    throw MismatchError("bitstream was coded with different weights");
  }
  if (h.fusion != model.config.fusion) throw MismatchError("bitstream fusion mode differs from model");
  if (h.n_ref != model.config.n_ref) throw MismatchError("bitstream reference count differs from model");
  if (options.expect_policy && *options.expect_policy != h.policy) {
    throw MismatchError("bitstream duplication policy is " + to_string(h.policy));
  }
  std::vector<Frame> out;
  DecodedBuffer dpb(model.config.n_ref);
  for (std::size_t t = 0; t < s.records.size(); ++t) {
    const FrameRecord &rec = s.records[t];
    const bool intra = (t % h.intra_period == 0);
    if (intra != (rec.type == FrameRecord::Type::kIntra)) {
      throw CorruptionError("record " + std::to_string(t) + " type contradicts intra period");
    }
    if (intra) {
      dpb.clear();
      Frame f;
      f.index = static_cast<int>(t);
      f.pixels = rec.intra;
      out.push_back(f);
      dpb.push(std::move(f));
    } else {
      Frame f = decode_frame(rec, dpb, model, h.policy);
      out.push_back(f);
      dpb.push(std::move(f));
    }
  }
  return out;
}

}  // namespace bnvc
