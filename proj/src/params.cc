#include "bnvc/params.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include "bnvc/error.h"
#include "bnvc/hash.h"

namespace bnvc {

namespace {

std::uint64_t name_seed(std::uint64_t seed, const std::string &name) {
  auto bytes = std::span(reinterpret_cast<const std::uint8_t *>(name.data()),
                         name.size());
  return fnv1a64(bytes, kFnvOffset ^ (seed * 0x9E3779B97F4A7C15ull));
}

void append_f32(std::vector<std::uint8_t> &out, double v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

}  // namespace

Tensor &ParamStore::get(const std::string &name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw UsageError("unknown parameter '" + name + "'");
  return tensors_[it->second];
}

const Tensor &ParamStore::get(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw UsageError("unknown parameter '" + name + "'");
  return tensors_[it->second];
}

Tensor &ParamStore::get_or_create(const std::string &name, const Shape &shape,
                                  Init init) {
  auto it = index_.find(name);
  if (it != index_.end()) {
    Tensor &t = tensors_[it->second];
    if (t.shape() != shape) {
      throw ShapeError("parameter '" + name + "' has shape " +
                       shape_str(t.shape()) + ", requested " + shape_str(shape));
    }
    return t;
  }
  if (frozen_) throw UsageError("parameter '" + name + "' missing from weights");
  Tensor t(shape);
  switch (init.kind) {
    case Init::Kind::kZero:
      break;
    case Init::Kind::kConst:
      for (double &v : t.data()) v = init.value;
      break;
    case Init::Kind::kNormal: {
      std::mt19937_64 rng(name_seed(seed_, name));
      std::normal_distribution<double> dist(0.0, init.value);
      for (double &v : t.data()) v = dist(rng);
      break;
    }
  }
  for (double &v : t.data()) v = static_cast<float>(v);
  index_[name] = tensors_.size();
  names_.push_back(name);
  tensors_.push_back(std::move(t));
  return tensors_.back();
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor &t : tensors_) n += t.size();
  return n;
}

void ParamStore::snap_to_float() {
  for (Tensor &t : tensors_) {
    for (double &v : t.data()) v = static_cast<float>(v);
  }
}

std::vector<std::uint8_t> ParamStore::serialize_f32() const {
  std::vector<std::uint8_t> out;
  out.reserve(parameter_count() * 4);
  for (const Tensor &t : tensors_) {
    for (double v : t.data()) append_f32(out, v);
  }
  return out;
}

std::uint64_t ParamStore::hash() const { return fnv1a64(serialize_f32()); }

void ParamStore::save(const std::string &path, const nlohmann::json &meta) const {
  auto bytes = serialize_f32();
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw UsageError("cannot write weights to " + path);
  bin.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  nlohmann::json manifest = meta;
  manifest["format"] = "bnvc-weights-f32le";
  manifest["hash_fnv1a64"] = hash();
  manifest["parameters"] = nlohmann::json::array();
  for (std::size_t i = 0; i < names_.size(); ++i) {
    manifest["parameters"].push_back(
        {{"name", names_[i]}, {"shape", tensors_[i].shape()}});
  }
  std::ofstream js(path + ".json");
  if (!js) throw UsageError("cannot write manifest " + path + ".json");
  js << manifest.dump(2) << '\n';
}

ParamStore ParamStore::load(const std::string &path, nlohmann::json *meta) {
  std::ifstream js(path + ".json");
  if (!js) throw UsageError("cannot read manifest " + path + ".json");
  nlohmann::json manifest;
  try {
    js >> manifest;
  } catch (const nlohmann::json::exception &e) {
    throw CorruptionError(std::string("bad weights manifest: ") + e.what());
  }
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw UsageError("cannot read weights " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(bin)),
                                  std::istreambuf_iterator<char>());
  ParamStore store;
  std::size_t off = 0;
  try {
    for (const auto &p : manifest.at("parameters")) {
      std::string name = p.at("name").get<std::string>();
      Shape shape = p.at("shape").get<Shape>();
      Tensor t(shape);
      if (off + 4 * t.size() > bytes.size()) {
        throw CorruptionError("weights file shorter than manifest");
      }
      for (double &v : t.data()) {
        std::uint32_t bits = 0;
        for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes[off + i]) << (8 * i);
        v = std::bit_cast<float>(bits);
        off += 4;
      }
      store.index_[name] = store.tensors_.size();
      store.names_.push_back(name);
      store.tensors_.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception &e) {
    throw CorruptionError(std::string("bad weights manifest: ") + e.what());
  }
  if (off != bytes.size()) throw CorruptionError("weights file longer than manifest");
  store.freeze();
  if (meta) {
    *meta = manifest;
    meta->erase("parameters");
  }
  return store;
}

Var Binder::get(const std::string &name, const Shape &shape, Init init) {
  auto it = bound_.find(name);
  if (it != bound_.end()) {
    if (it->second.shape() != shape) {
      throw ShapeError("parameter '" + name + "' bound with shape " +
                       shape_str(it->second.shape()) + ", requested " +
                       shape_str(shape));
    }
    return it->second;
  }
  Var v;
  if (store_ != nullptr) {
    v = graph_.input(store_->get_or_create(name, shape, init), trainable_);
  } else {
    if (!view_->contains(name)) {
      throw UsageError("parameter '" + name + "' missing from weights");
    }
    const Tensor &t = view_->get(name);
    if (t.shape() != shape) {
      throw ShapeError("parameter '" + name + "' has shape " + shape_str(t.shape()) +
                       ", requested " + shape_str(shape));
    }
    v = graph_.input(t, false);
  }
  bound_.emplace(name, v);
  return v;
}

}  // namespace bnvc
