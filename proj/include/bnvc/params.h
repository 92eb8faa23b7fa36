#ifndef BNVC_PARAMS_H_
#define BNVC_PARAMS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "bnvc/graph.h"

namespace bnvc {

struct Init {
  enum class Kind { kZero, kNormal, kConst };
  Kind kind = Kind::kZero;
  double value = 0.0;  // stddev for kNormal, fill for kConst

  static Init zero() { return {Kind::kZero, 0.0}; }
  static Init normal(double stddev) { return {Kind::kNormal, stddev}; }
  static Init constant(double v) { return {Kind::kConst, v}; }
};

// Named parameter tensors in creation order. Initial values depend only on
// (seed, name, shape), never on creation order.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  bool contains(const std::string &name) const { return index_.count(name) > 0; }
  Tensor &get(const std::string &name);
  const Tensor &get(const std::string &name) const;
  // Creates on first use unless frozen; a shape mismatch is a ShapeError.
  Tensor &get_or_create(const std::string &name, const Shape &shape, Init init);

  const std::vector<std::string> &names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::size_t parameter_count() const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  // Rounds every value to the nearest float32 so in-memory weights equal
  // what a save/load round trip produces.
  void snap_to_float();
  std::vector<std::uint8_t> serialize_f32() const;
  // FNV-1a of serialize_f32().
  std::uint64_t hash() const;

  // Writes `path` (flat float32 LE) and `path + ".json"` (manifest with
  // `meta` merged at top level).
  void save(const std::string &path, const nlohmann::json &meta) const;
  // Loads and freezes. Throws CorruptionError on size/shape inconsistencies.
  static ParamStore load(const std::string &path, nlohmann::json *meta);

 private:
  std::uint64_t seed_;
  bool frozen_ = false;
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::map<std::string, std::size_t> index_;
};

// Binds parameters of a store into one graph, once per name.
class Binder {
 public:
  Binder(Graph &graph, ParamStore &store, bool trainable)
    : graph_(graph), store_(&store), view_(&store), trainable_(trainable) {}
  // Read-only binding: every requested parameter must already exist.
  Binder(Graph &graph, const ParamStore &store)
    : graph_(graph), view_(&store), trainable_(false) {}

  Var get(const std::string &name, const Shape &shape, Init init);
  Graph &graph() { return graph_; }
  const std::map<std::string, Var> &bound() const { return bound_; }

 private:
  Graph &graph_;
  ParamStore *store_ = nullptr;
  const ParamStore *view_;
  bool trainable_;
  std::map<std::string, Var> bound_;
};

}  // namespace bnvc

#endif  // BNVC_PARAMS_H_
