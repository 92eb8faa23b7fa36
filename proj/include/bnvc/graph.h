#ifndef BNVC_GRAPH_H_
#define BNVC_GRAPH_H_

#include <functional>
#include <span>
#include <vector>

#include "bnvc/tensor.h"

namespace bnvc {

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Var {
  Graph *graph = nullptr;
  int id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
  const Tensor &value() const;
  const Shape &shape() const { return value().shape(); }
  int dim(int i) const { return value().dim(i); }
};

// Tape of forward operations with reverse-mode gradient rules.
//
// Nodes are appended in execution order, which is a topological order by
// construction. In inference mode no gradient rules are stored and
// backward() is refused.
class Graph {
 public:
  enum class Mode { kTrain, kInference };
  using BackwardFn = std::function<void(Graph &, int)>;

  explicit Graph(Mode mode = Mode::kTrain) : mode_(mode) {}
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;

  Mode mode() const { return mode_; }
  bool recording() const { return mode_ == Mode::kTrain; }

  Var input(Tensor value, bool requires_grad = false);

  // Appends an operation node. `fn` receives this graph and the new node id;
  // it reads out_grad(id) and accumulates into grad_slot(input) for inputs
  // with needs_grad(input).
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn fn);

  const Tensor &value(Var v) const;
  const Tensor &value(int id) const { return nodes_[id].value; }
  bool needs_grad(Var v) const { return nodes_[check(v)].requires_grad; }

  std::span<const double> out_grad(int id) const;
  std::vector<double> &grad_slot(Var v);

  // Reverse sweep from `output` seeded with `seed` (same shape as output).
  void backward(Var output, const Tensor &seed);
  // Scalar output, seed 1.
  void backward(Var output);

  // Gradient of a node after backward(); zeros when nothing reached it.
  Tensor grad(Var v) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::vector<int> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  int check(Var v) const;

  Mode mode_;
  bool consumed_ = false;
  std::vector<Node> nodes_;
};

constexpr double kLeakySlope = 0.1;

// 2-D convolution, zero padding. input C x H x W, kernel C' x C x k x k,
// bias [C'].
Var conv2d(Var input, Var kernel, Var bias, int stride, int pad);
Var leaky_relu(Var x, double slope = kLeakySlope);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var square(Var a);
Var softplus(Var a);
Var exp(Var a);
// Concatenates rank-3 tensors along the channel axis. Entries with zero
// channels are skipped.
Var concat_channels(const std::vector<Var> &parts);
Var slice_channels(Var x, int begin, int end);
// Align-corners-false bilinear resampling with clamped borders.
Var bilinear_resize(Var x, int out_h, int out_w);
// Backward warp: out(p) = input(p + flow(p)); flow channel 0 is horizontal.
Var warp_bilinear(Var input, Var flow);
Var sum(Var x);
Var mean(Var x);
Var mse(Var a, Var b);

// Non-graph reference kernels shared with tests of the graph ops.
Tensor conv2d_forward(const Tensor &input, const Tensor &kernel,
                      std::span<const double> bias, int stride, int pad);
Tensor bilinear_resize_forward(const Tensor &input, int out_h, int out_w);
Tensor warp_bilinear_forward(const Tensor &input, const Tensor &flow);

}  // namespace bnvc

#endif  // BNVC_GRAPH_H_
