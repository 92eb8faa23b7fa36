#include "bnvc/graph.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bnvc/error.h"

namespace bnvc {

const Tensor &Var::value() const {
  if (!valid()) throw UsageError("use of an unbound Var");
  return graph->value(*this);
}

int Graph::check(Var v) const {
  if (v.graph != this || v.id < 0 ||
      v.id >= static_cast<int>(nodes_.size())) {
    throw UsageError("Var does not belong to this graph");
  }
  return v.id;
}

Var Graph::input(Tensor value, bool requires_grad) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad && recording();
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::record(Tensor value, std::vector<Var> inputs, BackwardFn fn) {
  Node node;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var &v : inputs) {
    int id = check(v);
    node.inputs.push_back(id);
    node.requires_grad = node.requires_grad || nodes_[id].requires_grad;
  }
  if (recording() && node.requires_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

const Tensor &Graph::value(Var v) const { return nodes_[check(v)].value; }

std::span<const double> Graph::out_grad(int id) const {
  return nodes_[id].value.grad();
}

std::vector<double> &Graph::grad_slot(Var v) {
  return nodes_[check(v)].value.grad();
}

void Graph::backward(Var output) {
  Tensor seed(value(output).shape(), 1.0);
  backward(output, seed);
}

void Graph::backward(Var output, const Tensor &seed) {
  if (!recording()) {
    throw UsageError("backward on a graph recorded in inference mode");
  }
  if (consumed_) throw UsageError("backward already run on this graph");
  int out = check(output);
  require_same_shape(nodes_[out].value, seed, "backward seed");
  consumed_ = true;
  if (!nodes_[out].requires_grad) return;
  auto &g = nodes_[out].value.grad();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];
  for (int id = out; id >= 0; --id) {
    Node &node = nodes_[id];
    if (!node.backward || !node.value.has_grad()) continue;
    node.backward(*this, id);
  }
}

Tensor Graph::grad(Var v) const {
  const Tensor &t = nodes_[check(v)].value;
  if (!t.has_grad()) return Tensor(t.shape(), 0.0);
  return Tensor(t.shape(), t.grad());
}

namespace {

struct ConvGeometry {
  int c, h, w, co, k, ho, wo;
};

ConvGeometry conv_geometry(const Tensor &input, const Tensor &kernel,
                           std::size_t bias_size, int stride, int pad) {
  require_rank(input, 3, "conv2d input");
  require_rank(kernel, 4, "conv2d kernel");
  ConvGeometry g{input.dim(0), input.dim(1), input.dim(2), kernel.dim(0),
                 kernel.dim(2), 0, 0};
  if (kernel.dim(1) != g.c) {
    throw ShapeError("conv2d: kernel " + shape_str(kernel.shape()) +
                     " expects " + std::to_string(kernel.dim(1)) +
                     " input channels, input is " + shape_str(input.shape()));
  }
  if (kernel.dim(2) != kernel.dim(3) || g.k % 2 == 0) {
    throw ShapeError("conv2d: kernel must be square with odd extent, got " +
                     shape_str(kernel.shape()));
  }
  if (bias_size != static_cast<std::size_t>(g.co)) {
    throw ShapeError("conv2d: bias length " + std::to_string(bias_size) +
                     " for " + std::to_string(g.co) + " output channels");
  }
  if (stride < 1 || pad < 0) throw UsageError("conv2d: bad stride/pad");
  if (g.h + 2 * pad < g.k || g.w + 2 * pad < g.k) {
    throw ShapeError("conv2d: input " + shape_str(input.shape()) +
                     " smaller than kernel after padding");
  }
  g.ho = (g.h + 2 * pad - g.k) / stride + 1;
  g.wo = (g.w + 2 * pad - g.k) / stride + 1;
  return g;
}

// Output column range [lo, hi) whose tap kx lands inside the input row.
void valid_cols(int kx, int pad, int stride, int w, int wo, int *lo, int *hi) {
  int off = kx - pad;
  int l = 0;
  if (off < 0) l = (-off + stride - 1) / stride;
  int h = (w - 1 - off) / stride + 1;
  if (w - 1 - off < 0) h = 0;
  *lo = l;
  *hi = std::min(h, wo);
}

double dot_fixed(const double *a, const double *b, int n, int step) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  int i = 0;
  if (step == 1) {
    for (; i + 4 <= n; i += 4) {
      acc[0] += a[i] * b[i];
      acc[1] += a[i + 1] * b[i + 1];
      acc[2] += a[i + 2] * b[i + 2];
      acc[3] += a[i + 3] * b[i + 3];
    }
  }
  for (; i < n; ++i) acc[0] += a[i] * b[i * step];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

void conv_backward(Graph &g, int self, Var input, Var kernel, Var bias,
                   int stride, int pad) {
  const Tensor &in = g.value(input);
  const Tensor &ker = g.value(kernel);
  ConvGeometry geo = conv_geometry(in, ker, g.value(bias).size(), stride, pad);
  std::span<const double> dout = g.out_grad(self);
  const std::size_t oplane = static_cast<std::size_t>(geo.ho) * geo.wo;
  const std::size_t iplane = static_cast<std::size_t>(geo.h) * geo.w;
  const int kk = geo.k * geo.k;

  if (g.needs_grad(bias)) {
    auto &db = g.grad_slot(bias);
    for (int co = 0; co < geo.co; ++co) {
      const double *d = dout.data() + co * oplane;
      double s = 0.0;
      for (std::size_t i = 0; i < oplane; ++i) s += d[i];
      db[co] += s;
    }
  }
  if (g.needs_grad(kernel)) {
    auto &dk = g.grad_slot(kernel);
    for (int co = 0; co < geo.co; ++co) {
      for (int ci = 0; ci < geo.c; ++ci) {
        for (int ky = 0; ky < geo.k; ++ky) {
          for (int kx = 0; kx < geo.k; ++kx) {
            int lo, hi;
            valid_cols(kx, pad, stride, geo.w, geo.wo, &lo, &hi);
            double s = 0.0;
            if (lo < hi) {
              for (int oy = 0; oy < geo.ho; ++oy) {
                int iy = oy * stride + ky - pad;
                if (iy < 0 || iy >= geo.h) continue;
                const double *d = dout.data() + co * oplane +
                                  static_cast<std::size_t>(oy) * geo.wo;
                const double *x = in.data().data() + ci * iplane +
                                  static_cast<std::size_t>(iy) * geo.w +
                                  (kx - pad);
                s += dot_fixed(d + lo, x + lo * stride, hi - lo, stride);
              }
            }
            dk[(static_cast<std::size_t>(co) * geo.c + ci) * kk +
               ky * geo.k + kx] += s;
          }
        }
      }
    }
  }
  if (g.needs_grad(input)) {
    auto &di = g.grad_slot(input);
    const double *kd = ker.data().data();
    for (int co = 0; co < geo.co; ++co) {
      for (int ci = 0; ci < geo.c; ++ci) {
        for (int ky = 0; ky < geo.k; ++ky) {
          for (int kx = 0; kx < geo.k; ++kx) {
            double wv = kd[(static_cast<std::size_t>(co) * geo.c + ci) * kk +
                           ky * geo.k + kx];
            int lo, hi;
            valid_cols(kx, pad, stride, geo.w, geo.wo, &lo, &hi);
            if (lo >= hi) continue;
            for (int oy = 0; oy < geo.ho; ++oy) {
              int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= geo.h) continue;
              const double *d = dout.data() + co * oplane +
                                static_cast<std::size_t>(oy) * geo.wo;
              double *x = di.data() + ci * iplane +
                          static_cast<std::size_t>(iy) * geo.w + (kx - pad);
              if (stride == 1) {
                for (int ox = lo; ox < hi; ++ox) x[ox] += wv * d[ox];
              } else {
                for (int ox = lo; ox < hi; ++ox) x[ox * stride] += wv * d[ox];
              }
            }
          }
        }
      }
    }
  }
}

struct Interp {
  int i0, i1;
  double frac;
};

std::vector<Interp> resize_axis(int in, int out) {
  std::vector<Interp> t(out);
  double sc = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * sc - 0.5;
    if (src < 0.0) src = 0.0;
    int i0 = static_cast<int>(std::floor(src));
    if (i0 > in - 1) i0 = in - 1;
    int i1 = std::min(i0 + 1, in - 1);
    double f = (i1 == i0) ? 0.0 : src - i0;
    t[i] = {i0, i1, f};
  }
  return t;
}

// Clamped bilinear sample position along one axis. `inside` is false when
// the position was clamped (zero derivative w.r.t. the displacement).
struct Sample {
  int i0, i1;
  double frac;
  bool inside;
};

Sample sample_axis(double pos, int n) {
  Sample s{0, 0, 0.0, true};
  double hi = n - 1;
  if (pos < 0.0) {
    pos = 0.0;
    s.inside = false;
  } else if (pos > hi) {
    pos = hi;
    s.inside = false;
  }
  int i0 = static_cast<int>(std::floor(pos));
  if (i0 > n - 1) i0 = n - 1;
  s.i0 = i0;
  s.i1 = std::min(i0 + 1, n - 1);
  s.frac = (s.i1 == i0) ? 0.0 : pos - i0;
  return s;
}

void require_same_graph(Var a, Var b) {
  if (!a.valid() || a.graph != b.graph) {
    throw UsageError("operands belong to different graphs");
  }
}

template <typename Fwd, typename Bwd>
Var unary(Var a, Fwd fwd, Bwd dfdx) {
  const Tensor &x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
  return a.graph->record(std::move(out), {a}, [a, dfdx](Graph &g, int self) {
    auto dout = g.out_grad(self);
    const Tensor &x = g.value(a);
    auto &dx = g.grad_slot(a);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dout[i] * dfdx(x[i]);
  });
}

}  // namespace

Tensor conv2d_forward(const Tensor &input, const Tensor &kernel,
                      std::span<const double> bias, int stride, int pad) {
  ConvGeometry geo = conv_geometry(input, kernel, bias.size(), stride, pad);
  Tensor out({geo.co, geo.ho, geo.wo});
  const std::size_t oplane = static_cast<std::size_t>(geo.ho) * geo.wo;
  const std::size_t iplane = static_cast<std::size_t>(geo.h) * geo.w;
  const int kk = geo.k * geo.k;
  const double *kd = kernel.data().data();
  const double *id = input.data().data();
  double *od = out.data().data();
  for (int co = 0; co < geo.co; ++co) {
    double *plane = od + co * oplane;
    std::fill(plane, plane + oplane, bias[co]);
    for (int ci = 0; ci < geo.c; ++ci) {
      for (int ky = 0; ky < geo.k; ++ky) {
        for (int kx = 0; kx < geo.k; ++kx) {
          double wv = kd[(static_cast<std::size_t>(co) * geo.c + ci) * kk +
                         ky * geo.k + kx];
          int lo, hi;
          valid_cols(kx, pad, stride, geo.w, geo.wo, &lo, &hi);
          if (lo >= hi) continue;
          for (int oy = 0; oy < geo.ho; ++oy) {
            int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= geo.h) continue;
            double *o = plane + static_cast<std::size_t>(oy) * geo.wo;
            const double *x = id + ci * iplane +
                              static_cast<std::size_t>(iy) * geo.w + (kx - pad);
            if (stride == 1) {
              for (int ox = lo; ox < hi; ++ox) o[ox] += wv * x[ox];
            } else {
              for (int ox = lo; ox < hi; ++ox) o[ox] += wv * x[ox * stride];
            }
          }
        }
      }
    }
  }
  return out;
}

Var conv2d(Var input, Var kernel, Var bias, int stride, int pad) {
  require_same_graph(input, kernel);
  require_same_graph(input, bias);
  const Tensor &b = bias.value();
  Tensor out = conv2d_forward(input.value(), kernel.value(), b.data(), stride,
                              pad);
  return input.graph->record(
      std::move(out), {input, kernel, bias},
      [=](Graph &g, int self) {
        conv_backward(g, self, input, kernel, bias, stride, pad);
      });
}

Var leaky_relu(Var x, double slope) {
  return unary(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

Var add(Var a, Var b) {
  require_same_graph(a, b);
  require_same_shape(a.value(), b.value(), "add");
  const Tensor &x = a.value();
  const Tensor &y = b.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return a.graph->record(std::move(out), {a, b}, [a, b](Graph &g, int self) {
    auto dout = g.out_grad(self);
    for (Var v : {a, b}) {
      if (!g.needs_grad(v)) continue;
      auto &d = g.grad_slot(v);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dout[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same_graph(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  const Tensor &x = a.value();
  const Tensor &y = b.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return a.graph->record(std::move(out), {a, b}, [a, b](Graph &g, int self) {
    auto dout = g.out_grad(self);
    if (g.needs_grad(a)) {
      auto &d = g.grad_slot(a);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dout[i];
    }
    if (g.needs_grad(b)) {
      auto &d = g.grad_slot(b);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= dout[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_graph(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  const Tensor &x = a.value();
  const Tensor &y = b.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return a.graph->record(std::move(out), {a, b}, [a, b](Graph &g, int self) {
    auto dout = g.out_grad(self);
    const Tensor &x = g.value(a);
    const Tensor &y = g.value(b);
    if (g.needs_grad(a)) {
      auto &d = g.grad_slot(a);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dout[i] * y[i];
    }
    if (g.needs_grad(b)) {
      auto &d = g.grad_slot(b);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dout[i] * x[i];
    }
  });
}

Var scale(Var a, double factor) {
  return unary(
      a, [factor](double v) { return v * factor; },
      [factor](double) { return factor; });
}

Var add_scalar(Var a, double offset) {
  return unary(
      a, [offset](double v) { return v + offset; }, [](double) { return 1.0; });
}

Var square(Var a) {
  return unary(
      a, [](double v) { return v * v; }, [](double v) { return 2.0 * v; });
}

Var softplus(Var a) {
  return unary(
      a,
      [](double v) {
        return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
      },
      [](double v) {
        return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                        : std::exp(v) / (1.0 + std::exp(v));
      });
}

Var exp(Var a) {
  return unary(
      a, [](double v) { return std::exp(v); },
      [](double v) { return std::exp(v); });
}

Var concat_channels(const std::vector<Var> &parts) {
  std::vector<Var> used;
  int c = 0, h = -1, w = -1;
  for (const Var &p : parts) {
    const Tensor &t = p.value();
    require_rank(t, 3, "concat_channels");
    if (h < 0) {
      h = t.dim(1);
      w = t.dim(2);
    } else if (t.dim(1) != h || t.dim(2) != w) {
      throw ShapeError("concat_channels: spatial mismatch " +
                       shape_str(t.shape()) + " vs " + std::to_string(h) +
                       "x" + std::to_string(w));
    }
    if (!used.empty()) require_same_graph(used.front(), p);
    if (t.dim(0) == 0) continue;
    used.push_back(p);
    c += t.dim(0);
  }
  if (used.empty()) throw ShapeError("concat_channels: nothing to concatenate");
  if (used.size() == 1) return used.front();
  Tensor out({c, h, w});
  std::size_t off = 0;
  for (const Var &p : used) {
    const Tensor &t = p.value();
    std::copy(t.data().begin(), t.data().end(), out.data().begin() + off);
    off += t.size();
  }
  return used.front().graph->record(
      std::move(out), used, [used](Graph &g, int self) {
        auto dout = g.out_grad(self);
        std::size_t off = 0;
        for (const Var &p : used) {
          std::size_t n = g.value(p).size();
          if (g.needs_grad(p)) {
            auto &d = g.grad_slot(p);
            for (std::size_t i = 0; i < n; ++i) d[i] += dout[off + i];
          }
          off += n;
        }
      });
}

Var slice_channels(Var x, int begin, int end) {
  const Tensor &t = x.value();
  require_rank(t, 3, "slice_channels");
  if (begin < 0 || end > t.dim(0) || begin >= end) {
    throw ShapeError("slice_channels: bad range [" + std::to_string(begin) +
                     "," + std::to_string(end) + ") of " +
                     shape_str(t.shape()));
  }
  std::size_t plane = static_cast<std::size_t>(t.dim(1)) * t.dim(2);
  Tensor out({end - begin, t.dim(1), t.dim(2)});
  std::copy(t.data().begin() + begin * plane, t.data().begin() + end * plane,
            out.data().begin());
  return x.graph->record(std::move(out), {x}, [x, begin, plane](Graph &g,
                                                                int self) {
    auto dout = g.out_grad(self);
    auto &d = g.grad_slot(x);
    for (std::size_t i = 0; i < dout.size(); ++i) d[begin * plane + i] += dout[i];
  });
}

Tensor bilinear_resize_forward(const Tensor &input, int out_h, int out_w) {
  require_rank(input, 3, "bilinear_resize");
  if (out_h < 1 || out_w < 1) throw ShapeError("bilinear_resize: empty output");
  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  auto ty = resize_axis(h, out_h);
  auto tx = resize_axis(w, out_w);
  Tensor out({c, out_h, out_w});
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < out_h; ++y) {
      const Interp &iy = ty[y];
      for (int x = 0; x < out_w; ++x) {
        const Interp &ix = tx[x];
        double v00 = input.at(ch, iy.i0, ix.i0), v01 = input.at(ch, iy.i0, ix.i1);
        double v10 = input.at(ch, iy.i1, ix.i0), v11 = input.at(ch, iy.i1, ix.i1);
        double a = v00 + ix.frac * (v01 - v00);
        double b = v10 + ix.frac * (v11 - v10);
        out.at(ch, y, x) = a + iy.frac * (b - a);
      }
    }
  }
  return out;
}

Var bilinear_resize(Var x, int out_h, int out_w) {
  Tensor out = bilinear_resize_forward(x.value(), out_h, out_w);
  return x.graph->record(std::move(out), {x}, [x, out_h, out_w](Graph &g,
                                                                int self) {
    const Tensor &in = g.value(x);
    const int c = in.dim(0), h = in.dim(1), w = in.dim(2);
    auto ty = resize_axis(h, out_h);
    auto tx = resize_axis(w, out_w);
    auto dout = g.out_grad(self);
    auto &d = g.grad_slot(x);
    auto idx = [h, w](int ch, int yy, int xx) {
      return (static_cast<std::size_t>(ch) * h + yy) * w + xx;
    };
    std::size_t o = 0;
    for (int ch = 0; ch < c; ++ch) {
      for (int y = 0; y < out_h; ++y) {
        const Interp &iy = ty[y];
        for (int xx = 0; xx < out_w; ++xx, ++o) {
          const Interp &ix = tx[xx];
          double gv = dout[o];
          double gy0 = gv * (1.0 - iy.frac), gy1 = gv * iy.frac;
          d[idx(ch, iy.i0, ix.i0)] += gy0 * (1.0 - ix.frac);
          d[idx(ch, iy.i0, ix.i1)] += gy0 * ix.frac;
          d[idx(ch, iy.i1, ix.i0)] += gy1 * (1.0 - ix.frac);
          d[idx(ch, iy.i1, ix.i1)] += gy1 * ix.frac;
        }
      }
    }
  });
}

Tensor warp_bilinear_forward(const Tensor &input, const Tensor &flow) {
  require_rank(input, 3, "warp_bilinear input");
  require_rank(flow, 3, "warp_bilinear flow");
  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (flow.dim(0) != 2 || flow.dim(1) != h || flow.dim(2) != w) {
    throw ShapeError("warp_bilinear: flow " + shape_str(flow.shape()) +
                     " does not match input " + shape_str(input.shape()));
  }
  Tensor out(input.shape());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Sample sx = sample_axis(x + flow.at(0, y, x), w);
      Sample sy = sample_axis(y + flow.at(1, y, x), h);
      for (int ch = 0; ch < c; ++ch) {
        double v00 = input.at(ch, sy.i0, sx.i0), v01 = input.at(ch, sy.i0, sx.i1);
        double v10 = input.at(ch, sy.i1, sx.i0), v11 = input.at(ch, sy.i1, sx.i1);
        double a = v00 + sx.frac * (v01 - v00);
        double b = v10 + sx.frac * (v11 - v10);
        out.at(ch, y, x) = a + sy.frac * (b - a);
      }
    }
  }
  return out;
}

Var warp_bilinear(Var input, Var flow) {
  require_same_graph(input, flow);
  Tensor out = warp_bilinear_forward(input.value(), flow.value());
  return input.graph->record(
      std::move(out), {input, flow}, [input, flow](Graph &g, int self) {
        const Tensor &in = g.value(input);
        const Tensor &fl = g.value(flow);
        const int c = in.dim(0), h = in.dim(1), w = in.dim(2);
        auto dout = g.out_grad(self);
        const bool gi = g.needs_grad(input), gf = g.needs_grad(flow);
        std::vector<double> *di = gi ? &g.grad_slot(input) : nullptr;
        std::vector<double> *df = gf ? &g.grad_slot(flow) : nullptr;
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            Sample sx = sample_axis(x + fl.at(0, y, x), w);
            Sample sy = sample_axis(y + fl.at(1, y, x), h);
            double gx = 0.0, gyv = 0.0;
            for (int ch = 0; ch < c; ++ch) {
              double gv = dout[ch * plane + static_cast<std::size_t>(y) * w + x];
              if (gi) {
                auto at = [&](int yy, int xx) -> double & {
                  return (*di)[ch * plane + static_cast<std::size_t>(yy) * w + xx];
                };
                double gy0 = gv * (1.0 - sy.frac), gy1 = gv * sy.frac;
                at(sy.i0, sx.i0) += gy0 * (1.0 - sx.frac);
                at(sy.i0, sx.i1) += gy0 * sx.frac;
                at(sy.i1, sx.i0) += gy1 * (1.0 - sx.frac);
                at(sy.i1, sx.i1) += gy1 * sx.frac;
              }
              if (gf) {
                double v00 = in.at(ch, sy.i0, sx.i0), v01 = in.at(ch, sy.i0, sx.i1);
                double v10 = in.at(ch, sy.i1, sx.i0), v11 = in.at(ch, sy.i1, sx.i1);
                double ddx = (1.0 - sy.frac) * (v01 - v00) + sy.frac * (v11 - v10);
                double ddy = (v10 - v00) + sx.frac * ((v11 - v10) - (v01 - v00));
                gx += gv * ddx;
                gyv += gv * ddy;
              }
            }
            if (gf) {
              std::size_t p = static_cast<std::size_t>(y) * w + x;
              if (sx.inside && sx.i1 != sx.i0) (*df)[p] += gx;
              if (sy.inside && sy.i1 != sy.i0) (*df)[plane + p] += gyv;
            }
          }
        }
      });
}

Var sum(Var x) {
  const Tensor &t = x.value();
  double s = 0.0;
  for (double v : t.data()) s += v;
  return x.graph->record(Tensor(Shape{}, s), {x}, [x](Graph &g, int self) {
    double gv = g.out_grad(self)[0];
    auto &d = g.grad_slot(x);
    for (double &v : d) v += gv;
  });
}

Var mean(Var x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

Var mse(Var a, Var b) { return mean(square(sub(a, b))); }

}  // namespace bnvc
