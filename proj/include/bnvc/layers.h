#ifndef BNVC_LAYERS_H_
#define BNVC_LAYERS_H_

#include <cmath>
#include <string>

#include "bnvc/graph.h"
#include "bnvc/params.h"

namespace bnvc {

// 3x3 convolution with parameters `<name>.w` / `<name>.b`. `gain` scales a
// He-style N(0, 2/fan_in) initialization; biases start at zero.
inline Var conv(Binder &b, const std::string &name, Var x, int cout,
                int stride = 1, double gain = 1.0) {
  const int cin = x.dim(0);
  const double std = gain * std::sqrt(2.0 / (cin * 9.0));
  Var w = b.get(name + ".w", {cout, cin, 3, 3}, Init::normal(std));
  Var bias = b.get(name + ".b", {cout}, Init::zero());
  return conv2d(x, w, bias, stride, 1);
}

// Linear output convolution (no activation follows).
inline Var conv_out(Binder &b, const std::string &name, Var x, int cout,
                    int stride = 1) {
  return conv(b, name, x, cout, stride, std::sqrt(0.5));
}

// x + conv(lrelu(conv(x))); the second conv starts small.
inline Var res_block(Binder &b, const std::string &name, Var x) {
  const int c = x.dim(0);
  Var h = leaky_relu(conv(b, name + ".a", x, c));
  return add(x, conv(b, name + ".b", h, c, 1, 0.1));
}

inline Var zeros_like_plane(Graph &g, int c, int h, int w) {
  return g.input(Tensor({c, h, w}, 0.0));
}

}  // namespace bnvc

#endif  // BNVC_LAYERS_H_
