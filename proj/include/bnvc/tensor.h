#ifndef BNVC_TENSOR_H_
#define BNVC_TENSOR_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bnvc {

using Shape = std::vector<int>;

std::string shape_str(const Shape &shape);
std::size_t shape_numel(const Shape &shape);

// Dense row-major array of doubles. Images are channels-first (C x H x W).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape &shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double> &storage() { return data_; }
  const std::vector<double> &storage() const { return data_; }

  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Rank-3 accessors.
  double &at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }
  double at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }

  bool has_grad() const { return grad_.has_value(); }
  std::vector<double> &grad();
  const std::vector<double> &grad() const;
  void zero_grad();
  void clear_grad() { grad_.reset(); }

  bool all_finite() const;
  Tensor reshaped(Shape shape) const;

 private:
  Shape shape_;
  std::vector<double> data_;
  std::optional<std::vector<double>> grad_;
};

// Throws ShapeError naming `what` when `t` is not of rank `rank`.
void require_rank(const Tensor &t, int rank, const char *what);
void require_same_shape(const Tensor &a, const Tensor &b, const char *what);

}  // namespace bnvc

#endif  // BNVC_TENSOR_H_
