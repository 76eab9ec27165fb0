#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tripem {

// Row-major n-dimensional array of 64-bit floats. The shape is fixed at
// construction; product(shape) always equals the data length. This is the
// sole carrier for images, activations, parameters and gradients.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Rank-1 element access.
  double& at(int a) { return data_[static_cast<std::size_t>(a)]; }
  double at(int a) const { return data_[static_cast<std::size_t>(a)]; }

  // Rank-3 (height x width x channels) element access.
  double& at(int y, int x, int c) { return data_[offset3(y, x, c)]; }
  double at(int y, int x, int c) const { return data_[offset3(y, x, c)]; }

  // Rank-4 (ky x kx x in x out) element access.
  double& at(int a, int b, int c, int d) { return data_[offset4(a, b, c, d)]; }
  double at(int a, int b, int c, int d) const { return data_[offset4(a, b, c, d)]; }

  std::size_t offset3(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_[1]) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(shape_[2]) +
           static_cast<std::size_t>(c);
  }

  std::size_t offset4(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * static_cast<std::size_t>(shape_[1]) +
             static_cast<std::size_t>(b)) *
                static_cast<std::size_t>(shape_[2]) +
            static_cast<std::size_t>(c)) *
               static_cast<std::size_t>(shape_[3]) +
           static_cast<std::size_t>(d);
  }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

}  // namespace tripem
