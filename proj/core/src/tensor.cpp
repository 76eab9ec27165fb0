#include "tripem/tensor.hpp"

#include <cmath>
#include <cstddef>

#include "tripem/errors.hpp"

namespace tripem {

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  if (shape_.empty()) throw ConfigError("Tensor: empty shape");
  std::size_t total = 1;
  for (int d : shape_) {
    if (d <= 0) throw ConfigError("Tensor: dimensions must be positive");
    total *= static_cast<std::size_t>(d);
  }
  data_.assign(total, 0.0);
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace tripem
