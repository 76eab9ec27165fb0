#include "tripem/loss.hpp"

#include <cmath>

#include "tripem/errors.hpp"

namespace tripem {

void ClipBounds::validate() const {
  if (!(lower < upper)) throw ConfigError("ClipBounds: lower must be below upper");
  if (!std::isfinite(lower) || !std::isfinite(upper)) {
    throw ConfigError("ClipBounds: bounds must be finite");
  }
}

namespace {

void check_dims(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("embedding dimensions do not match");
}

}  // namespace

double sq_euclidean(std::span<const double> a, std::span<const double> b) {
  check_dims(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double clip(double x, const ClipBounds& bounds) {
  if (x < bounds.lower) return 0.0;
  if (x > bounds.upper) return 1.0;
  return (x - bounds.lower) / (bounds.upper - bounds.lower);
}

double triplet_margin(std::span<const double> anchor, std::span<const double> near,
                      std::span<const double> far) {
  return sq_euclidean(anchor, near) - sq_euclidean(anchor, far);
}

double clipped_triplet_loss(std::span<const double> anchor, std::span<const double> near,
                            std::span<const double> far, const ClipBounds& bounds) {
  bounds.validate();
  return clip(triplet_margin(anchor, near, far), bounds);
}

double hinge_triplet_loss(std::span<const double> anchor, std::span<const double> near,
                          std::span<const double> far, double offset) {
  if (offset < 0.0) throw UsageError("hinge_triplet_loss: offset must be >= 0");
  const double arg = triplet_margin(anchor, near, far) + offset;
  return arg > 0.0 ? arg : 0.0;
}

namespace {

TripletGrad zero_grad(std::size_t dim) {
  return {Embedding(dim, 0.0), Embedding(dim, 0.0), Embedding(dim, 0.0)};
}

// Gradient of the raw margin, scaled by `scale`:
//   d margin / d anchor = 2 (far - near)
//   d margin / d near   = 2 (near - anchor)
//   d margin / d far    = -2 (far - anchor)
TripletGrad margin_grad(std::span<const double> anchor, std::span<const double> near,
                        std::span<const double> far, double scale) {
  TripletGrad g = zero_grad(anchor.size());
  for (std::size_t i = 0; i < anchor.size(); ++i) {
    g.anchor[i] = scale * 2.0 * (far[i] - near[i]);
    g.near[i] = scale * 2.0 * (near[i] - anchor[i]);
    g.far[i] = scale * -2.0 * (far[i] - anchor[i]);
  }
  return g;
}

}  // namespace

TripletGrad clipped_loss_grad(std::span<const double> anchor, std::span<const double> near,
                              std::span<const double> far, const ClipBounds& bounds) {
  bounds.validate();
  check_dims(anchor, near);
  check_dims(anchor, far);
  const double margin = triplet_margin(anchor, near, far);
  // Flat outside the open interval; subgradient 0 at the kinks.
  if (margin <= bounds.lower || margin >= bounds.upper) return zero_grad(anchor.size());
  return margin_grad(anchor, near, far, 1.0 / (bounds.upper - bounds.lower));
}

TripletGrad hinge_loss_grad(std::span<const double> anchor, std::span<const double> near,
                            std::span<const double> far, double offset) {
  if (offset < 0.0) throw UsageError("hinge_loss_grad: offset must be >= 0");
  check_dims(anchor, near);
  check_dims(anchor, far);
  const double arg = triplet_margin(anchor, near, far) + offset;
  if (arg <= 0.0) return zero_grad(anchor.size());
  return margin_grad(anchor, near, far, 1.0);
}

bool is_violated(std::span<const double> anchor, std::span<const double> near,
                 std::span<const double> far) {
  check_dims(anchor, near);
  check_dims(anchor, far);
  return sq_euclidean(anchor, near) > sq_euclidean(anchor, far);
}

double violation_rate(std::span<const Embedding> embeddings,
                      std::span<const Triplet> triplets) {
  if (triplets.empty()) throw UsageError("violation_rate: empty triplet list");
  const int n = static_cast<int>(embeddings.size());
  std::size_t violated = 0;
  for (const Triplet& t : triplets) {
    if (t.anchor < 0 || t.anchor >= n || t.near < 0 || t.near >= n || t.far < 0 ||
        t.far >= n) {
      throw UsageError("violation_rate: triplet index out of range");
    }
    if (is_violated(embeddings[static_cast<std::size_t>(t.anchor)],
                    embeddings[static_cast<std::size_t>(t.near)],
                    embeddings[static_cast<std::size_t>(t.far)])) {
      ++violated;
    }
  }
  return 100.0 * static_cast<double>(violated) / static_cast<double>(triplets.size());
}

}  // namespace tripem
