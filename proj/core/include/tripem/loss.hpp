#pragma once

#include <span>
#include <vector>

#include "tripem/sampling.hpp"

namespace tripem {

using Embedding = std::vector<double>;

// Two-sided clip interval for the bounded triplet loss.
struct ClipBounds {
  double lower = -0.01;
  double upper = 0.1;

  void validate() const;  // lower < upper
};

// Squared Euclidean distance, the embedding-space dissimilarity.
double sq_euclidean(std::span<const double> a, std::span<const double> b);

// 0 below the interval, 1 above it, linear in between.
double clip(double x, const ClipBounds& bounds);

// Pre-clip argument: sq_euclidean(anchor, near) - sq_euclidean(anchor, far).
// Exactly antisymmetric under swapping near and far.
double triplet_margin(std::span<const double> anchor, std::span<const double> near,
                      std::span<const double> far);

// clip(margin) in [0, 1]; outliers cannot dominate because the loss is
// bounded on both sides.
double clipped_triplet_loss(std::span<const double> anchor, std::span<const double> near,
                            std::span<const double> far, const ClipBounds& bounds);

// max(0, margin + offset); the offset discourages trivial solutions.
// Alternative loss, not used by the default training setup.
double hinge_triplet_loss(std::span<const double> anchor, std::span<const double> near,
                          std::span<const double> far, double offset);

struct TripletGrad {
  Embedding anchor;
  Embedding near;
  Embedding far;
};

// Gradient of clipped_triplet_loss w.r.t. the three embeddings. Zero in the
// flat regions; the subgradient at the kinks is taken as 0.
TripletGrad clipped_loss_grad(std::span<const double> anchor, std::span<const double> near,
                              std::span<const double> far, const ClipBounds& bounds);

// Gradient of hinge_triplet_loss; same kink convention.
TripletGrad hinge_loss_grad(std::span<const double> anchor, std::span<const double> near,
                            std::span<const double> far, double offset);

// True iff the embedded triplet is violated: the anchor sits strictly
// closer to far than to near. Ties count as satisfied.
bool is_violated(std::span<const double> anchor, std::span<const double> near,
                 std::span<const double> far);

// Percentage of violated triplets; order-independent over the list.
double violation_rate(std::span<const Embedding> embeddings,
                      std::span<const Triplet> triplets);

}  // namespace tripem
