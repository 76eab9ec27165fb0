#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tripem/tensor.hpp"

namespace tripem {

enum class FilterSchedule { kFixed, kIncreasing };

// Per-layer filter counts for the increasing-schedule setup.
inline constexpr int kIncreasingFilters[5] = {8, 16, 32, 64, 128};
inline constexpr int kMaxLayers = 5;

// Architecture description: a stack of (zero pad, 3x3 conv, ReLU, 2x2 max
// pool) layers followed by global average pooling and a dense embedding
// head. "F" models use a fixed filter count per layer, "I" models the
// increasing schedule above.
struct ModelConfig {
  FilterSchedule schedule = FilterSchedule::kFixed;
  int fixed_filters = 16;  // only used when schedule == kFixed
  int num_layers = 4;      // 3, 4 or 5 convolution layers
  int embed_dim = 2;
  int input_height = 57;
  int input_width = 125;

  // Output channel count of each convolution layer.
  std::vector<int> filters() const;

  // Spatial size after layer `count` pooling steps (floor halving).
  std::array<int, 2> spatial_after(int count) const;

  // Throws ConfigError when the layer count, embedding size or input
  // dimensions are unusable (e.g. pooling would hit a zero-sized map).
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LayerParams {
  Tensor kernel;  // 3 x 3 x in_channels x out_channels
  Tensor bias;    // out_channels
};

// All learnable weights of a network. The Adam moments live in AdamState,
// shaped to mirror tensors().
struct NetworkParams {
  std::vector<LayerParams> layers;
  Tensor dense_weights;  // last_filters x embed_dim
  Tensor dense_bias;     // embed_dim

  static NetworkParams zeros(const ModelConfig& config);

  // Glorot-uniform kernels and dense weights in +-sqrt(6/(fan_in+fan_out)),
  // zero biases; fully determined by the seed.
  static NetworkParams glorot_uniform(const ModelConfig& config, std::uint64_t seed);

  // Flat view over every parameter tensor, in serialization order:
  // kernel0, bias0, kernel1, bias1, ..., dense_weights, dense_bias.
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
};

bool same_shape(const NetworkParams& a, const NetworkParams& b);
bool bit_equal(const NetworkParams& a, const NetworkParams& b);

// --- forward kernels -------------------------------------------------------

// 3x3 convolution with one pixel of zero padding on every side, so the
// spatial dimensions are preserved. input H x W x C, kernel 3 x 3 x C x F,
// bias F -> output H x W x F.
Tensor conv3x3_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias);

struct PoolResult {
  Tensor output;  // floor(H/2) x floor(W/2) x C
  // Winner flat index into the input tensor, one per output cell; consumed
  // by the backward pass.
  std::vector<std::int32_t> argmax;
};

// Non-overlapping 2x2 max pooling; a trailing odd row/column is dropped.
// Requires H >= 2 and W >= 2. Ties go to the first cell in row-major order.
PoolResult maxpool2x2_forward(const Tensor& input);

// Spatial mean per channel: H x W x C -> C.
std::vector<double> global_avg_pool(const Tensor& input);

// out = input^T * weights + bias with weights C x d. No activation; this is
// the embedding head.
std::vector<double> dense_forward(std::span<const double> input, const Tensor& weights,
                                  std::span<const double> bias);

// --- full network -----------------------------------------------------------

struct LayerCache {
  Tensor pre_activation;  // conv output, before ReLU
  Tensor activated;       // after ReLU
  PoolResult pool;
};

// Everything the backward pass needs from one image's forward pass.
struct ForwardCache {
  std::vector<LayerCache> layers;
  std::vector<double> gap;  // global average pool output
  std::vector<double> embedding;
};

ForwardCache forward_cached(const Tensor& image, const NetworkParams& params,
                            const ModelConfig& config);

// The d-dimensional embedding of one image. Pure function of
// (image, params, config); repeated calls are bit-identical.
std::vector<double> embed(const Tensor& image, const NetworkParams& params,
                          const ModelConfig& config);

// Byte pattern identifying the piecewise-linear region a forward pass went
// through: ReLU sign pattern plus pool winner indices. Two evaluations in
// the same region are exactly linear in any single parameter, which is what
// the finite-difference checks rely on.
std::vector<std::uint8_t> activation_signature(const ForwardCache& cache);

// Accumulates one branch's parameter gradients into `grads`, given
// dLoss/dEmbedding for that branch. Throws UsageError when the cache does
// not match the configuration (missing or stale forward pass).
void backward_branch(const Tensor& image, const ForwardCache& cache,
                     std::span<const double> upstream, const NetworkParams& params,
                     const ModelConfig& config, NetworkParams& grads);

// Gradient of a scalar triplet loss w.r.t. every parameter. The three
// branches share `params`, so the per-branch gradients sum.
NetworkParams backward_triplet(const std::array<const Tensor*, 3>& images,
                               const std::array<const ForwardCache*, 3>& caches,
                               const std::array<std::vector<double>, 3>& upstream,
                               const NetworkParams& params, const ModelConfig& config);

// --- Adam -------------------------------------------------------------------

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::int64_t step = 0;

  static AdamState zeros(const NetworkParams& params);
};

// One Adam update with bias correction; increments the step counter.
// Throws TrainingError on non-finite gradients, leaving params untouched.
void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state,
               const AdamConfig& config);

}  // namespace tripem
