#include "tripem/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tripem/errors.hpp"
#include "tripem/rng.hpp"

namespace tripem {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw ConfigError(what);
}

}  // namespace

std::vector<int> ModelConfig::filters() const {
  std::vector<int> out(static_cast<std::size_t>(num_layers));
  for (int i = 0; i < num_layers; ++i) {
    out[static_cast<std::size_t>(i)] =
        schedule == FilterSchedule::kFixed ? fixed_filters : kIncreasingFilters[i];
  }
  return out;
}

std::array<int, 2> ModelConfig::spatial_after(int count) const {
  int h = input_height;
  int w = input_width;
  for (int i = 0; i < count; ++i) {
    h /= 2;
    w /= 2;
  }
  return {h, w};
}

void ModelConfig::validate() const {
  if (num_layers < 3 || num_layers > kMaxLayers) {
    throw ConfigError("ModelConfig: num_layers must be 3, 4 or 5");
  }
  if (schedule == FilterSchedule::kFixed && fixed_filters <= 0) {
    throw ConfigError("ModelConfig: fixed_filters must be positive");
  }
  if (embed_dim <= 0) throw ConfigError("ModelConfig: embed_dim must be positive");
  if (input_height < 1 || input_width < 1) {
    throw ConfigError("ModelConfig: input dimensions must be positive");
  }
  // Every pooling step needs at least a 2x2 map in front of it.
  int h = input_height;
  int w = input_width;
  for (int i = 0; i < num_layers; ++i) {
    if (h < 2 || w < 2) {
      throw ConfigError("ModelConfig: input too small, pooling exhausts layer " +
                        std::to_string(i + 1));
    }
    h /= 2;
    w /= 2;
  }
}

NetworkParams NetworkParams::zeros(const ModelConfig& config) {
  config.validate();
  NetworkParams params;
  const std::vector<int> counts = config.filters();
  int in_channels = 1;
  for (int f : counts) {
    params.layers.push_back(
        {Tensor({3, 3, in_channels, f}), Tensor({f})});
    in_channels = f;
  }
  params.dense_weights = Tensor({in_channels, config.embed_dim});
  params.dense_bias = Tensor({config.embed_dim});
  return params;
}

NetworkParams NetworkParams::glorot_uniform(const ModelConfig& config, std::uint64_t seed) {
  NetworkParams params = zeros(config);
  Rng rng(seed);
  for (LayerParams& layer : params.layers) {
    const int c_in = layer.kernel.dim(2);
    const int c_out = layer.kernel.dim(3);
    const double fan_in = 9.0 * c_in;
    const double fan_out = 9.0 * c_out;
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : layer.kernel.values()) w = rng.uniform(-bound, bound);
  }
  const double fan_in = params.dense_weights.dim(0);
  const double fan_out = params.dense_weights.dim(1);
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& w : params.dense_weights.values()) w = rng.uniform(-bound, bound);
  return params;
}

std::vector<Tensor*> NetworkParams::tensors() {
  std::vector<Tensor*> out;
  for (LayerParams& layer : layers) {
    out.push_back(&layer.kernel);
    out.push_back(&layer.bias);
  }
  out.push_back(&dense_weights);
  out.push_back(&dense_bias);
  return out;
}

std::vector<const Tensor*> NetworkParams::tensors() const {
  std::vector<const Tensor*> out;
  for (const LayerParams& layer : layers) {
    out.push_back(&layer.kernel);
    out.push_back(&layer.bias);
  }
  out.push_back(&dense_weights);
  out.push_back(&dense_bias);
  return out;
}

bool same_shape(const NetworkParams& a, const NetworkParams& b) {
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i]->shape() != tb[i]->shape()) return false;
  }
  return true;
}

bool bit_equal(const NetworkParams& a, const NetworkParams& b) {
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (!(*ta[i] == *tb[i])) return false;
  }
  return true;
}

Tensor conv3x3_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  require(input.rank() == 3, "conv3x3: input must be H x W x C");
  require(kernel.rank() == 4 && kernel.dim(0) == 3 && kernel.dim(1) == 3,
          "conv3x3: kernel must be 3 x 3 x C x F");
  require(kernel.dim(2) == input.dim(2), "conv3x3: channel counts do not match");
  require(bias.rank() == 1 && bias.dim(0) == kernel.dim(3),
          "conv3x3: bias length must equal the filter count");

  const int h = input.dim(0);
  const int w = input.dim(1);
  const int c_in = input.dim(2);
  const int f_out = kernel.dim(3);

  Tensor out({h, w, f_out});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double* o = &out.at(y, x, 0);
      for (int f = 0; f < f_out; ++f) o[f] = bias.at(f);
      for (int dy = 0; dy < 3; ++dy) {
        const int yy = y + dy - 1;
        if (yy < 0 || yy >= h) continue;
        for (int dx = 0; dx < 3; ++dx) {
          const int xx = x + dx - 1;
          if (xx < 0 || xx >= w) continue;
          const double* in = &input.at(yy, xx, 0);
          const double* kk = &kernel.at(dy, dx, 0, 0);
          for (int c = 0; c < c_in; ++c) {
            const double iv = in[c];
            const double* kf = kk + static_cast<std::size_t>(c) * f_out;
            for (int f = 0; f < f_out; ++f) o[f] += iv * kf[f];
          }
        }
      }
    }
  }
  return out;
}

PoolResult maxpool2x2_forward(const Tensor& input) {
  require(input.rank() == 3, "maxpool2x2: input must be H x W x C");
  const int h = input.dim(0);
  const int w = input.dim(1);
  const int c = input.dim(2);
  if (h < 2 || w < 2) throw ConfigError("maxpool2x2: input smaller than 2x2");

  const int oh = h / 2;
  const int ow = w / 2;
  PoolResult result{Tensor({oh, ow, c}), {}};
  result.argmax.resize(static_cast<std::size_t>(oh) * ow * c);

  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        double best = input.at(2 * oy, 2 * ox, ch);
        std::size_t best_idx = input.offset3(2 * oy, 2 * ox, ch);
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const double v = input.at(2 * oy + dy, 2 * ox + dx, ch);
            if (v > best) {
              best = v;
              best_idx = input.offset3(2 * oy + dy, 2 * ox + dx, ch);
            }
          }
        }
        result.output.at(oy, ox, ch) = best;
        result.argmax[result.output.offset3(oy, ox, ch)] =
            static_cast<std::int32_t>(best_idx);
      }
    }
  }
  return result;
}

std::vector<double> global_avg_pool(const Tensor& input) {
  require(input.rank() == 3, "global_avg_pool: input must be H x W x C");
  const int h = input.dim(0);
  const int w = input.dim(1);
  const int c = input.dim(2);
  std::vector<double> out(static_cast<std::size_t>(c), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* in = &input.at(y, x, 0);
      for (int ch = 0; ch < c; ++ch) out[static_cast<std::size_t>(ch)] += in[ch];
    }
  }
  const double scale = 1.0 / (static_cast<double>(h) * static_cast<double>(w));
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> dense_forward(std::span<const double> input, const Tensor& weights,
                                  std::span<const double> bias) {
  require(weights.rank() == 2, "dense: weights must be C x d");
  const int c = weights.dim(0);
  const int d = weights.dim(1);
  require(static_cast<int>(input.size()) == c, "dense: input length must equal C");
  require(static_cast<int>(bias.size()) == d, "dense: bias length must equal d");

  std::vector<double> out(bias.begin(), bias.end());
  for (int i = 0; i < c; ++i) {
    const double iv = input[static_cast<std::size_t>(i)];
    const double* row = weights.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] += iv * row[j];
  }
  return out;
}

namespace {

Tensor relu(const Tensor& z) {
  Tensor a(z.shape());
  const double* zp = z.data();
  double* ap = a.data();
  for (std::size_t i = 0; i < z.size(); ++i) ap[i] = zp[i] > 0.0 ? zp[i] : 0.0;
  return a;
}

void check_image(const Tensor& image, const ModelConfig& config) {
  if (image.rank() != 3 || image.dim(2) != 1) {
    throw ConfigError("embed: image must be H x W x 1");
  }
  if (image.dim(0) != config.input_height || image.dim(1) != config.input_width) {
    throw ConfigError("embed: image dimensions do not match the model input");
  }
}

void check_params(const NetworkParams& params, const ModelConfig& config) {
  if (static_cast<int>(params.layers.size()) != config.num_layers) {
    throw ConfigError("network parameters do not match the model layer count");
  }
}

}  // namespace

ForwardCache forward_cached(const Tensor& image, const NetworkParams& params,
                            const ModelConfig& config) {
  check_image(image, config);
  check_params(params, config);

  ForwardCache cache;
  cache.layers.reserve(params.layers.size());
  const Tensor* current = &image;
  for (const LayerParams& layer : params.layers) {
    LayerCache lc;
    lc.pre_activation = conv3x3_forward(*current, layer.kernel, layer.bias);
    lc.activated = relu(lc.pre_activation);
    lc.pool = maxpool2x2_forward(lc.activated);
    cache.layers.push_back(std::move(lc));
    current = &cache.layers.back().pool.output;
  }
  cache.gap = global_avg_pool(*current);
  cache.embedding = dense_forward(cache.gap, params.dense_weights,
                                  params.dense_bias.values());
  return cache;
}

std::vector<double> embed(const Tensor& image, const NetworkParams& params,
                          const ModelConfig& config) {
  return forward_cached(image, params, config).embedding;
}

std::vector<std::uint8_t> activation_signature(const ForwardCache& cache) {
  std::vector<std::uint8_t> sig;
  for (const LayerCache& layer : cache.layers) {
    // ReLU sign pattern, packed 8 per byte.
    std::uint8_t byte = 0;
    int bit = 0;
    for (double z : layer.pre_activation.values()) {
      byte = static_cast<std::uint8_t>((byte << 1) | (z > 0.0 ? 1 : 0));
      if (++bit == 8) {
        sig.push_back(byte);
        byte = 0;
        bit = 0;
      }
    }
    if (bit != 0) sig.push_back(byte);
    // Pool winner indices, full width.
    for (const std::int32_t idx : layer.pool.argmax) {
      for (int shift = 0; shift < 32; shift += 8) {
        sig.push_back(static_cast<std::uint8_t>((idx >> shift) & 0xff));
      }
    }
  }
  return sig;
}

namespace {

void check_cache(const ForwardCache& cache, const NetworkParams& params,
                 const ModelConfig& config) {
  if (cache.layers.size() != params.layers.size() ||
      static_cast<int>(cache.embedding.size()) != config.embed_dim) {
    throw UsageError("backward: forward cache missing or stale");
  }
  for (std::size_t l = 0; l < cache.layers.size(); ++l) {
    if (cache.layers[l].pre_activation.rank() != 3 ||
        cache.layers[l].pre_activation.dim(2) != params.layers[l].kernel.dim(3)) {
      throw UsageError("backward: forward cache missing or stale");
    }
  }
}

// Gradient of the convolution w.r.t. kernel, bias and input. d_pre is the
// gradient at the conv output (post the ReLU mask). d_input may be null for
// the first layer.
void conv3x3_backward(const Tensor& input, const Tensor& kernel, const Tensor& d_pre,
                      Tensor& d_kernel, Tensor& d_bias, Tensor* d_input) {
  const int h = input.dim(0);
  const int w = input.dim(1);
  const int c_in = input.dim(2);
  const int f_out = kernel.dim(3);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* dp = &d_pre.at(y, x, 0);
      double* db = d_bias.data();
      for (int f = 0; f < f_out; ++f) db[f] += dp[f];
      for (int dy = 0; dy < 3; ++dy) {
        const int yy = y + dy - 1;
        if (yy < 0 || yy >= h) continue;
        for (int dx = 0; dx < 3; ++dx) {
          const int xx = x + dx - 1;
          if (xx < 0 || xx >= w) continue;
          const double* in = &input.at(yy, xx, 0);
          double* kg = &d_kernel.at(dy, dx, 0, 0);
          for (int c = 0; c < c_in; ++c) {
            const double iv = in[c];
            double* kf = kg + static_cast<std::size_t>(c) * f_out;
            for (int f = 0; f < f_out; ++f) kf[f] += iv * dp[f];
          }
          if (d_input != nullptr) {
            const double* kk = &kernel.at(dy, dx, 0, 0);
            double* di = &d_input->at(yy, xx, 0);
            for (int c = 0; c < c_in; ++c) {
              const double* kf = kk + static_cast<std::size_t>(c) * f_out;
              double acc = 0.0;
              for (int f = 0; f < f_out; ++f) acc += dp[f] * kf[f];
              di[c] += acc;
            }
          }
        }
      }
    }
  }
}

}  // namespace

void backward_branch(const Tensor& image, const ForwardCache& cache,
                     std::span<const double> upstream, const NetworkParams& params,
                     const ModelConfig& config, NetworkParams& grads) {
  check_image(image, config);
  check_params(params, config);
  check_cache(cache, params, config);
  if (static_cast<int>(upstream.size()) != config.embed_dim) {
    throw UsageError("backward: upstream gradient has the wrong dimension");
  }

  const int num_layers = config.num_layers;
  const Tensor& last_pooled = cache.layers.back().pool.output;
  const int c_last = last_pooled.dim(2);
  const int d = config.embed_dim;

  // Dense head: dW = gap (outer) g, db = g, d_gap = W g.
  std::vector<double> d_gap(static_cast<std::size_t>(c_last), 0.0);
  for (int c = 0; c < c_last; ++c) {
    const double gv = cache.gap[static_cast<std::size_t>(c)];
    const double* row = params.dense_weights.data() + static_cast<std::size_t>(c) * d;
    double* grow = grads.dense_weights.data() + static_cast<std::size_t>(c) * d;
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      grow[j] += gv * upstream[static_cast<std::size_t>(j)];
      acc += row[j] * upstream[static_cast<std::size_t>(j)];
    }
    d_gap[static_cast<std::size_t>(c)] = acc;
  }
  for (int j = 0; j < d; ++j) grads.dense_bias.at(j) += upstream[static_cast<std::size_t>(j)];

  // Global average pool spreads each channel gradient evenly.
  Tensor d_pooled(last_pooled.shape());
  {
    const double scale = 1.0 / (static_cast<double>(last_pooled.dim(0)) *
                                static_cast<double>(last_pooled.dim(1)));
    for (int y = 0; y < last_pooled.dim(0); ++y) {
      for (int x = 0; x < last_pooled.dim(1); ++x) {
        double* dp = &d_pooled.at(y, x, 0);
        for (int c = 0; c < c_last; ++c) dp[c] = d_gap[static_cast<std::size_t>(c)] * scale;
      }
    }
  }

  for (int l = num_layers - 1; l >= 0; --l) {
    const LayerCache& lc = cache.layers[static_cast<std::size_t>(l)];
    const Tensor& input = l == 0 ? image : cache.layers[static_cast<std::size_t>(l - 1)].pool.output;

    // Pool backward: route each cell's gradient to the recorded winner.
    Tensor d_act(lc.activated.shape());
    for (std::size_t i = 0; i < lc.pool.argmax.size(); ++i) {
      d_act[static_cast<std::size_t>(lc.pool.argmax[i])] += d_pooled[i];
    }

    // ReLU backward: zero where the pre-activation was <= 0.
    const double* z = lc.pre_activation.data();
    double* da = d_act.data();
    for (std::size_t i = 0; i < d_act.size(); ++i) {
      if (z[i] <= 0.0) da[i] = 0.0;
    }

    LayerParams& lg = grads.layers[static_cast<std::size_t>(l)];
    if (l == 0) {
      conv3x3_backward(input, params.layers[0].kernel, d_act, lg.kernel, lg.bias, nullptr);
    } else {
      Tensor d_input(input.shape());
      conv3x3_backward(input, params.layers[static_cast<std::size_t>(l)].kernel, d_act,
                       lg.kernel, lg.bias, &d_input);
      d_pooled = std::move(d_input);
    }
  }
}

NetworkParams backward_triplet(const std::array<const Tensor*, 3>& images,
                               const std::array<const ForwardCache*, 3>& caches,
                               const std::array<std::vector<double>, 3>& upstream,
                               const NetworkParams& params, const ModelConfig& config) {
  for (int b = 0; b < 3; ++b) {
    if (images[static_cast<std::size_t>(b)] == nullptr ||
        caches[static_cast<std::size_t>(b)] == nullptr) {
      throw UsageError("backward_triplet: forward cache missing");
    }
  }
  NetworkParams grads = NetworkParams::zeros(config);
  for (int b = 0; b < 3; ++b) {
    backward_branch(*images[static_cast<std::size_t>(b)], *caches[static_cast<std::size_t>(b)],
                    upstream[static_cast<std::size_t>(b)], params, config, grads);
  }
  return grads;
}

AdamState AdamState::zeros(const NetworkParams& params) {
  AdamState state;
  for (const Tensor* t : params.tensors()) {
    state.first_moment.emplace_back(t->shape());
    state.second_moment.emplace_back(t->shape());
  }
  return state;
}

void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state,
               const AdamConfig& config) {
  const auto ps = params.tensors();
  const auto gs = grads.tensors();
  if (!same_shape(params, grads) || state.first_moment.size() != ps.size()) {
    throw UsageError("adam_step: parameter, gradient and state shapes do not match");
  }
  for (const Tensor* g : gs) {
    if (!g->all_finite()) throw TrainingError("adam_step: non-finite gradient");
  }

  const std::int64_t t = ++state.step;
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));

  for (std::size_t i = 0; i < ps.size(); ++i) {
    double* p = ps[i]->data();
    const double* g = gs[i]->data();
    double* m = state.first_moment[i].data();
    double* v = state.second_moment[i].data();
    const std::size_t n = ps[i]->size();
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bias1;
      const double v_hat = v[k] / bias2;
      p[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace tripem
