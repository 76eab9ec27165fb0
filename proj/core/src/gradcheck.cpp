#include "tripem/gradcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "tripem/errors.hpp"
#include "tripem/loss.hpp"
#include "tripem/nn.hpp"
#include "tripem/rng.hpp"

namespace tripem {

namespace {

enum class LossSample { kClippedInterior, kClippedFlat, kHingeInterior };

struct Variant {
  const char* name;
  ModelConfig model;
};

std::vector<Variant> suite_variants() {
  std::vector<Variant> v;
  v.push_back({"F3", {FilterSchedule::kFixed, 16, 3, 2, 18, 22}});
  v.push_back({"F4", {FilterSchedule::kFixed, 16, 4, 2, 36, 44}});
  v.push_back({"I3", {FilterSchedule::kIncreasing, 16, 3, 3, 18, 22}});
  v.push_back({"I4", {FilterSchedule::kIncreasing, 16, 4, 2, 36, 44}});
  v.push_back({"I5", {FilterSchedule::kIncreasing, 16, 5, 2, 36, 44}});
  return v;
}

Tensor random_image(const ModelConfig& model, Rng& rng) {
  Tensor image({model.input_height, model.input_width, 1});
  for (double& v : image.values()) v = rng.uniform(-1.0, 0.0);
  return image;
}

std::string tensor_name(const NetworkParams& params, std::size_t tensor_index) {
  const std::size_t num_layers = params.layers.size();
  std::ostringstream name;
  if (tensor_index < 2 * num_layers) {
    name << "layer" << tensor_index / 2 << '.'
         << (tensor_index % 2 == 0 ? "kernel" : "bias");
  } else if (tensor_index == 2 * num_layers) {
    name << "dense.weights";
  } else {
    name << "dense.bias";
  }
  return name.str();
}

// One sampled problem instance: fixed images, parameters and loss setup.
struct Instance {
  ModelConfig model;
  NetworkParams params;
  std::array<Tensor, 3> images;
  LossSample kind;
  ClipBounds bounds;
  double hinge_offset = 0.0;

  double loss(const std::array<ForwardCache, 3>& caches) const {
    switch (kind) {
      case LossSample::kClippedInterior:
      case LossSample::kClippedFlat:
        return clipped_triplet_loss(caches[0].embedding, caches[1].embedding,
                                    caches[2].embedding, bounds);
      case LossSample::kHingeInterior:
        return hinge_triplet_loss(caches[0].embedding, caches[1].embedding,
                                  caches[2].embedding, hinge_offset);
    }
    throw Error("gradcheck: unknown loss kind");
  }

  TripletGrad upstream(const std::array<ForwardCache, 3>& caches) const {
    switch (kind) {
      case LossSample::kClippedInterior:
      case LossSample::kClippedFlat:
        return clipped_loss_grad(caches[0].embedding, caches[1].embedding,
                                 caches[2].embedding, bounds);
      case LossSample::kHingeInterior:
        return hinge_loss_grad(caches[0].embedding, caches[1].embedding,
                               caches[2].embedding, hinge_offset);
    }
    throw Error("gradcheck: unknown loss kind");
  }

  // Region fingerprint: network kinks for all three branches plus the
  // region of the scalar loss.
  std::vector<std::uint8_t> signature(const std::array<ForwardCache, 3>& caches) const {
    std::vector<std::uint8_t> sig;
    for (const ForwardCache& cache : caches) {
      const auto s = activation_signature(cache);
      sig.insert(sig.end(), s.begin(), s.end());
    }
    const double margin = triplet_margin(caches[0].embedding, caches[1].embedding,
                                         caches[2].embedding);
    std::uint8_t region = 0;
    if (kind == LossSample::kHingeInterior) {
      region = margin + hinge_offset > 0.0 ? 1 : 0;
    } else {
      region = margin < bounds.lower ? 0 : (margin > bounds.upper ? 2 : 1);
    }
    sig.push_back(region);
    return sig;
  }
};

Instance make_instance(const Variant& variant, LossSample kind, std::uint64_t seed) {
  Instance inst;
  inst.model = variant.model;
  inst.params = NetworkParams::glorot_uniform(inst.model, Rng::mix(seed, 1));
  Rng rng(Rng::mix(seed, 2));
  for (int b = 0; b < 3; ++b) {
    inst.images[static_cast<std::size_t>(b)] = random_image(inst.model, rng);
  }
  inst.kind = kind;

  // Place the loss's kinks relative to the observed margin so the sampled
  // point sits well inside the intended region.
  std::array<ForwardCache, 3> caches;
  for (int b = 0; b < 3; ++b) {
    caches[static_cast<std::size_t>(b)] = forward_cached(
        inst.images[static_cast<std::size_t>(b)], inst.params, inst.model);
  }
  const double margin = triplet_margin(caches[0].embedding, caches[1].embedding,
                                       caches[2].embedding);
  switch (kind) {
    case LossSample::kClippedInterior:
      inst.bounds = {margin - 0.06, margin + 0.05};
      break;
    case LossSample::kClippedFlat:
      inst.bounds = {margin + 0.01, margin + 0.12};
      break;
    case LossSample::kHingeInterior:
      inst.hinge_offset = std::max(0.02, 0.02 - margin);
      break;
  }
  return inst;
}

}  // namespace

GradCheckResult run_gradient_check(const GradCheckConfig& config) {
  if (config.trials <= 0) throw UsageError("gradient check: trials must be positive");
  if (config.fd_step <= 0.0) throw UsageError("gradient check: fd_step must be positive");

  const std::vector<Variant> variants = suite_variants();
  constexpr LossSample kKinds[5] = {LossSample::kClippedInterior,
                                    LossSample::kClippedInterior,
                                    LossSample::kClippedInterior,
                                    LossSample::kClippedFlat,
                                    LossSample::kHingeInterior};
  constexpr int kCoordsPerInstance = 25;

  GradCheckResult result;
  Rng pick(Rng::mix(config.seed, 0xc001));
  std::uint64_t instance_counter = 0;

  while (result.tested < config.trials) {
    const Variant& variant = variants[instance_counter % variants.size()];
    const LossSample kind = kKinds[instance_counter % 5];
    Instance inst =
        make_instance(variant, kind, Rng::mix(config.seed, ++instance_counter));

    std::array<ForwardCache, 3> caches;
    std::array<const Tensor*, 3> image_ptrs;
    std::array<const ForwardCache*, 3> cache_ptrs;
    for (int b = 0; b < 3; ++b) {
      caches[static_cast<std::size_t>(b)] =
          forward_cached(inst.images[static_cast<std::size_t>(b)], inst.params, inst.model);
      image_ptrs[static_cast<std::size_t>(b)] = &inst.images[static_cast<std::size_t>(b)];
      cache_ptrs[static_cast<std::size_t>(b)] = &caches[static_cast<std::size_t>(b)];
    }
    const TripletGrad up = inst.upstream(caches);
    const NetworkParams analytic = backward_triplet(
        image_ptrs, cache_ptrs, {up.anchor, up.near, up.far}, inst.params, inst.model);
    const std::vector<std::uint8_t> center_sig = inst.signature(caches);

    const auto analytic_tensors = analytic.tensors();
    auto param_tensors = inst.params.tensors();

    for (int c = 0; c < kCoordsPerInstance && result.tested < config.trials; ++c) {
      const std::size_t ti = pick.index(param_tensors.size());
      const std::size_t offset = pick.index(param_tensors[ti]->size());
      const double a = (*analytic_tensors[ti])[offset];

      const double saved = (*param_tensors[ti])[offset];
      std::array<ForwardCache, 3> plus_caches;
      std::array<ForwardCache, 3> minus_caches;

      (*param_tensors[ti])[offset] = saved + config.fd_step;
      for (int b = 0; b < 3; ++b) {
        plus_caches[static_cast<std::size_t>(b)] = forward_cached(
            inst.images[static_cast<std::size_t>(b)], inst.params, inst.model);
      }
      const double loss_plus = inst.loss(plus_caches);

      (*param_tensors[ti])[offset] = saved - config.fd_step;
      for (int b = 0; b < 3; ++b) {
        minus_caches[static_cast<std::size_t>(b)] = forward_cached(
            inst.images[static_cast<std::size_t>(b)], inst.params, inst.model);
      }
      const double loss_minus = inst.loss(minus_caches);
      (*param_tensors[ti])[offset] = saved;

      // Only coordinates whose whole [-h, +h] interval stays inside one
      // piecewise-linear region are comparable against the analytic value.
      if (inst.signature(plus_caches) != center_sig ||
          inst.signature(minus_caches) != center_sig) {
        ++result.skipped;
        continue;
      }

      const double fd = (loss_plus - loss_minus) / (2.0 * config.fd_step);
      const double abs_err = std::abs(a - fd);
      const double rel = abs_err / std::max(std::abs(a) + std::abs(fd), 1e-12);
      const bool pass = rel < config.tolerance || abs_err < 1e-10;

      ++result.tested;
      if (pass) {
        ++result.passed;
      }
      if (rel > result.worst_rel_error) {
        result.worst_rel_error = rel;
        std::ostringstream where;
        where << variant.name << ' ' << tensor_name(inst.params, ti) << '[' << offset
              << "] analytic=" << a << " fd=" << fd;
        result.worst_coordinate = where.str();
      }
    }
  }
  return result;
}

}  // namespace tripem
