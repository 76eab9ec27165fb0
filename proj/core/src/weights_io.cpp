#include "tripem/weights_io.hpp"

#include <algorithm>
#include <fstream>

#include "binary_io.hpp"
#include "tripem/errors.hpp"

namespace tripem {

namespace {

constexpr char kMagic[8] = {'T', 'R', 'I', 'P', 'E', 'M', 'B', '1'};

}  // namespace

void save_weights(const std::filesystem::path& path, const ModelConfig& config,
                  const NetworkParams& params) {
  config.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("save_weights: cannot open " + path.string());

  out.write(kMagic, sizeof(kMagic));
  detail::put_u32(out, config.schedule == FilterSchedule::kFixed ? 0u : 1u);
  detail::put_u32(out, static_cast<std::uint32_t>(config.fixed_filters));
  detail::put_u32(out, static_cast<std::uint32_t>(config.num_layers));
  detail::put_u32(out, static_cast<std::uint32_t>(config.embed_dim));
  detail::put_u32(out, static_cast<std::uint32_t>(config.input_height));
  detail::put_u32(out, static_cast<std::uint32_t>(config.input_width));

  const auto tensors = params.tensors();
  detail::put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const Tensor* t : tensors) {
    detail::put_u32(out, static_cast<std::uint32_t>(t->rank()));
    for (int d : t->shape()) detail::put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t->values()) detail::put_f64(out, v);
  }
  if (!out) throw DataError("save_weights: write failed for " + path.string());
}

WeightsFile load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_weights: cannot open " + path.string());

  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      !std::equal(magic, magic + sizeof(magic), kMagic)) {
    throw DataError("load_weights: bad magic in " + path.string());
  }

  const std::string ctx = "load_weights(" + path.string() + ")";
  WeightsFile file;
  const std::uint32_t schedule = detail::get_u32(in, ctx);
  if (schedule > 1) throw DataError(ctx + ": unknown filter schedule");
  file.config.schedule =
      schedule == 0 ? FilterSchedule::kFixed : FilterSchedule::kIncreasing;
  file.config.fixed_filters = static_cast<int>(detail::get_u32(in, ctx));
  file.config.num_layers = static_cast<int>(detail::get_u32(in, ctx));
  file.config.embed_dim = static_cast<int>(detail::get_u32(in, ctx));
  file.config.input_height = static_cast<int>(detail::get_u32(in, ctx));
  file.config.input_width = static_cast<int>(detail::get_u32(in, ctx));
  file.config.validate();

  file.params = NetworkParams::zeros(file.config);
  const auto tensors = file.params.tensors();
  const std::uint32_t count = detail::get_u32(in, ctx);
  if (count != tensors.size()) {
    throw ConfigError(ctx + ": tensor count does not match the configuration");
  }
  for (Tensor* t : tensors) {
    const std::uint32_t rank = detail::get_u32(in, ctx);
    if (rank != static_cast<std::uint32_t>(t->rank())) {
      throw ConfigError(ctx + ": tensor rank does not match the configuration");
    }
    for (int d : t->shape()) {
      if (detail::get_u32(in, ctx) != static_cast<std::uint32_t>(d)) {
        throw ConfigError(ctx + ": tensor shape does not match the configuration");
      }
    }
    for (double& v : t->values()) v = detail::get_f64(in, ctx);
  }
  return file;
}

}  // namespace tripem
