#pragma once

#include <filesystem>

#include "tripem/nn.hpp"

namespace tripem {

// Versioned weights container, magic "TRIPEMB1". Layout (all integers
// little-endian u32, floats little-endian IEEE-754 f64):
//
//   byte 0    magic "TRIPEMB1"
//   u32       filter schedule (0 fixed, 1 increasing)
//   u32       fixed filter count
//   u32       number of convolution layers
//   u32       embedding dimension
//   u32       input height
//   u32       input width
//   u32       tensor count
//   per tensor: u32 rank, u32 dims[rank], f64 data[prod(dims)]
//
// Tensors appear in NetworkParams::tensors() order: kernel and bias per
// layer, then the dense weights and bias. Round-trips are bit-exact.
void save_weights(const std::filesystem::path& path, const ModelConfig& config,
                  const NetworkParams& params);

struct WeightsFile {
  ModelConfig config;
  NetworkParams params;
};

// Throws DataError on a bad magic or truncated file, ConfigError when the
// stored tensors do not match the stored configuration.
WeightsFile load_weights(const std::filesystem::path& path);

}  // namespace tripem
