#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tripem/sampling.hpp"
#include "tripem/tensor.hpp"

namespace tripem {

// Affected-fraction interval per score on the six-point scale.
inline constexpr double kExtentFractionLo[kNumScores] = {0.0, 0.01, 0.06, 0.26, 0.51, 0.76};
inline constexpr double kExtentFractionHi[kNumScores] = {0.0, 0.05, 0.25, 0.50, 0.75, 1.00};

// Skewed score distribution used by the synthetic generator: 73% score 0,
// 14% score 1, then a decreasing tail.
inline constexpr double kScoreProbabilities[kNumScores] = {0.73, 0.14, 0.06,
                                                           0.04, 0.02, 0.01};

// A preprocessed single-channel image with its ordinal extent score.
// Pixel values are scaled HU, roughly in [-1, 0].
struct LabeledImage {
  Tensor pixels;  // H x W x 1
  ExtentScore score;
  std::string id;
};

// The fixed elliptical region standing in for the lung mask; 1 inside,
// 0 outside.
Tensor synthetic_lung_mask(int height, int width);

// Synthetic dataset: textured background near -0.8 inside the mask, a few
// bright distractor blobs, and dark (< -0.9) blobs covering a fraction of
// the mask drawn uniformly from the score's extent interval. Scores follow
// kScoreProbabilities. Image i depends only on (seed, i), so generation
// order and worker count cannot change the result.
std::vector<LabeledImage> generate_synthetic(int n, std::uint64_t seed, int height = 57,
                                             int width = 125);

// Half-open crop rectangle.
struct CropBox {
  int row_begin = 0;
  int row_end = 0;
  int col_begin = 0;
  int col_end = 0;

  int height() const { return row_end - row_begin; }
  int width() const { return col_end - col_begin; }

  friend bool operator==(const CropBox&, const CropBox&) = default;
};

// Intersection of the tight bounding boxes of all masks. Throws DataError
// on an empty mask or an empty intersection.
CropBox bbox_intersection(std::span<const Tensor> masks);

// Crop to the box, set pixels outside the mask to -800 HU, scale by 1/1000.
Tensor preprocess(const Tensor& raw_hu, const Tensor& mask, const CropBox& box);

// Disjoint, exhaustive id split: shuffled ids halved into a training group
// and a test group, the training group halved again into train and
// validation (odd counts give the extra id to the earlier part).
struct SplitSpec {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
};

SplitSpec split_dataset(std::vector<std::string> ids, std::uint64_t seed);

// --- dataset directory -------------------------------------------------------
// Layout: images/<id>.txt or images/<id>.bin, labels.csv ("id,score" header),
// split.json (seed plus the three id lists).

enum class ImageFormat { kText, kBinary };

struct Dataset {
  std::vector<LabeledImage> images;
  SplitSpec split;

  std::vector<ExtentScore> labels() const;
  // Images for the given ids, in the order the ids are listed.
  std::vector<LabeledImage> subset(std::span<const std::string> ids) const;
};

void save_dataset(const std::filesystem::path& dir, std::span<const LabeledImage> images,
                  const SplitSpec& split, ImageFormat format);
Dataset load_dataset(const std::filesystem::path& dir);

// Single-image codecs. The text form is one header line
// "<height> <width> <score> <id>" followed by one line of decimal floats
// per row; the binary form mirrors the weights container ("TRIPIMG1",
// little-endian).
void write_image_text(const std::filesystem::path& path, const LabeledImage& image);
LabeledImage read_image_text(const std::filesystem::path& path);
void write_image_binary(const std::filesystem::path& path, const LabeledImage& image);
LabeledImage read_image_binary(const std::filesystem::path& path);

}  // namespace tripem
