#include "tripem/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "binary_io.hpp"
#include "tripem/errors.hpp"

namespace tripem {

namespace {

constexpr char kImageMagic[8] = {'T', 'R', 'I', 'P', 'I', 'M', 'G', '1'};

constexpr double kOutsideFill = -0.8;     // -800 HU after scaling
constexpr double kBackgroundNoise = 0.05;
constexpr double kBackgroundJitter = 0.03;  // per-image level shift
constexpr double kDistractorLevel = -0.6;
constexpr double kEmphysemaLevel = -0.95;
constexpr double kBlobNoise = 0.03;

struct MaskIndex {
  std::vector<std::size_t> pixels;  // flat indices of in-mask pixels
};

MaskIndex index_mask(const Tensor& mask) {
  MaskIndex idx;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] > 0.5) idx.pixels.push_back(i);
  }
  return idx;
}

// Paints a disk of in-mask pixels around `center`, skipping already painted
// ones, stopping once `remaining` hits zero. Returns how many were painted.
int paint_disk(Tensor& pixels, const Tensor& mask, std::vector<std::uint8_t>& painted,
               std::size_t center, int radius, double level, double noise, Rng& rng,
               int remaining) {
  const int w = pixels.dim(1);
  const int cy = static_cast<int>(center) / w;
  const int cx = static_cast<int>(center) % w;
  const int h = pixels.dim(0);
  int count = 0;
  for (int dy = -radius; dy <= radius && count < remaining; ++dy) {
    const int y = cy + dy;
    if (y < 0 || y >= h) continue;
    for (int dx = -radius; dx <= radius && count < remaining; ++dx) {
      const int x = cx + dx;
      if (x < 0 || x >= w) continue;
      if (dy * dy + dx * dx > radius * radius) continue;
      const std::size_t flat = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
      if (mask[flat] <= 0.5 || painted[flat]) continue;
      pixels[flat] = level + rng.uniform(-noise, noise);
      painted[flat] = 1;
      ++count;
    }
  }
  return count;
}

LabeledImage generate_one(int index, std::uint64_t seed, int height, int width,
                          const Tensor& mask, const MaskIndex& mask_idx) {
  Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(index)));

  const int score = static_cast<int>(rng.weighted_index(kScoreProbabilities));

  LabeledImage image{Tensor({height, width, 1}), ExtentScore(score), ""};
  {
    std::ostringstream id;
    id << "syn-" << std::setw(5) << std::setfill('0') << index;
    image.id = id.str();
  }

  // Background: flat fill outside the mask, jittered texture inside. The
  // per-image level shift keeps mean intensity from fully encoding the
  // score on its own.
  const double base = kOutsideFill + rng.uniform(-kBackgroundJitter, kBackgroundJitter);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    image.pixels[i] = mask[i] > 0.5
                          ? base + rng.uniform(-kBackgroundNoise, kBackgroundNoise)
                          : kOutsideFill;
  }

  // Bright distractor blobs, unrelated to the score.
  std::vector<std::uint8_t> scratch(image.pixels.size(), 0);
  const int distractors = static_cast<int>(rng.index(4));
  for (int b = 0; b < distractors; ++b) {
    std::fill(scratch.begin(), scratch.end(), 0);
    const std::size_t center = mask_idx.pixels[rng.index(mask_idx.pixels.size())];
    const int radius = 2 + static_cast<int>(rng.index(4));
    paint_disk(image.pixels, mask, scratch, center, radius, kDistractorLevel, kBlobNoise,
               rng, std::numeric_limits<int>::max());
  }

  if (score > 0) {
    // Dark blobs cover an exact pixel count drawn from the score's
    // extent interval; dark pixels always end up below -0.9.
    const double fraction =
        rng.uniform(kExtentFractionLo[score], kExtentFractionHi[score]);
    const int mask_count = static_cast<int>(mask_idx.pixels.size());
    int remaining = static_cast<int>(std::ceil(fraction * mask_count));
    remaining = std::min(remaining, mask_count);

    std::vector<std::uint8_t> painted(image.pixels.size(), 0);
    std::vector<std::size_t> unpainted = mask_idx.pixels;
    while (remaining > 0 && !unpainted.empty()) {
      const std::size_t center = unpainted[rng.index(unpainted.size())];
      const int radius = 2 + static_cast<int>(rng.index(4));
      remaining -= paint_disk(image.pixels, mask, painted, center, radius,
                              kEmphysemaLevel, kBlobNoise, rng, remaining);
      std::erase_if(unpainted, [&painted](std::size_t i) { return painted[i] != 0; });
    }
  }
  return image;
}

}  // namespace

Tensor synthetic_lung_mask(int height, int width) {
  if (height < 4 || width < 4) throw UsageError("synthetic_lung_mask: image too small");
  Tensor mask({height, width, 1});
  const double cy = (height - 1) / 2.0;
  const double cx = (width - 1) / 2.0;
  const double ry = 0.42 * height;
  const double rx = 0.42 * width;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double ny = (y - cy) / ry;
      const double nx = (x - cx) / rx;
      mask.at(y, x, 0) = ny * ny + nx * nx <= 1.0 ? 1.0 : 0.0;
    }
  }
  return mask;
}

std::vector<LabeledImage> generate_synthetic(int n, std::uint64_t seed, int height,
                                             int width) {
  if (n < 10) throw UsageError("generate_synthetic: need at least 10 images");
  const Tensor mask = synthetic_lung_mask(height, width);
  const MaskIndex mask_idx = index_mask(mask);
  std::vector<LabeledImage> images;
  images.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    images.push_back(generate_one(i, seed, height, width, mask, mask_idx));
  }
  return images;
}

CropBox bbox_intersection(std::span<const Tensor> masks) {
  if (masks.empty()) throw UsageError("bbox_intersection: no masks");
  CropBox box;
  bool first = true;
  for (const Tensor& mask : masks) {
    if (mask.rank() != 3 || mask.dim(2) != 1) {
      throw UsageError("bbox_intersection: masks must be H x W x 1");
    }
    int min_row = mask.dim(0);
    int max_row = -1;
    int min_col = mask.dim(1);
    int max_col = -1;
    for (int y = 0; y < mask.dim(0); ++y) {
      for (int x = 0; x < mask.dim(1); ++x) {
        if (mask.at(y, x, 0) > 0.5) {
          min_row = std::min(min_row, y);
          max_row = std::max(max_row, y);
          min_col = std::min(min_col, x);
          max_col = std::max(max_col, x);
        }
      }
    }
    if (max_row < 0) throw DataError("bbox_intersection: empty mask");
    if (first) {
      box = {min_row, max_row + 1, min_col, max_col + 1};
      first = false;
    } else {
      box.row_begin = std::max(box.row_begin, min_row);
      box.row_end = std::min(box.row_end, max_row + 1);
      box.col_begin = std::max(box.col_begin, min_col);
      box.col_end = std::min(box.col_end, max_col + 1);
    }
  }
  if (box.row_begin >= box.row_end || box.col_begin >= box.col_end) {
    throw DataError("bbox_intersection: bounding boxes do not intersect");
  }
  return box;
}

Tensor preprocess(const Tensor& raw_hu, const Tensor& mask, const CropBox& box) {
  if (raw_hu.rank() != 3 || raw_hu.dim(2) != 1) {
    throw UsageError("preprocess: image must be H x W x 1");
  }
  if (mask.shape() != raw_hu.shape()) {
    throw UsageError("preprocess: mask and image dimensions differ");
  }
  if (box.row_begin < 0 || box.col_begin < 0 || box.row_end > raw_hu.dim(0) ||
      box.col_end > raw_hu.dim(1) || box.height() <= 0 || box.width() <= 0) {
    throw UsageError("preprocess: crop box exceeds the image bounds");
  }

  Tensor out({box.height(), box.width(), 1});
  for (int y = 0; y < box.height(); ++y) {
    for (int x = 0; x < box.width(); ++x) {
      const int sy = box.row_begin + y;
      const int sx = box.col_begin + x;
      const double hu = mask.at(sy, sx, 0) > 0.5 ? raw_hu.at(sy, sx, 0) : -800.0;
      out.at(y, x, 0) = hu / 1000.0;
    }
  }
  return out;
}

SplitSpec split_dataset(std::vector<std::string> ids, std::uint64_t seed) {
  if (ids.size() < 4) throw UsageError("split_dataset: need at least 4 ids");
  {
    std::unordered_set<std::string> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size()) throw UsageError("split_dataset: duplicate ids");
  }
  Rng rng(seed);
  rng.shuffle(ids);

  const std::size_t n = ids.size();
  const std::size_t group = (n + 1) / 2;        // training group; rest is test
  const std::size_t train = (group + 1) / 2;    // odd group: extra id to train

  SplitSpec split;
  split.seed = seed;
  split.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(train));
  split.val_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(train),
                       ids.begin() + static_cast<std::ptrdiff_t>(group));
  split.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(group), ids.end());
  return split;
}

std::vector<ExtentScore> Dataset::labels() const {
  std::vector<ExtentScore> out;
  out.reserve(images.size());
  for (const LabeledImage& image : images) out.push_back(image.score);
  return out;
}

std::vector<LabeledImage> Dataset::subset(std::span<const std::string> ids) const {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < images.size(); ++i) by_id[images[i].id] = i;
  std::vector<LabeledImage> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("dataset subset: unknown id '" + id + "'");
    out.push_back(images[it->second]);
  }
  return out;
}

// --- image codecs -------------------------------------------------------------

void write_image_text(const std::filesystem::path& path, const LabeledImage& image) {
  std::ofstream out(path);
  if (!out) throw DataError("write_image_text: cannot open " + path.string());
  const int h = image.pixels.dim(0);
  const int w = image.pixels.dim(1);
  out << h << ' ' << w << ' ' << image.score.value() << ' ' << image.id << '\n';
  out << std::setprecision(17);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x > 0) out << ' ';
      out << image.pixels.at(y, x, 0);
    }
    out << '\n';
  }
  if (!out) throw DataError("write_image_text: write failed for " + path.string());
}

LabeledImage read_image_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_image_text: cannot open " + path.string());
  int h = 0;
  int w = 0;
  int score = 0;
  if (!(in >> h >> w >> score)) {
    throw DataError("read_image_text: malformed header in " + path.string());
  }
  std::string id;
  std::getline(in, id);
  if (!id.empty() && id.front() == ' ') id.erase(0, 1);
  if (h <= 0 || w <= 0) throw DataError("read_image_text: bad dimensions in " + path.string());

  LabeledImage image{Tensor({h, w, 1}), ExtentScore(score), id};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!(in >> image.pixels.at(y, x, 0))) {
        throw DataError("read_image_text: truncated pixel data in " + path.string());
      }
    }
  }
  return image;
}

void write_image_binary(const std::filesystem::path& path, const LabeledImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_image_binary: cannot open " + path.string());
  out.write(kImageMagic, sizeof(kImageMagic));
  detail::put_u32(out, static_cast<std::uint32_t>(image.pixels.dim(0)));
  detail::put_u32(out, static_cast<std::uint32_t>(image.pixels.dim(1)));
  detail::put_u32(out, static_cast<std::uint32_t>(image.score.value()));
  detail::put_u32(out, static_cast<std::uint32_t>(image.id.size()));
  out.write(image.id.data(), static_cast<std::streamsize>(image.id.size()));
  for (double v : image.pixels.values()) detail::put_f64(out, v);
  if (!out) throw DataError("write_image_binary: write failed for " + path.string());
}

LabeledImage read_image_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_image_binary: cannot open " + path.string());
  char magic[sizeof(kImageMagic)];
  if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), kImageMagic)) {
    throw DataError("read_image_binary: bad magic in " + path.string());
  }
  const std::string ctx = "read_image_binary(" + path.string() + ")";
  const int h = static_cast<int>(detail::get_u32(in, ctx));
  const int w = static_cast<int>(detail::get_u32(in, ctx));
  const int score = static_cast<int>(detail::get_u32(in, ctx));
  const std::uint32_t id_len = detail::get_u32(in, ctx);
  std::string id(id_len, '\0');
  if (!in.read(id.data(), id_len)) throw DataError(ctx + ": truncated id");
  if (h <= 0 || w <= 0) throw DataError(ctx + ": bad dimensions");

  LabeledImage image{Tensor({h, w, 1}), ExtentScore(score), id};
  for (double& v : image.pixels.values()) v = detail::get_f64(in, ctx);
  return image;
}

// --- dataset directory ---------------------------------------------------------

void save_dataset(const std::filesystem::path& dir, std::span<const LabeledImage> images,
                  const SplitSpec& split, ImageFormat format) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");

  std::ofstream labels(dir / "labels.csv");
  if (!labels) throw DataError("save_dataset: cannot open labels.csv");
  labels << "id,score\n";
  for (const LabeledImage& image : images) {
    labels << image.id << ',' << image.score.value() << '\n';
    const fs::path file =
        dir / "images" / (image.id + (format == ImageFormat::kText ? ".txt" : ".bin"));
    if (format == ImageFormat::kText) {
      write_image_text(file, image);
    } else {
      write_image_binary(file, image);
    }
  }
  if (!labels) throw DataError("save_dataset: write failed for labels.csv");

  nlohmann::ordered_json j;
  j["seed"] = split.seed;
  j["train_ids"] = split.train_ids;
  j["val_ids"] = split.val_ids;
  j["test_ids"] = split.test_ids;
  std::ofstream split_file(dir / "split.json");
  if (!split_file) throw DataError("save_dataset: cannot open split.json");
  split_file << j.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::ifstream labels(dir / "labels.csv");
  if (!labels) throw DataError("load_dataset: missing labels.csv in " + dir.string());

  std::string line;
  if (!std::getline(labels, line) || line != "id,score") {
    throw DataError("load_dataset: labels.csv must start with 'id,score'");
  }

  Dataset dataset;
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw DataError("load_dataset: malformed labels.csv row '" + line + "'");
    }
    const std::string id = line.substr(0, comma);
    const int score = std::stoi(line.substr(comma + 1));

    const fs::path bin = dir / "images" / (id + ".bin");
    const fs::path txt = dir / "images" / (id + ".txt");
    LabeledImage image = fs::exists(bin) ? read_image_binary(bin) : read_image_text(txt);
    if (image.id != id || image.score.value() != score) {
      throw DataError("load_dataset: labels.csv and image header disagree for '" + id + "'");
    }
    dataset.images.push_back(std::move(image));
  }
  if (dataset.images.empty()) throw DataError("load_dataset: no images listed");

  std::ifstream split_file(dir / "split.json");
  if (!split_file) throw DataError("load_dataset: missing split.json in " + dir.string());
  nlohmann::json j = nlohmann::json::parse(split_file, nullptr, true);
  dataset.split.seed = j.at("seed").get<std::uint64_t>();
  dataset.split.train_ids = j.at("train_ids").get<std::vector<std::string>>();
  dataset.split.val_ids = j.at("val_ids").get<std::vector<std::string>>();
  dataset.split.test_ids = j.at("test_ids").get<std::vector<std::string>>();

  // The split must be a disjoint cover of the dataset.
  std::unordered_set<std::string> seen;
  std::size_t total = 0;
  for (const auto* list : {&dataset.split.train_ids, &dataset.split.val_ids,
                           &dataset.split.test_ids}) {
    for (const std::string& id : *list) {
      if (!seen.insert(id).second) {
        throw DataError("load_dataset: split.json lists '" + id + "' twice");
      }
      ++total;
    }
  }
  if (total != dataset.images.size()) {
    throw DataError("load_dataset: split.json does not cover the dataset");
  }
  for (const LabeledImage& image : dataset.images) {
    if (!seen.contains(image.id)) {
      throw DataError("load_dataset: split.json does not cover id '" + image.id + "'");
    }
  }
  return dataset;
}

}  // namespace tripem
