#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tripem/rng.hpp"

namespace tripem {

inline constexpr int kNumScores = 6;

// Six-point ordinal extent scale mapping to the affected-fraction
// intervals {0, 1-5%, 6-25%, 26-50%, 51-75%, 76-100%}.
class ExtentScore {
 public:
  ExtentScore() = default;
  explicit ExtentScore(int value);

  int value() const { return value_; }

  friend auto operator<=>(const ExtentScore&, const ExtentScore&) = default;

 private:
  int value_ = 0;
};

// Ground-truth dissimilarity of the simulated rater: absolute score
// difference on the ordinal scale.
int label_distance(ExtentScore a, ExtentScore b);

// Ordered image index triple asserting "anchor is at least as similar to
// near as to far".
struct Triplet {
  int anchor = 0;
  int near = 0;
  int far = 0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// The permutation (anchor, near, far) of {0, 1, 2} a rater ordering the
// three images by similarity would produce: pairwise label distances
// satisfy d(anchor,near) <= d(anchor,far) <= d(near,far). When several
// permutations qualify (tied labels), returns the lexicographically
// smallest.
std::array<int, 3> order_triplet(const std::array<ExtentScore, 3>& labels);

// Three distinct indices drawn uniformly without replacement, with roles
// assigned by order_triplet on their labels.
Triplet sample_uniform(std::span<const ExtentScore> labels, Rng& rng);

// Label-guided selection: anchor uniform over all images, near uniform over
// images sharing the anchor's score, far over different-score images with
// probability proportional to the absolute label difference. Anchors
// without a same-score partner are redrawn (up to 100 attempts).
Triplet sample_extent(std::span<const ExtentScore> labels, Rng& rng);

// Test triplet selection rules. kAllDiff pairs two same-score images
// against one with a different score; kGeN splits at score N: anchor and
// near from scores < N, far from scores >= N.
enum class TestScheme { kAllDiff, kGe1, kGe2, kGe3, kGe4 };

inline constexpr std::array<TestScheme, 5> kAllSchemes = {
    TestScheme::kAllDiff, TestScheme::kGe1, TestScheme::kGe2, TestScheme::kGe3,
    TestScheme::kGe4};

std::string to_string(TestScheme scheme);
TestScheme scheme_from_string(const std::string& name);

std::vector<Triplet> select_test_triplets(TestScheme scheme,
                                          std::span<const ExtentScore> labels, int count,
                                          Rng& rng);

// Uniformly drawn distinct triples whose labels are not all equal, ordered
// by order_triplet. Used for validation sets.
std::vector<Triplet> sample_mixed_label_triplets(std::span<const ExtentScore> labels,
                                                 int count, Rng& rng);

// Triplet set file: a header line "<count> <scheme>" followed by one
// "anchor,near,far" line per triplet.
void write_triplets(const std::filesystem::path& path, const std::string& scheme,
                    std::span<const Triplet> triplets);

struct TripletFile {
  std::string scheme;
  std::vector<Triplet> triplets;
};
TripletFile read_triplets(const std::filesystem::path& path);

}  // namespace tripem
