#include "tripem/sampling.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tripem/errors.hpp"

namespace tripem {

ExtentScore::ExtentScore(int value) : value_(value) {
  if (value < 0 || value >= kNumScores) {
    throw UsageError("ExtentScore: value must be in 0..5");
  }
}

int label_distance(ExtentScore a, ExtentScore b) {
  return std::abs(a.value() - b.value());
}

std::array<int, 3> order_triplet(const std::array<ExtentScore, 3>& labels) {
  const auto d = [&labels](int a, int b) {
    return label_distance(labels[static_cast<std::size_t>(a)],
                          labels[static_cast<std::size_t>(b)]);
  };
  // A valid role assignment is exactly a chain d(a,n) <= d(a,f) <= d(n,f);
  // scanning (a, n) in lexicographic order yields the smallest one.
  for (int a = 0; a < 3; ++a) {
    for (int n = 0; n < 3; ++n) {
      if (n == a) continue;
      const int f = 3 - a - n;
      if (d(a, n) <= d(a, f) && d(a, f) <= d(n, f)) return {a, n, f};
    }
  }
  throw Error("order_triplet: no valid ordering exists");  // unreachable
}

namespace {

std::array<std::size_t, 3> draw_distinct3(std::size_t n, Rng& rng) {
  const std::size_t i = rng.index(n);
  std::size_t j = rng.index(n);
  while (j == i) j = rng.index(n);
  std::size_t k = rng.index(n);
  while (k == i || k == j) k = rng.index(n);
  return {i, j, k};
}

}  // namespace

Triplet sample_uniform(std::span<const ExtentScore> labels, Rng& rng) {
  if (labels.size() < 3) throw UsageError("sample_uniform: need at least 3 images");
  const auto idx = draw_distinct3(labels.size(), rng);
  const std::array<ExtentScore, 3> drawn = {labels[idx[0]], labels[idx[1]], labels[idx[2]]};
  const std::array<int, 3> roles = order_triplet(drawn);
  return {static_cast<int>(idx[static_cast<std::size_t>(roles[0])]),
          static_cast<int>(idx[static_cast<std::size_t>(roles[1])]),
          static_cast<int>(idx[static_cast<std::size_t>(roles[2])])};
}

Triplet sample_extent(std::span<const ExtentScore> labels, Rng& rng) {
  const std::size_t n = labels.size();
  if (n < 3) throw UsageError("sample_extent: need at least 3 images");

  std::array<int, kNumScores> counts{};
  for (const ExtentScore& s : labels) ++counts[static_cast<std::size_t>(s.value())];
  const bool has_pair =
      std::any_of(counts.begin(), counts.end(), [](int c) { return c >= 2; });
  const bool all_same =
      std::any_of(counts.begin(), counts.end(),
                  [n](int c) { return static_cast<std::size_t>(c) == n; });
  if (!has_pair || all_same) {
    throw UsageError(
        "sample_extent: labels admit no (same-score, different-score) choice");
  }

  for (int attempt = 0; attempt < 100; ++attempt) {
    const std::size_t anchor = rng.index(n);
    const int anchor_score = labels[anchor].value();
    if (counts[static_cast<std::size_t>(anchor_score)] < 2) continue;  // redraw the anchor

    // Near: uniform over the anchor's score group, excluding the anchor.
    std::vector<std::size_t> same;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != anchor && labels[i].value() == anchor_score) same.push_back(i);
    }
    const std::size_t near = same[rng.index(same.size())];

    // Far: weight every different-score image by its label distance.
    std::vector<double> weights(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] = static_cast<double>(label_distance(labels[i], labels[anchor]));
    }
    const std::size_t far = rng.weighted_index(weights);
    return {static_cast<int>(anchor), static_cast<int>(near), static_cast<int>(far)};
  }
  throw SamplingError("sample_extent: no anchor with a same-score partner in 100 attempts");
}

std::string to_string(TestScheme scheme) {
  switch (scheme) {
    case TestScheme::kAllDiff: return "all_diff";
    case TestScheme::kGe1: return "ge1";
    case TestScheme::kGe2: return "ge2";
    case TestScheme::kGe3: return "ge3";
    case TestScheme::kGe4: return "ge4";
  }
  throw UsageError("to_string: unknown test scheme");
}

TestScheme scheme_from_string(const std::string& name) {
  for (TestScheme s : kAllSchemes) {
    if (to_string(s) == name) return s;
  }
  throw UsageError("unknown test scheme '" + name + "'");
}

namespace {

// Smallest score counted as "high" for the threshold schemes.
int high_threshold(TestScheme scheme) {
  switch (scheme) {
    case TestScheme::kGe1: return 1;
    case TestScheme::kGe2: return 2;
    case TestScheme::kGe3: return 3;
    case TestScheme::kGe4: return 4;
    default: throw UsageError("high_threshold: scheme has no threshold");
  }
}

}  // namespace

std::vector<Triplet> select_test_triplets(TestScheme scheme,
                                          std::span<const ExtentScore> labels, int count,
                                          Rng& rng) {
  if (count <= 0) throw UsageError("select_test_triplets: count must be positive");
  const std::size_t n = labels.size();
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(count));

  if (scheme == TestScheme::kAllDiff) {
    // Two images sharing a score against one with any other score.
    std::array<int, kNumScores> counts{};
    for (const ExtentScore& s : labels) ++counts[static_cast<std::size_t>(s.value())];
    const int distinct = static_cast<int>(
        std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }));
    std::vector<std::size_t> anchors;  // images whose score group has a partner
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[static_cast<std::size_t>(labels[i].value())] >= 2) anchors.push_back(i);
    }
    if (anchors.empty() || distinct < 2) {
      throw UsageError("select_test_triplets: scheme all_diff has an empty group");
    }
    for (int t = 0; t < count; ++t) {
      const std::size_t anchor = anchors[rng.index(anchors.size())];
      const int score = labels[anchor].value();
      std::vector<std::size_t> same;
      std::vector<std::size_t> diff;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i].value() == score) {
          if (i != anchor) same.push_back(i);
        } else {
          diff.push_back(i);
        }
      }
      out.push_back({static_cast<int>(anchor), static_cast<int>(same[rng.index(same.size())]),
                     static_cast<int>(diff[rng.index(diff.size())])});
    }
    return out;
  }

  const int threshold = high_threshold(scheme);
  std::vector<std::size_t> low;
  std::vector<std::size_t> high;
  for (std::size_t i = 0; i < n; ++i) {
    (labels[i].value() < threshold ? low : high).push_back(i);
  }
  if (low.size() < 2 || high.empty()) {
    throw UsageError("select_test_triplets: scheme " + to_string(scheme) +
                     " has an empty group");
  }
  for (int t = 0; t < count; ++t) {
    const std::size_t anchor = low[rng.index(low.size())];
    std::size_t near = low[rng.index(low.size())];
    while (near == anchor) near = low[rng.index(low.size())];
    const std::size_t far = high[rng.index(high.size())];
    out.push_back({static_cast<int>(anchor), static_cast<int>(near), static_cast<int>(far)});
  }
  return out;
}

std::vector<Triplet> sample_mixed_label_triplets(std::span<const ExtentScore> labels,
                                                 int count, Rng& rng) {
  if (count <= 0) throw UsageError("sample_mixed_label_triplets: count must be positive");
  if (labels.size() < 3) {
    throw UsageError("sample_mixed_label_triplets: need at least 3 images");
  }
  bool mixed = false;
  for (const ExtentScore& s : labels) {
    if (s.value() != labels[0].value()) {
      mixed = true;
      break;
    }
  }
  if (!mixed) {
    throw UsageError("sample_mixed_label_triplets: all labels are equal");
  }

  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const auto idx = draw_distinct3(labels.size(), rng);
    if (labels[idx[0]] == labels[idx[1]] && labels[idx[1]] == labels[idx[2]]) {
      continue;  // same-class triplets carry no ordering information
    }
    const std::array<ExtentScore, 3> drawn = {labels[idx[0]], labels[idx[1]],
                                              labels[idx[2]]};
    const std::array<int, 3> roles = order_triplet(drawn);
    out.push_back({static_cast<int>(idx[static_cast<std::size_t>(roles[0])]),
                   static_cast<int>(idx[static_cast<std::size_t>(roles[1])]),
                   static_cast<int>(idx[static_cast<std::size_t>(roles[2])])});
  }
  return out;
}

void write_triplets(const std::filesystem::path& path, const std::string& scheme,
                    std::span<const Triplet> triplets) {
  std::ofstream out(path);
  if (!out) throw DataError("write_triplets: cannot open " + path.string());
  out << triplets.size() << ' ' << scheme << '\n';
  for (const Triplet& t : triplets) {
    out << t.anchor << ',' << t.near << ',' << t.far << '\n';
  }
  if (!out) throw DataError("write_triplets: write failed for " + path.string());
}

TripletFile read_triplets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_triplets: cannot open " + path.string());
  std::size_t count = 0;
  TripletFile file;
  if (!(in >> count >> file.scheme)) {
    throw DataError("read_triplets: malformed header in " + path.string());
  }
  file.triplets.reserve(count);
  std::string line;
  std::getline(in, line);  // consume the header line end
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) {
      throw DataError("read_triplets: truncated file " + path.string());
    }
    Triplet t;
    char comma1 = 0;
    char comma2 = 0;
    std::istringstream row(line);
    if (!(row >> t.anchor >> comma1 >> t.near >> comma2 >> t.far) || comma1 != ',' ||
        comma2 != ',') {
      throw DataError("read_triplets: malformed triplet line in " + path.string());
    }
    file.triplets.push_back(t);
  }
  return file;
}

}  // namespace tripem
