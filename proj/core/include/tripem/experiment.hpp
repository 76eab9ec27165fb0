#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tripem/data.hpp"
#include "tripem/loss.hpp"
#include "tripem/nn.hpp"
#include "tripem/sampling.hpp"

namespace tripem {

enum class SamplerKind { kUniform, kExtent };
enum class LossKind { kClipped, kHinge };

std::string to_string(SamplerKind kind);
SamplerKind sampler_from_string(const std::string& name);
std::string to_string(LossKind kind);
LossKind loss_from_string(const std::string& name);

struct TrainConfig {
  int batch_size = 15;          // triplets per optimizer step
  int max_epochs = 100;
  int patience = 10;            // epochs without a strictly better validation value
  int triplets_per_epoch = 500;
  int val_triplets = 2000;      // fixed seeded validation set size
  int eval_triplets_per_scheme = 5000;
  SamplerKind sampler = SamplerKind::kExtent;
  LossKind loss = LossKind::kClipped;
  ClipBounds clip;              // [-0.01, 0.1]
  double hinge_offset = 0.01;
  AdamConfig adam;
  ModelConfig model;
  std::uint64_t seed = 0;
  int runs = 10;
  int jobs = 1;

  void validate() const;
};

// Tracks the best validation value; signals a stop once `patience` epochs
// pass without strict improvement of the best.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  // Returns true when training should stop after this epoch.
  bool observe(double value);

  bool improved_last() const { return improved_last_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }
  int epochs_seen() const { return epochs_seen_; }

 private:
  int patience_;
  double best_;
  int best_epoch_ = 0;
  int epochs_seen_ = 0;
  int stale_ = 0;
  bool improved_last_ = false;
};

struct EpochStats {
  double train_loss = 0.0;      // mean per-triplet loss over the epoch
  double val_violations = 0.0;  // percent on the fixed validation set
};

struct RunResult {
  NetworkParams best_params;
  int epochs_used = 0;
  int best_epoch = 0;
  double val_violations = 0.0;            // at the best epoch
  double untrained_val_violations = 0.0;  // initial weights, same validation set
  std::vector<EpochStats> history;
};

// Initial weights for a run; run_experiment uses the same derivation for the
// untrained baseline.
NetworkParams initial_params(const TrainConfig& config, std::uint64_t run_seed);

// The per-run seeded validation triplet set (mixed-label uniform).
std::vector<Triplet> validation_triplets(const TrainConfig& config,
                                         std::span<const ExtentScore> val_labels,
                                         std::uint64_t run_seed);

// Trains one network: per epoch, freshly sampled training triplets and
// mini-batch Adam steps, then the violation rate on the fixed validation
// set; stops at max_epochs or when patience runs out, and returns the
// weights of the best epoch. Throws TrainingError when the loss turns
// non-finite, ConfigError when the sampler cannot run on the labels.
RunResult train(const TrainConfig& config, std::span<const LabeledImage> train_images,
                std::span<const LabeledImage> val_images, std::uint64_t run_seed);

// Violation percentage per test scheme; schemes whose groups are empty on
// the given labels are reported as unavailable rather than failing.
struct SchemeViolations {
  std::array<std::optional<double>, kAllSchemes.size()> by_scheme;

  std::optional<double>& operator[](TestScheme scheme) {
    return by_scheme[static_cast<std::size_t>(scheme)];
  }
  const std::optional<double>& operator[](TestScheme scheme) const {
    return by_scheme[static_cast<std::size_t>(scheme)];
  }
};

// Embeds every image once, then scores seeded scheme-specific triplet sets.
// Pure: params are untouched, identical inputs give identical reports.
SchemeViolations evaluate(const NetworkParams& params, const ModelConfig& model,
                          std::span<const LabeledImage> images, int triplets_per_scheme,
                          std::uint64_t seed);

struct RunRecord {
  int run = 0;
  bool aborted = false;
  std::string abort_reason;
  int epochs_used = 0;
  int best_epoch = 0;
  double val_violations = 0.0;
  double untrained_val_violations = 0.0;
  SchemeViolations test;
  SchemeViolations untrained_test;
  std::vector<EpochStats> history;
};

struct EvalReport {
  std::vector<RunRecord> runs;
  // Medians and Tukey-hinge IQRs over the completed runs.
  SchemeViolations median_test;
  SchemeViolations iqr_test;
  SchemeViolations median_untrained_test;
  double median_epochs = 0.0;
  double median_val = 0.0;
  double iqr_val = 0.0;
  double median_untrained_val = 0.0;
  int completed = 0;
  int best_run = -1;  // completed run with the lowest validation violations
  std::uint64_t eval_seed = 0;
};

struct ExperimentResult {
  EvalReport report;
  NetworkParams best_params;  // weights of the best run
};

// The full protocol: per run a fresh half split of the training group
// (run-specific seed), training, and evaluation of both the trained and the
// untrained network on the fixed test set under all schemes. Aborted runs
// are recorded and excluded from the medians. Runs execute `jobs` at a
// time; results do not depend on the worker count.
ExperimentResult run_experiment(const TrainConfig& config,
                                std::span<const std::string> train_group_ids,
                                std::span<const std::string> test_ids,
                                const Dataset& dataset);

// Seed for the fixed test triplet sets, derived from the config seed.
std::uint64_t derive_eval_seed(std::uint64_t config_seed);

struct EmbeddingRow {
  std::string id;
  int score = 0;
  std::vector<double> coords;
};

// One row per image: id, score and the d embedding coordinates.
std::vector<EmbeddingRow> embed_dataset(const NetworkParams& params,
                                        const ModelConfig& model,
                                        std::span<const LabeledImage> images);

double median(std::vector<double> values);
// Tukey hinges (halves include the middle element for odd counts).
double interquartile_range(std::vector<double> values);

// --- report files -------------------------------------------------------------

// CSV "scheme,run,violations", one row per completed run and scheme.
void write_report_csv(const std::filesystem::path& path, const EvalReport& report);
// CSV "run,epoch,train_loss,val_violations".
void write_history_csv(const std::filesystem::path& path, const EvalReport& report);
// JSON summary: resolved config echo, per-run table, medians and IQRs.
// Contains nothing non-deterministic (no timestamps or host data).
void write_summary_json(const std::filesystem::path& path, const TrainConfig& config,
                        const EvalReport& report);
// CSV "id,score,e1,...,ed".
void write_embedding_csv(const std::filesystem::path& path,
                         std::span<const EmbeddingRow> rows);

// JSON round trip for configuration files; unknown keys are rejected.
TrainConfig train_config_from_json_file(const std::filesystem::path& path);
void write_config_json(const std::filesystem::path& path, const TrainConfig& config);

}  // namespace tripem
