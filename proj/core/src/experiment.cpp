#include "tripem/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <utility>

#include <json.hpp>

#include "tripem/errors.hpp"

namespace tripem {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(SamplerKind kind) {
  return kind == SamplerKind::kUniform ? "uniform" : "extent";
}

SamplerKind sampler_from_string(const std::string& name) {
  if (name == "uniform") return SamplerKind::kUniform;
  if (name == "extent") return SamplerKind::kExtent;
  throw ConfigError("unknown sampler '" + name + "'");
}

std::string to_string(LossKind kind) {
  return kind == LossKind::kClipped ? "clipped" : "hinge";
}

LossKind loss_from_string(const std::string& name) {
  if (name == "clipped") return LossKind::kClipped;
  if (name == "hinge") return LossKind::kHinge;
  throw ConfigError("unknown loss '" + name + "'");
}

void TrainConfig::validate() const {
  if (batch_size <= 0) throw ConfigError("TrainConfig: batch_size must be positive");
  if (max_epochs <= 0) throw ConfigError("TrainConfig: max_epochs must be positive");
  if (patience <= 0) throw ConfigError("TrainConfig: patience must be positive");
  if (patience > max_epochs) {
    throw ConfigError("TrainConfig: patience must not exceed max_epochs");
  }
  if (triplets_per_epoch <= 0) {
    throw ConfigError("TrainConfig: triplets_per_epoch must be positive");
  }
  if (val_triplets <= 0) throw ConfigError("TrainConfig: val_triplets must be positive");
  if (eval_triplets_per_scheme <= 0) {
    throw ConfigError("TrainConfig: eval_triplets_per_scheme must be positive");
  }
  if (hinge_offset < 0.0) throw ConfigError("TrainConfig: hinge_offset must be >= 0");
  if (runs <= 0) throw ConfigError("TrainConfig: runs must be positive");
  if (jobs <= 0) throw ConfigError("TrainConfig: jobs must be positive");
  clip.validate();
  model.validate();
}

EarlyStopping::EarlyStopping(int patience)
    : patience_(patience), best_(std::numeric_limits<double>::infinity()) {
  if (patience <= 0) throw UsageError("EarlyStopping: patience must be positive");
}

bool EarlyStopping::observe(double value) {
  ++epochs_seen_;
  if (value < best_) {
    best_ = value;
    best_epoch_ = epochs_seen_;
    stale_ = 0;
    improved_last_ = true;
    return false;
  }
  improved_last_ = false;
  return ++stale_ >= patience_;
}

NetworkParams initial_params(const TrainConfig& config, std::uint64_t run_seed) {
  return NetworkParams::glorot_uniform(config.model, Rng::mix(run_seed, 2));
}

std::vector<Triplet> validation_triplets(const TrainConfig& config,
                                         std::span<const ExtentScore> val_labels,
                                         std::uint64_t run_seed) {
  Rng rng(Rng::mix(run_seed, 4));
  return sample_mixed_label_triplets(val_labels, config.val_triplets, rng);
}

namespace {

std::vector<ExtentScore> labels_of(std::span<const LabeledImage> images) {
  std::vector<ExtentScore> labels;
  labels.reserve(images.size());
  for (const LabeledImage& image : images) labels.push_back(image.score);
  return labels;
}

std::vector<Embedding> embed_all(std::span<const LabeledImage> images,
                                 const NetworkParams& params, const ModelConfig& model) {
  std::vector<Embedding> out;
  out.reserve(images.size());
  for (const LabeledImage& image : images) out.push_back(embed(image.pixels, params, model));
  return out;
}

void scale_params(NetworkParams& params, double factor) {
  for (Tensor* t : params.tensors()) {
    for (double& v : t->values()) v *= factor;
  }
}

void check_sampler_feasible(const TrainConfig& config,
                            std::span<const ExtentScore> labels) {
  if (labels.size() < 3) {
    throw ConfigError("train: need at least 3 training images");
  }
  if (config.sampler == SamplerKind::kExtent) {
    std::array<int, kNumScores> counts{};
    for (const ExtentScore& s : labels) ++counts[static_cast<std::size_t>(s.value())];
    const bool has_pair =
        std::any_of(counts.begin(), counts.end(), [](int c) { return c >= 2; });
    const bool all_same = std::any_of(counts.begin(), counts.end(), [&](int c) {
      return static_cast<std::size_t>(c) == labels.size();
    });
    if (!has_pair || all_same) {
      throw ConfigError("train: extent sampler is infeasible on the training labels");
    }
  }
}

}  // namespace

RunResult train(const TrainConfig& config, std::span<const LabeledImage> train_images,
                std::span<const LabeledImage> val_images, std::uint64_t run_seed) {
  config.validate();
  if (train_images.empty() || val_images.empty()) {
    throw UsageError("train: empty training or validation split");
  }
  const std::vector<ExtentScore> train_labels = labels_of(train_images);
  const std::vector<ExtentScore> val_labels = labels_of(val_images);
  check_sampler_feasible(config, train_labels);

  bool val_mixed = false;
  for (const ExtentScore& s : val_labels) {
    if (s.value() != val_labels[0].value()) {
      val_mixed = true;
      break;
    }
  }
  if (val_labels.size() < 3 || !val_mixed) {
    throw ConfigError("train: validation labels cannot form mixed-label triplets");
  }

  const std::vector<Triplet> val_set = validation_triplets(config, val_labels, run_seed);
  NetworkParams params = initial_params(config, run_seed);
  AdamState adam = AdamState::zeros(params);

  RunResult result;
  result.untrained_val_violations =
      violation_rate(embed_all(val_images, params, config.model), val_set);

  EarlyStopping stopper(config.patience);
  NetworkParams best = params;
  Rng sampler_rng(Rng::mix(run_seed, 3));

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    // Fresh triplets every epoch.
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(config.triplets_per_epoch));
    for (int t = 0; t < config.triplets_per_epoch; ++t) {
      triplets.push_back(config.sampler == SamplerKind::kUniform
                             ? sample_uniform(train_labels, sampler_rng)
                             : sample_extent(train_labels, sampler_rng));
    }

    double epoch_loss_sum = 0.0;
    for (std::size_t start = 0; start < triplets.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(triplets.size(), start + static_cast<std::size_t>(config.batch_size));
      NetworkParams grads = NetworkParams::zeros(config.model);
      double batch_loss = 0.0;

      for (std::size_t t = start; t < stop; ++t) {
        const Triplet& triplet = triplets[t];
        const Tensor& anchor = train_images[static_cast<std::size_t>(triplet.anchor)].pixels;
        const Tensor& near = train_images[static_cast<std::size_t>(triplet.near)].pixels;
        const Tensor& far = train_images[static_cast<std::size_t>(triplet.far)].pixels;

        const ForwardCache ca = forward_cached(anchor, params, config.model);
        const ForwardCache cn = forward_cached(near, params, config.model);
        const ForwardCache cf = forward_cached(far, params, config.model);

        double loss = 0.0;
        TripletGrad up;
        if (config.loss == LossKind::kClipped) {
          loss = clipped_triplet_loss(ca.embedding, cn.embedding, cf.embedding, config.clip);
          up = clipped_loss_grad(ca.embedding, cn.embedding, cf.embedding, config.clip);
        } else {
          loss = hinge_triplet_loss(ca.embedding, cn.embedding, cf.embedding,
                                    config.hinge_offset);
          up = hinge_loss_grad(ca.embedding, cn.embedding, cf.embedding,
                               config.hinge_offset);
        }
        batch_loss += loss;
        backward_branch(anchor, ca, up.anchor, params, config.model, grads);
        backward_branch(near, cn, up.near, params, config.model, grads);
        backward_branch(far, cf, up.far, params, config.model, grads);
      }

      if (!std::isfinite(batch_loss)) {
        throw TrainingError("train: non-finite loss in epoch " + std::to_string(epoch));
      }
      scale_params(grads, 1.0 / static_cast<double>(stop - start));
      adam_step(params, grads, adam, config.adam);
      epoch_loss_sum += batch_loss;
    }

    const double violations =
        violation_rate(embed_all(val_images, params, config.model), val_set);
    result.history.push_back(
        {epoch_loss_sum / static_cast<double>(triplets.size()), violations});
    result.epochs_used = epoch;

    const bool stop_now = stopper.observe(violations);
    if (stopper.improved_last()) best = params;
    if (stop_now) break;
  }

  result.best_params = std::move(best);
  result.best_epoch = stopper.best_epoch();
  result.val_violations = stopper.best();
  return result;
}

SchemeViolations evaluate(const NetworkParams& params, const ModelConfig& model,
                          std::span<const LabeledImage> images, int triplets_per_scheme,
                          std::uint64_t seed) {
  if (images.empty()) throw UsageError("evaluate: no images");
  if (triplets_per_scheme <= 0) {
    throw UsageError("evaluate: triplets_per_scheme must be positive");
  }
  const std::vector<ExtentScore> labels = labels_of(images);
  const std::vector<Embedding> embeddings = embed_all(images, params, model);

  SchemeViolations out;
  for (std::size_t s = 0; s < kAllSchemes.size(); ++s) {
    Rng rng(Rng::mix(seed, s));
    try {
      const std::vector<Triplet> triplets =
          select_test_triplets(kAllSchemes[s], labels, triplets_per_scheme, rng);
      out.by_scheme[s] = violation_rate(embeddings, triplets);
    } catch (const UsageError&) {
      out.by_scheme[s] = std::nullopt;  // group empty for these labels
    }
  }
  return out;
}

std::uint64_t derive_eval_seed(std::uint64_t config_seed) {
  return Rng::mix(config_seed, 99);
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median: empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double interquartile_range(std::vector<double> values) {
  if (values.empty()) throw UsageError("interquartile_range: empty list");
  if (values.size() == 1) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const std::size_t half = (n + 1) / 2;
  const std::vector<double> lower(values.begin(),
                                  values.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<double> upper(values.end() - static_cast<std::ptrdiff_t>(half),
                                  values.end());
  return median(upper) - median(lower);
}

namespace {

// Median / IQR per scheme over the completed runs; nullopt when no run has
// the scheme available.
void aggregate_schemes(const std::vector<RunRecord>& records, EvalReport& report) {
  for (std::size_t s = 0; s < kAllSchemes.size(); ++s) {
    std::vector<double> trained;
    std::vector<double> untrained;
    for (const RunRecord& rec : records) {
      if (rec.aborted) continue;
      if (rec.test.by_scheme[s]) trained.push_back(*rec.test.by_scheme[s]);
      if (rec.untrained_test.by_scheme[s]) untrained.push_back(*rec.untrained_test.by_scheme[s]);
    }
    report.median_test.by_scheme[s] =
        trained.empty() ? std::nullopt : std::optional<double>(median(trained));
    report.iqr_test.by_scheme[s] =
        trained.empty() ? std::nullopt
                        : std::optional<double>(interquartile_range(trained));
    report.median_untrained_test.by_scheme[s] =
        untrained.empty() ? std::nullopt : std::optional<double>(median(untrained));
  }
}

}  // namespace

ExperimentResult run_experiment(const TrainConfig& config,
                                std::span<const std::string> train_group_ids,
                                std::span<const std::string> test_ids,
                                const Dataset& dataset) {
  config.validate();
  if (train_group_ids.size() < 4) {
    throw UsageError("run_experiment: training group needs at least 4 images");
  }
  if (test_ids.empty()) throw UsageError("run_experiment: empty test set");

  const std::vector<LabeledImage> test_images = dataset.subset(test_ids);
  const std::uint64_t eval_seed = derive_eval_seed(config.seed);

  struct RunOutput {
    RunRecord record;
    std::optional<NetworkParams> best_params;
  };

  const auto run_one = [&](int r) -> RunOutput {
    RunOutput out;
    out.record.run = r;
    const std::uint64_t run_seed = Rng::mix(config.seed, 1000 + static_cast<std::uint64_t>(r));

    // Fresh half split of the training group for this run.
    std::vector<std::string> ids(train_group_ids.begin(), train_group_ids.end());
    Rng shuffle_rng(Rng::mix(run_seed, 1));
    shuffle_rng.shuffle(ids);
    const std::size_t half = (ids.size() + 1) / 2;
    const std::vector<LabeledImage> train_images =
        dataset.subset(std::span(ids).first(half));
    const std::vector<LabeledImage> val_images =
        dataset.subset(std::span(ids).subspan(half));

    const NetworkParams init = initial_params(config, run_seed);
    out.record.untrained_test = evaluate(init, config.model, test_images,
                                         config.eval_triplets_per_scheme, eval_seed);
    try {
      RunResult result = train(config, train_images, val_images, run_seed);
      out.record.epochs_used = result.epochs_used;
      out.record.best_epoch = result.best_epoch;
      out.record.val_violations = result.val_violations;
      out.record.untrained_val_violations = result.untrained_val_violations;
      out.record.history = std::move(result.history);
      out.record.test = evaluate(result.best_params, config.model, test_images,
                                 config.eval_triplets_per_scheme, eval_seed);
      out.best_params = std::move(result.best_params);
    } catch (const TrainingError& e) {
      out.record.aborted = true;
      out.record.abort_reason = e.what();
    } catch (const SamplingError& e) {
      out.record.aborted = true;
      out.record.abort_reason = e.what();
    }
    return out;
  };

  std::vector<RunOutput> outputs(static_cast<std::size_t>(config.runs));
  for (int start = 0; start < config.runs; start += config.jobs) {
    const int stop = std::min(config.runs, start + config.jobs);
    std::vector<std::future<RunOutput>> futures;
    futures.reserve(static_cast<std::size_t>(stop - start));
    for (int r = start; r < stop; ++r) {
      futures.push_back(std::async(std::launch::async, run_one, r));
    }
    for (int r = start; r < stop; ++r) {
      outputs[static_cast<std::size_t>(r)] = futures[static_cast<std::size_t>(r - start)].get();
    }
  }

  EvalReport report;
  report.eval_seed = eval_seed;
  std::vector<double> epochs;
  std::vector<double> vals;
  std::vector<double> untrained_vals;
  int best_run = -1;
  double best_val = std::numeric_limits<double>::infinity();
  for (RunOutput& out : outputs) {
    if (!out.record.aborted) {
      ++report.completed;
      epochs.push_back(static_cast<double>(out.record.epochs_used));
      vals.push_back(out.record.val_violations);
      untrained_vals.push_back(out.record.untrained_val_violations);
      if (out.record.val_violations < best_val) {
        best_val = out.record.val_violations;
        best_run = out.record.run;
      }
    }
    report.runs.push_back(std::move(out.record));
  }
  if (report.completed == 0) {
    throw TrainingError("run_experiment: every run aborted (last: " +
                        report.runs.back().abort_reason + ")");
  }
  aggregate_schemes(report.runs, report);
  report.median_epochs = median(epochs);
  report.median_val = median(vals);
  report.iqr_val = interquartile_range(vals);
  report.median_untrained_val = median(untrained_vals);
  report.best_run = best_run;

  ExperimentResult result{std::move(report),
                          std::move(*outputs[static_cast<std::size_t>(best_run)].best_params)};
  return result;
}

std::vector<EmbeddingRow> embed_dataset(const NetworkParams& params,
                                        const ModelConfig& model,
                                        std::span<const LabeledImage> images) {
  std::vector<EmbeddingRow> rows;
  rows.reserve(images.size());
  for (const LabeledImage& image : images) {
    rows.push_back({image.id, image.score.value(), embed(image.pixels, params, model)});
  }
  return rows;
}

// --- report files ---------------------------------------------------------------

namespace {

std::ofstream open_out(const std::filesystem::path& path, const char* what) {
  std::ofstream out(path);
  if (!out) throw DataError(std::string(what) + ": cannot open " + path.string());
  return out;
}

ordered_json scheme_json(const SchemeViolations& v) {
  ordered_json j;
  for (std::size_t s = 0; s < kAllSchemes.size(); ++s) {
    if (v.by_scheme[s]) {
      j[to_string(kAllSchemes[s])] = *v.by_scheme[s];
    } else {
      j[to_string(kAllSchemes[s])] = nullptr;
    }
  }
  return j;
}

ordered_json config_json(const TrainConfig& config) {
  ordered_json j;
  j["seed"] = config.seed;
  j["runs"] = config.runs;
  j["jobs"] = config.jobs;
  j["batch_size"] = config.batch_size;
  j["max_epochs"] = config.max_epochs;
  j["patience"] = config.patience;
  j["triplets_per_epoch"] = config.triplets_per_epoch;
  j["val_triplets"] = config.val_triplets;
  j["eval_triplets_per_scheme"] = config.eval_triplets_per_scheme;
  j["sampler"] = to_string(config.sampler);
  j["loss"] = to_string(config.loss);
  j["clip"] = ordered_json{{"lower", config.clip.lower}, {"upper", config.clip.upper}};
  j["hinge_offset"] = config.hinge_offset;
  j["adam"] = ordered_json{{"learning_rate", config.adam.learning_rate},
                           {"beta1", config.adam.beta1},
                           {"beta2", config.adam.beta2},
                           {"epsilon", config.adam.epsilon}};
  j["model"] = ordered_json{
      {"schedule", config.model.schedule == FilterSchedule::kFixed ? "fixed" : "increasing"},
      {"fixed_filters", config.model.fixed_filters},
      {"num_layers", config.model.num_layers},
      {"embed_dim", config.model.embed_dim},
      {"input_height", config.model.input_height},
      {"input_width", config.model.input_width}};
  return j;
}

}  // namespace

void write_report_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out = open_out(path, "write_report_csv");
  out << "scheme,run,violations\n" << std::setprecision(10);
  for (TestScheme scheme : kAllSchemes) {
    for (const RunRecord& rec : report.runs) {
      if (rec.aborted || !rec.test[scheme]) continue;
      out << to_string(scheme) << ',' << rec.run << ',' << *rec.test[scheme] << '\n';
    }
  }
}

void write_history_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out = open_out(path, "write_history_csv");
  out << "run,epoch,train_loss,val_violations\n" << std::setprecision(10);
  for (const RunRecord& rec : report.runs) {
    for (std::size_t e = 0; e < rec.history.size(); ++e) {
      out << rec.run << ',' << e + 1 << ',' << rec.history[e].train_loss << ','
          << rec.history[e].val_violations << '\n';
    }
  }
}

void write_summary_json(const std::filesystem::path& path, const TrainConfig& config,
                        const EvalReport& report) {
  ordered_json j;
  j["config"] = config_json(config);
  j["eval_seed"] = report.eval_seed;

  ordered_json runs = ordered_json::array();
  for (const RunRecord& rec : report.runs) {
    ordered_json r;
    r["run"] = rec.run;
    r["aborted"] = rec.aborted;
    if (rec.aborted) {
      r["abort_reason"] = rec.abort_reason;
    } else {
      r["epochs_used"] = rec.epochs_used;
      r["best_epoch"] = rec.best_epoch;
      r["val_violations"] = rec.val_violations;
      r["untrained_val_violations"] = rec.untrained_val_violations;
      r["test"] = scheme_json(rec.test);
      r["untrained_test"] = scheme_json(rec.untrained_test);
    }
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);

  j["medians"] = ordered_json{{"epochs", report.median_epochs},
                              {"val_violations", report.median_val},
                              {"untrained_val_violations", report.median_untrained_val},
                              {"test", scheme_json(report.median_test)},
                              {"untrained_test", scheme_json(report.median_untrained_test)}};
  j["iqr"] = ordered_json{{"val_violations", report.iqr_val},
                          {"test", scheme_json(report.iqr_test)}};
  j["completed_runs"] = report.completed;
  j["aborted_runs"] = static_cast<int>(report.runs.size()) - report.completed;
  j["best_run"] = report.best_run;

  std::ofstream out = open_out(path, "write_summary_json");
  out << j.dump(2) << '\n';
}

void write_embedding_csv(const std::filesystem::path& path,
                         std::span<const EmbeddingRow> rows) {
  std::ofstream out = open_out(path, "write_embedding_csv");
  out << "id,score";
  const std::size_t dims = rows.empty() ? 0 : rows.front().coords.size();
  for (std::size_t d = 1; d <= dims; ++d) out << ",e" << d;
  out << '\n' << std::setprecision(17);
  for (const EmbeddingRow& row : rows) {
    out << row.id << ',' << row.score;
    for (double c : row.coords) out << ',' << c;
    out << '\n';
  }
}

void write_config_json(const std::filesystem::path& path, const TrainConfig& config) {
  std::ofstream out = open_out(path, "write_config_json");
  out << config_json(config).dump(2) << '\n';
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&key](const char* k) { return key == k; }) == known.end()) {
      throw ConfigError("config: unknown key '" + where + key + "'");
    }
  }
}

}  // namespace

TrainConfig train_config_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  TrainConfig config;
  // Input dimensions default to "take them from the data".
  config.model.input_height = -1;
  config.model.input_width = -1;

  reject_unknown_keys(j,
                      {"seed", "runs", "jobs", "batch_size", "max_epochs", "patience",
                       "triplets_per_epoch", "val_triplets", "eval_triplets_per_scheme",
                       "sampler", "loss", "clip", "hinge_offset", "adam", "model"},
                      "");
  try {
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("runs")) config.runs = j["runs"].get<int>();
    if (j.contains("jobs")) config.jobs = j["jobs"].get<int>();
    if (j.contains("batch_size")) config.batch_size = j["batch_size"].get<int>();
    if (j.contains("max_epochs")) config.max_epochs = j["max_epochs"].get<int>();
    if (j.contains("patience")) config.patience = j["patience"].get<int>();
    if (j.contains("triplets_per_epoch")) {
      config.triplets_per_epoch = j["triplets_per_epoch"].get<int>();
    }
    if (j.contains("val_triplets")) config.val_triplets = j["val_triplets"].get<int>();
    if (j.contains("eval_triplets_per_scheme")) {
      config.eval_triplets_per_scheme = j["eval_triplets_per_scheme"].get<int>();
    }
    if (j.contains("sampler")) config.sampler = sampler_from_string(j["sampler"].get<std::string>());
    if (j.contains("loss")) config.loss = loss_from_string(j["loss"].get<std::string>());
    if (j.contains("hinge_offset")) config.hinge_offset = j["hinge_offset"].get<double>();
    if (j.contains("clip")) {
      const json& c = j["clip"];
      reject_unknown_keys(c, {"lower", "upper"}, "clip.");
      if (c.contains("lower")) config.clip.lower = c["lower"].get<double>();
      if (c.contains("upper")) config.clip.upper = c["upper"].get<double>();
    }
    if (j.contains("adam")) {
      const json& a = j["adam"];
      reject_unknown_keys(a, {"learning_rate", "beta1", "beta2", "epsilon"}, "adam.");
      if (a.contains("learning_rate")) config.adam.learning_rate = a["learning_rate"].get<double>();
      if (a.contains("beta1")) config.adam.beta1 = a["beta1"].get<double>();
      if (a.contains("beta2")) config.adam.beta2 = a["beta2"].get<double>();
      if (a.contains("epsilon")) config.adam.epsilon = a["epsilon"].get<double>();
    }
    if (j.contains("model")) {
      const json& m = j["model"];
      reject_unknown_keys(m,
                          {"schedule", "fixed_filters", "num_layers", "embed_dim",
                           "input_height", "input_width"},
                          "model.");
      if (m.contains("schedule")) {
        const std::string s = m["schedule"].get<std::string>();
        if (s == "fixed") {
          config.model.schedule = FilterSchedule::kFixed;
        } else if (s == "increasing") {
          config.model.schedule = FilterSchedule::kIncreasing;
        } else {
          throw ConfigError("config: unknown schedule '" + s + "'");
        }
      }
      if (m.contains("fixed_filters")) config.model.fixed_filters = m["fixed_filters"].get<int>();
      if (m.contains("num_layers")) config.model.num_layers = m["num_layers"].get<int>();
      if (m.contains("embed_dim")) config.model.embed_dim = m["embed_dim"].get<int>();
      if (m.contains("input_height")) config.model.input_height = m["input_height"].get<int>();
      if (m.contains("input_width")) config.model.input_width = m["input_width"].get<int>();
    }
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value type in " + path.string() + ": " + e.what());
  }
  return config;
}

}  // namespace tripem
