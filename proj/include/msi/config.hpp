#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "msi/interpreter.hpp"

namespace msi {

// Everything a run needs beyond the dataset itself: model hyperparameters
// plus the train/val/test split ratios.
struct RunConfig {
  ModelConfig model;
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
};

// Flat "key=value" configuration, one setting per line; '#' starts a
// comment and blank lines are skipped. Unknown keys, malformed values, and
// out-of-domain values are ParseErrors naming the line. Keys:
//   alpha, batch_size, embed_source (shared_first_layer|dedicated_random),
//   epochs, hidden_dim, keep_ratio, lr, normalize_embedding_weights
//   (true|false), num_classes, num_layers, phi (gaussian|cosine|linear),
//   test_ratio, train_ratio, val_ratio
// The seed is deliberately not a config key: it arrives per run on the
// command line, so one configuration names one experiment across seeds.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical rendering: every key above (defaults included), sorted, one
// per line. parse(resolved(x)) == x, and the hash is taken over exactly
// this text.
std::string resolved_config_text(const RunConfig& cfg);

// 16 lowercase hex digits of FNV-1a over resolved_config_text.
std::string config_hash(const RunConfig& cfg);

struct Checkpoint {
  ParamStore params;
  RunConfig config;
  std::string hash;  // config hash recorded at save time
  std::uint64_t seed = 0;
  std::int64_t step = 0;
};

// JSON checkpoint: parameter tensors (shape + flat values, names sorted),
// the resolved config text and its hash, the run seed, and the optimizer
// step. Optimizer moments are not persisted. save throws DataError on I/O
// failure; load throws ParseError on malformed files and DataError when
// the embedded config no longer matches the recorded hash.
void save_checkpoint(const ParamStore& ps, const RunConfig& cfg, std::uint64_t seed,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// One trained seed's evaluation results, aggregated across seeds in the
// metrics report.
struct SeedRun {
  std::uint64_t seed = 0;
  double classification_accuracy = 0.0;
  ExplanationReport explanation;
};

// Metrics report document: dataset name, config hash, seeds, mean/std of
// classification accuracy and of the four explanation metrics (population
// std; zero for a single seed), and per-seed qualifying counts.
std::string metrics_report_json(const std::string& dataset_name,
                                const std::string& hash,
                                const std::vector<SeedRun>& runs);

// "epoch,train_loss,val_accuracy" header plus one row per epoch.
std::string training_log_csv(const std::vector<TrainLogEntry>& log);

// Shortest decimal text that round-trips the exact double.
std::string fmt_double(double x);

}  // namespace msi
