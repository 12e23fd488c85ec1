// Command-line front end: dataset generation, training, evaluation, and
// explanation export. Exit codes: 0 success, 2 bad arguments or unreadable
// or invalid input, 3 training divergence, 4 data/protocol mismatch.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "msi/config.hpp"
#include "msi/datasets.hpp"
#include "msi/errors.hpp"
#include "msi/interpreter.hpp"

namespace fs = std::filesystem;

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw msi::DataError("cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw msi::DataError("write failed for '" + path + "'");
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw msi::ParseError("cannot open '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

struct GenArgs {
  int graphs = 1000;
  int base_size = 20;
  int feature_dim = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen(const GenArgs& a) {
  msi::Ba2MotifsSpec spec;
  spec.num_graphs = a.graphs;
  spec.base_size = a.base_size;
  spec.feature_dim = a.feature_dim;
  spec.seed = a.seed;
  const msi::Dataset ds = msi::generate_ba2motifs(spec);
  msi::save_dataset(ds, a.out);
  std::cout << "wrote " << ds.graphs.size() << " graphs to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string config;
  std::vector<std::string> overrides;  // key=value lines collected from flags
  std::vector<std::uint64_t> seeds;
  std::string out = "out";
};

int run_train(const TrainArgs& a) {
  std::string text = a.config.empty() ? std::string() : slurp(a.config);
  for (const std::string& line : a.overrides) {
    text += line;
    text += '\n';
  }
  const msi::RunConfig cfg = msi::parse_config_text(text);

  const msi::Dataset ds = msi::load_dataset(a.data);
  fs::create_directories(a.out);
  write_text_file((fs::path(a.out) / "config.txt").string(),
                  msi::resolved_config_text(cfg));

  const std::vector<std::uint64_t> seeds = a.seeds.empty()
                                               ? std::vector<std::uint64_t>{0}
                                               : a.seeds;
  for (std::uint64_t seed : seeds) {
    fs::path dir = a.out;
    if (seeds.size() > 1) {
      dir /= "seed" + std::to_string(seed);
      fs::create_directories(dir);
    }
    msi::ModelConfig model = cfg.model;
    model.seed = seed;
    const msi::Split split = msi::split_dataset(ds, cfg.split_ratios, seed);
    const msi::TrainResult result = msi::train(ds, split, model);

    msi::save_checkpoint(result.params, cfg, seed, (dir / "checkpoint.json").string());
    write_text_file((dir / "train_log.csv").string(),
                    msi::training_log_csv(result.log));
    std::cout << "seed " << seed << ": " << result.log.size() << " epochs";
    if (result.best_epoch > 0) {
      std::cout << ", best val accuracy " << result.best_val_accuracy << " at epoch "
                << result.best_epoch;
    }
    std::cout << ", checkpoint " << (dir / "checkpoint.json").string() << "\n";
  }
  return 0;
}

struct EvalArgs {
  std::string data;
  std::vector<std::string> checkpoints;
  std::string protocol = "plain";
  std::string out = "metrics.json";
  bool serial = false;
};

int run_eval(const EvalArgs& a) {
  const msi::Dataset ds = msi::load_dataset(a.data);
  std::vector<msi::Checkpoint> cks;
  for (const std::string& path : a.checkpoints) {
    cks.push_back(msi::load_checkpoint(path));
    if (cks.back().hash != cks.front().hash) {
      throw msi::DataError("checkpoint '" + path + "' was trained under config " +
                           cks.back().hash + ", expected " + cks.front().hash);
    }
  }
  const msi::RunConfig& cfg = cks.front().config;
  if (cfg.model.num_classes != ds.num_classes) {
    throw msi::DataError("checkpoint expects " +
                         std::to_string(cfg.model.num_classes) +
                         " classes, dataset has " + std::to_string(ds.num_classes));
  }
  const msi::Protocol protocol =
      a.protocol == "mutag0" ? msi::Protocol::mutag0 : msi::Protocol::plain;

  std::vector<msi::SeedRun> runs;
  for (msi::Checkpoint& ck : cks) {
    msi::ModelConfig model = cfg.model;
    model.seed = ck.seed;
    const msi::Split split = msi::split_dataset(ds, cfg.split_ratios, ck.seed);
    msi::SeedRun run;
    run.seed = ck.seed;
    run.classification_accuracy = msi::evaluate_classification(
        ds, split.test, ck.params, model, /*parallel=*/!a.serial);
    run.explanation = msi::evaluate_explanation(ds, split.test, ck.params, model,
                                                protocol, /*parallel=*/!a.serial);
    runs.push_back(std::move(run));
  }

  const std::string report =
      msi::metrics_report_json(a.data, cks.front().hash, runs);
  std::cout << report << "\n";
  write_text_file(a.out, report + "\n");
  return 0;
}

struct ExplainArgs {
  std::string data;
  std::string checkpoint;
  std::vector<int> graph_ids;
  bool all = false;
  std::string format = "json";
  std::string out;
};

int run_explain(const ExplainArgs& a) {
  const msi::Dataset ds = msi::load_dataset(a.data);
  msi::Checkpoint ck = msi::load_checkpoint(a.checkpoint);
  msi::ModelConfig model = ck.config.model;
  model.seed = ck.seed;

  std::vector<int> ids = a.graph_ids;
  if (a.all) {
    ids.resize(ds.graphs.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      ids[i] = static_cast<int>(i);
    }
  }
  for (int id : ids) {
    if (id < 0 || id >= static_cast<int>(ds.graphs.size())) {
      throw msi::ArgumentError("graph id " + std::to_string(id) +
                               " out of range [0, " +
                               std::to_string(ds.graphs.size()) + ")");
    }
  }

  std::ostringstream body;
  for (int id : ids) {
    const msi::ExplanationRecord rec =
        msi::explain_graph(ds.graphs[id], id, ck.params, model);
    if (a.format == "dot") {
      body << msi::to_dot(ds.graphs[id], rec);
    } else {
      body << msi::to_json_line(rec) << "\n";
    }
  }
  if (a.out.empty()) {
    std::cout << body.str();
  } else {
    write_text_file(a.out, body.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-explaining graph classifier: edge-weighting mask in front "
               "of a GIN backbone"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen-data", "Generate a BA-2Motifs dataset");
  cmd_gen->add_option("--graphs", gen.graphs, "Number of graphs (even)");
  cmd_gen->add_option("--base-size", gen.base_size, "Nodes in the BA base graph");
  cmd_gen->add_option("--feature-dim", gen.feature_dim, "Node feature width");
  cmd_gen->add_option("--seed", gen.seed, "Generation seed");
  cmd_gen->add_option("--out", gen.out, "Output dataset file")->required();

  TrainArgs train;
  CLI::App* cmd_train = app.add_subcommand("train", "Train on a dataset file");
  cmd_train->add_option("--data", train.data, "Dataset file")->required();
  cmd_train->add_option("--config", train.config, "key=value config file");
  cmd_train->add_option("--seed", train.seeds, "Run seed (repeatable)");
  cmd_train->add_option("--out", train.out, "Output directory");
  // Flag overrides are rendered to key=value lines and appended after the
  // config file so they win; the config parser validates them like any
  // other line.
  double lr = 0, keep_ratio = 0, alpha = 0;
  int epochs = 0, hidden_dim = 0, batch_size = 0, num_layers = 0, num_classes = 0;
  std::string phi, embed_source;
  std::vector<std::pair<CLI::Option*, std::function<std::string()>>> override_specs;
  auto override_opt = [&](const char* flag, std::string key, auto& slot,
                          const char* help) {
    CLI::Option* opt = cmd_train->add_option(flag, slot, help);
    override_specs.emplace_back(opt, [key = std::move(key), &slot]() {
      if constexpr (std::is_same_v<std::decay_t<decltype(slot)>, std::string>) {
        return key + "=" + slot;
      } else if constexpr (std::is_floating_point_v<std::decay_t<decltype(slot)>>) {
        return key + "=" + msi::fmt_double(slot);
      } else {
        return key + "=" + std::to_string(slot);
      }
    });
  };
  override_opt("--epochs", "epochs", epochs, "Training epochs");
  override_opt("--hidden-dim", "hidden_dim", hidden_dim, "Hidden width");
  override_opt("--lr", "lr", lr, "Adam learning rate");
  override_opt("--batch-size", "batch_size", batch_size, "Mini-batch size");
  override_opt("--keep-ratio", "keep_ratio", keep_ratio, "Fraction of edges kept");
  override_opt("--alpha", "alpha", alpha, "Embedding weight coefficient");
  override_opt("--num-layers", "num_layers", num_layers, "GIN layers");
  override_opt("--num-classes", "num_classes", num_classes, "Output classes");
  override_opt("--phi", "phi", phi, "Embedding similarity: gaussian|cosine|linear");
  override_opt("--embed-source", "embed_source", embed_source,
               "shared_first_layer|dedicated_random");

  EvalArgs eval;
  CLI::App* cmd_eval = app.add_subcommand("eval", "Evaluate trained checkpoints");
  cmd_eval->add_option("--data", eval.data, "Dataset file")->required();
  cmd_eval->add_option("--checkpoint", eval.checkpoints, "Checkpoint (repeatable)")
      ->required();
  cmd_eval->add_option("--protocol", eval.protocol, "plain|mutag0")
      ->check(CLI::IsMember({"plain", "mutag0"}));
  cmd_eval->add_option("--out", eval.out, "Metrics report file");
  cmd_eval->add_flag("--serial", eval.serial, "Disable graph-parallel evaluation");

  ExplainArgs explain;
  CLI::App* cmd_explain =
      app.add_subcommand("explain", "Export per-graph explanations");
  cmd_explain->add_option("--data", explain.data, "Dataset file")->required();
  cmd_explain->add_option("--checkpoint", explain.checkpoint, "Checkpoint file")
      ->required();
  CLI::Option* opt_id =
      cmd_explain->add_option("--graph-id", explain.graph_ids, "Graph index (repeatable)");
  CLI::Option* opt_all =
      cmd_explain->add_flag("--all", explain.all, "Explain every graph");
  opt_id->excludes(opt_all);
  cmd_explain->add_option("--format", explain.format, "json|dot")
      ->check(CLI::IsMember({"json", "dot"}));
  cmd_explain->add_option("--out", explain.out, "Output file (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_gen->parsed()) {
      return run_gen(gen);
    }
    if (cmd_train->parsed()) {
      for (const auto& [opt, render] : override_specs) {
        if (opt->count() > 0) {
          train.overrides.push_back(render());
        }
      }
      return run_train(train);
    }
    if (cmd_eval->parsed()) {
      return run_eval(eval);
    }
    if (cmd_explain->parsed()) {
      if (!explain.all && explain.graph_ids.empty()) {
        throw msi::ArgumentError("explain: pass --graph-id or --all");
      }
      return run_explain(explain);
    }
    return 2;
  } catch (const msi::TrainingDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const msi::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
