#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "msi/config.hpp"
#include "msi/datasets.hpp"
#include "msi/interpreter.hpp"

namespace fs = std::filesystem;

namespace {

// Scratch directory shared by the CLI tests; wiped before each test case.
fs::path scratch() {
  static const fs::path dir = fs::temp_directory_path() / "msi_cli_scratch";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& output_file = {}) {
  std::string cmd = std::string("\"") + MSI_CLI_PATH + "\" " + args;
  if (output_file.empty()) {
    cmd += " > /dev/null 2>&1";
  } else {
    cmd += " > \"" + output_file.string() + "\" 2>&1";
  }
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) {
    n += c == '\n' ? 1 : 0;
  }
  return n;
}

std::string gen_args(const fs::path& out, int graphs, std::uint64_t seed) {
  return "gen-data --graphs " + std::to_string(graphs) +
         " --base-size 8 --feature-dim 3 --seed " + std::to_string(seed) +
         " --out \"" + out.string() + "\"";
}

std::string small_train_args(const fs::path& data, const fs::path& out) {
  return "train --data \"" + data.string() + "\" --out \"" + out.string() +
         "\" --epochs 2 --hidden-dim 8 --batch-size 4";
}

}  // namespace

TEST_CASE("gen-data writes deterministic corpora and validates flags") {
  const fs::path dir = scratch();
  const fs::path a = dir / "a.json";
  const fs::path b = dir / "b.json";
  const fs::path log = dir / "stdout.txt";

  CHECK(run_cli(gen_args(a, 8, 5), log) == 0);
  CHECK(slurp(log).find("wrote 8 graphs") != std::string::npos);
  CHECK(run_cli(gen_args(b, 8, 5)) == 0);
  CHECK(slurp(a) == slurp(b));

  CHECK(run_cli(gen_args(dir / "c.json", 8, 6)) == 0);
  CHECK(slurp(a) != slurp(dir / "c.json"));

  CHECK(run_cli(gen_args(dir / "d.json", 3, 0)) == 2);   // odd count
  CHECK(run_cli(gen_args(dir / "e.json", 0, 0)) == 2);   // empty corpus
  CHECK(run_cli("gen-data --graphs 8") == 2);            // --out is required
  CHECK(run_cli("") == 2);                               // subcommand required
  CHECK(run_cli("frobnicate") == 2);
}

TEST_CASE("train/eval/explain round trip through the filesystem") {
  const fs::path dir = scratch();
  const fs::path data = dir / "data.json";
  const fs::path out = dir / "run";
  REQUIRE(run_cli(gen_args(data, 12, 1)) == 0);

  const fs::path train_log = dir / "train_stdout.txt";
  REQUIRE(run_cli(small_train_args(data, out), train_log) == 0);
  CHECK(fs::exists(out / "config.txt"));
  CHECK(fs::exists(out / "checkpoint.json"));
  CHECK(fs::exists(out / "train_log.csv"));
  CHECK(slurp(train_log).find("seed 0") != std::string::npos);
  CHECK(slurp(out / "config.txt").find("hidden_dim=8") != std::string::npos);
  CHECK(count_lines(slurp(out / "train_log.csv")) == 3);  // header + 2 epochs

  const fs::path metrics = dir / "metrics.json";
  const fs::path eval_log = dir / "eval_stdout.txt";
  REQUIRE(run_cli("eval --data \"" + data.string() + "\" --checkpoint \"" +
                      (out / "checkpoint.json").string() + "\" --out \"" +
                      metrics.string() + "\"",
                  eval_log) == 0);
  const nlohmann::json report = nlohmann::json::parse(slurp(metrics));
  CHECK(report["seeds"] == nlohmann::json::array({0}));
  CHECK(report["classification_accuracy"].contains("mean"));
  CHECK(report["explanation"].contains("recall"));
  // The same document goes to stdout.
  CHECK(nlohmann::json::parse(slurp(eval_log)) == report);

  const fs::path lines = dir / "explained.jsonl";
  REQUIRE(run_cli("explain --data \"" + data.string() + "\" --checkpoint \"" +
                      (out / "checkpoint.json").string() +
                      "\" --graph-id 0 --graph-id 3 --out \"" + lines.string() + "\"") ==
          0);
  const std::string body = slurp(lines);
  CHECK(count_lines(body) == 2);
  const nlohmann::json first = nlohmann::json::parse(body.substr(0, body.find('\n')));
  CHECK(first["graph_id"] == 0);

  const fs::path dot = dir / "explained.dot";
  REQUIRE(run_cli("explain --data \"" + data.string() + "\" --checkpoint \"" +
                      (out / "checkpoint.json").string() +
                      "\" --graph-id 2 --format dot --out \"" + dot.string() + "\"") ==
          0);
  const std::string dot_text = slurp(dot);
  CHECK(dot_text.find("digraph explanation_2") != std::string::npos);
  CHECK(dot_text.find("style=dashed") != std::string::npos);

  const fs::path all = dir / "all.jsonl";
  REQUIRE(run_cli("explain --data \"" + data.string() + "\" --checkpoint \"" +
                      (out / "checkpoint.json").string() + "\" --all --out \"" +
                      all.string() + "\"") == 0);
  CHECK(count_lines(slurp(all)) == 12);

  SUBCASE("explain argument validation") {
    const std::string base = "explain --data \"" + data.string() +
                             "\" --checkpoint \"" +
                             (out / "checkpoint.json").string() + "\"";
    CHECK(run_cli(base + " --graph-id 99") == 2);
    CHECK(run_cli(base + " --graph-id -1") == 2);
    CHECK(run_cli(base) == 2);                        // neither ids nor --all
    CHECK(run_cli(base + " --graph-id 0 --all") == 2);  // mutually exclusive
    CHECK(run_cli(base + " --graph-id 0 --format svg") == 2);
  }
}

TEST_CASE("train rejects unreadable input and bad overrides") {
  const fs::path dir = scratch();
  CHECK(run_cli("train --data \"" + (dir / "missing.json").string() + "\"") == 2);

  const fs::path data = dir / "data.json";
  REQUIRE(run_cli(gen_args(data, 8, 2)) == 0);
  CHECK(run_cli("train --data \"" + data.string() + "\" --epochs -1") == 2);
  CHECK(run_cli("train --data \"" + data.string() + "\" --keep-ratio 0") == 2);
  CHECK(run_cli("train --data \"" + data.string() + "\" --phi bogus") == 2);
}

TEST_CASE("training with zero epochs checkpoints the raw initialization") {
  const fs::path dir = scratch();
  const fs::path data = dir / "data.json";
  const fs::path out = dir / "run";
  REQUIRE(run_cli(gen_args(data, 8, 3)) == 0);
  REQUIRE(run_cli("train --data \"" + data.string() + "\" --out \"" + out.string() +
                  "\" --epochs 0 --hidden-dim 8") == 0);

  const msi::Checkpoint ck = msi::load_checkpoint((out / "checkpoint.json").string());
  CHECK(ck.step == 0);
  msi::ModelConfig model = ck.config.model;
  model.seed = ck.seed;
  const msi::ParamStore fresh = msi::init_params(3, model);
  CHECK(ck.params.names() == fresh.names());
  for (const std::string& name : fresh.names()) {
    CHECK(ck.params.value(name) == fresh.value(name));
  }
}

TEST_CASE("multi-seed training writes one checkpoint per seed") {
  const fs::path dir = scratch();
  const fs::path data = dir / "data.json";
  const fs::path out = dir / "run";
  REQUIRE(run_cli(gen_args(data, 12, 4)) == 0);
  REQUIRE(run_cli(small_train_args(data, out) + " --seed 0 --seed 1") == 0);
  CHECK(fs::exists(out / "seed0" / "checkpoint.json"));
  CHECK(fs::exists(out / "seed1" / "checkpoint.json"));
  CHECK(fs::exists(out / "config.txt"));

  const fs::path metrics = dir / "metrics.json";
  REQUIRE(run_cli("eval --data \"" + data.string() + "\" --checkpoint \"" +
                  (out / "seed0" / "checkpoint.json").string() + "\" --checkpoint \"" +
                  (out / "seed1" / "checkpoint.json").string() + "\" --out \"" +
                  metrics.string() + "\"") == 0);
  const nlohmann::json report = nlohmann::json::parse(slurp(metrics));
  CHECK(report["seeds"] == nlohmann::json::array({0, 1}));
}

TEST_CASE("eval refuses checkpoints trained under different configs") {
  const fs::path dir = scratch();
  const fs::path data = dir / "data.json";
  REQUIRE(run_cli(gen_args(data, 8, 5)) == 0);
  REQUIRE(run_cli(small_train_args(data, dir / "run_a")) == 0);
  REQUIRE(run_cli("train --data \"" + data.string() + "\" --out \"" +
                  (dir / "run_b").string() +
                  "\" --epochs 2 --hidden-dim 16 --batch-size 4") == 0);
  CHECK(run_cli("eval --data \"" + data.string() + "\" --checkpoint \"" +
                (dir / "run_a" / "checkpoint.json").string() + "\" --checkpoint \"" +
                (dir / "run_b" / "checkpoint.json").string() + "\" --out \"" +
                (dir / "m.json").string() + "\"") == 4);
}

TEST_CASE("mutag0 evaluation demands ground truth for qualifying graphs") {
  const fs::path dir = scratch();

  // A corpus that is all class 1 with no ground-truth annotations: training
  // drives every prediction to class 1, so evaluation must fail loudly
  // rather than score explanations against nothing.
  msi::Ba2MotifsSpec spec;
  spec.num_graphs = 20;
  spec.base_size = 8;
  spec.feature_dim = 3;
  spec.seed = 6;
  msi::Dataset ds = msi::generate_ba2motifs(spec);
  for (msi::Graph& g : ds.graphs) {
    g.label = 1;
    g.gt_edges.reset();
  }
  const fs::path data = dir / "all_ones.json";
  msi::save_dataset(ds, data.string());

  const fs::path out = dir / "run";
  REQUIRE(run_cli("train --data \"" + data.string() + "\" --out \"" + out.string() +
                  "\" --epochs 5 --hidden-dim 8 --batch-size 4 --lr 0.05") == 0);
  CHECK(run_cli("eval --data \"" + data.string() + "\" --checkpoint \"" +
                (out / "checkpoint.json").string() + "\" --protocol mutag0 --out \"" +
                (dir / "m.json").string() + "\"") == 4);
}

TEST_CASE("eval rejects a dataset with a different class count") {
  const fs::path dir = scratch();
  const fs::path data = dir / "data.json";
  const fs::path out = dir / "run";
  REQUIRE(run_cli(gen_args(data, 8, 7)) == 0);
  REQUIRE(run_cli(small_train_args(data, out)) == 0);

  msi::Dataset ds = msi::load_dataset(data.string());
  ds.num_classes = 3;
  const fs::path other = dir / "three_classes.json";
  msi::save_dataset(ds, other.string());
  CHECK(run_cli("eval --data \"" + other.string() + "\" --checkpoint \"" +
                (out / "checkpoint.json").string() + "\" --out \"" +
                (dir / "m.json").string() + "\"") == 4);
}
