#include "msi/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "msi/errors.hpp"
#include "msi/seeds.hpp"

namespace msi {

namespace {

Tensor glorot(int rows, int cols, std::mt19937_64& rng) {
  Tensor t(rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& x : t.data) {
    x = (2.0 * uniform01(rng) - 1.0) * limit;
  }
  return t;
}

void add_gin_block(ParamStore& ps, const std::string& prefix, int in_dim,
                   int hidden, std::mt19937_64& rng) {
  ps.add(prefix + ".W1", glorot(in_dim, hidden, rng));
  ps.add(prefix + ".b1", glorot(1, hidden, rng));
  ps.add(prefix + ".W2", glorot(hidden, hidden, rng));
  ps.add(prefix + ".b2", glorot(1, hidden, rng));
}

int argmax_row(const Tensor& logits) {
  int best = 0;
  for (int j = 1; j < logits.cols; ++j) {
    if (logits.at(0, j) > logits.at(0, best)) {
      best = j;
    }
  }
  return best;
}

}  // namespace

ParamStore init_params(int feature_dim, const ModelConfig& cfg) {
  if (feature_dim < 1) {
    throw ArgumentError("init_params: feature_dim must be >= 1");
  }
  if (cfg.hidden_dim < 1 || cfg.num_layers < 1) {
    throw ArgumentError("init_params: hidden_dim and num_layers must be >= 1");
  }
  if (cfg.num_classes < 2) {
    throw ArgumentError("init_params: num_classes must be >= 2");
  }
  std::mt19937_64 rng(derive_seed(cfg.seed, "init"));
  ParamStore ps;
  for (int l = 0; l < cfg.num_layers; ++l) {
    add_gin_block(ps, "gin" + std::to_string(l), l == 0 ? feature_dim : cfg.hidden_dim,
                  cfg.hidden_dim, rng);
  }
  ps.add("readout.W", glorot(cfg.hidden_dim, cfg.num_classes, rng));
  ps.add("readout.b", glorot(1, cfg.num_classes, rng));
  if (cfg.scheme.embed_source == EmbedSource::dedicated_random) {
    // Frozen encoder for the weighting scheme: initialized here, never
    // updated (the scheme runs off-tape, so no gradient ever reaches it).
    add_gin_block(ps, "scheme", feature_dim, cfg.hidden_dim, rng);
  }
  return ps;
}

Var classifier_on_tape(Tape& tape, const Graph& g, const EdgeMask& mask,
                       ParamStore& ps, const ModelConfig& cfg) {
  Var h = tape.input(g.features);
  for (int l = 0; l < cfg.num_layers; ++l) {
    h = gin_layer(tape, h, g, mask, ps, "gin" + std::to_string(l));
  }
  Var pooled = tape.sum_pool(h);
  return tape.add(tape.matmul(pooled, tape.param(ps, "readout.W")),
                  tape.param(ps, "readout.b"));
}

Tensor forward_with_mask(const Graph& g, const EdgeMask& mask, ParamStore& ps,
                         const ModelConfig& cfg) {
  Tape tape;
  return tape.value(classifier_on_tape(tape, g, mask, ps, cfg));
}

Forward forward(const Graph& g, ParamStore& ps, const ModelConfig& cfg,
                const EdgeWeights* cached_structural) {
  Forward out;
  out.mask = msscheme(g, ps, cfg.scheme, cached_structural);
  out.logits = forward_with_mask(g, out.mask, ps, cfg);
  return out;
}

TrainResult train(const Dataset& ds, const Split& split, const ModelConfig& cfg) {
  if (ds.graphs.empty()) {
    throw ArgumentError("train: empty dataset");
  }
  if (split.train.empty()) {
    throw ArgumentError("train: empty train split");
  }
  if (cfg.num_classes != ds.num_classes) {
    throw ArgumentError("train: config expects " + std::to_string(cfg.num_classes) +
                        " classes, dataset has " + std::to_string(ds.num_classes));
  }
  if (cfg.batch_size < 1 || cfg.epochs < 0) {
    throw ArgumentError("train: batch_size must be >= 1 and epochs >= 0");
  }
  const int n_graphs = static_cast<int>(ds.graphs.size());
  for (const std::vector<int>* part : {&split.train, &split.val, &split.test}) {
    for (int idx : *part) {
      if (idx < 0 || idx >= n_graphs) {
        throw ArgumentError("train: split index " + std::to_string(idx) +
                            " out of range");
      }
    }
  }

  TrainResult result;
  ParamStore ps = init_params(ds.feature_dim, cfg);
  if (cfg.epochs == 0) {
    result.params = std::move(ps);
    return result;
  }

  // Structural weights depend only on topology; compute once per train graph.
  std::vector<std::optional<EdgeWeights>> structural(ds.graphs.size());
  for (int idx : split.train) {
    if (!structural[idx] && !ds.graphs[idx].edges.empty()) {
      structural[idx] = psi_normalize(structural_weights(ds.graphs[idx]));
    }
  }

  AdamConfig adam;
  adam.lr = cfg.lr;
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  std::vector<int> order = split.train;
  ParamStore best;
  double best_val = -1.0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_inplace(order, shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t batch_n =
          std::min<std::size_t>(cfg.batch_size, order.size() - start);
      for (std::size_t k = start; k < start + batch_n; ++k) {
        const int idx = order[k];
        const Graph& g = ds.graphs[idx];
        const EdgeWeights* cached = structural[idx] ? &*structural[idx] : nullptr;
        const EdgeMask mask = msscheme(g, ps, cfg.scheme, cached);
        Tape tape;
        Var logits = classifier_on_tape(tape, g, mask, ps, cfg);
        Var loss = tape.softmax_cross_entropy(logits, g.label);
        const double value = tape.value(loss).at(0, 0);
        if (!std::isfinite(value)) {
          throw TrainingDivergence("train: non-finite loss at epoch " +
                                   std::to_string(epoch) + ", graph " +
                                   std::to_string(idx));
        }
        loss_sum += value;
        // Mean over the batch: each graph contributes grad/batch_n.
        tape.backward(loss, 1.0 / static_cast<double>(batch_n));
      }
      ps.adam_step(adam);
    }

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(order.size());
    entry.val_accuracy = split.val.empty()
                             ? 0.0
                             : evaluate_classification(ds, split.val, ps, cfg,
                                                       /*parallel=*/false);
    result.log.push_back(entry);
    if (!split.val.empty() && entry.val_accuracy > best_val) {
      best_val = entry.val_accuracy;
      best = ps;
      result.best_epoch = epoch;
      result.best_val_accuracy = entry.val_accuracy;
    }
  }

  result.params = split.val.empty() ? std::move(ps) : std::move(best);
  return result;
}

double evaluate_classification(const Dataset& ds, const std::vector<int>& indices,
                               ParamStore& ps, const ModelConfig& cfg,
                               bool parallel) {
  if (indices.empty()) {
    return 0.0;
  }
  const int n = static_cast<int>(indices.size());
  std::vector<std::uint8_t> correct(indices.size(), 0);
  std::exception_ptr error = nullptr;

#ifdef MSI_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#else
  (void)parallel;
#endif
  for (int k = 0; k < n; ++k) {
    try {
      const int idx = indices[k];
      if (idx < 0 || idx >= static_cast<int>(ds.graphs.size())) {
        throw IndexError("evaluate_classification: graph index " +
                         std::to_string(idx) + " out of range");
      }
      const Forward f = forward(ds.graphs[idx], ps, cfg);
      correct[k] = argmax_row(f.logits) == ds.graphs[idx].label ? 1 : 0;
    } catch (...) {
#ifdef MSI_HAVE_OPENMP
#pragma omp critical
#endif
      if (!error) {
        error = std::current_exception();
      }
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }

  int hits = 0;
  for (std::uint8_t c : correct) {
    hits += c;
  }
  return static_cast<double>(hits) / static_cast<double>(indices.size());
}

ExplanationReport evaluate_explanation(const Dataset& ds,
                                       const std::vector<int>& indices,
                                       ParamStore& ps, const ModelConfig& cfg,
                                       Protocol protocol, bool parallel) {
  ExplanationReport report;
  report.evaluated_count = static_cast<int>(indices.size());
  report.seed = cfg.seed;

  const int n = static_cast<int>(indices.size());
  std::vector<std::optional<GraphExplanation>> results(indices.size());
  std::exception_ptr error = nullptr;

#ifdef MSI_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#else
  (void)parallel;
#endif
  for (int k = 0; k < n; ++k) {
    try {
      const int idx = indices[k];
      if (idx < 0 || idx >= static_cast<int>(ds.graphs.size())) {
        throw IndexError("evaluate_explanation: graph index " + std::to_string(idx) +
                         " out of range");
      }
      const Graph& g = ds.graphs[idx];
      const Forward f = forward(g, ps, cfg);
      const int predicted = argmax_row(f.logits);
      const bool qualifying =
          predicted == g.label && (protocol != Protocol::mutag0 || predicted == 1);
      if (!qualifying) {
        continue;
      }
      if (!g.gt_edges) {
        throw DataError("evaluate_explanation: graph " + std::to_string(idx) +
                        " qualifies but has no gt_edges");
      }

      GraphExplanation ge;
      ge.graph_index = idx;
      const std::vector<Edge>& gt = *g.gt_edges;
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const bool kept = f.mask.selected[e] != 0;
        const bool truth = std::binary_search(gt.begin(), gt.end(), g.edges[e]);
        if (kept) {
          ge.kept_edges.push_back(g.edges[e]);
        }
        if (kept && truth) {
          ++ge.tp;
        } else if (kept && !truth) {
          ++ge.fp;
        } else if (!kept && truth) {
          ++ge.fn;
        } else {
          ++ge.tn;
        }
      }
      const int m = static_cast<int>(g.edges.size());
      ge.accuracy = m > 0 ? static_cast<double>(ge.tp + ge.tn) / m : 0.0;
      ge.recall = ge.tp + ge.fn > 0
                      ? static_cast<double>(ge.tp) / (ge.tp + ge.fn)
                      : 0.0;
      ge.precision = ge.tp + ge.fp > 0
                         ? static_cast<double>(ge.tp) / (ge.tp + ge.fp)
                         : 0.0;
      ge.f1 = ge.precision + ge.recall > 0.0
                  ? 2.0 * ge.precision * ge.recall / (ge.precision + ge.recall)
                  : 0.0;
      results[k] = std::move(ge);
    } catch (...) {
#ifdef MSI_HAVE_OPENMP
#pragma omp critical
#endif
      if (!error) {
        error = std::current_exception();
      }
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }

  for (std::optional<GraphExplanation>& r : results) {
    if (!r) {
      continue;
    }
    report.accuracy += r->accuracy;
    report.recall += r->recall;
    report.precision += r->precision;
    report.f1 += r->f1;
    report.per_graph.push_back(std::move(*r));
  }
  report.qualifying_count = static_cast<int>(report.per_graph.size());
  if (report.qualifying_count > 0) {
    report.accuracy /= report.qualifying_count;
    report.recall /= report.qualifying_count;
    report.precision /= report.qualifying_count;
    report.f1 /= report.qualifying_count;
  }
  return report;
}

ExplanationRecord explain_graph(const Graph& g, int graph_id, ParamStore& ps,
                                const ModelConfig& cfg) {
  const SchemeOutput scheme = msscheme_detail(g, ps, cfg.scheme);
  ExplanationRecord rec;
  rec.graph_id = graph_id;
  rec.keep_ratio = cfg.scheme.keep_ratio;
  rec.combined_weights = scheme.combined.values;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (scheme.mask.selected[e]) {
      rec.kept_edges.push_back(g.edges[e]);
    }
  }
  return rec;
}

std::string to_json_line(const ExplanationRecord& rec) {
  nlohmann::ordered_json obj;
  obj["graph_id"] = rec.graph_id;
  obj["keep_ratio"] = rec.keep_ratio;
  nlohmann::ordered_json kept = nlohmann::ordered_json::array();
  for (const Edge& e : rec.kept_edges) {
    kept.push_back(nlohmann::ordered_json::array({e.u, e.v}));
  }
  obj["kept_edges"] = std::move(kept);
  obj["combined_weights"] = rec.combined_weights;
  return obj.dump();
}

std::string to_dot(const Graph& g, const ExplanationRecord& rec) {
  std::ostringstream os;
  os << "digraph explanation_" << rec.graph_id << " {\n";
  os << "  edge [dir=none];\n";
  for (int v = 0; v < g.num_nodes; ++v) {
    os << "  " << v << ";\n";
  }
  for (const Edge& e : g.edges) {
    const bool kept =
        std::binary_search(rec.kept_edges.begin(), rec.kept_edges.end(), e);
    os << "  " << e.u << " -> " << e.v << " [style=" << (kept ? "solid" : "dashed")
       << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace msi
