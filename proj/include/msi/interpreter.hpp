#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msi/autodiff.hpp"
#include "msi/graph.hpp"
#include "msi/msscheme.hpp"

namespace msi {

// Classifier: edge mask from the weighting scheme, then num_layers GIN
// layers under that single mask, sum pooling, and an affine readout.
struct ModelConfig {
  int hidden_dim = 128;
  int num_layers = 3;
  int num_classes = 2;
  SchemeConfig scheme;
  double lr = 0.01;
  int batch_size = 64;
  int epochs = 100;
  std::uint64_t seed = 0;
};

// Fresh parameters: gin<l>.{W1,b1,W2,b2} for each layer, readout.{W,b},
// and scheme.{W1,b1,W2,b2} when the scheme uses its dedicated encoder.
// Every tensor is filled uniformly on +-sqrt(6 / (fan_in + fan_out)) from
// derive_seed(cfg.seed, "init"), in that fixed creation order.
ParamStore init_params(int feature_dim, const ModelConfig& cfg);

// Classifier pass under an externally supplied mask (used by training once
// the mask is built, and by equivalence tests against a plain GIN).
Tensor forward_with_mask(const Graph& g, const EdgeMask& mask, ParamStore& ps,
                         const ModelConfig& cfg);

struct Forward {
  Tensor logits;  // 1 x num_classes
  EdgeMask mask;
};

// Full inference: build the mask, then classify under it. The mask is the
// model's explanation of its own prediction. cached_structural as in
// msscheme().
Forward forward(const Graph& g, ParamStore& ps, const ModelConfig& cfg,
                const EdgeWeights* cached_structural = nullptr);

// Same pass expressed on a caller-owned tape for training. `mask` must
// outlive any backward() call on the tape.
Var classifier_on_tape(Tape& tape, const Graph& g, const EdgeMask& mask,
                       ParamStore& ps, const ModelConfig& cfg);

struct TrainLogEntry {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  ParamStore params;  // best-validation checkpoint (final when val is empty)
  std::vector<TrainLogEntry> log;
  int best_epoch = 0;  // 0 when no epoch was selected
  double best_val_accuracy = 0.0;
};

// Adam on the mean cross-entropy over shuffled mini-batches of the train
// split. Single-threaded and deterministic: the shuffle stream is
// derive_seed(cfg.seed, "shuffle") and parameters are initialized from
// derive_seed(cfg.seed, "init"). Structural edge weights are computed once
// per graph and reused; the mask itself is rebuilt every forward pass.
// Throws ArgumentError on dimension mismatches and TrainingDivergence when
// a loss turns non-finite.
TrainResult train(const Dataset& ds, const Split& split, const ModelConfig& cfg);

// Fraction of the listed graphs whose argmax logit equals the label
// (0.0 for an empty list). Read-only in ps; graph-parallel when asked.
double evaluate_classification(const Dataset& ds, const std::vector<int>& indices,
                               ParamStore& ps, const ModelConfig& cfg,
                               bool parallel = true);

// Which graphs count toward explanation metrics: always only correctly
// predicted ones; mutag0 additionally requires predicted class 1.
enum class Protocol { plain, mutag0 };

struct GraphExplanation {
  int graph_index = 0;
  int tp = 0, fp = 0, tn = 0, fn = 0;  // kept-vs-ground-truth edge confusion
  std::vector<Edge> kept_edges;
  double accuracy = 0.0, recall = 0.0, precision = 0.0, f1 = 0.0;
};

struct ExplanationReport {
  std::vector<GraphExplanation> per_graph;  // qualifying graphs only
  int evaluated_count = 0;
  int qualifying_count = 0;
  double accuracy = 0.0, recall = 0.0, precision = 0.0, f1 = 0.0;  // means
  std::uint64_t seed = 0;
};

// Edge-level confusion of kept edges against gt_edges over each qualifying
// graph's full edge list; per-graph metrics (0 when undefined) averaged
// unweighted over qualifying graphs. Throws DataError when a qualifying
// graph lacks gt_edges. Zero qualifying graphs is a valid, empty report.
ExplanationReport evaluate_explanation(const Dataset& ds,
                                       const std::vector<int>& indices,
                                       ParamStore& ps, const ModelConfig& cfg,
                                       Protocol protocol, bool parallel = true);

struct ExplanationRecord {
  int graph_id = 0;
  double keep_ratio = 0.0;
  std::vector<Edge> kept_edges;
  std::vector<double> combined_weights;  // aligned with the canonical edge list
};

ExplanationRecord explain_graph(const Graph& g, int graph_id, ParamStore& ps,
                                const ModelConfig& cfg);

// One JSON object, no trailing newline.
std::string to_json_line(const ExplanationRecord& rec);

// Graphviz rendering: undirected edges, kept solid, dropped dashed.
std::string to_dot(const Graph& g, const ExplanationRecord& rec);

}  // namespace msi
