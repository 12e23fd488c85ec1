#pragma once

#include <cstdint>
#include <vector>

#include "msi/autodiff.hpp"
#include "msi/graph.hpp"

namespace msi {

// Message-passing selection: per-edge weights from graph structure and node
// embeddings, combined as w_str + alpha * w_emb, with the top keep_ratio
// fraction of edges kept as the mask used by every GIN layer.

enum class WeightKind { structural, embedding, combined };
enum class PhiKind { gaussian, cosine, linear };
enum class EmbedSource { shared_first_layer, dedicated_random };

// Per-edge scalar weights, aligned with the owning graph's canonical edge
// list (values[i] belongs to graph.edges[i]).
struct EdgeWeights {
  WeightKind kind = WeightKind::structural;
  bool normalized = false;
  std::vector<double> values;
};

// Boolean edge selection, aligned with the canonical edge list. A selected
// edge passes messages in both directions.
struct EdgeMask {
  std::vector<std::uint8_t> selected;
  int keep_count = 0;

  static EdgeMask all_true(int num_edges);
  static EdgeMask all_false(int num_edges);
};

// Validated (graph, mask) pair; the masked counterpart of the adjacency.
struct MaskedGraph {
  const Graph* graph = nullptr;
  const EdgeMask* mask = nullptr;
};

struct SchemeConfig {
  double alpha = 0.5;
  double keep_ratio = 0.5;
  PhiKind phi_kind = PhiKind::gaussian;
  EmbedSource embed_source = EmbedSource::shared_first_layer;
  bool normalize_embedding_weights = true;
};

// Intersection-over-union of the endpoints' open neighborhoods, one value
// per edge. Both endpoints always lie in the union, so the denominator is
// at least 2.
EdgeWeights structural_weights(const Graph& g);

// Whole-graph min-max normalization to [0, 1]; all-equal inputs map to 1.0.
// Order-preserving. Throws ArgumentError on an empty edge set.
EdgeWeights psi_normalize(const EdgeWeights& w);

// phi(H[i], H[j]) per edge. gaussian uses exp(-d^2 / (2 sigma^2)) with
// sigma^2 the mean squared edge distance (floored at 1e-12); cosine maps to
// (cos + 1)/2 with zero rows treated as cosine 0; linear is the dot
// product. Normalized with psi afterwards when the config says so.
EdgeWeights embedding_weights(const Graph& g, const Tensor& embeddings,
                              const SchemeConfig& cfg);

// w_str + alpha * w_emb per edge.
EdgeWeights combine_weights(const EdgeWeights& w_str, const EdgeWeights& w_emb,
                            double alpha);

// Keeps the ceil(keep_ratio * m) highest-weighted edges. Ties break by
// structural weight descending, then canonical edge order ascending.
EdgeMask build_mask(const EdgeWeights& w_com, double keep_ratio,
                    const EdgeWeights& w_str);

// Domain-checked view consumed by masked_neighbor_sum.
MaskedGraph apply_mask(const Graph& g, const EdgeMask& mask);

// Node embeddings for the weighting: one GIN layer over the unmasked graph,
// reading either the backbone's first layer ("gin0.*") or a dedicated
// frozen encoder ("scheme.*"). Runs on a throwaway tape; no gradient flows
// from the mask back into these parameters.
Tensor scheme_embeddings(const Graph& g, ParamStore& ps, const SchemeConfig& cfg);

// All intermediate products of the scheme, for explanation export.
struct SchemeOutput {
  EdgeWeights structural;  // psi-normalized
  EdgeWeights embedding;
  EdgeWeights combined;
  EdgeMask mask;
};

// Full pipeline. cached_structural, when given, must be the psi-normalized
// structural weights of g (they do not depend on parameters, so callers
// may compute them once per graph).
SchemeOutput msscheme_detail(const Graph& g, ParamStore& ps, const SchemeConfig& cfg,
                             const EdgeWeights* cached_structural = nullptr);
EdgeMask msscheme(const Graph& g, ParamStore& ps, const SchemeConfig& cfg,
                  const EdgeWeights* cached_structural = nullptr);

}  // namespace msi
