#pragma once

#include <cstdint>
#include <string>

#include "msi/graph.hpp"

namespace msi {

// Synthetic two-class corpus: Barabasi-Albert base graphs with either a
// house motif (label 0) or a five-cycle (label 1) attached by one bridge
// edge. The motif-internal edges are the explanation ground truth.
struct Ba2MotifsSpec {
  int num_graphs = 1000;
  int base_size = 20;
  int feature_dim = 10;
  std::uint64_t seed = 0;
};

// Deterministic given the parameters: graph i is generated from its own RNG
// seeded with derive_seed(seed, "gen:<i>"), so the corpus is reproducible and
// generation can run graph-parallel. The first half of the corpus is label 0
// (house), the second half label 1 (cycle). Features are all-ones rows.
// Throws ArgumentError on invalid parameters (num_graphs odd or < 2,
// base_size < 5, feature_dim < 1).
Dataset generate_ba2motifs(const Ba2MotifsSpec& spec);

// JSON file format, one object per file:
//   {"feature_dim": int, "num_classes": int, "graphs": [
//     {"n": int, "edges": [[u,v],...],
//      "features": [[...],...] | null, "node_labels": [int,...] | null,
//      "label": int, "gt_edges": [[u,v],...] | null}, ...]}
// Exactly one of features/node_labels is non-null per graph; node labels are
// one-hot encoded into feature_dim columns on load. Edges may appear in any
// order or orientation in the file and are canonicalized on load.
//
// load_dataset throws ParseError (bad JSON / schema shape, with the graph
// index where known) or ValidationError (structural invariant violations,
// listing the offending graphs). save_dataset throws ArgumentError on an
// empty dataset and DataError on I/O failure.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

}  // namespace msi
