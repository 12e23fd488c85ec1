#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msi/tensor.hpp"

namespace msi {

struct Edge {
  int u = 0;
  int v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Endpoints reordered so u < v.
inline Edge canonical_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Attributed undirected graph. Each edge is stored once in canonical form
// (u < v) and the list is sorted ascending; the dense adjacency matrix is
// never materialized outside of test oracles. Immutable after construction
// by convention; all library functions take it by const reference.
struct Graph {
  int num_nodes = 0;
  std::vector<Edge> edges;
  Tensor features;  // num_nodes x feature_dim
  int label = 0;
  std::optional<std::vector<Edge>> gt_edges;  // explanation ground truth
};

struct Dataset {
  std::vector<Graph> graphs;
  int num_classes = 0;
  int feature_dim = 0;
};

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Sorts edge endpoints and the edge list into canonical form (does not
// deduplicate; validate() reports duplicates).
std::vector<Edge> canonicalize_edges(std::vector<Edge> edges);

// Open neighborhood of v in ascending order. v itself is never included.
// Throws IndexError when v is out of range.
std::vector<int> neighbors(const Graph& g, int v);

// Sorted adjacency lists for every node, built in one pass over the edges.
std::vector<std::vector<int>> adjacency_lists(const Graph& g);

// Checks every structural invariant and returns a human-readable list of
// violations; an empty result means the graph is valid.
std::vector<std::string> validate(const Graph& g);
std::vector<std::string> validate(const Dataset& ds);

// Relabels nodes (perm[old] = new), reorders feature rows and ground-truth
// edges accordingly, and re-canonicalizes. Throws ArgumentError unless perm
// is a bijection on [0, num_nodes).
Graph permute(const Graph& g, const std::vector<int>& perm);

std::vector<int> inverse_permutation(const std::vector<int>& perm);

// Deterministic shuffled split. Sizes are floor(ratio * N) with the
// remainder assigned to train; the shuffle is a fully specified
// Fisher-Yates driven by derive_seed(seed, "split").
Split split_dataset(const Dataset& ds, const std::array<double, 3>& ratios,
                    std::uint64_t seed);

}  // namespace msi
