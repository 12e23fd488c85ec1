#include "msi/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msi/errors.hpp"
#include "msi/seeds.hpp"

namespace msi {

std::vector<Edge> canonicalize_edges(std::vector<Edge> edges) {
  for (Edge& e : edges) {
    e = canonical_edge(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<int> neighbors(const Graph& g, int v) {
  if (v < 0 || v >= g.num_nodes) {
    throw IndexError("neighbors: node " + std::to_string(v) + " out of range [0, " +
                     std::to_string(g.num_nodes) + ")");
  }
  std::vector<int> result;
  for (const Edge& e : g.edges) {
    if (e.u == v) {
      result.push_back(e.v);
    } else if (e.v == v) {
      result.push_back(e.u);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<std::vector<int>> adjacency_lists(const Graph& g) {
  std::vector<std::vector<int>> adj(g.num_nodes);
  for (const Edge& e : g.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
  }
  return adj;
}

std::vector<std::string> validate(const Graph& g) {
  std::vector<std::string> violations;
  if (g.num_nodes < 0) {
    violations.push_back("negative node count");
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    if (e.u == e.v) {
      violations.push_back("self-loop (" + std::to_string(e.u) + "," +
                           std::to_string(e.v) + ")");
    }
    if (e.u > e.v) {
      violations.push_back("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                           ") not in canonical u < v form");
    }
    if (e.u < 0 || e.u >= g.num_nodes || e.v < 0 || e.v >= g.num_nodes) {
      violations.push_back("index range: edge (" + std::to_string(e.u) + "," +
                           std::to_string(e.v) + ") outside [0, " +
                           std::to_string(g.num_nodes) + ")");
    }
    if (i > 0 && !(g.edges[i - 1] < e)) {
      violations.push_back(g.edges[i - 1] == e
                               ? "duplicate edge (" + std::to_string(e.u) + "," +
                                     std::to_string(e.v) + ")"
                               : "edge list not sorted at position " + std::to_string(i));
    }
  }
  if (g.features.rows != g.num_nodes) {
    violations.push_back("feature matrix has " + std::to_string(g.features.rows) +
                         " rows for " + std::to_string(g.num_nodes) + " nodes");
  }
  if (g.features.data.size() !=
      static_cast<std::size_t>(g.features.rows) * g.features.cols) {
    violations.push_back("feature matrix storage does not match its shape");
  }
  if (g.gt_edges) {
    for (const Edge& e : *g.gt_edges) {
      if (!std::binary_search(g.edges.begin(), g.edges.end(), canonical_edge(e.u, e.v))) {
        violations.push_back("gt edge (" + std::to_string(e.u) + "," +
                             std::to_string(e.v) + ") not in edge list");
      }
    }
  }
  return violations;
}

std::vector<std::string> validate(const Dataset& ds) {
  std::vector<std::string> violations;
  if (ds.graphs.empty()) {
    violations.push_back("dataset is empty");
  }
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    const Graph& g = ds.graphs[i];
    for (const std::string& v : validate(g)) {
      violations.push_back("graph " + std::to_string(i) + ": " + v);
    }
    if (g.features.cols != ds.feature_dim) {
      violations.push_back("graph " + std::to_string(i) + ": feature width " +
                           std::to_string(g.features.cols) + " != dataset feature_dim " +
                           std::to_string(ds.feature_dim));
    }
    if (g.label < 0 || g.label >= ds.num_classes) {
      violations.push_back("graph " + std::to_string(i) + ": label " +
                           std::to_string(g.label) + " outside [0, " +
                           std::to_string(ds.num_classes) + ")");
    }
  }
  return violations;
}

Graph permute(const Graph& g, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != g.num_nodes) {
    throw ArgumentError("permute: permutation has wrong length");
  }
  std::vector<char> seen(g.num_nodes, 0);
  for (int p : perm) {
    if (p < 0 || p >= g.num_nodes || seen[p]) {
      throw ArgumentError("permute: not a bijection on [0, n)");
    }
    seen[p] = 1;
  }

  Graph out;
  out.num_nodes = g.num_nodes;
  out.label = g.label;
  out.edges.reserve(g.edges.size());
  for (const Edge& e : g.edges) {
    out.edges.push_back(canonical_edge(perm[e.u], perm[e.v]));
  }
  std::sort(out.edges.begin(), out.edges.end());

  out.features = Tensor(g.features.rows, g.features.cols);
  for (int i = 0; i < g.num_nodes; ++i) {
    for (int j = 0; j < g.features.cols; ++j) {
      out.features.at(perm[i], j) = g.features.at(i, j);
    }
  }

  if (g.gt_edges) {
    std::vector<Edge> gt;
    gt.reserve(g.gt_edges->size());
    for (const Edge& e : *g.gt_edges) {
      gt.push_back(canonical_edge(perm[e.u], perm[e.v]));
    }
    std::sort(gt.begin(), gt.end());
    out.gt_edges = std::move(gt);
  }
  return out;
}

std::vector<int> inverse_permutation(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    inv[perm[i]] = static_cast<int>(i);
  }
  return inv;
}

Split split_dataset(const Dataset& ds, const std::array<double, 3>& ratios,
                    std::uint64_t seed) {
  if (ds.graphs.empty()) {
    throw ArgumentError("split_dataset: empty dataset");
  }
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ArgumentError("split_dataset: ratios must sum to 1");
  }
  const int n = static_cast<int>(ds.graphs.size());
  const int n_val = static_cast<int>(std::floor(ratios[1] * n + 1e-9));
  const int n_test = static_cast<int>(std::floor(ratios[2] * n + 1e-9));
  const int n_train = n - n_val - n_test;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "split"));
  shuffle_inplace(order, rng);

  Split split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  return split;
}

}  // namespace msi
