#include "msi/datasets.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "msi/errors.hpp"
#include "msi/seeds.hpp"

namespace msi {

namespace {

// House: 4-cycle over motif nodes 0-1-2-3 plus apex 4 joined to 0 and 1.
constexpr std::pair<int, int> kHouseEdges[] = {{0, 1}, {1, 2}, {2, 3},
                                               {0, 3}, {0, 4}, {1, 4}};
constexpr std::pair<int, int> kCycleEdges[] = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}};
constexpr int kMotifSize = 5;

Graph generate_one(const Ba2MotifsSpec& spec, int index) {
  std::mt19937_64 rng(derive_seed(spec.seed, "gen:" + std::to_string(index)));
  Graph g;
  g.num_nodes = spec.base_size + kMotifSize;
  g.label = index < spec.num_graphs / 2 ? 0 : 1;

  // Preferential-attachment base: a two-node seed, then each arriving node
  // picks one existing endpoint with probability proportional to its degree
  // (uniform draw from the multiset of all edge endpoints so far).
  std::vector<int> endpoints = {0, 1};
  g.edges.push_back(Edge{0, 1});
  for (int k = 2; k < spec.base_size; ++k) {
    const int target = endpoints[uniform_below(rng, endpoints.size())];
    g.edges.push_back(canonical_edge(target, k));
    endpoints.push_back(target);
    endpoints.push_back(k);
  }

  std::vector<Edge> motif;
  if (g.label == 0) {
    for (const auto& [a, b] : kHouseEdges) {
      motif.push_back(canonical_edge(spec.base_size + a, spec.base_size + b));
    }
  } else {
    for (const auto& [a, b] : kCycleEdges) {
      motif.push_back(canonical_edge(spec.base_size + a, spec.base_size + b));
    }
  }
  g.edges.insert(g.edges.end(), motif.begin(), motif.end());

  const int motif_node = spec.base_size + static_cast<int>(uniform_below(rng, kMotifSize));
  const int base_node = static_cast<int>(uniform_below(rng, spec.base_size));
  g.edges.push_back(canonical_edge(motif_node, base_node));

  g.edges = canonicalize_edges(std::move(g.edges));
  g.gt_edges = canonicalize_edges(std::move(motif));
  g.features = Tensor(g.num_nodes, spec.feature_dim, 1.0);
  return g;
}

}  // namespace

Dataset generate_ba2motifs(const Ba2MotifsSpec& spec) {
  if (spec.num_graphs < 2 || spec.num_graphs % 2 != 0) {
    throw ArgumentError("generate_ba2motifs: num_graphs must be even and >= 2, got " +
                        std::to_string(spec.num_graphs));
  }
  if (spec.base_size < 5) {
    throw ArgumentError("generate_ba2motifs: base_size must be >= 5, got " +
                        std::to_string(spec.base_size));
  }
  if (spec.feature_dim < 1) {
    throw ArgumentError("generate_ba2motifs: feature_dim must be >= 1, got " +
                        std::to_string(spec.feature_dim));
  }

  Dataset ds;
  ds.num_classes = 2;
  ds.feature_dim = spec.feature_dim;
  ds.graphs.resize(spec.num_graphs);
#ifdef MSI_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < spec.num_graphs; ++i) {
    ds.graphs[i] = generate_one(spec, i);
  }
  return ds;
}

namespace {

using json = nlohmann::ordered_json;

json edges_to_json(const std::vector<Edge>& edges) {
  json arr = json::array();
  for (const Edge& e : edges) {
    arr.push_back(json::array({e.u, e.v}));
  }
  return arr;
}

std::vector<Edge> edges_from_json(const json& arr, int graph_index,
                                  const char* field) {
  if (!arr.is_array()) {
    throw ParseError("graph " + std::to_string(graph_index) + ": " + field +
                     " must be an array");
  }
  std::vector<Edge> edges;
  edges.reserve(arr.size());
  for (const json& pair : arr) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
        !pair[1].is_number_integer()) {
      throw ParseError("graph " + std::to_string(graph_index) + ": " + field +
                       " entries must be [u, v] integer pairs");
    }
    edges.push_back(canonical_edge(pair[0].get<int>(), pair[1].get<int>()));
  }
  return edges;
}

int require_int(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number_integer()) {
    throw ParseError(where + ": missing integer field \"" + key + "\"");
  }
  return obj[key].get<int>();
}

Graph graph_from_json(const json& obj, int graph_index, int feature_dim,
                      std::vector<std::string>& violations) {
  const std::string where = "graph " + std::to_string(graph_index);
  if (!obj.is_object()) {
    throw ParseError(where + ": expected an object");
  }
  Graph g;
  g.num_nodes = require_int(obj, "n", where);
  if (g.num_nodes < 1) {
    throw ParseError(where + ": n must be a positive integer");
  }
  g.label = require_int(obj, "label", where);
  if (!obj.contains("edges")) {
    throw ParseError(where + ": missing field \"edges\"");
  }
  g.edges = canonicalize_edges(edges_from_json(obj["edges"], graph_index, "edges"));

  const bool has_features = obj.contains("features") && !obj["features"].is_null();
  const bool has_labels = obj.contains("node_labels") && !obj["node_labels"].is_null();
  if (has_features == has_labels) {
    throw ParseError(where + ": exactly one of features/node_labels must be non-null");
  }
  if (has_features) {
    const json& rows = obj["features"];
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(g.num_nodes)) {
      throw ParseError(where + ": features must be an array of n rows");
    }
    std::vector<std::vector<double>> values;
    values.reserve(rows.size());
    for (const json& row : rows) {
      if (!row.is_array()) {
        throw ParseError(where + ": feature rows must be arrays of numbers");
      }
      std::vector<double>& out = values.emplace_back();
      out.reserve(row.size());
      for (const json& x : row) {
        if (!x.is_number()) {
          throw ParseError(where + ": feature rows must be arrays of numbers");
        }
        out.push_back(x.get<double>());
      }
    }
    try {
      g.features = Tensor::from_rows(values);
    } catch (const ShapeError&) {
      throw ParseError(where + ": feature rows have inconsistent widths");
    }
  } else {
    const json& labels = obj["node_labels"];
    if (!labels.is_array() || labels.size() != static_cast<std::size_t>(g.num_nodes)) {
      throw ParseError(where + ": node_labels must be an array of n integers");
    }
    g.features = Tensor(g.num_nodes, feature_dim);
    for (int i = 0; i < g.num_nodes; ++i) {
      if (!labels[i].is_number_integer()) {
        throw ParseError(where + ": node_labels must be an array of n integers");
      }
      const int lab = labels[i].get<int>();
      if (lab < 0 || lab >= feature_dim) {
        violations.push_back(where + ": node label " + std::to_string(lab) +
                             " outside one-hot range [0, " +
                             std::to_string(feature_dim) + ")");
      } else {
        g.features.at(i, lab) = 1.0;
      }
    }
  }

  if (obj.contains("gt_edges") && !obj["gt_edges"].is_null()) {
    g.gt_edges = canonicalize_edges(edges_from_json(obj["gt_edges"], graph_index, "gt_edges"));
  }
  return g;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("load_dataset: cannot open '" + path + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("load_dataset: '" + path + "': " + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError("load_dataset: '" + path + "': top level must be an object");
  }
  Dataset ds;
  ds.feature_dim = require_int(doc, "feature_dim", "dataset");
  ds.num_classes = require_int(doc, "num_classes", "dataset");
  if (!doc.contains("graphs") || !doc["graphs"].is_array()) {
    throw ParseError("load_dataset: '" + path + "': missing \"graphs\" array");
  }

  std::vector<std::string> violations;
  const json& graphs = doc["graphs"];
  ds.graphs.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    ds.graphs.push_back(
        graph_from_json(graphs[i], static_cast<int>(i), ds.feature_dim, violations));
  }

  for (std::string& v : validate(ds)) {
    violations.push_back(std::move(v));
  }
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "load_dataset: '" << path << "': " << violations.size() << " violation(s)";
    const std::size_t shown = std::min<std::size_t>(violations.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
      msg << "\n  " << violations[i];
    }
    if (shown < violations.size()) {
      msg << "\n  ... and " << violations.size() - shown << " more";
    }
    throw ValidationError(msg.str());
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  if (ds.graphs.empty()) {
    throw ArgumentError("save_dataset: refusing to write an empty dataset");
  }
  json doc;
  doc["feature_dim"] = ds.feature_dim;
  doc["num_classes"] = ds.num_classes;
  json graphs = json::array();
  for (const Graph& g : ds.graphs) {
    json obj;
    obj["n"] = g.num_nodes;
    obj["edges"] = edges_to_json(g.edges);
    json rows = json::array();
    for (int i = 0; i < g.features.rows; ++i) {
      json row = json::array();
      for (int j = 0; j < g.features.cols; ++j) {
        row.push_back(g.features.at(i, j));
      }
      rows.push_back(std::move(row));
    }
    obj["features"] = std::move(rows);
    obj["node_labels"] = nullptr;
    obj["label"] = g.label;
    obj["gt_edges"] = g.gt_edges ? edges_to_json(*g.gt_edges) : json(nullptr);
    graphs.push_back(std::move(obj));
  }
  doc["graphs"] = std::move(graphs);

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("save_dataset: cannot open '" + path + "' for writing");
  }
  out << doc.dump() << '\n';
  if (!out) {
    throw DataError("save_dataset: write failed for '" + path + "'");
  }
}

}  // namespace msi
