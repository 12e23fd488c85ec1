#include "msi/msscheme.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msi/errors.hpp"

namespace msi {

EdgeMask EdgeMask::all_true(int num_edges) {
  return EdgeMask{std::vector<std::uint8_t>(num_edges, 1), num_edges};
}

EdgeMask EdgeMask::all_false(int num_edges) {
  return EdgeMask{std::vector<std::uint8_t>(num_edges, 0), 0};
}

EdgeWeights structural_weights(const Graph& g) {
  const auto adj = adjacency_lists(g);
  EdgeWeights w;
  w.kind = WeightKind::structural;
  w.values.resize(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const std::vector<int>& nu = adj[g.edges[e].u];
    const std::vector<int>& nv = adj[g.edges[e].v];
    std::size_t inter = 0;
    for (std::size_t i = 0, j = 0; i < nu.size() && j < nv.size();) {
      if (nu[i] == nv[j]) {
        ++inter;
        ++i;
        ++j;
      } else if (nu[i] < nv[j]) {
        ++i;
      } else {
        ++j;
      }
    }
    // u is in N(v) and v is in N(u), so the union has at least 2 elements.
    const std::size_t uni = nu.size() + nv.size() - inter;
    w.values[e] = static_cast<double>(inter) / static_cast<double>(uni);
  }
  return w;
}

EdgeWeights psi_normalize(const EdgeWeights& w) {
  if (w.values.empty()) {
    throw ArgumentError("psi_normalize: empty edge set");
  }
  const auto [lo_it, hi_it] = std::minmax_element(w.values.begin(), w.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  EdgeWeights out;
  out.kind = w.kind;
  out.normalized = true;
  out.values.resize(w.values.size());
  if (hi == lo) {
    std::fill(out.values.begin(), out.values.end(), 1.0);
  } else {
    for (std::size_t i = 0; i < w.values.size(); ++i) {
      out.values[i] = (w.values[i] - lo) / (hi - lo);
    }
  }
  return out;
}

EdgeWeights embedding_weights(const Graph& g, const Tensor& embeddings,
                              const SchemeConfig& cfg) {
  if (embeddings.rows != g.num_nodes) {
    throw ShapeError("embedding_weights: embedding rows " +
                     std::to_string(embeddings.rows) + " != num_nodes " +
                     std::to_string(g.num_nodes));
  }
  EdgeWeights w;
  w.kind = WeightKind::embedding;
  w.values.resize(g.edges.size());
  if (g.edges.empty()) {
    return w;
  }

  const int h = embeddings.cols;
  switch (cfg.phi_kind) {
    case PhiKind::gaussian: {
      std::vector<double> sq_dist(g.edges.size());
      double mean = 0.0;
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        double d2 = 0.0;
        for (int j = 0; j < h; ++j) {
          const double diff =
              embeddings.at(g.edges[e].u, j) - embeddings.at(g.edges[e].v, j);
          d2 += diff * diff;
        }
        sq_dist[e] = d2;
        mean += d2;
      }
      const double sigma2 = std::max(mean / static_cast<double>(g.edges.size()), 1e-12);
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        w.values[e] = std::exp(-sq_dist[e] / (2.0 * sigma2));
      }
      break;
    }
    case PhiKind::cosine: {
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        double dot = 0.0, nu = 0.0, nv = 0.0;
        for (int j = 0; j < h; ++j) {
          const double a = embeddings.at(g.edges[e].u, j);
          const double b = embeddings.at(g.edges[e].v, j);
          dot += a * b;
          nu += a * a;
          nv += b * b;
        }
        const double cos = (nu == 0.0 || nv == 0.0)
                               ? 0.0
                               : dot / (std::sqrt(nu) * std::sqrt(nv));
        w.values[e] = (cos + 1.0) / 2.0;
      }
      break;
    }
    case PhiKind::linear: {
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        double dot = 0.0;
        for (int j = 0; j < h; ++j) {
          dot += embeddings.at(g.edges[e].u, j) * embeddings.at(g.edges[e].v, j);
        }
        w.values[e] = dot;
      }
      break;
    }
  }
  return cfg.normalize_embedding_weights ? psi_normalize(w) : w;
}

EdgeWeights combine_weights(const EdgeWeights& w_str, const EdgeWeights& w_emb,
                            double alpha) {
  if (w_str.values.size() != w_emb.values.size()) {
    throw ArgumentError("combine_weights: edge domains differ (" +
                        std::to_string(w_str.values.size()) + " vs " +
                        std::to_string(w_emb.values.size()) + " edges)");
  }
  if (alpha < 0.0) {
    throw ArgumentError("combine_weights: alpha must be >= 0");
  }
  EdgeWeights out;
  out.kind = WeightKind::combined;
  out.values.resize(w_str.values.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = w_str.values[i] + alpha * w_emb.values[i];
  }
  return out;
}

EdgeMask build_mask(const EdgeWeights& w_com, double keep_ratio,
                    const EdgeWeights& w_str) {
  const std::size_t m = w_com.values.size();
  if (m < 1) {
    throw ArgumentError("build_mask: need at least one edge");
  }
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) {
    throw ArgumentError("build_mask: keep_ratio must be in (0, 1]");
  }
  if (w_str.values.size() != m) {
    throw ArgumentError("build_mask: tiebreak weights cover a different edge set");
  }
  // ceil(keep_ratio * m); the epsilon guards against products like 0.1 * 30
  // landing just above the exact integer.
  int keep = static_cast<int>(std::ceil(keep_ratio * static_cast<double>(m) - 1e-9));
  keep = std::clamp(keep, 1, static_cast<int>(m));

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (w_com.values[a] != w_com.values[b]) {
      return w_com.values[a] > w_com.values[b];
    }
    if (w_str.values[a] != w_str.values[b]) {
      return w_str.values[a] > w_str.values[b];
    }
    return a < b;
  });

  EdgeMask mask = EdgeMask::all_false(static_cast<int>(m));
  for (int k = 0; k < keep; ++k) {
    mask.selected[order[k]] = 1;
  }
  mask.keep_count = keep;
  return mask;
}

MaskedGraph apply_mask(const Graph& g, const EdgeMask& mask) {
  if (mask.selected.size() != g.edges.size()) {
    throw ArgumentError("apply_mask: mask covers " +
                        std::to_string(mask.selected.size()) + " edges, graph has " +
                        std::to_string(g.edges.size()));
  }
  return MaskedGraph{&g, &mask};
}

Tensor scheme_embeddings(const Graph& g, ParamStore& ps, const SchemeConfig& cfg) {
  const std::string prefix =
      cfg.embed_source == EmbedSource::shared_first_layer ? "gin0" : "scheme";
  const EdgeMask full = EdgeMask::all_true(static_cast<int>(g.edges.size()));
  Tape tape;
  Var h = tape.input(g.features);
  Var out = gin_layer(tape, h, g, full, ps, prefix);
  return tape.value(out);
}

SchemeOutput msscheme_detail(const Graph& g, ParamStore& ps, const SchemeConfig& cfg,
                             const EdgeWeights* cached_structural) {
  SchemeOutput out;
  if (g.edges.empty()) {
    out.mask = EdgeMask::all_false(0);
    return out;
  }
  out.structural =
      cached_structural ? *cached_structural : psi_normalize(structural_weights(g));
  const Tensor embeddings = scheme_embeddings(g, ps, cfg);
  out.embedding = embedding_weights(g, embeddings, cfg);
  out.combined = combine_weights(out.structural, out.embedding, cfg.alpha);
  out.mask = build_mask(out.combined, cfg.keep_ratio, out.structural);
  return out;
}

EdgeMask msscheme(const Graph& g, ParamStore& ps, const SchemeConfig& cfg,
                  const EdgeWeights* cached_structural) {
  return msscheme_detail(g, ps, cfg, cached_structural).mask;
}

}  // namespace msi
