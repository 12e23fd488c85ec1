#include "msi/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "msi/errors.hpp"
#include "msi/kernels.hpp"
#include "msi/msscheme.hpp"

namespace msi {

// ---------------------------------------------------------------------------
// ParamStore

void ParamStore::add(const std::string& name, Tensor value) {
  if (entries_.count(name)) {
    throw StateError("ParamStore: duplicate parameter '" + name + "'");
  }
  Entry e;
  e.grad = Tensor(value.rows, value.cols);
  e.m1 = Tensor(value.rows, value.cols);
  e.m2 = Tensor(value.rows, value.cols);
  e.value = std::move(value);
  entries_.emplace(name, std::move(e));
}

bool ParamStore::has(const std::string& name) const { return entries_.count(name) > 0; }

ParamStore::Entry& ParamStore::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw StateError("ParamStore: unknown parameter '" + name + "'");
  }
  return it->second;
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw StateError("ParamStore: unknown parameter '" + name + "'");
  }
  return it->second;
}

Tensor& ParamStore::value(const std::string& name) { return entry(name).value; }
const Tensor& ParamStore::value(const std::string& name) const { return entry(name).value; }
Tensor& ParamStore::grad(const std::string& name) { return entry(name).grad; }
const Tensor& ParamStore::grad(const std::string& name) const { return entry(name).grad; }
const Tensor& ParamStore::moment1(const std::string& name) const { return entry(name).m1; }
const Tensor& ParamStore::moment2(const std::string& name) const { return entry(name).m2; }

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) {
    out.push_back(name);
  }
  return out;
}

void ParamStore::zero_grads() {
  for (auto& [_, e] : entries_) {
    std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
  }
}

void ParamStore::adam_step(const AdamConfig& cfg) {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
  for (auto& [name, e] : entries_) {
    if (!e.grad.same_shape(e.value)) {
      throw StateError("adam_step: gradient for '" + name +
                       "' missing or shape-mismatched");
    }
    for (std::size_t i = 0; i < e.value.data.size(); ++i) {
      const double g = e.grad.data[i];
      e.m1.data[i] = cfg.beta1 * e.m1.data[i] + (1.0 - cfg.beta1) * g;
      e.m2.data[i] = cfg.beta2 * e.m2.data[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = e.m1.data[i] / bc1;
      const double vhat = e.m2.data[i] / bc2;
      e.value.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
      e.grad.data[i] = 0.0;
    }
  }
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  return a.step_ == b.step_ && a.entries_ == b.entries_;
}

// ---------------------------------------------------------------------------
// Tape

Var Tape::push(Tensor value, std::function<void(Tape&)> back) {
  Node n;
  n.grad = Tensor(value.rows, value.cols);
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) {
  if (v.idx < 0 || v.idx >= static_cast<int>(nodes_.size())) {
    throw StateError("Tape: invalid Var");
  }
  return nodes_[v.idx];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.idx < 0 || v.idx >= static_cast<int>(nodes_.size())) {
    throw StateError("Tape: invalid Var");
  }
  return nodes_[v.idx];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }
const Tensor& Tape::grad(Var v) const { return node(v).grad; }

Var Tape::input(Tensor value) { return push(std::move(value), nullptr); }

Var Tape::param(ParamStore& ps, const std::string& name) {
  Var v = push(ps.value(name), nullptr);
  bindings_.push_back(Binding{v.idx, &ps, name});
  return v;
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  Tensor out = msi::matmul(av, bv);
  return push(std::move(out), [a, b, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.node(self).grad;
    add_inplace(t.node(a).grad, msi::matmul(d, msi::transpose(t.node(b).value)));
    add_inplace(t.node(b).grad, msi::matmul(msi::transpose(t.node(a).value), d));
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  const bool broadcast = !av.same_shape(bv);
  if (broadcast && !(bv.rows == 1 && bv.cols == av.cols)) {
    throw ShapeError("add: incompatible shapes");
  }
  Tensor out = av;
  for (int i = 0; i < out.rows; ++i) {
    const double* brow = bv.data.data() + (broadcast ? 0 : static_cast<std::size_t>(i) * bv.cols);
    for (int j = 0; j < out.cols; ++j) {
      out.at(i, j) += brow[j];
    }
  }
  return push(std::move(out),
              [a, b, broadcast, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
                const Tensor& d = t.node(self).grad;
                add_inplace(t.node(a).grad, d);
                Tensor& db = t.node(b).grad;
                if (!broadcast) {
                  add_inplace(db, d);
                } else {
                  for (int i = 0; i < d.rows; ++i) {
                    for (int j = 0; j < d.cols; ++j) {
                      db.at(0, j) += d.at(i, j);
                    }
                  }
                }
              });
}

Var Tape::relu(Var a) {
  Tensor out = node(a).value;
  for (double& v : out.data) {
    v = v > 0.0 ? v : 0.0;
  }
  return push(std::move(out), [a, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.node(self).grad;
    const Tensor& x = t.node(a).value;
    Tensor& da = t.node(a).grad;
    for (std::size_t i = 0; i < d.data.size(); ++i) {
      if (x.data[i] > 0.0) {
        da.data[i] += d.data[i];
      }
    }
  });
}

Var Tape::transpose(Var a) {
  Tensor out = msi::transpose(node(a).value);
  return push(std::move(out), [a, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    add_inplace(t.node(a).grad, msi::transpose(t.node(self).grad));
  });
}

Var Tape::row_concat(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (av.rows != bv.rows) {
    throw ShapeError("row_concat: row counts differ");
  }
  Tensor out(av.rows, av.cols + bv.cols);
  for (int i = 0; i < av.rows; ++i) {
    for (int j = 0; j < av.cols; ++j) {
      out.at(i, j) = av.at(i, j);
    }
    for (int j = 0; j < bv.cols; ++j) {
      out.at(i, av.cols + j) = bv.at(i, j);
    }
  }
  return push(std::move(out), [a, b, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.node(self).grad;
    Tensor& da = t.node(a).grad;
    Tensor& db = t.node(b).grad;
    for (int i = 0; i < d.rows; ++i) {
      for (int j = 0; j < da.cols; ++j) {
        da.at(i, j) += d.at(i, j);
      }
      for (int j = 0; j < db.cols; ++j) {
        db.at(i, j) += d.at(i, da.cols + j);
      }
    }
  });
}

Var Tape::masked_neighbor_sum(Var h, const MaskedGraph& mg) {
  const Graph& g = *mg.graph;
  const EdgeMask& mask = *mg.mask;
  const Tensor& hv = node(h).value;
  if (hv.rows != g.num_nodes) {
    throw ShapeError("masked_neighbor_sum: H has " + std::to_string(hv.rows) +
                     " rows for " + std::to_string(g.num_nodes) + " nodes");
  }
  Tensor out(hv.rows, hv.cols);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (!mask.selected[e]) {
      continue;
    }
    const int u = g.edges[e].u;
    const int v = g.edges[e].v;
    for (int j = 0; j < hv.cols; ++j) {
      out.at(v, j) += hv.at(u, j);
      out.at(u, j) += hv.at(v, j);
    }
  }
  return push(std::move(out),
              [h, &g, &mask, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
                const Tensor& d = t.node(self).grad;
                Tensor& dh = t.node(h).grad;
                for (std::size_t e = 0; e < g.edges.size(); ++e) {
                  if (!mask.selected[e]) {
                    continue;
                  }
                  const int u = g.edges[e].u;
                  const int v = g.edges[e].v;
                  for (int j = 0; j < d.cols; ++j) {
                    dh.at(u, j) += d.at(v, j);
                    dh.at(v, j) += d.at(u, j);
                  }
                }
              });
}

Var Tape::masked_neighbor_sum(Var h, const Graph& g, const EdgeMask& mask) {
  return masked_neighbor_sum(h, apply_mask(g, mask));
}

Var Tape::sum_pool(Var a) {
  const Tensor& av = node(a).value;
  if (av.rows < 1) {
    throw ArgumentError("sum_pool: empty tensor");
  }
  Tensor out(1, av.cols);
  for (int i = 0; i < av.rows; ++i) {
    for (int j = 0; j < av.cols; ++j) {
      out.at(0, j) += av.at(i, j);
    }
  }
  return push(std::move(out), [a, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
    const Tensor& d = t.node(self).grad;
    Tensor& da = t.node(a).grad;
    for (int i = 0; i < da.rows; ++i) {
      for (int j = 0; j < da.cols; ++j) {
        da.at(i, j) += d.at(0, j);
      }
    }
  });
}

Var Tape::softmax_cross_entropy(Var logits, int label) {
  const Tensor& x = node(logits).value;
  if (x.rows != 1 || x.cols < 2) {
    throw ShapeError("softmax_cross_entropy: logits must be 1 x C with C >= 2");
  }
  if (label < 0 || label >= x.cols) {
    throw ArgumentError("softmax_cross_entropy: label " + std::to_string(label) +
                        " outside [0, " + std::to_string(x.cols) + ")");
  }
  const double m = *std::max_element(x.data.begin(), x.data.end());
  double z = 0.0;
  Tensor softmax(1, x.cols);
  for (int j = 0; j < x.cols; ++j) {
    softmax.at(0, j) = std::exp(x.at(0, j) - m);
    z += softmax.at(0, j);
  }
  for (int j = 0; j < x.cols; ++j) {
    softmax.at(0, j) /= z;
  }
  Tensor out(1, 1);
  out.at(0, 0) = m + std::log(z) - x.at(0, label);
  return push(std::move(out),
              [logits, label, softmax, self = Var{static_cast<int>(nodes_.size())}](Tape& t) {
                const double d = t.node(self).grad.at(0, 0);
                Tensor& dl = t.node(logits).grad;
                for (int j = 0; j < dl.cols; ++j) {
                  dl.at(0, j) += d * (softmax.at(0, j) - (j == label ? 1.0 : 0.0));
                }
              });
}

void Tape::backward(Var loss, double seed) {
  if (backward_done_) {
    throw StateError("Tape: backward called twice; tapes are single-use");
  }
  Node& l = node(loss);
  if (l.value.rows != 1 || l.value.cols != 1) {
    throw ArgumentError("backward: loss must be a 1 x 1 tensor");
  }
  backward_done_ = true;
  l.grad.at(0, 0) = seed;
  for (int i = loss.idx; i >= 0; --i) {
    if (nodes_[i].back) {
      nodes_[i].back(*this);
    }
  }
  for (const Binding& b : bindings_) {
    add_inplace(b.store->grad(b.name), nodes_[b.node].grad);
  }
}

void Tape::clear() {
  nodes_.clear();
  bindings_.clear();
  backward_done_ = false;
}

// ---------------------------------------------------------------------------
// GIN layer

Var gin_layer(Tape& tape, Var h, const Graph& g, const EdgeMask& mask, ParamStore& ps,
              const std::string& prefix) {
  Var agg = tape.masked_neighbor_sum(h, g, mask);
  Var s = tape.add(h, agg);
  Var z1 = tape.add(tape.matmul(s, tape.param(ps, prefix + ".W1")),
                    tape.param(ps, prefix + ".b1"));
  Var a = tape.relu(z1);
  return tape.add(tape.matmul(a, tape.param(ps, prefix + ".W2")),
                  tape.param(ps, prefix + ".b2"));
}

// ---------------------------------------------------------------------------
// Gradient checking

namespace {

double eval_scalar(const TapeFn& f, ParamStore& ps) {
  (void)ps;
  Tape t;
  Var v = f(t);
  const Tensor& out = t.value(v);
  if (out.rows != 1 || out.cols != 1) {
    throw ArgumentError("grad_check: function must be scalar-valued");
  }
  return out.at(0, 0);
}

}  // namespace

GradMap analytic_gradients(const TapeFn& f, ParamStore& ps) {
  ps.zero_grads();
  Tape t;
  Var loss = f(t);
  t.backward(loss);
  GradMap out;
  for (const std::string& name : ps.names()) {
    out.emplace(name, ps.grad(name));
  }
  ps.zero_grads();
  return out;
}

double grad_check_against(const TapeFn& f, ParamStore& ps, double step,
                          const GradMap& analytic, std::size_t max_elems_per_param) {
  double worst = 0.0;
  for (const std::string& name : ps.names()) {
    Tensor& w = ps.value(name);
    const Tensor& a = analytic.at(name);
    const std::size_t n = w.size();
    const std::size_t count = std::min(n, max_elems_per_param);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t idx = k * n / count;  // evenly strided, deterministic
      const double orig = w.data[idx];
      w.data[idx] = orig + step;
      const double fp = eval_scalar(f, ps);
      w.data[idx] = orig - step;
      const double fm = eval_scalar(f, ps);
      w.data[idx] = orig;
      const double numeric = (fp - fm) / (2.0 * step);
      const double av = a.data[idx];
      const double denom = std::max({1.0, std::abs(av), std::abs(numeric)});
      worst = std::max(worst, std::abs(av - numeric) / denom);
    }
  }
  return worst;
}

double grad_check(const TapeFn& f, ParamStore& ps, double step,
                  std::size_t max_elems_per_param) {
  const GradMap analytic = analytic_gradients(f, ps);
  return grad_check_against(f, ps, step, analytic, max_elems_per_param);
}

}  // namespace msi
