#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "msi/graph.hpp"
#include "msi/tensor.hpp"

namespace msi {

struct EdgeMask;
struct MaskedGraph;

// Handle into a Tape; cheap to copy.
struct Var {
  int idx = -1;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Named trainable parameters with gradient slots and Adam state.
// Gradients are allocated eagerly (zero) alongside each parameter;
// Tape::backward accumulates into them and adam_step consumes and
// re-zeroes them.
class ParamStore {
 public:
  void add(const std::string& name, Tensor value);
  bool has(const std::string& name) const;

  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  const Tensor& grad(const std::string& name) const;
  const Tensor& moment1(const std::string& name) const;
  const Tensor& moment2(const std::string& name) const;

  std::vector<std::string> names() const;  // ascending
  std::size_t num_params() const { return entries_.size(); }
  std::int64_t step() const { return step_; }
  // Checkpoint restore only; optimizer moments are not serialized.
  void set_step(std::int64_t step) { step_ = step; }

  void zero_grads();

  // Standard Adam with bias correction; increments the step counter and
  // zeroes all gradients afterwards. Throws StateError when a gradient
  // slot no longer matches its parameter shape.
  void adam_step(const AdamConfig& cfg);

  friend bool operator==(const ParamStore&, const ParamStore&);

 private:
  struct Entry {
    Tensor value;
    Tensor grad;
    Tensor m1;
    Tensor m2;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::map<std::string, Entry> entries_;
  std::int64_t step_ = 0;

  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;
};

// Reverse-mode tape over dense 2-D tensors. Each op records the closure
// needed for its backward; backward() walks the records in exact reverse
// execution order, then flushes leaf gradients into their bound
// ParamStores. A tape is single-use: one forward build, at most one
// backward.
class Tape {
 public:
  // Leaf holding a constant input (no gradient flows out of the tape).
  Var input(Tensor value);
  // Leaf bound to a named parameter; backward adds its gradient into ps.
  Var param(ParamStore& ps, const std::string& name);

  Var matmul(Var a, Var b);
  // Elementwise when shapes match; also accepts a 1 x c right operand
  // against an n x c left operand (row-broadcast bias).
  Var add(Var a, Var b);
  Var relu(Var a);
  Var transpose(Var a);
  // Concatenates along columns: (n x c1, n x c2) -> n x (c1 + c2).
  Var row_concat(Var a, Var b);

  // Row v of the result is the sum of H rows over selected neighbors of v.
  // The mask is a constant: gradients flow only through H.
  Var masked_neighbor_sum(Var h, const MaskedGraph& mg);
  Var masked_neighbor_sum(Var h, const Graph& g, const EdgeMask& mask);

  // Column-wise sum over nodes: n x h -> 1 x h. Requires n >= 1.
  Var sum_pool(Var a);

  // -log softmax(logits)[label], stabilized by max subtraction. logits is
  // 1 x C with C >= 2; result is 1 x 1.
  Var softmax_cross_entropy(Var logits, int label);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;

  // Seeds d(loss) = seed and runs the reverse sweep. loss must be 1 x 1.
  void backward(Var loss, double seed = 1.0);

  void clear();
  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&)> back;  // empty for leaves
  };
  struct Binding {
    int node = -1;
    ParamStore* store = nullptr;
    std::string name;
  };

  std::vector<Node> nodes_;
  std::vector<Binding> bindings_;
  bool backward_done_ = false;

  Var push(Tensor value, std::function<void(Tape&)> back);
  Node& node(Var v);
  const Node& node(Var v) const;
};

// One GIN layer: MLP(h + masked_neighbor_sum(h)), the self term carrying
// the fixed epsilon = 0. The MLP is affine -> ReLU -> affine with
// parameters <prefix>.W1/.b1/.W2/.b2.
Var gin_layer(Tape& tape, Var h, const Graph& g, const EdgeMask& mask, ParamStore& ps,
              const std::string& prefix);

// A scalar-valued function built on a fresh tape; parameters are bound
// inside the callable via tape.param(...).
using TapeFn = std::function<Var(Tape&)>;

using GradMap = std::map<std::string, Tensor>;

// Runs one forward/backward and returns the parameter gradients.
// Clobbers (zeroes) the gradients stored in ps.
GradMap analytic_gradients(const TapeFn& f, ParamStore& ps);

// Central-difference check of every parameter element (evenly strided
// sample of max_elems_per_param for large tensors) against the supplied
// analytic gradients. Returns the max of
//   |analytic - numeric| / max(1, |analytic|, |numeric|).
double grad_check_against(const TapeFn& f, ParamStore& ps, double step,
                          const GradMap& analytic,
                          std::size_t max_elems_per_param = SIZE_MAX);

// analytic_gradients + grad_check_against in one call.
double grad_check(const TapeFn& f, ParamStore& ps, double step,
                  std::size_t max_elems_per_param = SIZE_MAX);

}  // namespace msi
