#include <doctest.h>

#include <cmath>
#include <random>

#include "msi/autodiff.hpp"
#include "msi/errors.hpp"
#include "msi/graph.hpp"
#include "msi/msscheme.hpp"
#include "msi/seeds.hpp"
#include "oracles.hpp"

using msi::EdgeMask;
using msi::Graph;
using msi::ParamStore;
using msi::Tape;
using msi::Tensor;
using msi::Var;

namespace {

Tensor random_tensor(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(rows, cols);
  for (double& x : t.data) {
    x = scale * (2.0 * msi::uniform01(rng) - 1.0);
  }
  return t;
}

// Random parameters for a hand-rolled GIN stack used by gradient checks.
ParamStore random_gin_params(int in_dim, int hidden, int classes, int layers,
                             std::uint64_t seed) {
  std::mt19937_64 rng(msi::derive_seed(seed, "test-params"));
  ParamStore ps;
  for (int l = 0; l < layers; ++l) {
    const std::string p = "gin" + std::to_string(l);
    ps.add(p + ".W1", random_tensor(l == 0 ? in_dim : hidden, hidden, rng, 0.6));
    ps.add(p + ".b1", random_tensor(1, hidden, rng, 0.3));
    ps.add(p + ".W2", random_tensor(hidden, hidden, rng, 0.6));
    ps.add(p + ".b2", random_tensor(1, hidden, rng, 0.3));
  }
  ps.add("readout.W", random_tensor(hidden, classes, rng, 0.6));
  ps.add("readout.b", random_tensor(1, classes, rng, 0.3));
  return ps;
}

}  // namespace

TEST_CASE("forward op semantics") {
  Tape t;
  SUBCASE("matmul by the identity is the identity") {
    Var i = t.input(Tensor::identity(2));
    Var m = t.input(Tensor::from_rows({{1.0, 2.0}, {3.0, 4.0}}));
    CHECK(t.value(t.matmul(i, m)) == Tensor::from_rows({{1.0, 2.0}, {3.0, 4.0}}));
  }
  SUBCASE("relu clamps negatives") {
    Var x = t.input(Tensor::from_rows({{-1.0, 2.0}}));
    CHECK(t.value(t.relu(x)) == Tensor::from_rows({{0.0, 2.0}}));
  }
  SUBCASE("add broadcasts a bias row") {
    Var x = t.input(Tensor::from_rows({{1.0, 2.0}, {3.0, 4.0}}));
    Var b = t.input(Tensor::from_rows({{10.0, 20.0}}));
    CHECK(t.value(t.add(x, b)) == Tensor::from_rows({{11.0, 22.0}, {13.0, 24.0}}));
    Var bad = t.input(Tensor(3, 2, 0.0));
    CHECK_THROWS_AS(t.add(x, bad), msi::ShapeError);
  }
  SUBCASE("row_concat joins columns") {
    Var a = t.input(Tensor::from_rows({{1.0}, {2.0}}));
    Var b = t.input(Tensor::from_rows({{3.0, 4.0}, {5.0, 6.0}}));
    CHECK(t.value(t.row_concat(a, b)) ==
          Tensor::from_rows({{1.0, 3.0, 4.0}, {2.0, 5.0, 6.0}}));
  }
  SUBCASE("sum_pool sums rows and rejects empty input") {
    Var x = t.input(Tensor::from_rows({{1.0, 2.0}, {1.0, 2.0}}));
    CHECK(t.value(t.sum_pool(x)) == Tensor::from_rows({{2.0, 4.0}}));
    Var single = t.input(Tensor::from_rows({{7.0, 8.0}}));
    CHECK(t.value(t.sum_pool(single)) == Tensor::from_rows({{7.0, 8.0}}));
    Var empty = t.input(Tensor(0, 3, 0.0));
    CHECK_THROWS_AS(t.sum_pool(empty), msi::ArgumentError);
  }
}

TEST_CASE("masked_neighbor_sum on a path and under an empty mask") {
  Graph g;
  g.num_nodes = 2;
  g.edges = {{0, 1}};
  g.features = Tensor(2, 1, 1.0);

  Tape t;
  Var h = t.input(Tensor::from_rows({{1.0}, {2.0}}));
  const EdgeMask all = EdgeMask::all_true(1);
  CHECK(t.value(t.masked_neighbor_sum(h, g, all)) ==
        Tensor::from_rows({{2.0}, {1.0}}));
  const EdgeMask none = EdgeMask::all_false(1);
  CHECK(t.value(t.masked_neighbor_sum(h, g, none)) == Tensor(2, 1, 0.0));

  const EdgeMask wrong = EdgeMask::all_true(2);
  CHECK_THROWS_AS(t.masked_neighbor_sum(h, g, wrong), msi::ArgumentError);
}

TEST_CASE("masked_neighbor_sum equals the dense masked-adjacency oracle") {
  std::mt19937_64 rng(msi::derive_seed(20, "autodiff"));
  for (int trial = 0; trial < 40; ++trial) {
    const Graph g = oracles::random_graph(rng, 8, 3);
    const EdgeMask mask = oracles::random_mask(rng, g.edges.size());
    const Tensor h = random_tensor(g.num_nodes, 3, rng);
    Tape t;
    const Tensor got = t.value(t.masked_neighbor_sum(t.input(h), g, mask));
    const Tensor expected = oracles::masked_neighbor_sum_dense(g, mask, h);
    REQUIRE(got.same_shape(expected));
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(std::abs(got.data[i] - expected.data[i]) < 1e-10);
    }
  }
}

TEST_CASE("softmax cross entropy values and gradient identity") {
  Tape t;
  Var uniform = t.input(Tensor::from_rows({{0.0, 0.0}}));
  CHECK(t.value(t.softmax_cross_entropy(uniform, 0)).at(0, 0) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-12));

  Var spread = t.input(Tensor::from_rows({{10.0, -10.0}}));
  CHECK(t.value(t.softmax_cross_entropy(spread, 0)).at(0, 0) ==
        doctest::Approx(2.0611536203143807e-9).epsilon(1e-6));

  Var bad = t.input(Tensor::from_rows({{0.0, 0.0}}));
  CHECK_THROWS_AS(t.softmax_cross_entropy(bad, 2), msi::ArgumentError);
  Var not_row = t.input(Tensor(2, 2, 0.0));
  CHECK_THROWS_AS(t.softmax_cross_entropy(not_row, 0), msi::ShapeError);

  // d loss / d logits = softmax - one_hot(label).
  Tape t2;
  ParamStore ps;
  ps.add("logits", Tensor::from_rows({{0.3, -0.7, 1.1}}));
  Var logits = t2.param(ps, "logits");
  Var loss = t2.softmax_cross_entropy(logits, 1);
  t2.backward(loss);
  double z = std::exp(0.3) + std::exp(-0.7) + std::exp(1.1);
  const double expected[3] = {std::exp(0.3) / z, std::exp(-0.7) / z - 1.0,
                              std::exp(1.1) / z};
  for (int j = 0; j < 3; ++j) {
    CHECK(ps.grad("logits").at(0, j) == doctest::Approx(expected[j]).epsilon(1e-12));
  }
}

TEST_CASE("tape is single-use and losses must be scalar") {
  Tape t;
  ParamStore ps;
  ps.add("w", Tensor::from_rows({{1.0, 2.0}}));
  Var w = t.param(ps, "w");
  Var loss = t.softmax_cross_entropy(w, 0);
  t.backward(loss);
  CHECK_THROWS_AS(t.backward(loss), msi::StateError);

  Tape t2;
  Var w2 = t2.param(ps, "w");
  CHECK_THROWS_AS(t2.backward(w2), msi::ArgumentError);
}

TEST_CASE("ParamStore rejects duplicates and unknown names") {
  ParamStore ps;
  ps.add("a", Tensor(1, 1, 0.0));
  CHECK_THROWS_AS(ps.add("a", Tensor(1, 1, 0.0)), msi::StateError);
  CHECK_THROWS_AS(ps.value("missing"), msi::StateError);
  ps.add("b", Tensor(1, 1, 0.0));
  CHECK(ps.names() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("adam first step from zero state is -lr * g / (|g| + eps)") {
  std::mt19937_64 rng(msi::derive_seed(21, "autodiff"));
  ParamStore ps;
  ps.add("w", random_tensor(2, 3, rng));
  const Tensor before = ps.value("w");
  const Tensor g = random_tensor(2, 3, rng);
  ps.grad("w") = g;
  msi::AdamConfig adam;
  adam.lr = 0.05;
  ps.adam_step(adam);
  CHECK(ps.step() == 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double expected =
        before.data[i] - adam.lr * g.data[i] / (std::abs(g.data[i]) + adam.epsilon);
    CHECK(ps.value("w").data[i] == doctest::Approx(expected).epsilon(1e-9));
  }
  // Gradients are consumed by the step.
  CHECK(ps.grad("w") == Tensor(2, 3, 0.0));
}

TEST_CASE("adam with a constant gradient settles at lr * sign(g) updates") {
  ParamStore ps;
  ps.add("w", Tensor(1, 2, 0.0));
  msi::AdamConfig adam;
  adam.lr = 0.01;
  const Tensor g = Tensor::from_rows({{0.37, -2.2}});
  Tensor prev = ps.value("w");
  for (int step = 0; step < 50; ++step) {
    ps.grad("w") = g;
    ps.adam_step(adam);
  }
  ps.grad("w") = g;
  prev = ps.value("w");
  ps.adam_step(adam);
  CHECK(ps.value("w").at(0, 0) - prev.at(0, 0) ==
        doctest::Approx(-adam.lr).epsilon(1e-6));
  CHECK(ps.value("w").at(0, 1) - prev.at(0, 1) ==
        doctest::Approx(adam.lr).epsilon(1e-6));
}

TEST_CASE("adam with zero gradients leaves parameters and decays moments") {
  ParamStore ps;
  ps.add("w", Tensor::from_rows({{1.0, -1.0}}));
  msi::AdamConfig adam;

  // From a clean state a zero gradient moves nothing.
  ps.adam_step(adam);
  CHECK(ps.value("w") == Tensor::from_rows({{1.0, -1.0}}));
  CHECK(ps.moment1("w") == Tensor(1, 2, 0.0));
  CHECK(ps.moment2("w") == Tensor(1, 2, 0.0));

  // Once moments exist, a zero-gradient step decays them by beta1/beta2.
  ps.grad("w") = Tensor::from_rows({{0.5, 0.25}});
  ps.adam_step(adam);
  const Tensor m1 = ps.moment1("w");
  const Tensor m2 = ps.moment2("w");
  ps.adam_step(adam);  // gradients are zero again
  for (std::size_t i = 0; i < m1.size(); ++i) {
    CHECK(ps.moment1("w").data[i] == doctest::Approx(adam.beta1 * m1.data[i]));
    CHECK(ps.moment2("w").data[i] == doctest::Approx(adam.beta2 * m2.data[i]));
  }
}

TEST_CASE("grad_check: quadratic w^T w is exact to roundoff") {
  std::mt19937_64 rng(msi::derive_seed(22, "autodiff"));
  ParamStore ps;
  ps.add("w", random_tensor(1, 6, rng));
  const msi::TapeFn f = [&ps](Tape& t) {
    Var w = t.param(ps, "w");
    return t.matmul(w, t.transpose(w));
  };
  CHECK(msi::grad_check(f, ps, 1e-4) < 1e-8);
}

TEST_CASE("grad_check: full 3-layer GIN with readout on a 6-node graph") {
  std::mt19937_64 rng(msi::derive_seed(23, "autodiff"));
  Graph g = oracles::random_graph(rng, 7, 4);
  g.num_nodes = 6;
  g.edges = {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}};
  g.features = random_tensor(6, 4, rng);
  ParamStore ps = random_gin_params(4, 8, 2, 3, 99);
  // The node features are parameters too, so the check covers d loss / d H.
  ps.add("H", g.features);
  const EdgeMask mask = EdgeMask::all_true(static_cast<int>(g.edges.size()));
  const msi::TapeFn f = [&](Tape& t) {
    Var h = t.param(ps, "H");
    for (int l = 0; l < 3; ++l) {
      h = msi::gin_layer(t, h, g, mask, ps, "gin" + std::to_string(l));
    }
    Var logits = t.add(t.matmul(t.sum_pool(h), t.param(ps, "readout.W")),
                       t.param(ps, "readout.b"));
    return t.softmax_cross_entropy(logits, 1);
  };
  CHECK(msi::grad_check(f, ps, 1e-4) < 1e-4);
}

TEST_CASE("grad_check flags a corrupted gradient (negative control)") {
  std::mt19937_64 rng(msi::derive_seed(24, "autodiff"));
  ParamStore ps;
  ps.add("w", random_tensor(1, 4, rng));
  const msi::TapeFn f = [&ps](Tape& t) {
    Var w = t.param(ps, "w");
    return t.matmul(w, t.transpose(w));
  };
  msi::GradMap analytic = msi::analytic_gradients(f, ps);
  analytic.at("w").at(0, 2) += 0.5;
  CHECK(msi::grad_check_against(f, ps, 1e-4, analytic) > 1e-2);
}

TEST_CASE("row_concat and transpose backward match finite differences") {
  std::mt19937_64 rng(msi::derive_seed(25, "autodiff"));
  ParamStore ps;
  ps.add("a", random_tensor(2, 2, rng));
  ps.add("b", random_tensor(2, 3, rng));
  ps.add("W", random_tensor(3, 5, rng));
  const msi::TapeFn f = [&ps](Tape& t) {
    Var joined = t.row_concat(t.param(ps, "a"), t.param(ps, "b"));
    Var logits = t.matmul(t.sum_pool(joined), t.transpose(t.param(ps, "W")));
    return t.softmax_cross_entropy(logits, 0);
  };
  CHECK(msi::grad_check(f, ps, 1e-4) < 1e-4);
}

TEST_CASE("gin_layer with identity MLP and no messages reduces to relu") {
  Graph g;
  g.num_nodes = 3;
  g.edges = {{0, 1}, {1, 2}};
  g.features = Tensor::from_rows({{-1.0, 0.5}, {2.0, -3.0}, {0.25, 4.0}});

  ParamStore ps;
  ps.add("gin0.W1", Tensor::identity(2));
  ps.add("gin0.b1", Tensor(1, 2, 0.0));
  ps.add("gin0.W2", Tensor::identity(2));
  ps.add("gin0.b2", Tensor(1, 2, 0.0));

  Tape t;
  const EdgeMask none = EdgeMask::all_false(2);
  const Tensor out = t.value(msi::gin_layer(t, t.input(g.features), g, none, ps, "gin0"));
  CHECK(out == Tensor::from_rows({{0.0, 0.5}, {2.0, 0.0}, {0.25, 4.0}}));
}

TEST_CASE("gin_layer on a single node is the plain MLP") {
  Graph g;
  g.num_nodes = 1;
  g.features = Tensor::from_rows({{1.0, -2.0}});

  std::mt19937_64 rng(msi::derive_seed(26, "autodiff"));
  ParamStore ps;
  ps.add("gin0.W1", random_tensor(2, 3, rng));
  ps.add("gin0.b1", random_tensor(1, 3, rng));
  ps.add("gin0.W2", random_tensor(3, 3, rng));
  ps.add("gin0.b2", random_tensor(1, 3, rng));

  Tape t;
  const EdgeMask none = EdgeMask::all_false(0);
  const Tensor got = t.value(msi::gin_layer(t, t.input(g.features), g, none, ps, "gin0"));

  // MLP(H) assembled by hand from the same parameters.
  Tape t2;
  Var h = t2.input(g.features);
  Var z = t2.add(t2.matmul(h, t2.param(ps, "gin0.W1")), t2.param(ps, "gin0.b1"));
  Var out = t2.add(t2.matmul(t2.relu(z), t2.param(ps, "gin0.W2")), t2.param(ps, "gin0.b2"));
  CHECK(got == t2.value(out));
}
