// Benchmark: the OpenMP kernels against their serial reference, and
// graph-parallel corpus evaluation against the single-threaded path.
// Every comparison also asserts the outputs are bitwise identical, since
// the parallel code paths are required to be deterministic.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string_view>
#include <vector>

#ifdef MSI_HAVE_OPENMP
#include <omp.h>
#endif

#include "msi/datasets.hpp"
#include "msi/interpreter.hpp"
#include "msi/kernels.hpp"
#include "msi/seeds.hpp"
#include "msi/tensor.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

template <typename F>
double time_best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = clock_type::now();
    f();
    const auto t1 = clock_type::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

msi::Tensor random_tensor(int rows, int cols, std::mt19937_64& rng) {
  msi::Tensor t(rows, cols);
  for (double& x : t.data) {
    x = 2.0 * msi::uniform01(rng) - 1.0;
  }
  return t;
}

void bench_matmul(bool quick) {
  std::printf("matmul: serial reference vs parallel kernel\n");
  std::printf("%8s %12s %12s %9s %9s\n", "size", "serial (s)", "parallel (s)",
              "speedup", "equal");
  std::mt19937_64 rng(msi::derive_seed(0, "bench"));
  const std::vector<int> sizes = quick ? std::vector<int>{128, 256}
                                       : std::vector<int>{64, 128, 256, 512, 768};
  for (int n : sizes) {
    const msi::Tensor a = random_tensor(n, n, rng);
    const msi::Tensor b = random_tensor(n, n, rng);
    msi::Tensor serial_out, parallel_out;
    const int repeats = n <= 256 ? 5 : 3;
    const double ts = time_best_of(repeats, [&] { serial_out = msi::matmul_serial(a, b); });
    const double tp = time_best_of(repeats, [&] { parallel_out = msi::matmul(a, b); });
    std::printf("%8d %12.4f %12.4f %8.2fx %9s\n", n, ts, tp, ts / tp,
                serial_out == parallel_out ? "yes" : "NO");
    if (!(serial_out == parallel_out)) {
      std::fprintf(stderr, "parallel matmul diverged from the reference\n");
      std::exit(1);
    }
  }
}

void bench_corpus(bool quick) {
  std::printf("\ncorpus evaluation: single-threaded vs graph-parallel\n");
  msi::Ba2MotifsSpec spec;
  spec.num_graphs = quick ? 200 : 600;
  spec.seed = 7;
  const msi::Dataset ds = msi::generate_ba2motifs(spec);

  msi::ModelConfig cfg;
  cfg.hidden_dim = 64;
  cfg.num_classes = ds.num_classes;
  cfg.seed = 7;
  msi::ParamStore ps = msi::init_params(ds.feature_dim, cfg);

  std::vector<int> all(ds.graphs.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i] = static_cast<int>(i);
  }

  double acc_serial = 0.0, acc_parallel = 0.0;
  const double ts = time_best_of(3, [&] {
    acc_serial = msi::evaluate_classification(ds, all, ps, cfg, /*parallel=*/false);
  });
  const double tp = time_best_of(3, [&] {
    acc_parallel = msi::evaluate_classification(ds, all, ps, cfg, /*parallel=*/true);
  });
  std::printf("%8zu graphs: serial %.4fs, parallel %.4fs, speedup %.2fx, equal %s\n",
              ds.graphs.size(), ts, tp, ts / tp,
              acc_serial == acc_parallel ? "yes" : "NO");
  if (acc_serial != acc_parallel) {
    std::fprintf(stderr, "parallel evaluation diverged from the serial path\n");
    std::exit(1);
  }
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (std::string_view(argv[i]) == "--quick") {
      quick = true;
    } else {
      std::fprintf(stderr, "usage: %s [--quick]\n", argv[0]);
      return 2;
    }
  }
#ifdef MSI_HAVE_OPENMP
  std::printf("OpenMP enabled, max threads %d\n\n", omp_get_max_threads());
#else
  std::printf("OpenMP not available; parallel paths run serially\n\n");
#endif
  bench_matmul(quick);
  bench_corpus(quick);
  return 0;
}
