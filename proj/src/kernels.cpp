#include "msi/kernels.hpp"

#include <cstdint>

#include "msi/errors.hpp"

namespace msi {

namespace {

// Row i of the output is produced entirely by whichever thread owns i, with
// an inner accumulation order that does not depend on the thread count, so
// parallel and serial runs are bitwise identical.
void matmul_rows(const Tensor& a, const Tensor& b, Tensor& c, int i) {
  const int k = a.cols;
  const int m = b.cols;
  const double* arow = a.data.data() + static_cast<std::size_t>(i) * k;
  double* crow = c.data.data() + static_cast<std::size_t>(i) * m;
  for (int p = 0; p < k; ++p) {
    const double av = arow[p];
    const double* brow = b.data.data() + static_cast<std::size_t>(p) * m;
    for (int j = 0; j < m; ++j) {
      crow[j] += av * brow[j];
    }
  }
}

void check_matmul_shapes(const Tensor& a, const Tensor& b) {
  if (a.cols != b.rows) {
    throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.cols) +
                     " vs " + std::to_string(b.rows) + ")");
  }
}

}  // namespace

Tensor matmul_serial(const Tensor& a, const Tensor& b) {
  check_matmul_shapes(a, b);
  Tensor c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    matmul_rows(a, b, c, i);
  }
  return c;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_matmul_shapes(a, b);
  Tensor c(a.rows, b.cols);
  const std::int64_t work = static_cast<std::int64_t>(a.rows) * a.cols * b.cols;
#ifdef MSI_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (work >= 65536)
#endif
  for (int i = 0; i < a.rows; ++i) {
    matmul_rows(a, b, c, i);
  }
  (void)work;
  return c;
}

Tensor transpose(const Tensor& a) {
  Tensor t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) {
      t.at(j, i) = a.at(i, j);
    }
  }
  return t;
}

void add_inplace(Tensor& c, const Tensor& a) {
  if (!c.same_shape(a)) {
    throw ShapeError("add_inplace: shape mismatch");
  }
  for (std::size_t i = 0; i < c.data.size(); ++i) {
    c.data[i] += a.data[i];
  }
}

}  // namespace msi
