#pragma once

#include "msi/tensor.hpp"

namespace msi {

// Dense kernels. matmul_serial is the reference implementation; matmul runs
// the same per-element arithmetic with the row loop under OpenMP once the
// work is large enough, so the two agree bitwise for all inputs.

Tensor matmul_serial(const Tensor& a, const Tensor& b);
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& a);

// c += a, shapes must match.
void add_inplace(Tensor& c, const Tensor& a);

}  // namespace msi
