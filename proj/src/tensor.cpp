#include "msi/tensor.hpp"

#include <cmath>

#include "msi/errors.hpp"

namespace msi {

Tensor::Tensor(int r, int c, double fill) : rows(r), cols(c) {
  if (r < 0 || c < 0) {
    throw ShapeError("Tensor: negative dimension");
  }
  data.assign(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill);
}

namespace {

template <typename Rows>
Tensor build_from_rows(const Rows& rows) {
  Tensor t(static_cast<int>(rows.size()),
           rows.size() == 0 ? 0 : static_cast<int>(rows.begin()->size()));
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != t.cols) {
      throw ShapeError("Tensor::from_rows: ragged rows");
    }
    int j = 0;
    for (double v : row) {
      t.at(i, j++) = v;
    }
    ++i;
  }
  return t;
}

}  // namespace

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  return build_from_rows(rows);
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
  return build_from_rows(rows);
}

Tensor Tensor::identity(int n) {
  Tensor t(n, n);
  for (int i = 0; i < n; ++i) {
    t.at(i, i) = 1.0;
  }
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

}  // namespace msi
