#pragma once

#include <initializer_list>
#include <vector>

namespace msi {

// Dense 2-D double tensor, row-major. Everything in this project is 64-bit
// floating point; shapes are (rows, cols) only.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0);

  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor from_rows(const std::vector<std::vector<double>>& rows);
  static Tensor identity(int n);

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& other) const {
    return rows == other.rows && cols == other.cols;
  }

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

}  // namespace msi
