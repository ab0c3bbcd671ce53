#pragma once

#include <cstddef>
#include <vector>

namespace citegcn {

// Dense row-major matrix. All products accumulate per output entry in a
// fixed index order so results are reproducible run to run.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
};

Matrix matmul(const Matrix& a, const Matrix& b);

// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

bool all_finite(const Matrix& a);

}  // namespace citegcn
