#include "prw/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "prw/errors.hpp"

namespace prw {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw DimensionError("row index out of range");
    std::copy_n(row(indices[i]).begin(), cols_, out.row(i).begin());
  }
  return out;
}

Mask Mask::diagonal(std::size_t n) {
  Mask m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i);
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape(a) + " * " + shape(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix pairwise_sq_dist(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols() || x.cols() == 0) {
    throw DimensionError("pairwise_sq_dist: " + shape(x) + " vs " + shape(y));
  }
  Matrix out(x.rows(), y.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    for (std::size_t j = 0; j < y.rows(); ++j) {
      auto yj = y.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) {
        const double d = xi[k] - yj[k];
        acc += d * d;
      }
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix softmax_rows(const Matrix& m, const Mask* mask) {
  if (mask != nullptr && (mask->rows() != m.rows() || mask->cols() != m.cols())) {
    throw DimensionError("softmax_rows: mask shape does not match " + shape(m));
  }
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    std::size_t live = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (mask != nullptr && mask->masked(i, j)) continue;
      if (!std::isfinite(m(i, j))) {
        throw NumericError("softmax_rows: non-finite entry in row " + std::to_string(i));
      }
      peak = std::max(peak, m(i, j));
      ++live;
    }
    if (live == 0) {
      throw DegenerateError("softmax_rows: row " + std::to_string(i) + " is fully masked");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (mask != nullptr && mask->masked(i, j)) continue;
      const double e = std::exp(m(i, j) - peak);
      out(i, j) = e;
      total += e;
    }
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) /= total;
  }
  return out;
}

Matrix vstack(std::span<const Matrix> parts) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool have_cols = false;
  for (const auto& p : parts) {
    if (p.rows() == 0) continue;
    if (have_cols && p.cols() != cols) throw DimensionError("vstack: column mismatch");
    cols = p.cols();
    have_cols = true;
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::size_t r = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.rows(); ++i, ++r) {
      std::copy_n(p.row(i).begin(), cols, out.row(r).begin());
    }
  }
  return out;
}

}  // namespace prw
