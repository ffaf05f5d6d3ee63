#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include <cblas.h>

namespace mposim {

using cplx = std::complex<double>;

// Dense row-major complex matrix. Entries must stay finite; constructors that
// accept external data validate, arithmetic trusts its operands.
class ComplexMatrix {
 public:
  ComplexMatrix() : rows_(0), cols_(0) {}

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), v_(rows * cols) {}

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
      : rows_(rows), cols_(cols), v_(std::move(data)) {
    if (v_.size() != rows_ * cols_)
      throw std::invalid_argument("ComplexMatrix: data size mismatch");
    for (const cplx& z : v_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("ComplexMatrix: non-finite entry");
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }

  cplx& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return v_[i * cols_ + j];
  }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return v_[i * cols_ + j];
  }

  cplx* data() { return v_.data(); }
  const cplx* data() const { return v_.data(); }

  // Reinterpret the row-major buffer under new dimensions of the same total
  // size; consumes this matrix without copying the data.
  ComplexMatrix reshaped(std::size_t rows, std::size_t cols) && {
    if (rows * cols != v_.size())
      throw std::invalid_argument("ComplexMatrix: reshape size mismatch");
    ComplexMatrix r;
    r.rows_ = rows;
    r.cols_ = cols;
    r.v_ = std::move(v_);
    rows_ = cols_ = 0;
    return r;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  ComplexMatrix transpose() const {
    ComplexMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  ComplexMatrix conjugate() const {
    ComplexMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < v_.size(); ++i) r.v_[i] = std::conj(v_[i]);
    return r;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const cplx& z : v_) s += std::norm(z);
    return std::sqrt(s);
  }

  double max_abs() const {
    double s = 0.0;
    for (const cplx& z : v_) s = std::max(s, std::abs(z));
    return s;
  }

  bool all_finite() const {
    for (const cplx& z : v_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    assert(rows_ == o.rows_ && cols_ == o.cols_);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }

  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    assert(rows_ == o.rows_ && cols_ == o.cols_);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }

  ComplexMatrix& operator*=(cplx a) {
    for (cplx& z : v_) z *= a;
    return *this;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<cplx> v_;
};

inline ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) {
  a += b;
  return a;
}

inline ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) {
  a -= b;
  return a;
}

inline ComplexMatrix operator*(ComplexMatrix a, cplx s) {
  a *= s;
  return a;
}

inline ComplexMatrix operator*(cplx s, ComplexMatrix a) {
  a *= s;
  return a;
}

// c = a * b through BLAS; the only dense product used anywhere.
inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  assert(a.cols() == b.rows());
  ComplexMatrix c(a.rows(), b.cols());
  if (a.rows() == 0 || b.cols() == 0 || a.cols() == 0) return c;
  const cplx one(1.0, 0.0), zero(0.0, 0.0);
  cblas_zgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(a.rows()),
              static_cast<int>(b.cols()), static_cast<int>(a.cols()), &one, a.data(),
              static_cast<int>(a.cols()), b.data(), static_cast<int>(b.cols()), &zero,
              c.data(), static_cast<int>(c.cols()));
  return c;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s = std::max(s, std::abs(a(i, j) - b(i, j)));
  return s;
}

}  // namespace mposim
