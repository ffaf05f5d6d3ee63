#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <complex>
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "complex_matrix.hpp"
#include "rng.hpp"

namespace mposim {

struct SvdError : std::runtime_error {
  std::size_t rows, cols;
  SvdError(const std::string& what, std::size_t r, std::size_t c)
      : std::runtime_error(what + " (" + std::to_string(r) + "x" + std::to_string(c) + ")"),
        rows(r),
        cols(c) {}
};

// Thin SVD a = u * diag(s) * vh. s is descending and nonnegative, u and vh
// are isometries, and the phase of every column of u is fixed so that its
// largest-magnitude entry is real and positive (first such entry on ties).
struct SvdResult {
  ComplexMatrix u;        // rows x k
  std::vector<double> s;  // k, descending
  ComplexMatrix vh;       // k x cols
};

inline SvdResult svd(ComplexMatrix a) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m == 0 || n == 0) throw SvdError("svd: empty matrix", m, n);
  const std::size_t k = std::min(m, n);

  SvdResult r;
  r.u = ComplexMatrix(m, k);
  r.s.assign(k, 0.0);
  r.vh = ComplexMatrix(k, n);

  lapack_int info = LAPACKE_zgesdd(LAPACK_ROW_MAJOR, 'S', static_cast<lapack_int>(m),
                                   static_cast<lapack_int>(n), a.data(),
                                   static_cast<lapack_int>(n), r.s.data(), r.u.data(),
                                   static_cast<lapack_int>(k), r.vh.data(),
                                   static_cast<lapack_int>(n));
  if (info != 0) {
    // zgesdd occasionally fails to converge; zgesvd is slower but sturdier.
    ComplexMatrix b = a;
    std::vector<double> superb(k > 1 ? k - 1 : 1);
    info = LAPACKE_zgesvd(LAPACK_ROW_MAJOR, 'S', 'S', static_cast<lapack_int>(m),
                          static_cast<lapack_int>(n), b.data(), static_cast<lapack_int>(n),
                          r.s.data(), r.u.data(), static_cast<lapack_int>(k), r.vh.data(),
                          static_cast<lapack_int>(n), superb.data());
    if (info != 0) throw SvdError("svd: LAPACK did not converge", m, n);
  }

  for (std::size_t j = 0; j < k; ++j) {
    std::size_t imax = 0;
    double amax = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = std::abs(r.u(i, j));
      if (v > amax) {
        amax = v;
        imax = i;
      }
    }
    if (amax <= 0.0) continue;
    const cplx phase = r.u(imax, j) / amax;
    const cplx ph_conj = std::conj(phase);
    for (std::size_t i = 0; i < m; ++i) r.u(i, j) *= ph_conj;
    for (std::size_t i = 0; i < n; ++i) r.vh(j, i) *= phase;
  }
  return r;
}

// Thin QR a = q * r: q is rows x k with orthonormal columns, r is k x cols
// upper triangular, k = min(rows, cols). No rank revealing, no pivoting.
struct QrResult {
  ComplexMatrix q;
  ComplexMatrix r;
};

inline QrResult qr(ComplexMatrix a) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m == 0 || n == 0) throw std::invalid_argument("qr: empty matrix");
  const std::size_t k = std::min(m, n);
  std::vector<cplx> tau(k);
  lapack_int info = LAPACKE_zgeqrf(LAPACK_ROW_MAJOR, static_cast<lapack_int>(m),
                                   static_cast<lapack_int>(n), a.data(),
                                   static_cast<lapack_int>(n), tau.data());
  if (info != 0) throw std::runtime_error("qr: zgeqrf failed");

  QrResult out;
  out.r = ComplexMatrix(k, n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < n; ++j) out.r(i, j) = a(i, j);

  info = LAPACKE_zungqr(LAPACK_ROW_MAJOR, static_cast<lapack_int>(m),
                        static_cast<lapack_int>(k), static_cast<lapack_int>(k), a.data(),
                        static_cast<lapack_int>(n), tau.data());
  if (info != 0) throw std::runtime_error("qr: zungqr failed");
  out.q = ComplexMatrix(m, k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) out.q(i, j) = a(i, j);
  return out;
}

// Thin LQ a = l * q: l is rows x k lower triangular, q is k x cols with
// orthonormal rows, k = min(rows, cols).
struct LqResult {
  ComplexMatrix l;
  ComplexMatrix q;
};

inline LqResult lq(ComplexMatrix a) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m == 0 || n == 0) throw std::invalid_argument("lq: empty matrix");
  const std::size_t k = std::min(m, n);
  std::vector<cplx> tau(k);
  lapack_int info = LAPACKE_zgelqf(LAPACK_ROW_MAJOR, static_cast<lapack_int>(m),
                                   static_cast<lapack_int>(n), a.data(),
                                   static_cast<lapack_int>(n), tau.data());
  if (info != 0) throw std::runtime_error("lq: zgelqf failed");

  LqResult out;
  out.l = ComplexMatrix(m, k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= std::min(i, k - 1); ++j) out.l(i, j) = a(i, j);

  info = LAPACKE_zunglq(LAPACK_ROW_MAJOR, static_cast<lapack_int>(k),
                        static_cast<lapack_int>(n), static_cast<lapack_int>(k), a.data(),
                        static_cast<lapack_int>(n), tau.data());
  if (info != 0) throw std::runtime_error("lq: zunglq failed");
  out.q = ComplexMatrix(k, n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < n; ++j) out.q(i, j) = a(i, j);
  return out;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx(0.0, 0.0)) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          r(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
    }
  return r;
}

// Haar-distributed unitary: QR of a Ginibre matrix with the R diagonal phases
// divided out, which makes the distribution exactly left and right invariant.
inline ComplexMatrix haar_unitary(std::size_t dim, RngStream& rng) {
  if (dim == 0) throw std::invalid_argument("haar_unitary: dim must be positive");
  ComplexMatrix g(dim, dim);
  const double inv_sqrt2 = 0.70710678118654752440;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      g(i, j) = cplx(rng.normal() * inv_sqrt2, rng.normal() * inv_sqrt2);

  std::vector<cplx> tau(dim);
  lapack_int info = LAPACKE_zgeqrf(LAPACK_ROW_MAJOR, static_cast<lapack_int>(dim),
                                   static_cast<lapack_int>(dim), g.data(),
                                   static_cast<lapack_int>(dim), tau.data());
  if (info != 0) throw std::runtime_error("haar_unitary: zgeqrf failed");

  std::vector<cplx> phase(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const cplx rjj = g(j, j);
    const double a = std::abs(rjj);
    phase[j] = (a > 0.0) ? rjj / a : cplx(1.0, 0.0);
  }

  info = LAPACKE_zungqr(LAPACK_ROW_MAJOR, static_cast<lapack_int>(dim),
                        static_cast<lapack_int>(dim), static_cast<lapack_int>(dim), g.data(),
                        static_cast<lapack_int>(dim), tau.data());
  if (info != 0) throw std::runtime_error("haar_unitary: zungqr failed");

  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) g(i, j) *= phase[j];
  return g;
}

inline double unitarity_defect(const ComplexMatrix& u) {
  return max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.cols()));
}

// Eigenvalues of a Hermitian matrix, ascending. Only the upper triangle and
// the diagonal of the input are referenced.
inline std::vector<double> hermitian_eigenvalues(ComplexMatrix a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("hermitian_eigenvalues: matrix must be square");
  const std::size_t n = a.rows();
  std::vector<double> w(n);
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_ROW_MAJOR, 'N', 'U', static_cast<lapack_int>(n), a.data(),
                     static_cast<lapack_int>(n), w.data());
  if (info != 0) throw std::runtime_error("hermitian_eigenvalues: zheevd failed");
  return w;
}

}  // namespace mposim
