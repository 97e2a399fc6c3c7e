#pragma once

// Small complex linear-algebra helpers shared by the estimation, rate and
// optimization code. Everything works on dynamic-size Eigen matrices; the
// systems of interest are a handful of antennas per node.

#include <Eigen/Dense>

#include <complex>

namespace fdrelay {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Tolerance used for Hermitian / PSD input validation.
inline constexpr double kPsdTolerance = 1e-10;

/// (A + A^H) / 2.
CMatrix hermitize(const CMatrix& a);

/// Diagonal matrix holding the diagonal of `a`.
CMatrix diag_part(const CMatrix& a);

/// Sum over all entries of conj(a) .* b, i.e. tr(a^H b).
Complex inner(const CMatrix& a, const CMatrix& b);

bool is_hermitian(const CMatrix& a, double tol = 1e-12);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const CMatrix& a);

/// Throws std::invalid_argument unless `a` is square, Hermitian (relative
/// tolerance) and has no eigenvalue below -kPsdTolerance * max(1, |a|).
void require_hermitian_psd(const CMatrix& a, const char* what);

/// log2 det(A) for Hermitian positive-definite A through a Cholesky factor.
/// Throws std::domain_error if the factorization fails.
double log2det_hpd(const CMatrix& a);

/// Largest entrywise modulus of a - b.
double max_abs_diff(const CMatrix& a, const CMatrix& b);

/// Hermitian square root of a PSD matrix (negative eigenvalues clipped).
CMatrix psd_sqrt(const CMatrix& a);

}  // namespace fdrelay
