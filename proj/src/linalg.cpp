#include "fdrelay/linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fdrelay {

CMatrix hermitize(const CMatrix& a) {
  return (a + a.adjoint()) * 0.5;
}

CMatrix diag_part(const CMatrix& a) {
  CMatrix d = CMatrix::Zero(a.rows(), a.cols());
  d.diagonal() = a.diagonal();
  return d;
}

Complex inner(const CMatrix& a, const CMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum();
}

bool is_hermitian(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_eigenvalue(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void require_hermitian_psd(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
  }
  if (!is_hermitian(a, 1e-9)) {
    throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian");
  }
  if (a.size() == 0) return;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (min_eigenvalue(hermitize(a)) < -kPsdTolerance * scale) {
    throw std::invalid_argument(std::string(what) + ": matrix is indefinite");
  }
}

double log2det_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("log2det_hpd: matrix is not positive definite");
  }
  // det(A) = prod(L_ii)^2 with a real positive diagonal.
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log2(l(i, i).real());
  return 2.0 * acc;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

CMatrix psd_sqrt(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(a));
  const RVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace fdrelay
