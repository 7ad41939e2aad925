#include "ncg/matrix.hpp"

#include <Eigen/SVD>

namespace ncg {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double hermiticity_defect(const Mat& m) {
  if (m.rows() != m.cols()) return 1.0;
  return (m - m.adjoint()).norm() / std::max(1.0, m.norm());
}

EigResult herm_eig(const Mat& m) {
  require(m.rows() == m.cols(), "herm_eig: matrix must be square");
  require(hermiticity_defect(m) <= kHermRejectTol,
          "herm_eig: anti-Hermitian part exceeds tolerance");
  Mat sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  require(es.info() == Eigen::Success, "herm_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  // The spectral norm of M equals the square root of the largest eigenvalue
  // of M*M; going through the self-adjoint solver is faster than a full SVD
  // and accurate enough at the tolerances used here.
  if (m.rows() >= m.cols()) {
    Mat g = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  Mat g = m * m.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Vec vec(const Mat& m) {
  Vec v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(k++) = m(i, j);
  return v;
}

Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  require(v.size() == rows * cols, "unvec: size mismatch");
  Mat m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v(k++);
  return m;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_exactly_real(const Mat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j).imag() != 0.0) return false;
  return true;
}

}  // namespace ncg
