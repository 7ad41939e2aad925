// Dense complex matrix helpers shared by the whole library: Hermitian
// eigendecomposition with symmetrization guard, operator (spectral) norm,
// Hilbert-Schmidt inner products, Kronecker products and vectorization.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ncg {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

struct EigResult {
  RVec values;   // ascending
  Mat vectors;   // columns are orthonormal eigenvectors
};

// Relative size of the anti-Hermitian part above which a matrix is rejected
// as "not Hermitian" by herm_eig.
inline constexpr double kHermRejectTol = 1e-12;

inline double hs_norm(const Mat& m) { return m.norm(); }

inline Complex hs_inner(const Mat& a, const Mat& b) {
  return (a.adjoint() * b).trace();
}

// Frobenius-relative Hermiticity defect ||M - M*|| / max(1, ||M||).
double hermiticity_defect(const Mat& m);

// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
// (M + M*)/2 before factorization; inputs whose anti-Hermitian part exceeds
// kHermRejectTol relative to the norm are rejected.
EigResult herm_eig(const Mat& m);

// Largest singular value. Works for rectangular inputs.
double operator_norm(const Mat& m);

// Column-stacking by rows (row-major vec), matching the serialized layout.
Vec vec(const Mat& m);
Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols);

Mat kron(const Mat& a, const Mat& b);

inline Mat comm(const Mat& a, const Mat& b) { return a * b - b * a; }
inline Mat anticomm(const Mat& a, const Mat& b) { return a * b + b * a; }

inline bool is_hermitian(const Mat& m, double tol = 1e-10) {
  return m.rows() == m.cols() && (m - m.adjoint()).norm() <= tol * std::max(1.0, m.norm());
}

// True when every imaginary part is exactly 0.0 (bitwise), which is the
// trigger condition for the real-arithmetic reductions downstream.
bool is_exactly_real(const Mat& m);

void require(bool cond, const std::string& msg);

}  // namespace ncg
