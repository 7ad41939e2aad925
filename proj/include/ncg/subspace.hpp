// Linear subspaces of operator space, represented by an orthonormal basis of
// vectorized matrices. Built once via SVD with a relative rank cutoff and then
// queried for membership / equality through orthogonal projection residuals.
#pragma once

#include "ncg/matrix.hpp"

namespace ncg {

struct OperatorSubspace {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Mat basis;        // (rows*cols) x rank, orthonormal columns
  double tol = 1e-9;

  Eigen::Index rank() const { return basis.cols(); }
  Mat basis_matrix(Eigen::Index k) const { return unvec(basis.col(k), rows, cols); }
};

// Span of a list of equally-sized matrices. rel_tol is the relative singular
// value cutoff deciding the rank.
OperatorSubspace subspace_span(const std::vector<Mat>& generators, double rel_tol = 1e-9);

struct ContainsResult {
  bool contained = false;
  double residual = 0.0;  // Hilbert-Schmidt norm of M minus its projection
};

// Membership test: residual <= tol * max(1, ||M||_HS). A tol of 0 picks the
// subspace's own tolerance.
ContainsResult subspace_contains(const OperatorSubspace& s, const Mat& m, double tol = 0.0);

// Equality as subspaces: equal ranks plus mutual containment of the bases.
bool subspace_equal(const OperatorSubspace& a, const OperatorSubspace& b, double tol = 0.0);

}  // namespace ncg
