#include "ncg/subspace.hpp"

#include <Eigen/SVD>

namespace ncg {

OperatorSubspace subspace_span(const std::vector<Mat>& generators, double rel_tol) {
  require(!generators.empty(), "subspace_span: need at least one generator");
  require(rel_tol > 0.0 && rel_tol < 1.0, "subspace_span: rel_tol out of range");
  const Eigen::Index r = generators.front().rows();
  const Eigen::Index c = generators.front().cols();
  Mat stack(r * c, static_cast<Eigen::Index>(generators.size()));
  for (size_t k = 0; k < generators.size(); ++k) {
    require(generators[k].rows() == r && generators[k].cols() == c,
            "subspace_span: generators must share dimensions");
    stack.col(static_cast<Eigen::Index>(k)) = vec(generators[k]);
  }
  OperatorSubspace out;
  out.rows = r;
  out.cols = c;
  out.tol = rel_tol;
  // JacobiSVD rather than BDCSVD: the divide-and-conquer kernel can return a
  // thin-U column far outside the column space for complex stacks with many
  // coincident singular values, which silently inflates the reported span.
  // These stacks are small (rows*cols by #generators), so the slower but
  // unconditionally accurate one-sided Jacobi iteration is the right tool.
  Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > rel_tol * smax && sv(rank) > 0.0) ++rank;
  out.basis = svd.matrixU().leftCols(rank);
  return out;
}

ContainsResult subspace_contains(const OperatorSubspace& s, const Mat& m, double tol) {
  require(m.rows() == s.rows && m.cols() == s.cols, "subspace_contains: dimension mismatch");
  if (tol <= 0.0) tol = s.tol;
  Vec v = vec(m);
  Vec proj = s.rank() > 0 ? Vec(s.basis * (s.basis.adjoint() * v)) : Vec(Vec::Zero(v.size()));
  double res = (v - proj).norm();
  return {res <= tol * std::max(1.0, v.norm()), res};
}

bool subspace_equal(const OperatorSubspace& a, const OperatorSubspace& b, double tol) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  if (a.rank() != b.rank()) return false;
  for (Eigen::Index k = 0; k < b.rank(); ++k)
    if (!subspace_contains(a, b.basis_matrix(k), tol).contained) return false;
  for (Eigen::Index k = 0; k < a.rank(); ++k)
    if (!subspace_contains(b, a.basis_matrix(k), tol).contained) return false;
  return true;
}

}  // namespace ncg
