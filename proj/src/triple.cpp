#include "ncg/triple.hpp"

namespace ncg {

namespace {

CheckResult make_check(const std::string& name, double residual, double tol) {
  return {name, residual <= tol, residual};
}

}  // namespace

ValidationReport check_axioms(const SpectralTriple& t, double tol) {
  ValidationReport rep;
  const Eigen::Index n = t.algebra.hilbert_dim;
  const double dscale = std::max(1.0, t.dirac.norm());

  bool dims_ok = t.dirac.rows() == n && t.dirac.cols() == n;
  rep.checks.push_back({"dimensions", dims_ok, dims_ok ? 0.0 : 1.0});
  if (!dims_ok) return rep;

  rep.checks.push_back(
      make_check("dirac_hermitian", (t.dirac - t.dirac.adjoint()).norm() / dscale, tol));

  if (t.grading) {
    const Mat& g = *t.grading;
    bool gdims = g.rows() == n && g.cols() == n;
    rep.checks.push_back({"grading_dimensions", gdims, gdims ? 0.0 : 1.0});
    if (!gdims) return rep;
    rep.checks.push_back(make_check("grading_hermitian", (g - g.adjoint()).norm(), tol));
    rep.checks.push_back(
        make_check("grading_involutive", (g * g - Mat::Identity(n, n)).norm(), tol));
    rep.checks.push_back(
        make_check("grading_commutes_with_algebra", commutation_residual(t.algebra, g), tol));
    rep.checks.push_back(
        make_check("grading_anticommutes_with_dirac", anticomm(g, t.dirac).norm() / dscale, tol));
    // gamma = +-1 forces D = 0 by anticommutation; flag that degenerate case
    // explicitly instead of letting it masquerade as an even triple.
    double plus = (g - Mat::Identity(n, n)).norm();
    double minus = (g + Mat::Identity(n, n)).norm();
    bool degenerate = (plus <= tol || minus <= tol) && t.dirac.norm() > tol;
    rep.checks.push_back({"grading_nondegenerate", !degenerate, degenerate ? 1.0 : 0.0});
  }
  return rep;
}

Mat differential(const SpectralTriple& t, const Mat& a) {
  require(a.rows() == t.algebra.hilbert_dim && a.cols() == t.algebra.hilbert_dim,
          "differential: dimension mismatch");
  return comm(t.dirac, a);
}

OperatorSubspace omega1(const SpectralTriple& t, double rel_tol) {
  // Materializes the algebra basis, so this is meant for small spaces; the
  // span has at most dim(A)^2 generators.
  std::vector<Mat> basis = algebra_basis(t.algebra);
  std::vector<Mat> gens;
  gens.reserve(basis.size() * basis.size());
  for (const Mat& a : basis)
    for (const Mat& b : basis) gens.push_back(a * comm(t.dirac, b));
  return subspace_span(gens, rel_tol);
}

ValidationReport unitary_equivalent(const SpectralTriple& t1, const SpectralTriple& t2,
                                    const Mat& u, double tol) {
  ValidationReport rep;
  const Eigen::Index n = t1.algebra.hilbert_dim;
  bool dims_ok = t2.algebra.hilbert_dim == n && u.rows() == n && u.cols() == n;
  rep.checks.push_back({"dimensions", dims_ok, dims_ok ? 0.0 : 1.0});
  if (!dims_ok) return rep;

  rep.checks.push_back(
      make_check("unitary", (u * u.adjoint() - Mat::Identity(n, n)).norm(), tol));
  rep.checks.push_back(make_check(
      "dirac_intertwined",
      (u * t1.dirac * u.adjoint() - t2.dirac).norm() / std::max(1.0, t1.dirac.norm()), tol));

  // The Hermitian directions span the algebra over C, so carrying all of them
  // into the target algebra carries the whole algebra; streaming keeps big
  // structured algebras out of memory.
  double alg_res = 0.0;
  bool alg_ok = t1.algebra.dim() == t2.algebra.dim();
  if (alg_ok) {
    for_each_hermitian_direction(t1.algebra, [&](const Mat& h) {
      auto c = algebra_contains(t2.algebra, Mat(u * h * u.adjoint()), tol);
      alg_res = std::max(alg_res, c.residual);
      alg_ok = alg_ok && c.contained;
    });
  } else {
    alg_res = 1.0;
  }
  rep.checks.push_back({"algebra_carried_onto_algebra", alg_ok, alg_res});

  if (t1.grading.has_value() != t2.grading.has_value()) {
    rep.checks.push_back({"grading_intertwined", false, 1.0});
  } else if (t1.grading) {
    rep.checks.push_back(make_check(
        "grading_intertwined", (u * (*t1.grading) * u.adjoint() - *t2.grading).norm(), tol));
  }
  return rep;
}

SpectralTriple wigner_double(const SpectralTriple& t) {
  const Eigen::Index n = t.algebra.hilbert_dim;
  const Mat id = Mat::Identity(n, n);

  SpectralTriple out;
  if (t.algebra.structured) {
    // a (x) 1 on C^L (x) C^f (x) C^(R*n): the right identity factor absorbs
    // the dual space, so the doubled algebra stays structured.
    const auto [L, f, R] = *t.algebra.structured;
    out.algebra = lifted_matrix_algebra(L, f, R * n);
  } else {
    std::vector<Mat> gens;
    gens.reserve(t.algebra.basis.size());
    for (const Mat& a : t.algebra.basis) gens.push_back(kron(a, id));
    out.algebra = make_algebra(n * n, gens, t.algebra.unital);
  }
  out.dirac = kron(t.dirac, id) - kron(id, t.dirac.transpose());
  if (t.grading) out.grading = kron(*t.grading, t.grading->transpose());
  return out;
}

State wigner_lift_state(const State& s) {
  return make_state(kron(s.rho, s.rho.conjugate()));
}

}  // namespace ncg
