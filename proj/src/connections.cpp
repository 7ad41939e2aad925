#include "ncg/connections.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <utility>

namespace ncg {

namespace {

// Coefficients below this level are treated as absent when scanning sparse
// coordinate maps and when collapsing dictionary decompositions.
constexpr double kNegligible = 1e-14;

Mat random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = Complex(g(rng), g(rng)) / std::sqrt(2.0);
  return m;
}

Mat random_algebra_element(const MatrixAlgebra& a, std::mt19937_64& rng) {
  if (a.structured)
    return structured_lift(*a.structured,
                           random_gaussian(a.structured->factor, a.structured->factor, rng));
  Mat out = Mat::Zero(a.hilbert_dim, a.hilbert_dim);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const Mat& b : a.basis) out += Complex(g(rng), g(rng)) * b;
  return out;
}

// Represented correction sum_w kron(left_w, omega_w(x) * right_w) on the
// total space of dimension `total`.
Mat correction_at(const std::vector<ConnectionTerm>& terms, const Mat& x, Eigen::Index total) {
  Mat out = Mat::Zero(total, total);
  for (const ConnectionTerm& t : terms) {
    Mat blockm = t.omega(x) * t.right;
    require(t.left.rows() * blockm.rows() == total,
            "connection: term shape does not tile the represented space");
    out += kron(t.left, blockm);
  }
  return out;
}

// Vertical stack of the component operators of a projective-module element.
Mat column_stack(const std::vector<Mat>& eta, Eigen::Index h) {
  Mat out(static_cast<Eigen::Index>(eta.size()) * h, h);
  for (size_t i = 0; i < eta.size(); ++i) out.middleRows(static_cast<Eigen::Index>(i) * h, h) = eta[i];
  return out;
}

// Vertical stack of [D, eta_i].
Mat differential_stack(const std::vector<Mat>& eta, const Mat& d, Eigen::Index h) {
  Mat out(static_cast<Eigen::Index>(eta.size()) * h, h);
  for (size_t i = 0; i < eta.size(); ++i)
    out.middleRows(static_cast<Eigen::Index>(i) * h, h) = comm(d, eta[i]);
  return out;
}

std::vector<Mat> project_columns(const Mat& p, const std::vector<Mat>& cols, Eigen::Index h) {
  const Eigen::Index k = static_cast<Eigen::Index>(cols.size());
  std::vector<Mat> out(static_cast<size_t>(k), Mat::Zero(h, h));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      out[static_cast<size_t>(i)] += p.block(i * h, j * h, h, h) * cols[static_cast<size_t>(j)];
  return out;
}

// kron(I_L, eta, I_R): the action of a rectangular module element on the
// middle tensor factor, mapping C^L (x) C^n (x) C^R to C^L (x) C^m (x) C^R.
Mat middle_action(const Mat& eta, Eigen::Index left, Eigen::Index right) {
  return kron(kron(Mat::Identity(left, left), eta), Mat::Identity(right, right));
}

void validate_projective(const ProjectiveModule& m, double tol) {
  const Eigen::Index h = m.over.hilbert_dim;
  require(m.k > 0, "projective module: k must be positive");
  require(m.p.rows() == m.k * h && m.p.cols() == m.k * h,
          "projective module: projection dimension mismatch");
  const double scale = std::max(1.0, m.p.norm());
  require((m.p - m.p.adjoint()).norm() <= tol * scale,
          "projective module: projection is not Hermitian");
  require((m.p * m.p - m.p).norm() <= tol * scale,
          "projective module: matrix is not idempotent");
  if (m.over.structured) {
    const auto& f = *m.over.structured;
    MatrixAlgebra lifted = lifted_matrix_algebra(m.k * f.left, f.factor, f.right);
    require(commutation_residual(lifted, m.p) <= tol * scale,
            "projective module: projection does not commute with the algebra");
  } else {
    for (const Mat& b : m.over.basis)
      require(comm(m.p, kron(Mat::Identity(m.k, m.k), b)).norm() <= tol * scale,
              "projective module: projection does not commute with the algebra");
  }
}

// Right-multiplication matrices of every algebra_basis element in basis
// coordinates: column j of result[l] holds the coordinates of g_j * g_l.
std::vector<Mat> right_mult_matrices(const MatrixAlgebra& a) {
  if (a.structured) {
    const auto [L, f, R] = *a.structured;
    const double s = 1.0 / std::sqrt(static_cast<double>(L * R));
    const Eigen::Index m = f * f;
    std::vector<Mat> out;
    out.reserve(static_cast<size_t>(m));
    for (Eigen::Index c = 0; c < f; ++c)
      for (Eigen::Index d = 0; d < f; ++d) {
        Mat ra = Mat::Zero(m, m);
        for (Eigen::Index i = 0; i < f; ++i) ra(i * f + d, i * f + c) = s;
        out.push_back(std::move(ra));
      }
    return out;
  }
  const auto& basis = a.basis;
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  std::vector<Mat> out;
  out.reserve(static_cast<size_t>(m));
  for (Eigen::Index l = 0; l < m; ++l) {
    Mat ra(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      Mat prod = basis[static_cast<size_t>(j)] * basis[static_cast<size_t>(l)];
      for (Eigen::Index i = 0; i < m; ++i) ra(i, j) = hs_inner(basis[static_cast<size_t>(i)], prod);
    }
    out.push_back(std::move(ra));
  }
  return out;
}

// Identity-module coordinate data shared by the identity, unitary, and inner
// fluctuation correspondences.
ModuleRep identity_module_rep(const MatrixAlgebra& a) {
  require(a.dim() <= 64,
          "identity correspondence: algebra too large for materialized module coordinates");
  const Eigen::Index h = a.hilbert_dim;
  std::vector<Mat> basis = algebra_basis(a);
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  ModuleRep rep;
  rep.coord_dim = m;
  rep.outer = 1;
  rep.right_act = right_mult_matrices(a);
  rep.realize = Mat(h, m * h);
  for (Eigen::Index l = 0; l < m; ++l) rep.realize.middleCols(l * h, h) = basis[static_cast<size_t>(l)];
  return rep;
}

struct Realization {
  Mat b;  // orthonormal basis of range(p), k*h by r
  SpectralTriple t;
};

Realization fluctuate_impl(const Connection& c) {
  const auto* pm = std::get_if<ProjectiveModule>(&c.module);
  require(pm != nullptr,
          "fluctuate: rectangular bimodules enter through their correspondence constructors");
  validate_projective(*pm, 1e-9);
  const Eigen::Index h = c.base.algebra.hilbert_dim;
  require(pm->over.hilbert_dim == h, "fluctuate: module and triple algebras act on different spaces");
  const Eigen::Index k = pm->k;
  const Eigen::Index kh = k * h;

  Mat alpha = connection_alpha(c);
  const Mat ph = 0.5 * (pm->p + pm->p.adjoint());
  const Mat palpha = ph * alpha * ph;
  require((palpha - palpha.adjoint()).norm() <= 1e-10 * std::max(1.0, alpha.norm()),
          "fluctuate: correction is not Hermitian on the module range");
  if (c.base.grading) {
    Mat g = kron(Mat::Identity(k, k), *c.base.grading);
    require(comm(ph, g).norm() <= 1e-9 * std::max(1.0, ph.norm()),
            "fluctuate: projection does not commute with the grading");
  }

  EigResult eig = herm_eig(ph);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < kh; ++i) {
    require(std::abs(eig.values(i)) <= 1e-7 || std::abs(eig.values(i) - 1.0) <= 1e-7,
            "fluctuate: matrix is not a projection");
    if (eig.values(i) > 0.5) ++r;
  }
  require(r > 0, "fluctuate: zero module");
  Mat b(kh, r);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < kh; ++i)
    if (eig.values(i) > 0.5) b.col(col++) = eig.vectors.col(i);

  // Compressed algebra p (M_k (x) A) p.
  std::vector<Mat> gens;
  std::vector<Mat> basis = algebra_basis(c.base.algebra);
  gens.reserve(static_cast<size_t>(k * k) * basis.size());
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const Mat bi = b.middleRows(i * h, h);
      const Mat bj = b.middleRows(j * h, h);
      for (const Mat& g : basis) gens.push_back(Mat(bi.adjoint() * g * bj));
    }

  Realization out;
  out.b = b;
  out.t.algebra = make_algebra(r, gens, true);
  Mat de = b.adjoint() * (kron(Mat::Identity(k, k), c.base.dirac) + alpha) * b;
  out.t.dirac = 0.5 * (de + de.adjoint());
  if (c.base.grading)
    out.t.grading = Mat(b.adjoint() * kron(Mat::Identity(k, k), *c.base.grading) * b);
  return out;
}

}  // namespace

Mat OneForm::operator()(const Mat& x) const {
  const Mat xe = transform ? transform(x) : x;
  Mat out = Mat::Zero(xe.rows(), xe.cols());
  for (const auto& [a, bm] : terms) out += a * (xe * bm - bm * xe);
  return out;
}

OneForm differential_form(const Mat& b) {
  OneForm w;
  w.terms.emplace_back(Mat(Mat::Identity(b.rows(), b.cols())), b);
  return w;
}

ProjectiveModule make_projective_module(Eigen::Index k, Mat p, MatrixAlgebra over, double tol) {
  ProjectiveModule m{k, std::move(p), std::move(over)};
  validate_projective(m, tol);
  return m;
}

ProjectiveModule free_module(Eigen::Index k, MatrixAlgebra over) {
  const Eigen::Index h = over.hilbert_dim;
  return ProjectiveModule{k, Mat::Identity(k * h, k * h), std::move(over)};
}

Connection grassmannian_connection(ProjectiveModule m, SpectralTriple base) {
  require(m.over.hilbert_dim == base.algebra.hilbert_dim,
          "grassmannian_connection: module and triple algebras act on different spaces");
  validate_projective(m, 1e-9);
  return Connection{std::move(m), std::move(base), {}};
}

Mat connection_alpha(const Connection& c) {
  const auto* pm = std::get_if<ProjectiveModule>(&c.module);
  require(pm != nullptr, "connection_alpha: defined for projective modules only");
  const Eigen::Index total = pm->k * c.base.algebra.hilbert_dim;
  return correction_at(c.terms, c.base.dirac, total);
}

std::optional<OneForm> decompose_one_form(const SpectralTriple& t, const Mat& omega, double tol) {
  const Eigen::Index h = t.algebra.hilbert_dim;
  require(omega.rows() == h && omega.cols() == h, "decompose_one_form: dimension mismatch");
  require(t.algebra.dim() <= 64, "decompose_one_form: algebra too large for the dictionary");
  std::vector<Mat> basis = algebra_basis(t.algebra);
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());

  Mat dict(h * h, m * m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      dict.col(i * m + j) =
          vec(Mat(basis[static_cast<size_t>(i)] * comm(t.dirac, basis[static_cast<size_t>(j)])));
  Vec rhs = vec(omega);
  Vec coef = dict.completeOrthogonalDecomposition().solve(rhs);
  const double residual = (dict * coef - rhs).norm();
  if (residual > tol * std::max(1.0, omega.norm())) return std::nullopt;

  OneForm w;
  for (Eigen::Index j = 0; j < m; ++j) {
    Mat a = Mat::Zero(h, h);
    for (Eigen::Index i = 0; i < m; ++i) a += coef(i * m + j) * basis[static_cast<size_t>(i)];
    if (a.norm() > kNegligible) w.terms.emplace_back(std::move(a), basis[static_cast<size_t>(j)]);
  }
  return w;
}

Connection connection_from_alpha(ProjectiveModule m, SpectralTriple base, const Mat& alpha,
                                 double tol) {
  const Eigen::Index h = base.algebra.hilbert_dim;
  const Eigen::Index k = m.k;
  require(alpha.rows() == k * h && alpha.cols() == k * h,
          "connection_from_alpha: correction dimension mismatch");
  validate_projective(m, 1e-9);
  const double scale = std::max(1.0, alpha.norm());
  std::vector<ConnectionTerm> terms;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      Mat blockm = alpha.block(i * h, j * h, h, h);
      if (blockm.norm() <= kNegligible * scale) continue;
      auto w = decompose_one_form(base, blockm, tol);
      require(w.has_value(), "connection_from_alpha: correction block is not a one-form");
      Mat eij = Mat::Zero(k, k);
      eij(i, j) = 1.0;
      terms.push_back({std::move(eij), Mat::Identity(h, h), std::move(*w)});
    }
  return Connection{std::move(m), std::move(base), std::move(terms)};
}

ValidationReport check_leibniz(const Connection& c, int trials, unsigned seed) {
  ValidationReport report;
  const Mat& d = c.base.dirac;
  const Eigen::Index h = c.base.algebra.hilbert_dim;
  std::mt19937_64 rng(seed);

  // Coefficient typing: every one-form coefficient of matching dimension must
  // lie in the base algebra (pulled-back composite coefficients live on a
  // larger space and were validated at their own level).
  double worst_member = 0.0;
  bool member_pass = true;
  for (const ConnectionTerm& t : c.terms) {
    if (std::holds_alternative<ProjectiveModule>(c.module) && t.right.rows() == h) {
      auto rr = algebra_contains(c.base.algebra, t.right);
      worst_member = std::max(worst_member, rr.residual);
      member_pass = member_pass && rr.contained;
    }
    for (const auto& [a, bm] : t.omega.terms) {
      if (a.rows() != h) continue;
      auto ra = algebra_contains(c.base.algebra, a);
      auto rb = algebra_contains(c.base.algebra, bm);
      worst_member = std::max({worst_member, ra.residual, rb.residual});
      member_pass = member_pass && ra.contained && rb.contained;
    }
  }
  report.checks.push_back({"coefficients-in-algebra", member_pass, worst_member});

  double worst = 0.0;
  if (const auto* pm = std::get_if<ProjectiveModule>(&c.module)) {
    const Eigen::Index k = pm->k;
    const Mat alpha = connection_alpha(c);
    for (int trial = 0; trial < trials; ++trial) {
      std::vector<Mat> raw;
      for (Eigen::Index i = 0; i < k; ++i) raw.push_back(random_algebra_element(c.base.algebra, rng));
      std::vector<Mat> eta = project_columns(pm->p, raw, h);
      Mat a = random_algebra_element(c.base.algebra, rng);
      std::vector<Mat> etaa;
      for (const Mat& e : eta) etaa.push_back(Mat(e * a));

      // T-realizations of nabla(eta a), (nabla eta) a, eta (x) da as maps
      // H -> C^k (x) H.
      auto nabla = [&](const std::vector<Mat>& e) {
        return Mat(pm->p * differential_stack(e, d, h) + alpha * column_stack(e, h));
      };
      Mat lhs = nabla(etaa);
      Mat rhs = nabla(eta) * a + column_stack(eta, h) * comm(d, a);
      const double scale = std::max(1.0, lhs.norm());
      worst = std::max(worst, (lhs - rhs).norm() / scale);
    }
  } else {
    const auto& rb = std::get<RectBimodule>(c.module);
    require(c.base.algebra.structured && c.base.algebra.structured->factor == rb.n,
            "check_leibniz: rectangular modules require a structured base algebra of matching factor");
    const auto [lf, f, rf] = *c.base.algebra.structured;
    for (int trial = 0; trial < trials; ++trial) {
      Mat eta = random_gaussian(rb.m, rb.n, rng);
      Mat z = random_gaussian(rb.n, rb.n, rng);
      Mat a = structured_lift(*c.base.algebra.structured, z);

      auto nabla = [&](const Mat& e) {
        Mat out = Mat::Zero(lf * rb.m * rf, h);
        for (const ConnectionTerm& t : c.terms)
          out += middle_action(Mat(t.left * e * t.right), lf, rf) * t.omega(d);
        return out;
      };
      Mat lhs = nabla(Mat(eta * z));
      Mat rhs = nabla(eta) * a + middle_action(eta, lf, rf) * comm(d, a);
      const double scale = std::max(1.0, lhs.norm());
      worst = std::max(worst, (lhs - rhs).norm() / scale);
    }
  }
  report.checks.push_back({"leibniz-rule", worst <= 1e-9, worst});
  return report;
}

ValidationReport check_compatibility(const Connection& c, int trials, unsigned seed) {
  ValidationReport report;
  const Mat& d = c.base.dirac;
  const Eigen::Index h = c.base.algebra.hilbert_dim;
  std::mt19937_64 rng(seed);
  double worst = 0.0;

  if (const auto* pm = std::get_if<ProjectiveModule>(&c.module)) {
    const Eigen::Index k = pm->k;
    const Mat alpha = connection_alpha(c);
    auto nabla = [&](const std::vector<Mat>& e) {
      return Mat(pm->p * differential_stack(e, d, h) + alpha * column_stack(e, h));
    };
    for (int trial = 0; trial < trials; ++trial) {
      std::vector<Mat> raw1, raw2;
      for (Eigen::Index i = 0; i < k; ++i) {
        raw1.push_back(random_algebra_element(c.base.algebra, rng));
        raw2.push_back(random_algebra_element(c.base.algebra, rng));
      }
      std::vector<Mat> eta = project_columns(pm->p, raw1, h);
      std::vector<Mat> xi = project_columns(pm->p, raw2, h);
      Mat se = column_stack(eta, h), sx = column_stack(xi, h);
      Mat pairing = se.adjoint() * sx;  // (eta, xi) in A
      Mat lhs = se.adjoint() * nabla(xi) - nabla(eta).adjoint() * sx;
      Mat rhs = comm(d, pairing);
      worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
    }
  } else {
    const auto& rb = std::get<RectBimodule>(c.module);
    require(c.base.algebra.structured && c.base.algebra.structured->factor == rb.n,
            "check_compatibility: rectangular modules require a structured base algebra of matching factor");
    const auto [lf, f, rf] = *c.base.algebra.structured;
    auto nabla = [&](const Mat& e) {
      Mat out = Mat::Zero(lf * rb.m * rf, h);
      for (const ConnectionTerm& t : c.terms)
        out += middle_action(Mat(t.left * e * t.right), lf, rf) * t.omega(d);
      return out;
    };
    for (int trial = 0; trial < trials; ++trial) {
      Mat eta = random_gaussian(rb.m, rb.n, rng);
      Mat xi = random_gaussian(rb.m, rb.n, rng);
      Mat me = middle_action(eta, lf, rf), mx = middle_action(xi, lf, rf);
      Mat lhs = me.adjoint() * nabla(xi) - nabla(eta).adjoint() * mx;
      Mat rhs = comm(d, Mat(me.adjoint() * mx));
      worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
    }
  }
  report.checks.push_back({"hermitian-compatibility", worst <= 1e-9, worst});
  return report;
}

SpectralTriple fluctuate(const Connection& c) { return fluctuate_impl(c).t; }

FluctuationComposite compose_fluctuations(const Connection& c1, const Connection& c2) {
  const auto* pm1 = std::get_if<ProjectiveModule>(&c1.module);
  const auto* pm2 = std::get_if<ProjectiveModule>(&c2.module);
  require(pm1 != nullptr && pm2 != nullptr, "compose_fluctuations: projective modules only");
  Realization r1 = fluctuate_impl(c1);
  const Eigen::Index rdim = r1.b.cols();
  require(c2.base.algebra.hilbert_dim == rdim,
          "compose_fluctuations: second connection does not live over the fluctuated triple");
  require((c2.base.dirac - r1.t.dirac).norm() <= 1e-9 * std::max(1.0, r1.t.dirac.norm()),
          "compose_fluctuations: second base Dirac differs from the fluctuated Dirac");

  const Eigen::Index h = c1.base.algebra.hilbert_dim;
  const Eigen::Index k1 = pm1->k, k2 = pm2->k;
  const Mat phi = kron(Mat::Identity(k2, k2), r1.b);  // C^{k2} (x) range(p1) into C^{k2 k1} (x) H

  Connection composite;
  composite.base = c1.base;
  ProjectiveModule mod;
  mod.k = k2 * k1;
  mod.p = phi * pm2->p * phi.adjoint();
  mod.over = c1.base.algebra;
  composite.module = std::move(mod);

  for (const ConnectionTerm& t : c1.terms)
    composite.terms.push_back({kron(Mat::Identity(k2, k2), t.left), t.right, t.omega});

  // Second-leg corrections pulled back through the sigma-substitution: the
  // compressed Dirac argument is rebuilt from the first leg at every
  // evaluation point, so the pullback stays exact for any substituted X.
  const Mat b1 = r1.b;
  const std::vector<ConnectionTerm> first_terms = c1.terms;
  const Mat p1 = 0.5 * (pm1->p + pm1->p.adjoint());
  for (const ConnectionTerm& t : c2.terms) {
    ConnectionTerm pulled;
    pulled.left = t.left;
    pulled.right = b1 * t.right * b1.adjoint();
    OneForm w;
    for (const auto& [a, bm] : t.omega.terms)
      w.terms.emplace_back(Mat(b1 * a * b1.adjoint()), Mat(b1 * bm * b1.adjoint()));
    auto inner = t.omega.transform;
    const Eigen::Index kk1 = k1;
    w.transform = [b1, first_terms, p1, inner, kk1, h](const Mat& x) {
      Mat g = kron(Mat::Identity(kk1, kk1), x) + correction_at(first_terms, x, kk1 * h);
      Mat s = b1.adjoint() * (p1 * g * p1) * b1;
      if (inner) s = inner(s);
      return Mat(b1 * s * b1.adjoint());
    };
    pulled.omega = std::move(w);
    composite.terms.push_back(std::move(pulled));
  }

  // Two-step comparison in the aligned basis phi * B2.
  Realization r2 = fluctuate_impl(c2);
  const Mat b2c = phi * r2.b;
  Mat dcomp = b2c.adjoint() *
              (kron(Mat::Identity(k2 * k1, k2 * k1), c1.base.dirac) +
               correction_at(composite.terms, c1.base.dirac, k2 * k1 * h)) *
              b2c;
  dcomp = 0.5 * (dcomp + dcomp.adjoint());
  const double residual = (dcomp - r2.t.dirac).norm() / std::max(1.0, r2.t.dirac.norm());

  FluctuationComposite out{std::move(composite), {}, residual};
  out.triple = fluctuate(out.connection);
  return out;
}

Correspondence identity_correspondence(const SpectralTriple& t) {
  Correspondence c;
  c.source = t;
  c.target = t;
  c.module = identity_module_rep(t.algebra);
  c.u = Mat::Identity(t.algebra.hilbert_dim, t.algebra.hilbert_dim);
  c.op_with = [](const Mat& x, double* res) {
    if (res) *res = 0.0;
    return x;
  };
  c.op = t.dirac;
  c.assembly_residual = 0.0;
  return c;
}

Correspondence unitary_correspondence(const SpectralTriple& s, const SpectralTriple& t,
                                      const Mat& u, double tol) {
  ValidationReport eq = unitary_equivalent(s, t, u, tol);
  require(eq.all_pass(), "unitary_correspondence: u does not implement an equivalence");
  Correspondence c;
  c.source = s;
  c.target = t;
  c.module = identity_module_rep(s.algebra);
  c.u = u;
  c.op_with = [](const Mat& x, double* res) {
    if (res) *res = 0.0;
    return x;
  };
  c.op = s.dirac;
  return c;
}

Correspondence inner_fluctuation_correspondence(const SpectralTriple& t, const OneForm& omega) {
  const Eigen::Index h = t.algebra.hilbert_dim;
  for (const auto& [a, bm] : omega.terms) {
    require(algebra_contains(t.algebra, a).contained && algebra_contains(t.algebra, bm).contained,
            "inner_fluctuation_correspondence: coefficients must lie in the algebra");
  }
  Mat w = omega(t.dirac);
  require((w - w.adjoint()).norm() <= 1e-9 * std::max(1.0, w.norm()),
          "inner_fluctuation_correspondence: omega(D) must be Hermitian");

  Correspondence c;
  c.source = t;
  c.target = t;
  c.target.dirac = t.dirac + 0.5 * (w + w.adjoint());
  c.module = identity_module_rep(t.algebra);
  c.u = Mat::Identity(h, h);
  c.op_with = [omega](const Mat& x, double* res) {
    if (res) *res = 0.0;
    return Mat(x + omega(x));
  };
  c.op = c.op_with(t.dirac, nullptr);
  return c;
}

Correspondence fluctuation_correspondence(const Connection& c) {
  const auto* pm = std::get_if<ProjectiveModule>(&c.module);
  require(pm != nullptr, "fluctuation_correspondence: projective connections only");
  Realization real = fluctuate_impl(c);
  const Eigen::Index h = c.base.algebra.hilbert_dim;
  const Eigen::Index k = pm->k;
  const Eigen::Index r = real.b.cols();

  Correspondence out;
  out.source = c.base;
  out.target = real.t;
  out.u = Mat::Identity(r, r);

  std::vector<Mat> basis = algebra_basis(c.base.algebra);
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  out.module.coord_dim = k * m;
  out.module.outer = k;
  out.module.right_act = right_mult_matrices(c.base.algebra);
  out.module.realize = Mat(r, k * m * h);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Mat bia = Mat(real.b.middleRows(i * h, h)).adjoint();
    for (Eigen::Index l = 0; l < m; ++l)
      out.module.realize.middleCols((i * m + l) * h, h) = bia * basis[static_cast<size_t>(l)];
  }

  const std::vector<ConnectionTerm> terms = c.terms;
  const Mat b = real.b;
  out.op_with = [terms, b, k, h](const Mat& x, double* res) {
    if (res) *res = 0.0;
    Mat g = kron(Mat::Identity(k, k), x) + correction_at(terms, x, k * h);
    return Mat(b.adjoint() * g * b);
  };
  out.op = out.op_with(c.base.dirac, nullptr);
  return out;
}

AssembledOp assemble_realized_op(const Mat& realize, Eigen::Index coord_dim,
                                 Eigen::Index source_dim, const std::vector<CoordTerm>& terms,
                                 const Mat& x) {
  const Eigen::Index h = source_dim;
  const Eigen::Index r = realize.rows();
  require(realize.cols() == coord_dim * h, "assemble_realized_op: realize map dimension mismatch");

  Mat rhs(r, coord_dim * h);
  for (Eigen::Index m = 0; m < coord_dim; ++m)
    rhs.middleCols(m * h, h) = realize.middleCols(m * h, h) * x;
  for (const CoordTerm& t : terms) {
    require(t.coord_map.rows() == coord_dim && t.coord_map.cols() == coord_dim,
            "assemble_realized_op: coordinate map dimension mismatch");
    const Mat w = t.omega(x);
    std::vector<Mat> rw(static_cast<size_t>(coord_dim));
    for (Eigen::Index m = 0; m < coord_dim; ++m)
      rw[static_cast<size_t>(m)] = realize.middleCols(m * h, h) * w;
    for (Eigen::Index n = 0; n < coord_dim; ++n)
      for (Eigen::Index m = 0; m < coord_dim; ++m) {
        const Complex cmn = t.coord_map(m, n);
        if (std::abs(cmn) <= kNegligible) continue;
        rhs.middleCols(n * h, h) += cmn * rw[static_cast<size_t>(m)];
      }
  }

  Eigen::CompleteOrthogonalDecomposition<Mat> cod(realize.transpose());
  require(cod.rank() == r, "assemble_realized_op: realization map is not surjective");
  Mat opt = cod.solve(rhs.transpose());
  AssembledOp out;
  out.op = opt.transpose();
  out.residual = (out.op * realize - rhs).norm() / std::max(1.0, rhs.norm());
  return out;
}

double intertwining_residual(const Correspondence& c) {
  const double scale = std::max(1.0, c.target.dirac.norm());
  return (c.u * c.op - c.target.dirac * c.u).norm() / scale;
}

Correspondence compose_correspondences(const Correspondence& c1, const Correspondence& c2) {
  const Eigen::Index mid = c1.target.algebra.hilbert_dim;
  require(c2.source.algebra.hilbert_dim == mid,
          "compose_correspondences: endpoint Hilbert spaces differ");
  require((c1.target.dirac - c2.source.dirac).norm() <=
              1e-9 * std::max(1.0, c2.source.dirac.norm()),
          "compose_correspondences: endpoint Dirac operators differ");
  require(c1.target.algebra.dim() == c2.source.algebra.dim(),
          "compose_correspondences: endpoint algebras differ");

  Correspondence out;
  out.source = c1.source;
  out.target = c2.target;
  out.u = c2.u;

  const auto f1 = c1.op_with;
  const auto f2 = c2.op_with;
  const Mat u1 = c1.u;
  out.op_with = [f1, f2, u1](const Mat& x, double* res) {
    double ra = 0.0, rb = 0.0;
    Mat o1 = f1(x, &ra);
    Mat o2 = f2(Mat(u1 * o1 * u1.adjoint()), &rb);
    if (res) *res = std::max(ra, rb);
    return o2;
  };
  out.op = out.op_with(c1.source.dirac, &out.assembly_residual);

  const Eigen::Index h1 = c1.source.algebra.hilbert_dim;
  const Eigen::Index m1 = c1.module.coord_dim;
  const Eigen::Index m2 = c2.module.coord_dim;
  const Eigen::Index h2 = mid;
  const Eigen::Index r2 = c2.module.realize.rows();
  out.module.coord_dim = m2 * m1;
  out.module.outer = m2 * c1.module.outer;
  out.module.right_act = c1.module.right_act;
  out.module.realize = Mat(r2, m2 * m1 * h1);
  const Mat w1 = u1 * c1.module.realize;  // h2 x (m1*h1)
  for (Eigen::Index b = 0; b < m2; ++b)
    out.module.realize.middleCols(b * m1 * h1, m1 * h1) = c2.module.realize.middleCols(b * h2, h2) * w1;
  return out;
}

Mat identity_compose_similarity(const Correspondence& c) {
  require(!c.module.right_act.empty(),
          "identity_compose_similarity: needs the module's right-action table");
  const Eigen::Index inner = c.module.right_act.front().rows();
  const Eigen::Index coord = c.module.coord_dim;
  require(coord == c.module.outer * inner,
          "identity_compose_similarity: inconsistent module coordinate split");
  const auto m1 = static_cast<Eigen::Index>(c.module.right_act.size());
  require(m1 == c.source.algebra.dim(),
          "identity_compose_similarity: right-action table does not cover the algebra");
  // Composite coordinates of compose(identity_correspondence(source), c) are
  // (m2, a) -> m2 * m1 + a; the element g_a of the identity module times the
  // basis coordinate e_m2 of c multiplies to e_m2 . g_a in c's module.
  Mat v = Mat::Zero(coord, coord * m1);
  for (Eigen::Index a = 0; a < m1; ++a) {
    const Mat act = kron(Mat::Identity(c.module.outer, c.module.outer), c.module.right_act[a]);
    for (Eigen::Index m2 = 0; m2 < coord; ++m2) {
      v.col(m2 * m1 + a) = act.col(m2);
    }
  }
  return v;
}

ValidationReport similarity_check(const Correspondence& c1, const Correspondence& c2, const Mat& v,
                                  double tol) {
  ValidationReport report;
  const Eigen::Index h1 = c1.source.algebra.hilbert_dim;
  require(c2.source.algebra.hilbert_dim == h1, "similarity_check: sources act on different spaces");
  const Eigen::Index m1 = c1.module.coord_dim;
  const Eigen::Index m2 = c2.module.coord_dim;
  require(v.rows() == m2 && v.cols() == m1, "similarity_check: module map dimension mismatch");
  const Eigen::Index r1 = c1.module.realize.rows();
  const Eigen::Index r2 = c2.module.realize.rows();

  {
    const double de = (c1.source.dirac - c2.source.dirac).norm() +
                      (c1.target.dirac - c2.target.dirac).norm();
    const double scale = std::max(1.0, c1.source.dirac.norm() + c1.target.dirac.norm());
    report.checks.push_back({"endpoints-match", de <= tol * scale, de / scale});
  }

  // Realized map V-hat: V-hat realize1 = realize2 (V (x) id).
  Mat rhs = Mat::Zero(r2, m1 * h1);
  for (Eigen::Index m = 0; m < m1; ++m)
    for (Eigen::Index b = 0; b < m2; ++b) {
      const Complex w = v(b, m);
      if (std::abs(w) <= kNegligible) continue;
      rhs.middleCols(m * h1, h1) += w * c2.module.realize.middleCols(b * h1, h1);
    }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(c1.module.realize.transpose());
  Mat vhat = Mat(cod.solve(rhs.transpose())).transpose();
  {
    const double res = (vhat * c1.module.realize - rhs).norm() / std::max(1.0, rhs.norm());
    report.checks.push_back({"realization-consistency", res <= tol, res});
  }
  {
    double res = 1.0;
    bool square = (r1 == r2);
    if (square) res = (vhat.adjoint() * vhat - Mat::Identity(r1, r1)).norm();
    report.checks.push_back({"unitary", square && res <= tol, res});
  }
  {
    const double res = (c2.u * vhat - c1.u).norm() / std::max(1.0, c1.u.norm());
    report.checks.push_back({"intertwiner", res <= tol, res});
  }
  {
    const double res = (vhat * c1.op - c2.op * vhat).norm() / std::max(1.0, c1.op.norm());
    report.checks.push_back({"connection-transport", res <= tol, res});
  }
  {
    double worst = 0.0;
    bool ok = c1.module.right_act.size() == c2.module.right_act.size();
    if (ok) {
      const Eigen::Index in1 = c1.module.right_act.empty() ? 0 : c1.module.right_act[0].rows();
      const Eigen::Index in2 = c2.module.right_act.empty() ? 0 : c2.module.right_act[0].rows();
      for (size_t l = 0; l < c1.module.right_act.size() && ok; ++l) {
        // v * kron(I_outer1, ra1) against kron(I_outer2, ra2) * v, applied
        // blockwise so the kroneckers are never materialized.
        Mat lhs(m2, m1), rhsv(m2, m1);
        for (Eigen::Index b = 0; b < c1.module.outer; ++b)
          lhs.middleCols(b * in1, in1) = v.middleCols(b * in1, in1) * c1.module.right_act[l];
        for (Eigen::Index b = 0; b < c2.module.outer; ++b)
          rhsv.middleRows(b * in2, in2) = c2.module.right_act[l] * v.middleRows(b * in2, in2);
        worst = std::max(worst, (lhs - rhsv).norm() / std::max(1.0, v.norm()));
      }
    }
    report.checks.push_back({"right-action", ok && worst <= tol, ok ? worst : 1.0});
  }
  return report;
}

}  // namespace ncg
