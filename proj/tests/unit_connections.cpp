#include "doctest.h"

#include "ncg/connections.hpp"
#include "ncg/moyal.hpp"

#include <random>
#include <stdexcept>

using namespace ncg;

namespace {

Mat random_herm(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return (a + a.adjoint()) / 2.0;
}

Mat random_unitary(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ();
}

SpectralTriple full_triple(Eigen::Index n, unsigned seed) {
  SpectralTriple t;
  t.algebra = full_matrix_algebra(n);
  t.dirac = random_herm(n, seed);
  return t;
}

// Rank-1 projection q (x) id_H on C^2 (x) H; commutes with id_2 (x) A.
Mat spinor_projection(Eigen::Index h, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vec u(2);
  u << Complex(g(rng), g(rng)), Complex(g(rng), g(rng));
  u.normalize();
  return kron(Mat(u * u.adjoint()), Mat::Identity(h, h));
}

// Hermitian-valued one-form omega(X) = i [X, b]: a single decomposed term
// with coefficient i*id, so omega(D) is Hermitian whenever b is.
OneForm hermitian_form(const SpectralTriple& t, unsigned seed) {
  const auto& s = t.algebra.structured;
  Mat b;
  if (s) {
    b = structured_lift(*s, random_herm(s->factor, seed));
  } else {
    b = random_herm(t.algebra.hilbert_dim, seed);
  }
  OneForm w;
  const Eigen::Index h = t.algebra.hilbert_dim;
  w.terms.emplace_back(Mat(Complex(0.0, 1.0) * Mat::Identity(h, h)), b);
  return w;
}

}  // namespace

TEST_CASE("the trivial free-module connection reproduces the base triple") {
  const SpectralTriple t = full_triple(3, 5);
  const Connection c = grassmannian_connection(free_module(1, t.algebra), t);
  CHECK(check_leibniz(c).all_pass());
  const SpectralTriple f = fluctuate(c);
  CHECK((f.dirac - t.dirac).norm() == 0.0);
  CHECK(unitary_equivalent(t, f, Mat::Identity(3, 3)).all_pass());
}

TEST_CASE("projective-module validation rejects bad projections") {
  const MatrixAlgebra diag = diagonal_algebra(2);
  // Not idempotent.
  CHECK_THROWS_AS(make_projective_module(1, Mat(0.5 * Mat::Identity(2, 2)), diag),
                  std::invalid_argument);
  // Idempotent but fails to commute with the diagonal algebra.
  Mat p(2, 2);
  p << 0.5, 0.5, 0.5, 0.5;
  CHECK_THROWS_AS(make_projective_module(1, p, diag), std::invalid_argument);
  // A diagonal projection is accepted.
  Mat ok = Mat::Zero(2, 2);
  ok(0, 0) = 1.0;
  CHECK(make_projective_module(1, ok, diag).k == 1);
}

TEST_CASE("compressed-trivial connections satisfy Leibniz and compatibility") {
  const auto m = moyal::truncation(3, 1.0);
  const Eigen::Index h = m.triple.algebra.hilbert_dim;
  const Mat p = spinor_projection(h, 31);
  const Connection c =
      grassmannian_connection(make_projective_module(2, p, m.triple.algebra), m.triple);
  const auto leib = check_leibniz(c);
  const auto comp = check_compatibility(c);
  CHECK(leib.all_pass());
  CHECK(leib.max_residual() <= 1e-9);
  CHECK(comp.all_pass());
  CHECK(comp.max_residual() <= 1e-9);

  // The fluctuated triple lives on the range of the projection (rank = h)
  // and satisfies the axioms, including the transported grading.
  const SpectralTriple f = fluctuate(c);
  CHECK(f.algebra.hilbert_dim == h);
  CHECK(f.grading.has_value());
  CHECK(check_axioms(f).all_pass());

  // The correspondence from base to fluctuated triple intertwines exactly.
  const Correspondence corr = fluctuation_correspondence(c);
  CHECK(intertwining_residual(corr) <= 1e-10);
  CHECK(corr.assembly_residual <= 1e-10);
}

TEST_CASE("global corrections round-trip through the one-form dictionary") {
  const SpectralTriple t = full_triple(2, 8);
  const ProjectiveModule m = free_module(2, t.algebra);

  Mat alpha(4, 4);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) alpha(i, j) = Complex(g(rng), g(rng));

  // Over a full matrix algebra with generic Dirac every matrix is a one-form,
  // so any correction decomposes; its re-representation must match.
  const Connection c = connection_from_alpha(m, t, alpha);
  CHECK((connection_alpha(c) - alpha).norm() <= 1e-9 * alpha.norm());
}

TEST_CASE("one-form decomposition: round-trip and honest failure") {
  const SpectralTriple t = full_triple(2, 9);
  const Mat a = random_herm(2, 10);
  const Mat b = random_herm(2, 11);
  const Mat w = a * comm(t.dirac, b);
  const auto decomposed = decompose_one_form(t, w);
  REQUIRE(decomposed.has_value());
  CHECK(((*decomposed)(t.dirac) - w).norm() <= 1e-9 * std::max(1.0, w.norm()));

  // Diagonal algebra with diagonal Dirac: the one-form space is {0}.
  SpectralTriple flat;
  flat.algebra = diagonal_algebra(2);
  flat.dirac = Mat::Zero(2, 2);
  flat.dirac(0, 0) = 1.0;
  flat.dirac(1, 1) = -1.0;
  Mat off = Mat::Zero(2, 2);
  off(0, 1) = 1.0;
  off(1, 0) = 1.0;
  CHECK(!decompose_one_form(flat, off).has_value());
}

TEST_CASE("two fluctuation steps compose into one") {
  const auto m = moyal::truncation(2, 1.0);
  const Eigen::Index h = m.triple.algebra.hilbert_dim;
  const Connection c1 =
      grassmannian_connection(make_projective_module(2, spinor_projection(h, 41), m.triple.algebra),
                              m.triple);
  const SpectralTriple t1 = fluctuate(c1);
  const Connection c2 = grassmannian_connection(
      make_projective_module(2, spinor_projection(t1.algebra.hilbert_dim, 42), t1.algebra), t1);

  const FluctuationComposite comp = compose_fluctuations(c1, c2);
  CHECK(comp.two_step_residual <= 1e-9);
  CHECK(check_axioms(comp.triple).all_pass());
}

TEST_CASE("ladder bimodule connection is exactly Leibniz and compatible") {
  const Eigen::Index target_levels = 5;
  const Eigen::Index n = 3;
  const double theta = 1.0;
  const auto base = moyal::truncation(n, theta);
  const auto big = moyal::truncation(target_levels, theta);

  // Decomposed one-forms whose value at D is the constant upper/lower
  // spinor block, built from the inverted ladder commutator.
  const Mat a = base.annihilation;
  const Mat j = comm(a, Mat(a.adjoint()));
  Mat jinv = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) jinv(i, i) = 1.0 / j(i, i);

  OneForm up;
  up.terms.emplace_back(moyal::spin_lift(base, jinv), moyal::spin_lift(base, Mat(a.adjoint())));
  OneForm down;
  down.terms.emplace_back(moyal::spin_lift(base, Mat(-jinv)), moyal::spin_lift(base, a));
  OneForm up_neg = up;
  up_neg.terms[0].first *= -1.0;
  OneForm down_neg = down;
  down_neg.terms[0].first *= -1.0;

  // omega(D) oracles: constant off-diagonal blocks at any truncation size.
  const double scale = std::sqrt(2.0 / theta);
  Mat wplus = Mat::Zero(2 * n, 2 * n);
  wplus.block(0, n, n, n) = scale * Mat::Identity(n, n);
  CHECK((up(base.triple.dirac) - wplus).norm() <= 1e-12);
  CHECK((down(base.triple.dirac) - wplus.adjoint()).norm() <= 1e-12);

  Connection c;
  c.module = RectBimodule{target_levels, n};
  c.base = base.triple;
  const Mat idn = Mat::Identity(n, n);
  const Mat idm = Mat::Identity(target_levels, target_levels);
  c.terms.push_back({big.annihilation, idn, up});
  c.terms.push_back({idm, base.annihilation, up_neg});
  c.terms.push_back({Mat(big.annihilation.adjoint()), idn, down});
  c.terms.push_back({idm, Mat(base.annihilation.adjoint()), down_neg});

  const auto leib = check_leibniz(c);
  const auto comp = check_compatibility(c);
  CHECK(leib.all_pass());
  CHECK(leib.max_residual() <= 1e-12);
  CHECK(comp.all_pass());
  CHECK(comp.max_residual() <= 1e-12);
}

TEST_CASE("composing with the identity correspondence changes nothing") {
  const auto pair = moyal::correspondence_pair(2, moyal::truncation(5, 1.0));
  const Correspondence& c = pair.forward;
  REQUIRE(!c.module.right_act.empty());

  const Correspondence comp =
      compose_correspondences(identity_correspondence(c.source), c);
  const Mat v = identity_compose_similarity(c);
  const auto rep = similarity_check(comp, c, v);
  CHECK(rep.all_pass());
}

TEST_CASE("unitary transport gives a zero-residual correspondence") {
  const SpectralTriple s = full_triple(3, 61);
  const Mat u = random_unitary(3, 62);
  SpectralTriple t;
  t.algebra = full_matrix_algebra(3);
  t.dirac = u * s.dirac * u.adjoint();
  const Correspondence c = unitary_correspondence(s, t, u);
  CHECK(intertwining_residual(c) <= 1e-12);
}

TEST_CASE("correspondence composition is associative on the nose") {
  const auto m = moyal::truncation(2, 1.0);
  const SpectralTriple t0 = m.triple;
  const Correspondence c1 = inner_fluctuation_correspondence(t0, hermitian_form(t0, 71));
  const Correspondence c2 = inner_fluctuation_correspondence(c1.target, hermitian_form(c1.target, 72));
  const Correspondence c3 = inner_fluctuation_correspondence(c2.target, hermitian_form(c2.target, 73));

  const Correspondence left = compose_correspondences(compose_correspondences(c1, c2), c3);
  const Correspondence right = compose_correspondences(c1, compose_correspondences(c2, c3));

  CHECK((left.op - right.op).norm() <= 1e-12);
  CHECK((left.u - right.u).norm() <= 1e-12);
  CHECK(left.module.coord_dim == right.module.coord_dim);
  CHECK((left.module.realize - right.module.realize).norm() <= 1e-12);

  // Both composites intertwine onto the doubly fluctuated target.
  CHECK(intertwining_residual(left) <= 1e-9);
  CHECK(intertwining_residual(right) <= 1e-9);
}
