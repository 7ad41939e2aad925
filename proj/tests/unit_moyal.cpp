#include "doctest.h"

#include "ncg/distance.hpp"
#include "ncg/moyal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace ncg;

TEST_CASE("truncation validates its parameters and passes the axioms") {
  CHECK_THROWS_AS(moyal::truncation(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(moyal::truncation(4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(moyal::truncation(4, -2.0), std::invalid_argument);

  const auto m = moyal::truncation(5, 2.0);
  CHECK(m.triple.algebra.hilbert_dim == 10);
  REQUIRE(m.triple.algebra.structured.has_value());
  CHECK(m.triple.algebra.structured->factor == 5);
  CHECK(check_axioms(m.triple).all_pass());
}

TEST_CASE("Dirac spectrum: square ladder eigenvalues with a two-dim kernel") {
  const Eigen::Index n = 6;
  const double theta = 2.0;
  const auto m = moyal::truncation(n, theta);
  const Mat d2 = m.triple.dirac * m.triple.dirac;
  auto eig = herm_eig(d2).values;
  std::vector<double> got(eig.data(), eig.data() + eig.size());
  std::sort(got.begin(), got.end());

  // D^2 eigenvalues are (2 k / theta), k = 0..n-1, each twice.
  std::vector<double> want;
  for (Eigen::Index k = 0; k < n; ++k) {
    want.push_back(2.0 * k / theta);
    want.push_back(2.0 * k / theta);
  }
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("level eigenstates evaluate algebra elements at their diagonal") {
  const auto m = moyal::truncation(4, 1.0);
  Mat z = Mat::Zero(4, 4);
  z(2, 2) = Complex(0.7, 0.0);
  z(1, 2) = Complex(0.0, 3.0);  // off-diagonal entries are invisible
  const State s = moyal::eigenstate(m, 2);
  CHECK(std::abs(evaluate(s, moyal::spin_lift(m, z)) - Complex(0.7, 0.0)) <= 1e-14);
  CHECK_THROWS_AS(moyal::eigenstate(m, 4), std::invalid_argument);
}

TEST_CASE("level-distance formula: base cases, additivity, symmetry") {
  // d(0,1) = sqrt(theta/2); theta = 2 makes it exactly 1.
  CHECK(moyal::eigenstate_distance_formula(0, 1, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  // Two steps at theta = 1: sqrt(1/2) (1 + 1/sqrt(2)).
  CHECK(moyal::eigenstate_distance_formula(0, 2, 1.0) ==
        doctest::Approx(std::sqrt(0.5) * (1.0 + 1.0 / std::sqrt(2.0))).epsilon(1e-14));
  // Successive distances add up along the ladder and the order is immaterial.
  const double d02 = moyal::eigenstate_distance_formula(0, 2, 1.3);
  const double d01 = moyal::eigenstate_distance_formula(0, 1, 1.3);
  const double d12 = moyal::eigenstate_distance_formula(1, 2, 1.3);
  CHECK(d02 == doctest::Approx(d01 + d12).epsilon(1e-14));
  CHECK(moyal::eigenstate_distance_formula(2, 1, 1.3) == doctest::Approx(d12).epsilon(1e-15));
  CHECK(moyal::eigenstate_distance_formula(3, 3, 1.3) == 0.0);
}

TEST_CASE("certified distances match the ladder formula") {
  const auto m = moyal::truncation(8, 2.0);
  const auto res = spectral_distance(m.triple, moyal::eigenstate(m, 0), moyal::eigenstate(m, 1),
                                     {1e-6, 500});
  CHECK(res.status == DistanceStatus::certified);
  const double want = moyal::eigenstate_distance_formula(0, 1, 2.0);
  CHECK(res.lower <= want + 1e-6);
  CHECK(res.upper >= want - 1e-6);
}

TEST_CASE("coherent vectors: tail control and ladder expectation") {
  // Tail too heavy for the truncation: rejected with advice, not silently
  // renormalized into a different state.
  CHECK_THROWS_AS(moyal::coherent_vector(Complex(6.0, 0.0), 1.0, 4), std::invalid_argument);

  const auto m = moyal::truncation(32, 1.0);
  const Complex z(0.5, 0.25);
  const State s = moyal::coherent_state(m, z);
  // <z| a |z> = z / sqrt(2 theta) for the normalized ladder.
  const Complex got = evaluate(s, moyal::spin_lift(m, m.annihilation));
  CHECK(std::abs(got - z / std::sqrt(2.0)) <= 1e-10);
}

TEST_CASE("translations are exactly unitary and generate coherent vectors") {
  const auto m = moyal::truncation(48, 1.0);
  const Complex z(0.4, -0.3);
  const Mat t = moyal::translation(m, z);
  CHECK((t * t.adjoint() - Mat::Identity(48, 48)).norm() <= 1e-12);

  Vec ground = Vec::Zero(48);
  ground(0) = 1.0;
  const Vec moved = t * ground;
  const Vec direct = moyal::coherent_vector(z, 1.0, 48);
  // Same ray: compare up to the (here trivial) global phase.
  CHECK((moved - direct * (direct.dot(moved) / std::abs(direct.dot(moved)))).norm() <= 1e-8);
}

TEST_CASE("phase rotations conjugate the ladder by a phase") {
  const auto m = moyal::truncation(6, 1.0);
  const double tau = 0.7;
  const Mat r = moyal::rotation(m, tau);
  CHECK((r * r.adjoint() - Mat::Identity(6, 6)).norm() <= 1e-14);
  const Mat lhs = r * m.annihilation * r.adjoint();
  const Mat rhs = std::exp(Complex(0.0, -tau)) * m.annihilation;
  CHECK((lhs - rhs).norm() <= 1e-13);
}

TEST_CASE("radial elements: controlled commutator norm at moderate order") {
  const auto m = moyal::truncation(64, 1.0);
  const auto r = moyal::radial_element(m, 4);
  CHECK(hermiticity_defect(r.raw) <= 1e-12);
  // The normalized element stays essentially within the unit commutator ball
  // at truncations much larger than the order.
  CHECK(r.commutator_norm <= 1.0 + 1e-3);
  CHECK(r.commutator_norm ==
        doctest::Approx(operator_norm(comm(m.triple.dirac, moyal::spin_lift(m, r.normalized))))
            .epsilon(1e-12));
}

TEST_CASE("radial displacement bounds approach the flat-plane gap") {
  // Evaluating the order-100 raw radial element on translated-vs-ground
  // states reproduces the sqrt(2)-per-unit radial gap within five percent.
  // (The normalized variant trades that gap for a unit commutator ball.)
  const auto m = moyal::truncation(256, 1.0);
  const auto r = moyal::radial_element(m, 100);
  const State moved = moyal::coherent_state(m, Complex(1.0, 0.0));
  const State ground = moyal::eigenstate(m, 0);
  const Mat b = moyal::spin_lift(m, r.raw);
  const double gap = (evaluate(moved, b) - evaluate(ground, b)).real();
  CHECK(std::abs(gap - std::sqrt(2.0)) <= 0.05 * std::sqrt(2.0));
}

TEST_CASE("line embedding: closed-form positions and Hausdorff gap") {
  const auto e = moyal::gh_experiment(2.0, 8);
  REQUIRE(e.positions.size() == 9);
  CHECK(e.positions[0] == 0.0);
  for (int k = 1; k <= 8; ++k) {
    CHECK(e.positions[static_cast<size_t>(k)] ==
          doctest::Approx(e.positions[static_cast<size_t>(k - 1)] + 1.0 / std::sqrt(double(k)))
              .epsilon(1e-14));
  }
  CHECK(e.hausdorff_distance == doctest::Approx(0.5).epsilon(1e-14));

  // Halving theta shrinks the gap strictly: the embeddings refine.
  double prev = moyal::gh_experiment(1.0, 8).hausdorff_distance;
  for (double theta : {0.5, 0.25, 0.125}) {
    const double h = moyal::gh_experiment(theta, 8).hausdorff_distance;
    CHECK(h < prev);
    CHECK(h == doctest::Approx(0.5 * std::sqrt(theta / 2.0)).epsilon(1e-13));
    prev = h;
  }
}

TEST_CASE("spectral estimates recover dimension two and the plane volume") {
  const auto est = moyal::zeta_estimates(1.0, 64);
  CHECK(std::abs(est.dimension - 2.0) <= est.dimension_error);
  CHECK(std::abs(est.dimension - 2.0) <= 0.2);
  CHECK(std::abs(est.volume - 2.0) <= 0.05);
  CHECK(est.volume_error < 0.05);

  // The volume scales linearly with theta (residues of the heat trace).
  const auto est2 = moyal::zeta_estimates(2.0, 64);
  CHECK(std::abs(est2.volume - 4.0) <= 0.1);
}

TEST_CASE("truncation correspondences intertwine exactly at every size") {
  const auto big = moyal::truncation(6, 1.0);
  const auto pair = moyal::correspondence_pair(2, big);
  CHECK(pair.small.levels == 2);
  CHECK(intertwining_residual(pair.forward) <= 1e-12);
  CHECK(intertwining_residual(pair.reverse) <= 1e-12);
  CHECK(pair.forward.assembly_residual <= 1e-12);
  CHECK(pair.reverse.assembly_residual <= 1e-12);

  CHECK_THROWS_AS(moyal::correspondence_pair(4, big), std::invalid_argument);
}

TEST_CASE("the round trip is the identity up to the multiplication map") {
  const auto big = moyal::truncation(6, 1.0);
  const auto pair = moyal::correspondence_pair(2, big);
  const Correspondence round = compose_correspondences(pair.forward, pair.reverse);
  const Correspondence ident = identity_correspondence(pair.small.triple);
  const Mat v = moyal::round_trip_multiplication_map(pair);
  CHECK(similarity_check(round, ident, v).all_pass());
}

TEST_CASE("spin lift acts identically on both spinor blocks") {
  const auto m = moyal::truncation(3, 1.0);
  Mat z(3, 3);
  z.setZero();
  z(0, 2) = Complex(1.0, -2.0);
  const Mat lifted = moyal::spin_lift(m, z);
  CHECK(lifted.rows() == 6);
  CHECK((lifted.block(0, 0, 3, 3) - z).norm() == 0.0);
  CHECK((lifted.block(3, 3, 3, 3) - z).norm() == 0.0);
  CHECK(lifted.block(0, 3, 3, 3).norm() == 0.0);
  CHECK(lifted.block(3, 0, 3, 3).norm() == 0.0);
}
