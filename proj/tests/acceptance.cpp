// Acceptance gate: one self-contained check per shipped guarantee, one
// [PASS]/[FAIL] line each, exit code = number of failures. Tolerances are
// pinned here, next to the checks that use them.
#include "ncg/connections.hpp"
#include "ncg/distance.hpp"
#include "ncg/gauge.hpp"
#include "ncg/moyal.hpp"
#include "ncg/triple.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

using namespace ncg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Mat random_herm(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return (a + a.adjoint()) / 2.0;
}

// Rank-1 projection q (x) id_h on C^2 (x) H; commutes with id_2 (x) A.
Mat spinor_projection(Eigen::Index h, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec u(2);
  u << Complex(g(rng), g(rng)), Complex(g(rng), g(rng));
  u.normalize();
  return kron(Mat(u * u.adjoint()), Mat::Identity(h, h));
}

// Hermitian-valued one-form omega(X) = i [X, b] with b Hermitian in A.
OneForm hermitian_form(const SpectralTriple& t, std::mt19937_64& rng) {
  Mat b;
  if (t.algebra.structured) {
    b = structured_lift(*t.algebra.structured, random_herm(t.algebra.structured->factor, rng));
  } else {
    b = random_herm(t.algebra.hilbert_dim, rng);
  }
  OneForm w;
  const Eigen::Index h = t.algebra.hilbert_dim;
  w.terms.emplace_back(Mat(Complex(0.0, 1.0) * Mat::Identity(h, h)), b);
  return w;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double width(const DistanceResult& r) { return r.upper - r.lower; }
double mid(const DistanceResult& r) { return 0.5 * (r.lower + r.upper); }

// How far the certified interval misses containing the reference value.
double bracket_residual(const DistanceResult& r, double ref) {
  return std::max(0.0, std::max(r.lower - ref, ref - r.upper));
}

// ---- shared solve suite for criteria 6 and 9 -------------------------------

struct SuitePair {
  double theta;
  int m, n;
  DistanceResult full12, even12, even24;
};

const std::vector<SuitePair>& ladder_suite() {
  static std::vector<SuitePair> suite = [] {
    std::vector<SuitePair> out;
    DistanceOptions tight;
    tight.tol = 2e-8;  // keeps interval widths well under the 2e-7 comparisons
    DistanceOptions stab;
    stab.tol = 1e-7;
    for (double theta : {1.0, 2.0}) {
      const auto m12 = moyal::truncation(12, theta);
      const auto m24 = moyal::truncation(24, theta);
      DistanceEngine full12(m12.triple, tight);
      DistanceEngine even12 = DistanceEngine::even_reduced(m12.triple, tight);
      DistanceEngine even24 = DistanceEngine::even_reduced(m24.triple, stab);
      for (int a = 0; a < 6; ++a) {
        for (int b = a + 1; b <= 6; ++b) {
          SuitePair p;
          p.theta = theta;
          p.m = a;
          p.n = b;
          p.full12 = full12.distance(moyal::eigenstate(m12, a), moyal::eigenstate(m12, b));
          p.even12 = even12.distance(moyal::eigenstate(m12, a), moyal::eigenstate(m12, b));
          p.even24 = even24.distance(moyal::eigenstate(m24, a), moyal::eigenstate(m24, b));
          out.push_back(p);
        }
      }
    }
    return out;
  }();
  return suite;
}

// ---- criteria ---------------------------------------------------------------

Outcome criterion_one_forms() {
  constexpr double kResidualTol = 1e-9;
  double worst = 0.0;
  std::mt19937_64 rng(101);

  SpectralTriple flip;
  flip.algebra = full_matrix_algebra(2);
  flip.dirac = Mat::Zero(2, 2);
  flip.dirac(0, 1) = 1.0;
  flip.dirac(1, 0) = 1.0;
  const OperatorSubspace w2 = omega1(flip);
  if (w2.rank() != 4) return {false, "rank at the flip Dirac is not 4"};
  for (int t = 0; t < 8; ++t) {
    const Mat probe = random_herm(2, rng) * comm(flip.dirac, random_herm(2, rng));
    worst = std::max(worst, subspace_contains(w2, probe, 1e-6).residual);
  }

  SpectralTriple still;
  still.algebra = full_matrix_algebra(2);
  still.dirac = 3.0 * Mat::Identity(2, 2);
  if (omega1(still).rank() != 0) return {false, "rank at a central Dirac is not 0"};

  for (Eigen::Index n : {2, 3, 4}) {
    const auto m = moyal::truncation(n, 1.0);
    const OperatorSubspace w = omega1(m.triple);
    if (w.rank() != 2 * n * n) {
      return {false, "ladder rank at n=" + std::to_string(n) + " is not 2n^2"};
    }
    for (int t = 0; t < 8; ++t) {
      const Mat a = moyal::spin_lift(m, random_herm(n, rng));
      const Mat b = moyal::spin_lift(m, random_herm(n, rng));
      const Mat probe = a * comm(m.triple.dirac, b);
      worst = std::max(worst, subspace_contains(w, probe, 1e-6).residual);
    }
  }
  return {worst <= kResidualTol, "ranks 4/0/2n^2, max span residual " + fmt(worst)};
}

Outcome criterion_gauge_category() {
  std::mt19937_64 rng(202);

  GaugeCategory two;
  two.algebra = full_matrix_algebra(2);
  Mat flip = Mat::Zero(2, 2);
  flip(0, 1) = 1.0;
  flip(1, 0) = 1.0;
  const auto down = two.mor(flip, Mat::Zero(2, 2));
  if (!down || (down->omega + flip).norm() > 1e-12)
    return {false, "morphism to the zero operator is missing or omega != -D"};
  if (two.mor(Mat::Zero(2, 2), flip))
    return {false, "unexpected morphism out of the zero operator"};

  int initial_checked = 0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 2 + (t % 3);
    GaugeCategory cat;
    cat.algebra = full_matrix_algebra(n);
    Mat d = random_herm(n, rng);
    if (d.norm() < 1e-6) continue;
    if (!cat.is_initial(d))
      return {false, "random nontrivial Dirac not initial at n=" + std::to_string(n)};
    ++initial_checked;
  }

  for (Eigen::Index n = 1; n <= 4; ++n) {
    GaugeCategory cat;
    cat.algebra = full_matrix_algebra(n);
    const auto [a, b] = cat.no_final_object_witness();
    if (cat.mor(a, b) || cat.mor(b, a))
      return {false, "final-object witness pair admits a morphism at n=" + std::to_string(n)};
  }
  return {true, "hom-set facts, " + std::to_string(initial_checked) +
                    " initial checks, witness pairs n<=4"};
}

Outcome criterion_trivial_fluctuation() {
  constexpr double kTol = 1e-10;
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 2 + (t % 5);  // sizes 2..6
    SpectralTriple base;
    base.algebra = full_matrix_algebra(n);
    base.dirac = random_herm(n, rng);
    const Connection c = grassmannian_connection(free_module(1, base.algebra), base);
    const SpectralTriple f = fluctuate(c);
    const ValidationReport rep = unitary_equivalent(base, f, Mat::Identity(n, n));
    if (!rep.all_pass()) return {false, "trivial fluctuation not unitary-equivalent to base"};
    worst = std::max(worst, rep.max_residual());
  }
  return {worst <= kTol, "20 random triples n<=6, max residual " + fmt(worst)};
}

Outcome criterion_composition() {
  constexpr double kTol = 1e-9;
  std::mt19937_64 rng(404);

  // (a) two fluctuation steps against the composite connection.
  double worst_two_step = 0.0;
  for (int t = 0; t < 5; ++t) {
    const Eigen::Index n = 2 + (t % 3);
    SpectralTriple base;
    base.algebra = full_matrix_algebra(n);
    base.dirac = random_herm(n, rng);
    const Connection c1 = grassmannian_connection(
        make_projective_module(2, spinor_projection(n, rng), base.algebra), base);
    const SpectralTriple t1 = fluctuate(c1);
    const Connection c2 = grassmannian_connection(
        make_projective_module(2, spinor_projection(t1.algebra.hilbert_dim, rng), t1.algebra), t1);
    worst_two_step = std::max(worst_two_step, compose_fluctuations(c1, c2).two_step_residual);
  }
  if (worst_two_step > kTol)
    return {false, "two-step fluctuation residual " + fmt(worst_two_step)};

  // (b) associativity of correspondence composition.
  double worst_assoc = 0.0;
  for (int t = 0; t < 3; ++t) {
    const auto m = moyal::truncation(2 + t, 1.0);
    const SpectralTriple& t0 = m.triple;
    const Correspondence c1 = inner_fluctuation_correspondence(t0, hermitian_form(t0, rng));
    const Correspondence c2 =
        inner_fluctuation_correspondence(c1.target, hermitian_form(c1.target, rng));
    const Correspondence c3 =
        inner_fluctuation_correspondence(c2.target, hermitian_form(c2.target, rng));
    const Correspondence left = compose_correspondences(compose_correspondences(c1, c2), c3);
    const Correspondence right = compose_correspondences(c1, compose_correspondences(c2, c3));
    worst_assoc = std::max({worst_assoc, (left.op - right.op).norm(), (left.u - right.u).norm(),
                            (left.module.realize - right.module.realize).norm()});
  }
  if (worst_assoc > kTol) return {false, "associativity residual " + fmt(worst_assoc)};

  // (c) composing with the identity correspondence is the identity modulo the
  // multiplication-map similarity, on an identity module and on a genuinely
  // rectangular one.
  {
    const auto m = moyal::truncation(3, 1.0);
    const Correspondence c =
        inner_fluctuation_correspondence(m.triple, hermitian_form(m.triple, rng));
    const Correspondence comp = compose_correspondences(identity_correspondence(c.source), c);
    if (!similarity_check(comp, c, identity_compose_similarity(c)).all_pass())
      return {false, "identity diagram fails on an inner-fluctuation correspondence"};
  }
  {
    const auto pair = moyal::correspondence_pair(2, moyal::truncation(5, 1.0));
    const Correspondence& c = pair.forward;
    const Correspondence comp = compose_correspondences(identity_correspondence(c.source), c);
    if (!similarity_check(comp, c, identity_compose_similarity(c)).all_pass())
      return {false, "identity diagram fails on a rectangular correspondence"};
  }

  return {true, "two-step " + fmt(worst_two_step) + ", associativity " + fmt(worst_assoc) +
                    ", identity diagrams pass"};
}

Outcome criterion_two_point() {
  constexpr double kValueTol = 1e-7;
  constexpr double kGapTol = 1e-7;
  constexpr double kTriangleTol = 2e-7;
  DistanceOptions opts;
  opts.tol = 2e-8;  // keeps absolute gaps under 1e-7 even for distance 2

  auto point = [](Eigen::Index dim, Eigen::Index which) {
    Vec v = Vec::Zero(dim);
    v(which) = 1.0;
    return vector_state(v);
  };

  double worst_value = 0.0, worst_gap = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    SpectralTriple tr;
    tr.algebra = diagonal_algebra(2);
    tr.dirac = Mat::Zero(2, 2);
    tr.dirac(0, 1) = t;
    tr.dirac(1, 0) = t;
    const auto res = spectral_distance(tr, point(2, 0), point(2, 1), opts);
    worst_gap = std::max(worst_gap, width(res));
    worst_value = std::max(worst_value, std::abs(mid(res) - 1.0 / t) + 0.5 * width(res));
  }
  if (worst_value > kValueTol) return {false, "two-point value error " + fmt(worst_value)};

  // Three-site chain for the triangle inequality on certified values.
  SpectralTriple chain;
  chain.algebra = diagonal_algebra(3);
  chain.dirac = Mat::Zero(3, 3);
  chain.dirac(0, 1) = 1.0;
  chain.dirac(1, 0) = 1.0;
  chain.dirac(1, 2) = 2.0;
  chain.dirac(2, 1) = 2.0;
  DistanceEngine eng(chain, opts);
  DistanceResult d[3][3];
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      d[i][j] = eng.distance(point(3, i), point(3, j));
      d[j][i] = d[i][j];
      worst_gap = std::max(worst_gap, width(d[i][j]));
    }
  }
  if (worst_gap > kGapTol) return {false, "certified gap " + fmt(worst_gap)};

  double worst_triangle = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        if (i == j || j == k || i == k) continue;
        worst_triangle =
            std::max(worst_triangle, d[i][j].lower - (d[i][k].upper + d[k][j].upper));
      }
  if (worst_triangle > kTriangleTol) return {false, "triangle residual " + fmt(worst_triangle)};

  return {true, "d=1/t within " + fmt(worst_value) + ", gap " + fmt(worst_gap) +
                    ", triangle residual " + fmt(std::max(0.0, worst_triangle))};
}

Outcome criterion_eigenstate_distances() {
  constexpr double kBracketTol = 1e-5;
  constexpr double kStabilityTol = 1e-6;
  double worst_bracket = 0.0, worst_stability = 0.0;
  for (const SuitePair& p : ladder_suite()) {
    const double ref = moyal::eigenstate_distance_formula(p.m, p.n, p.theta);
    worst_bracket = std::max(worst_bracket, bracket_residual(p.full12, ref));
    worst_stability = std::max(worst_stability, std::abs(mid(p.full12) - mid(p.even24)));
  }
  const bool pass = worst_bracket <= kBracketTol && worst_stability <= kStabilityTol;
  return {pass, "42 pairs, bracket residual " + fmt(worst_bracket) + ", N=12 vs N=24 shift " +
                    fmt(worst_stability)};
}

Outcome criterion_coherent_distances() {
  constexpr double kRelTol = 0.10;
  const double theta = 1.0;
  const std::vector<Eigen::Index> sizes{16, 32, 64};
  const std::vector<double> radii{0.25, 0.5};

  // err[N] = how far the certified interval misses the displacement; the
  // interval width is the measurement resolution, so monotonicity is imposed
  // up to the certified widths (plus an absolute floor for exactly-contained
  // intervals).
  double final_err = 0.0;
  std::vector<std::vector<double>> errs(radii.size());
  std::vector<std::vector<double>> widths(radii.size());
  double worst_lb_excess = -1.0;

  for (size_t si = 0; si < sizes.size(); ++si) {
    const Eigen::Index n = sizes[si];
    const auto m = moyal::truncation(n, theta);
    DistanceOptions opts;
    opts.tol = (n >= 64) ? 1e-6 : 1e-7;  // still three orders below the 10% bar
    DistanceEngine eng = DistanceEngine::even_reduced(m.triple, opts);
    const State ground = moyal::eigenstate(m, 0);

    for (size_t ri = 0; ri < radii.size(); ++ri) {
      const double r = radii[ri];
      const State moved = moyal::coherent_state(m, Complex(r, 0.0));
      const auto res = eng.distance(moved, ground);
      errs[ri].push_back(bracket_residual(res, r));
      widths[ri].push_back(width(res));
      if (n == 64) {
        final_err = std::max({final_err, std::abs(res.lower - r), std::abs(res.upper - r)});
      }

      // Feasible Hermitian elements give true lower bounds; they must never
      // beat the dual certificate.
      for (Eigen::Index order : {4, 16}) {
        const auto rad = moyal::radial_element(m, order);
        const Mat b = moyal::spin_lift(m, rad.normalized) / std::max(1.0, rad.commutator_norm);
        const double lb = (evaluate(moved, b) - evaluate(ground, b)).real();
        worst_lb_excess = std::max(worst_lb_excess, lb - res.upper);
      }
    }
  }

  if (final_err > kRelTol * radii.front())
    return {false, "N=64 enclosure misses the displacement by " + fmt(final_err)};
  for (size_t ri = 0; ri < radii.size(); ++ri) {
    for (size_t si = 1; si < sizes.size(); ++si) {
      const double slack = 0.5 * (widths[ri][si - 1] + widths[ri][si]) + 1e-9;
      if (errs[ri][si] > errs[ri][si - 1] + slack)
        return {false, "error grows from N=" + std::to_string(sizes[si - 1]) + " to N=" +
                           std::to_string(sizes[si]) + " at r=" + std::to_string(radii[ri])};
    }
  }
  if (worst_lb_excess > 1e-9)
    return {false, "a feasible lower bound beats a certified upper bound by " +
                       fmt(worst_lb_excess)};
  return {true, "N=64 within " + fmt(final_err) + " of r, errors non-increasing, lower-vs-upper "
                    "margin " + fmt(-worst_lb_excess)};
}

Outcome criterion_wigner_equivalence() {
  constexpr double kTol = 2e-7;
  DistanceOptions opts;
  opts.tol = 2e-8;
  const auto m = moyal::truncation(8, 1.0);
  const SpectralTriple dbl = wigner_double(m.triple);
  DistanceEngine base(m.triple, opts);
  DistanceEngine lifted(dbl, opts);

  double worst = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b <= 3; ++b) {
      const State sa = moyal::eigenstate(m, a);
      const State sb = moyal::eigenstate(m, b);
      const auto d0 = base.distance(sa, sb);
      const auto d1 = lifted.distance(wigner_lift_state(sa), wigner_lift_state(sb));
      worst = std::max(worst, std::abs(mid(d0) - mid(d1)));
    }
  }
  return {worst <= kTol, "6 pairs at N=8, worst disagreement " + fmt(worst)};
}

Outcome criterion_even_reduction() {
  constexpr double kTol = 2e-7;
  double worst = 0.0;
  for (const SuitePair& p : ladder_suite())
    worst = std::max(worst, std::abs(mid(p.full12) - mid(p.even12)));
  return {worst <= kTol, "42 pairs reusing the ladder suite, worst disagreement " + fmt(worst)};
}

Outcome criterion_zeta() {
  const auto est = moyal::zeta_estimates(1.0, 256);
  const double verr = std::abs(est.volume - 2.0);
  const double derr = std::abs(est.dimension - 2.0);
  const bool pass = verr <= 0.02 && derr <= 0.05;
  return {pass, "volume 2.00 off by " + fmt(verr) + ", dimension 2.00 off by " + fmt(derr)};
}

Outcome criterion_gh() {
  constexpr double kTol = 1e-12;
  double prev = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (double theta : {2.0, 1.0, 0.5, 0.25, 0.125}) {
    const auto e = moyal::gh_experiment(theta, 12);
    worst = std::max(worst, std::abs(e.hausdorff_distance - 0.5 * std::sqrt(theta / 2.0)));
    if (e.hausdorff_distance >= prev)
      return {false, "Hausdorff gap fails to decrease at theta=" + std::to_string(theta)};
    prev = e.hausdorff_distance;
  }
  return {worst <= kTol, "closed form to " + fmt(worst) + ", strictly decreasing over halvings"};
}

Outcome criterion_moyal_correspondences() {
  constexpr double kTol = 1e-9;
  const auto big = moyal::truncation(24, 1.0);
  const auto pair = moyal::correspondence_pair(3, big);
  const double fwd = intertwining_residual(pair.forward);
  const double rev = intertwining_residual(pair.reverse);
  if (fwd > kTol || rev > kTol)
    return {false, "intertwining residuals " + fmt(fwd) + " / " + fmt(rev)};

  const Correspondence round = compose_correspondences(pair.forward, pair.reverse);
  const Correspondence ident = identity_correspondence(pair.small.triple);
  const Mat v = moyal::round_trip_multiplication_map(pair);
  const ValidationReport rep = similarity_check(round, ident, v);
  if (!rep.all_pass()) return {false, "round-trip similarity check fails"};
  return {true, "intertwining " + fmt(std::max(fwd, rev)) + ", round trip similar to identity (" +
                    fmt(rep.max_residual()) + ")"};
}

}  // namespace

int main() {
  struct Entry {
    int number;
    const char* label;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries = {
      {1, "one-form spaces: ranks and span residuals", criterion_one_forms},
      {2, "gauge category: hom-sets, initial objects, no final object", criterion_gauge_category},
      {3, "trivial fluctuation reproduces the base triple", criterion_trivial_fluctuation},
      {4, "composition laws for fluctuations and correspondences", criterion_composition},
      {5, "certified two-point distances and triangle inequality", criterion_two_point},
      {6, "ladder eigenstate distances match the closed form", criterion_eigenstate_distances},
      {7, "coherent-state distances converge to the displacement", criterion_coherent_distances},
      {8, "doubled-representation metric equivalence", criterion_wigner_equivalence},
      {9, "graded half-size reduction matches the full solver", criterion_even_reduction},
      {10, "spectral dimension and volume estimates", criterion_zeta},
      {11, "half-line embeddings: exact Hausdorff gaps, refining", criterion_gh},
      {12, "truncation correspondences: exact intertwining, round trip", criterion_moyal_correspondences},
  };

  int failures = 0;
  for (const auto& e : entries) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", e.number,
                e.label, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  if (failures == 0) {
    std::printf("all 12 criteria pass\n");
  } else {
    std::printf("%d criteria failing\n", failures);
  }
  return failures;
}
