#include "ncg/moyal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

namespace ncg::moyal {

namespace {

TensorFactorization spin_shape(const MoyalTruncation& m) {
  return TensorFactorization{2, m.levels, 1};
}

// Truncated ladder: entries (k-1, k) = sqrt(k).
Mat ladder(Eigen::Index levels) {
  Mat a = Mat::Zero(levels, levels);
  for (Eigen::Index k = 1; k < levels; ++k) {
    a(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  return a;
}

// One-form atoms evaluating exactly to the spinor raising/lowering blocks:
// with J = [a, a*] (diagonal and invertible at every truncation),
//   lift(J^{-1}) [D, lift(a*)] = sqrt(2/theta) [[0, I], [0, 0]]
//  -lift(J^{-1}) [D, lift(a)]  = sqrt(2/theta) [[0, 0], [I, 0]]
// hold with no truncation correction, so connection data built from them
// stays within the bimodule one-form span while reproducing the ladder
// mismatch terms exactly.
std::pair<OneForm, OneForm> spinor_block_forms(const MoyalTruncation& m) {
  const Mat a = m.annihilation;
  const Mat j = comm(a, a.adjoint());
  Mat jinv = Mat::Zero(m.levels, m.levels);
  for (Eigen::Index k = 0; k < m.levels; ++k) {
    require(std::abs(j(k, k)) > 1e-12, "spinor_block_forms: ladder commutator not invertible");
    jinv(k, k) = 1.0 / j(k, k);
  }
  const TensorFactorization shape = spin_shape(m);
  OneForm up;
  up.terms.push_back({structured_lift(shape, jinv), structured_lift(shape, a.adjoint())});
  OneForm down;
  down.terms.push_back({-structured_lift(shape, jinv), structured_lift(shape, a)});
  return {up, down};
}

// Realization map of the space of rows-by-cols matrices over the truncation
// of size cols: coordinates are the row-major entries eta_{ij}, the source
// space is C^2 (x) C^cols, and eta (x) (u; d) realizes as (eta u; eta d).
Mat rect_realize(Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index coord = rows * cols;
  const Eigen::Index source = 2 * cols;
  Mat r = Mat::Zero(2 * rows, coord * source);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index block = 0; block < 2; ++block) {
        r(block * rows + i, (i * cols + j) * source + block * cols + j) = 1.0;
      }
    }
  }
  return r;
}

// Right action of the structured basis element lift(e_{cd})/sqrt(2) on
// row-major rect coordinates: eta -> eta e_{cd} / sqrt(2).
std::vector<Mat> rect_right_action(Eigen::Index rows, Eigen::Index cols) {
  std::vector<Mat> acts;
  acts.reserve(static_cast<std::size_t>(cols * cols));
  const double s = 1.0 / std::sqrt(2.0);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index d = 0; d < cols; ++d) {
      Mat ra = Mat::Zero(rows * cols, rows * cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        ra(i * cols + d, i * cols + c) = s;
      }
      acts.push_back(std::move(ra));
    }
  }
  return acts;
}

// eta -> left eta right as a matrix on row-major coordinates.
Mat coord_sandwich(const Mat& left, const Mat& right) {
  return kron(left, right.transpose());
}

Correspondence rect_correspondence(const MoyalTruncation& source, const MoyalTruncation& target,
                                   bool materialize_right_action) {
  const Eigen::Index rows = target.levels;
  const Eigen::Index cols = source.levels;
  auto [up, down] = spinor_block_forms(source);

  std::vector<CoordTerm> terms;
  const Mat idr = Mat::Identity(rows, rows);
  const Mat idc = Mat::Identity(cols, cols);
  // nabla(eta) = (a_t eta - eta a_s) (x) up + (a_t* eta - eta a_s*) (x) down.
  terms.push_back({coord_sandwich(target.annihilation, idc) -
                       coord_sandwich(idr, source.annihilation),
                   up});
  terms.push_back({coord_sandwich(target.annihilation.adjoint(), idc) -
                       coord_sandwich(idr, source.annihilation.adjoint()),
                   down});

  Correspondence c;
  c.source = source.triple;
  c.target = target.triple;
  c.module.coord_dim = rows * cols;
  c.module.outer = 1;
  c.module.realize = rect_realize(rows, cols);
  if (materialize_right_action) {
    c.module.right_act = rect_right_action(rows, cols);
  }
  c.u = Mat::Identity(2 * rows, 2 * rows);
  AssembledOp assembled = assemble_realized_op(c.module.realize, c.module.coord_dim,
                                               2 * cols, terms, source.triple.dirac);
  c.op = std::move(assembled.op);
  c.assembly_residual = assembled.residual;
  const Mat realize = c.module.realize;
  const Eigen::Index coord_dim = c.module.coord_dim;
  const Eigen::Index source_dim = 2 * cols;
  c.op_with = [realize, coord_dim, source_dim, terms](const Mat& x, double* res) {
    AssembledOp a = assemble_realized_op(realize, coord_dim, source_dim, terms, x);
    if (res != nullptr) *res = a.residual;
    return a.op;
  };
  return c;
}

}  // namespace

MoyalTruncation truncation(Eigen::Index levels, double theta) {
  require(levels >= 2, "truncation: at least two oscillator levels");
  require(theta > 0.0, "truncation: theta must be positive");
  MoyalTruncation m;
  m.levels = levels;
  m.theta = theta;
  m.annihilation = ladder(levels);

  const double scale = std::sqrt(2.0 / theta);
  Mat dirac = Mat::Zero(2 * levels, 2 * levels);
  dirac.block(0, levels, levels, levels) = scale * m.annihilation;
  dirac.block(levels, 0, levels, levels) = scale * m.annihilation.adjoint();

  Mat grading = Mat::Identity(2 * levels, 2 * levels);
  grading.block(levels, levels, levels, levels) = -Mat::Identity(levels, levels);

  m.triple.algebra = lifted_matrix_algebra(2, levels, 1);
  m.triple.dirac = std::move(dirac);
  m.triple.grading = std::move(grading);
  return m;
}

Mat spin_lift(const MoyalTruncation& m, const Mat& z) {
  require(z.rows() == m.levels && z.cols() == m.levels,
          "spin_lift: element size does not match the truncation");
  return structured_lift(spin_shape(m), z);
}

State eigenstate(const MoyalTruncation& m, Eigen::Index level) {
  require(level >= 0 && level < m.levels, "eigenstate: level outside the truncation");
  Vec psi = Vec::Zero(2 * m.levels);
  psi(level) = 1.0;
  return vector_state(psi);
}

double eigenstate_distance_formula(Eigen::Index m, Eigen::Index n, double theta) {
  require(m >= 0 && n >= 0, "eigenstate_distance_formula: levels must be nonnegative");
  require(theta > 0.0, "eigenstate_distance_formula: theta must be positive");
  const Eigen::Index lo = std::min(m, n);
  const Eigen::Index hi = std::max(m, n);
  double sum = 0.0;
  for (Eigen::Index k = lo + 1; k <= hi; ++k) {
    sum += 1.0 / std::sqrt(static_cast<double>(k));
  }
  return std::sqrt(theta / 2.0) * sum;
}

Vec coherent_vector(Complex z, double theta, Eigen::Index levels) {
  require(theta > 0.0, "coherent_vector: theta must be positive");
  require(levels >= 2, "coherent_vector: at least two levels");
  // Quasi-classical vector with mean displacement z: amplitudes
  // c_n = e^{-|z|^2/(4 theta)} (z / sqrt(2 theta))^n / sqrt(n!), so the
  // level weights |c_n|^2 follow a Poisson law of mean |z|^2 / (2 theta).
  const double lambda = std::norm(z) / (2.0 * theta);
  double term = std::exp(-lambda);
  double captured = term;
  for (Eigen::Index n = 1; n < levels; ++n) {
    term *= lambda / static_cast<double>(n);
    captured += term;
  }
  require(1.0 - captured < 1e-12,
          "coherent_vector: displacement too large for this truncation, increase the level count");

  Vec v = Vec::Zero(levels);
  const Complex step = z / std::sqrt(2.0 * theta);
  Complex amp = std::exp(Complex(-std::norm(z) / (4.0 * theta), 0.0));
  v(0) = amp;
  for (Eigen::Index n = 1; n < levels; ++n) {
    amp *= step / std::sqrt(static_cast<double>(n));
    v(n) = amp;
  }
  v /= v.norm();
  return v;
}

State coherent_state(const MoyalTruncation& m, Complex z) {
  const Vec v = coherent_vector(z, m.theta, m.levels);
  Vec psi = Vec::Zero(2 * m.levels);
  psi.head(m.levels) = v;
  return vector_state(psi);
}

Mat translation(const MoyalTruncation& m, Complex z) {
  // exp(G) with G = (z a* - conj(z) a)/sqrt(2 theta) anti-Hermitian: computed
  // as the spectral exponential of the Hermitian generator -iG, so the result
  // is unitary to machine precision.
  const Mat a = m.annihilation;
  const Mat g = (z * a.adjoint() - std::conj(z) * a) / std::sqrt(2.0 * m.theta);
  const Mat h = Complex(0.0, -1.0) * g;
  EigResult eig = herm_eig(h);
  Vec phases(m.levels);
  for (Eigen::Index k = 0; k < m.levels; ++k) {
    phases(k) = std::exp(Complex(0.0, eig.values(k)));
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

Mat rotation(const MoyalTruncation& m, Complex tau) {
  Vec phases(m.levels);
  for (Eigen::Index k = 0; k < m.levels; ++k) {
    phases(k) = std::exp(Complex(0.0, 1.0) * tau * static_cast<double>(k));
  }
  return Mat(phases.asDiagonal());
}

RadialElement radial_element(const MoyalTruncation& m, Eigen::Index order) {
  require(order >= 1, "radial_element: order must be positive");
  RadialElement r;
  const Mat damp = rotation(m, Complex(0.0, 1.0 / static_cast<double>(order)));
  r.raw = m.annihilation.adjoint() * damp + damp * m.annihilation;
  const double denom =
      1.0 + (std::exp(1.0 / static_cast<double>(order)) - 1.0) * static_cast<double>(order);
  r.normalized = r.raw / denom;
  r.commutator_norm = operator_norm(comm(m.triple.dirac, spin_lift(m, r.normalized)));
  return r;
}

LineEmbedding gh_experiment(double theta, Eigen::Index points) {
  require(theta > 0.0, "gh_experiment: theta must be positive");
  require(points >= 1, "gh_experiment: at least one step");
  LineEmbedding e;
  e.theta = theta;
  e.positions.resize(static_cast<std::size_t>(points) + 1);
  e.positions[0] = 0.0;
  const double scale = std::sqrt(theta / 2.0);
  for (Eigen::Index k = 1; k <= points; ++k) {
    e.positions[static_cast<std::size_t>(k)] =
        e.positions[static_cast<std::size_t>(k - 1)] + scale / std::sqrt(static_cast<double>(k));
  }
  // The point set contains both interval endpoints, so the Hausdorff distance
  // to [0, x_points] is half the largest inter-point gap (the first one).
  double max_gap = 0.0;
  for (std::size_t k = 1; k < e.positions.size(); ++k) {
    max_gap = std::max(max_gap, e.positions[k] - e.positions[k - 1]);
  }
  e.hausdorff_distance = 0.5 * max_gap;
  return e;
}

SpectralEstimates zeta_estimates(double theta, Eigen::Index levels) {
  require(levels >= 8, "zeta_estimates: needs at least eight levels");
  const MoyalTruncation m = truncation(levels, theta);
  EigResult eig = herm_eig(m.triple.dirac);

  std::vector<double> squares;
  squares.reserve(static_cast<std::size_t>(eig.values.size()));
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    squares.push_back(eig.values(i) * eig.values(i));
  }
  std::sort(squares.begin(), squares.end());
  const double top = squares.back();
  require(top > 0.0, "zeta_estimates: degenerate spectrum");

  // Remove the two-dimensional kernel (last ladder level and vacuum spinor).
  std::vector<double> positive;
  for (double s : squares) {
    if (s > 1e-9 * top) positive.push_back(s);
  }
  require(positive.size() + 2 == squares.size(), "zeta_estimates: unexpected kernel dimension");

  // Distinct eigenvalues with cumulative counts: the counting function.
  std::vector<double> lam;
  std::vector<double> count;
  for (double s : positive) {
    if (!lam.empty() && s <= lam.back() * (1.0 + 1e-8)) {
      count.back() += 1.0;
    } else {
      lam.push_back(s);
      count.push_back(count.empty() ? 1.0 : count.back() + 1.0);
    }
  }
  const std::size_t distinct = lam.size();
  require(distinct >= 4, "zeta_estimates: too few distinct eigenvalues");

  // Least-squares slope of log N(Lambda) against log Lambda over the interior
  // half of the spectrum; the dimension is twice that slope.
  const std::size_t fit_lo = distinct / 4;
  const std::size_t fit_hi = std::max(fit_lo + 2, (3 * distinct) / 4);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n_fit = static_cast<double>(fit_hi - fit_lo);
  for (std::size_t i = fit_lo; i < fit_hi; ++i) {
    const double x = std::log(lam[i]);
    const double y = std::log(count[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n_fit * sxx - sx * sx;
  require(std::abs(denom) > 1e-12, "zeta_estimates: degenerate fit window");
  const double slope = (n_fit * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n_fit;
  double dev = 0.0;
  for (std::size_t i = fit_lo; i < fit_hi; ++i) {
    const double x = std::log(lam[i]);
    dev = std::max(dev, std::abs(std::log(count[i]) - (slope * x + intercept)));
  }
  const double half_range =
      0.5 * (std::log(lam[fit_hi - 1]) - std::log(lam[fit_lo]));

  SpectralEstimates out;
  out.dimension = 2.0 * slope;
  // Heuristic enclosure: fit dispersion translated to a slope uncertainty,
  // plus a discreteness floor that shrinks as the truncation grows.
  out.dimension_error =
      2.0 * dev / std::max(half_range, 1e-6) + 4.0 / static_cast<double>(distinct);

  // Volume: residue at z = 2 of the spectral zeta function
  //   f(z) = (theta/2)^{z/2} [ sum_lambda lambda^{-z/2} + tail(z) ],
  // where the sum runs over the positive spectrum of D^2 and the tail
  // completes the integer ladder (theta/2) lambda = L, L+1, ... by
  // Euler-Maclaurin. The completed function has a simple pole at z = 2 whose
  // residue the truncation pins independently of cutoff artifacts; a small
  // contour integral (radius 0.25, 64 trapezoid nodes) extracts it.
  std::vector<double> scaled;
  scaled.reserve(positive.size());
  for (double s : positive) scaled.push_back(s * theta / 2.0);
  const double ladder_start = std::round(scaled.back() * (1.0 + 1e-12)) + 1.0;

  auto completed = [&](Complex z, int order) {
    const Complex s = z / 2.0;
    Complex head = 0.0;
    for (double v : scaled) head += std::exp(-s * std::log(v));
    const Complex nb(ladder_start, 0.0);
    // Two copies of the ladder continue past the cutoff (both spinor blocks).
    Complex tail = std::pow(nb, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(nb, -s);
    if (order >= 1) tail += s * std::pow(nb, -s - 1.0) / 12.0;
    if (order >= 2) tail -= s * (s + 1.0) * (s + 2.0) * std::pow(nb, -s - 3.0) / 720.0;
    head += 2.0 * tail;
    return std::pow(Complex(theta / 2.0, 0.0), s) * head;
  };
  auto residue = [&](int order) {
    const int nodes = 64;
    const double radius = 0.25;
    Complex acc = 0.0;
    for (int k = 0; k < nodes; ++k) {
      const double phi = 2.0 * M_PI * static_cast<double>(k) / nodes;
      const Complex offset = radius * std::exp(Complex(0.0, phi));
      acc += completed(Complex(2.0, 0.0) + offset, order) * offset;
    }
    return acc / static_cast<double>(nodes);
  };

  const Complex res2 = residue(2);
  const Complex res1 = residue(1);
  out.volume = res2.real();
  const double last_term = theta / (60.0 * std::pow(ladder_start, 4.0));
  out.volume_error = std::abs(res2 - res1) + std::abs(res2.imag()) + last_term +
                     1e-9 * (1.0 + std::abs(out.volume));
  return out;
}

Mat round_trip_multiplication_map(const CorrespondencePair& pair) {
  const Eigen::Index n = pair.small.levels;
  const Eigen::Index big = pair.forward.target.algebra.structured
                               ? pair.forward.target.algebra.structured->factor
                               : pair.forward.target.algebra.hilbert_dim / 2;
  // Composite coordinates of compose(forward, reverse): reverse coordinate
  // (i, j) [n x big, row-major] times forward coordinate (k, l) [big x n] at
  // index (i*big + j) * (big*n) + (k*n + l). The product e_{ij} e_{kl} is
  // delta_{jk} e_{il} = sqrt(2) delta_{jk} g_{il} in the identity module's
  // orthonormal basis (the structured basis elements are lift(e_{il})/sqrt(2)).
  Mat v = Mat::Zero(n * n, (n * big) * (big * n));
  const double s = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < big; ++j) {
      for (Eigen::Index l = 0; l < n; ++l) {
        v(i * n + l, (i * big + j) * (big * n) + (j * n + l)) = s;
      }
    }
  }
  return v;
}

CorrespondencePair correspondence_pair(Eigen::Index small_levels, const MoyalTruncation& m) {
  require(small_levels >= 2, "correspondence_pair: at least two levels on the small side");
  require(2 * small_levels <= m.levels,
          "correspondence_pair: the small truncation must be at most half the large one");
  CorrespondencePair pair;
  pair.small = truncation(small_levels, m.theta);
  pair.forward = rect_correspondence(pair.small, m, true);
  // The reverse right-action table is quadratic in the large truncation; it
  // is materialized only at sizes where the similarity diagnostics use it.
  pair.reverse = rect_correspondence(m, pair.small, m.levels <= 32);
  return pair;
}

}  // namespace ncg::moyal
