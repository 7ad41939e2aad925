#include "ncg/distance.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace ncg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative singular value cutoff separating genuine constraint directions
// from the commutant (kernel) of the commutator map.
constexpr double kKernelCutoff = 1e-9;

// Imaginary-sector objective entries below this relative level are treated
// as zero when deciding whether the real reduction applies.
constexpr double kRealDropTol = 1e-13;

bool exactly_imaginary(const Mat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j).real() != 0.0) return false;
  return true;
}

bool exactly_diagonal(const Mat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != Complex(0, 0)) return false;
  return true;
}

// Decode canonical Hermitian-direction index for an f-dimensional middle
// factor: [0, f) diagonal units, then symmetric pairs (i < j) in row-major
// order, then the matching imaginary pairs.
struct PatternRef {
  int kind;  // 0 diag, 1 sym, 2 imag
  Eigen::Index i, j;
};

PatternRef decode_pattern(Eigen::Index idx, Eigen::Index f) {
  if (idx < f) return {0, idx, idx};
  Eigen::Index pairs = f * (f - 1) / 2;
  Eigen::Index k = idx - f;
  int kind = 1;
  if (k >= pairs) {
    kind = 2;
    k -= pairs;
  }
  Eigen::Index i = 0;
  Eigen::Index block = f - 1;
  while (k >= block) {
    k -= block;
    ++i;
    --block;
  }
  return {kind, i, i + 1 + k};
}

}  // namespace

struct DistanceEngine::Prep {
  bool complex_mode = false;
  std::vector<Eigen::Index> kept;  // direction indices participating in this path
  std::vector<RMat> khat_r;        // orthonormal constraint directions (real path)
  std::vector<Mat> khat_c;         // orthonormal constraint directions (complex path)
  RMat vr;                         // kept.size() x rank right factor of the SVD
  RVec siginv;                     // inverse singular values, length rank
  RMat kernel;                     // kept.size() x corank commutant coordinates
};

DistanceEngine::DistanceEngine(SpectralTriple t, DistanceOptions opts)
    : DistanceEngine(std::move(t), opts, Flavor::full) {}

DistanceEngine DistanceEngine::even_reduced(SpectralTriple t, DistanceOptions opts) {
  return DistanceEngine(std::move(t), opts, Flavor::even);
}

DistanceEngine DistanceEngine::diagonal_restricted(SpectralTriple t, DistanceOptions opts) {
  return DistanceEngine(std::move(t), opts, Flavor::diagonal);
}

DistanceEngine::DistanceEngine(SpectralTriple t, DistanceOptions opts, Flavor flavor)
    : triple_(std::move(t)), opts_(opts), flavor_(flavor), even_(flavor == Flavor::even) {
  require(opts_.tol > 0.0 && opts_.max_iterations >= 1, "distance: invalid options");
  const Eigen::Index n = triple_.algebra.hilbert_dim;
  require(triple_.dirac.rows() == n && triple_.dirac.cols() == n,
          "distance: Dirac dimension mismatch");
  const double dscale = std::max(1.0, triple_.dirac.norm());
  require((triple_.dirac - triple_.dirac.adjoint()).norm() <= 1e-10 * dscale,
          "distance: Dirac operator must be Hermitian");

  if (even_) {
    require(triple_.grading.has_value(), "even distance: triple has no grading");
    const Mat& g = *triple_.grading;
    require(g.rows() == n && g.cols() == n, "even distance: grading dimension mismatch");
    require((g - g.adjoint()).norm() <= 1e-10, "even distance: grading must be Hermitian");
    require((g * g - Mat::Identity(n, n)).norm() <= 1e-10,
            "even distance: grading must be an involution");
    require(commutation_residual(triple_.algebra, g) <= 1e-10,
            "even distance: grading must commute with the algebra");

    // Eigenbasis of the grading. Exactly diagonal +-1 gradings get exact
    // selection columns so entrywise-real data stays entrywise real.
    bool exact_diag = exactly_diagonal(g);
    if (exact_diag)
      for (Eigen::Index i = 0; i < n && exact_diag; ++i)
        exact_diag = g(i, i) == Complex(1, 0) || g(i, i) == Complex(-1, 0);
    std::vector<Eigen::Index> plus, minus;
    Mat vecs;
    if (!exact_diag) {
      EigResult e = herm_eig(g);
      vecs = e.vectors;
      for (Eigen::Index i = 0; i < n; ++i) {
        require(std::abs(std::abs(e.values(i)) - 1.0) <= 1e-10,
                "even distance: grading eigenvalues must be +-1");
        (e.values(i) > 0 ? plus : minus).push_back(i);
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) (g(i, i).real() > 0 ? plus : minus).push_back(i);
    }
    require(!plus.empty() && !minus.empty(), "even distance: grading is degenerate");
    bp_ = Mat::Zero(n, static_cast<Eigen::Index>(plus.size()));
    bm_ = Mat::Zero(n, static_cast<Eigen::Index>(minus.size()));
    for (size_t k = 0; k < plus.size(); ++k) {
      if (exact_diag)
        bp_(plus[k], static_cast<Eigen::Index>(k)) = 1.0;
      else
        bp_.col(static_cast<Eigen::Index>(k)) = vecs.col(plus[k]);
    }
    for (size_t k = 0; k < minus.size(); ++k) {
      if (exact_diag)
        bm_(minus[k], static_cast<Eigen::Index>(k)) = 1.0;
      else
        bm_.col(static_cast<Eigen::Index>(k)) = vecs.col(minus[k]);
    }
    dpm_ = bp_.adjoint() * triple_.dirac * bm_;
    const double diag_res = std::max((bp_.adjoint() * triple_.dirac * bp_).norm(),
                                     (bm_.adjoint() * triple_.dirac * bm_).norm());
    require(diag_res <= 1e-10 * dscale,
            "even distance: Dirac operator must be off-diagonal in the grading");
  }

  enumerate_directions();
  require(m_ > 0, "distance: no usable Hermitian directions");
}

void DistanceEngine::enumerate_directions() {
  const MatrixAlgebra& a = triple_.algebra;
  Eigen::Index canon = 0;
  bool mixed_seen = false;
  for_each_hermitian_direction(a, [&](const Mat& h) {
    const Eigen::Index idx = canon++;
    if (flavor_ == Flavor::diagonal && !exactly_diagonal(h)) return;
    Mat k;
    if (even_) {
      Mat hp = bp_.adjoint() * h * bp_;
      Mat hm = bm_.adjoint() * h * bm_;
      k = dpm_ * hm - hp * dpm_;
    } else {
      k = comm(triple_.dirac, h);
    }
    const bool re = is_exactly_real(k);
    const bool im = exactly_imaginary(k);
    flag_.push_back(re ? 0 : (im ? 1 : 2));
    mixed_seen = mixed_seen || (!re && !im);
    ks_.push_back(std::move(k));
    canon_.push_back(idx);
    if (!a.structured) hb_.push_back(h);
  });
  m_ = static_cast<Eigen::Index>(ks_.size());
  real_capable_ = !mixed_seen;
}

const DistanceEngine::Prep& DistanceEngine::get_prep(bool complex_mode) const {
  auto& slot = preps_[complex_mode ? 1 : 0];
  if (slot) return *slot;

  auto prep = std::make_shared<Prep>();
  prep->complex_mode = complex_mode;
  for (Eigen::Index j = 0; j < m_; ++j)
    if (complex_mode || flag_[j] == 0) prep->kept.push_back(j);

  const Eigen::Index mk = static_cast<Eigen::Index>(prep->kept.size());
  if (mk == 0) {
    prep->vr.resize(0, 0);
    prep->siginv.resize(0);
    prep->kernel.resize(0, 0);
    slot = std::move(prep);
    return *slot;
  }

  const Eigen::Index p = ks_.front().rows();
  const Eigen::Index q = ks_.front().cols();
  const Eigen::Index rows = complex_mode ? 2 * p * q : p * q;
  RMat stack(rows, mk);
  for (Eigen::Index col = 0; col < mk; ++col) {
    const Mat& k = ks_[static_cast<size_t>(prep->kept[col])];
    Eigen::Index t = 0;
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < q; ++j) stack(t++, col) = k(i, j).real();
    if (complex_mode)
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < q; ++j) stack(t++, col) = k(i, j).imag();
  }

  Eigen::BDCSVD<RMat> svd(stack, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > kKernelCutoff * smax && sv(rank) > 0.0) ++rank;

  prep->vr = svd.matrixV().leftCols(rank);
  prep->siginv = sv.head(rank).cwiseInverse();
  prep->kernel = svd.matrixV().rightCols(mk - rank);
  for (Eigen::Index l = 0; l < rank; ++l) {
    if (complex_mode) {
      Mat kh(p, q);
      Eigen::Index t = 0;
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < q; ++j) kh(i, j) = svd.matrixU()(t++, l);
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < q; ++j) kh(i, j).imag(svd.matrixU()(t++, l));
      prep->khat_c.push_back(std::move(kh));
    } else {
      RMat kh(p, q);
      Eigen::Index t = 0;
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < q; ++j) kh(i, j) = svd.matrixU()(t++, l);
      prep->khat_r.push_back(std::move(kh));
    }
  }
  slot = std::move(prep);
  return *slot;
}

RVec DistanceEngine::objective(const Mat& delta) const {
  RVec c(m_);
  if (triple_.algebra.structured) {
    const TensorFactorization& tf = *triple_.algebra.structured;
    const Mat pt = structured_compress(tf, delta);
    const double s = 1.0 / std::sqrt(static_cast<double>(tf.left * tf.right));
    const double srt2 = s / std::sqrt(2.0);
    for (Eigen::Index j = 0; j < m_; ++j) {
      const PatternRef p = decode_pattern(canon_[j], tf.factor);
      if (p.kind == 0)
        c(j) = s * pt(p.i, p.i).real();
      else if (p.kind == 1)
        c(j) = srt2 * (pt(p.j, p.i) + pt(p.i, p.j)).real();
      else
        c(j) = -srt2 * (pt(p.j, p.i) - pt(p.i, p.j)).imag();
    }
  } else {
    for (Eigen::Index j = 0; j < m_; ++j)
      c(j) = (delta * hb_[static_cast<size_t>(j)]).trace().real();
  }
  return c;
}

Mat DistanceEngine::assemble(const RVec& coeffs) const {
  if (triple_.algebra.structured) {
    const TensorFactorization& tf = *triple_.algebra.structured;
    const double s = 1.0 / std::sqrt(static_cast<double>(tf.left * tf.right));
    const double srt2 = s / std::sqrt(2.0);
    Mat z = Mat::Zero(tf.factor, tf.factor);
    for (Eigen::Index j = 0; j < m_; ++j) {
      const double x = coeffs(j);
      if (x == 0.0) continue;
      const PatternRef p = decode_pattern(canon_[j], tf.factor);
      if (p.kind == 0) {
        z(p.i, p.i) += s * x;
      } else if (p.kind == 1) {
        z(p.i, p.j) += srt2 * x;
        z(p.j, p.i) += srt2 * x;
      } else {
        z(p.i, p.j) += Complex(0, srt2 * x);
        z(p.j, p.i) += Complex(0, -srt2 * x);
      }
    }
    return structured_lift(tf, z);
  }
  const Eigen::Index n = triple_.algebra.hilbert_dim;
  Mat a = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < m_; ++j)
    if (coeffs(j) != 0.0) a += coeffs(j) * hb_[static_cast<size_t>(j)];
  return a;
}

double DistanceEngine::constraint_norm(const Mat& a) const {
  if (even_) {
    const Mat ap = bp_.adjoint() * a * bp_;
    const Mat am = bm_.adjoint() * a * bm_;
    return operator_norm(dpm_ * am - ap * dpm_);
  }
  return operator_norm(comm(triple_.dirac, a));
}

DistanceResult DistanceEngine::distance(const State& phi, const State& psi) const {
  const Eigen::Index n = triple_.algebra.hilbert_dim;
  require(phi.rho.rows() == n && psi.rho.rows() == n, "distance: state dimension mismatch");
  const Mat delta = phi.rho - psi.rho;

  const RVec c = objective(delta);
  const double cscale = std::max(1.0, c.norm());

  const double drop = std::min(kRealDropTol, 0.1 * opts_.tol);
  bool use_real = real_capable_;
  if (use_real)
    for (Eigen::Index j = 0; j < m_ && use_real; ++j)
      if (flag_[j] == 1 && std::abs(c(j)) > drop * cscale) use_real = false;

  const Prep& prep = get_prep(!use_real);
  const Eigen::Index mk = static_cast<Eigen::Index>(prep.kept.size());
  RVec ck(mk);
  for (Eigen::Index j = 0; j < mk; ++j) ck(j) = c(prep.kept[static_cast<size_t>(j)]);

  DistanceResult out;
  out.optimizer = Mat::Zero(n, n);

  // Directions commuting with D that the states can see make the sup
  // unbounded along a feasible ray. A kernel direction only counts when the
  // state difference sees it beyond the solve tolerance; below that the
  // objective is treated as zero there, so "distance" means the sup with the
  // objective projected off the commutant.
  for (Eigen::Index k = 0; k < prep.kernel.cols(); ++k) {
    const double s = ck.dot(prep.kernel.col(k));
    if (std::abs(s) > opts_.tol * cscale) {
      RVec full = RVec::Zero(m_);
      for (Eigen::Index j = 0; j < mk; ++j)
        full(prep.kept[static_cast<size_t>(j)]) = (s > 0 ? 1.0 : -1.0) * prep.kernel(j, k);
      out.lower = kInf;
      out.upper = kInf;
      out.status = DistanceStatus::infinite;
      out.witness = assemble(full);
      return out;
    }
  }

  const Eigen::Index rank = prep.siginv.size();
  if (rank == 0) {
    out.status = DistanceStatus::certified;
    return out;
  }
  RVec cbar = prep.siginv.asDiagonal() * RVec(prep.vr.transpose() * ck);
  if (cbar.norm() == 0.0) {
    out.status = DistanceStatus::certified;
    return out;
  }

  sdp::Options so;
  so.tol = opts_.tol;
  so.max_iterations = opts_.max_iterations;
  RVec y;
  if (use_real) {
    auto res = sdp::maximize_in_norm_ball<RMat>(prep.khat_r, cbar, so);
    y = res.y;
    out.upper = res.upper;
    out.iterations = res.iterations;
    out.status = res.status == sdp::Status::certified ? DistanceStatus::certified
                                                      : DistanceStatus::budget_exhausted;
  } else {
    auto res = sdp::maximize_in_norm_ball<Mat>(prep.khat_c, cbar, so);
    y = res.y;
    out.upper = res.upper;
    out.iterations = res.iterations;
    out.status = res.status == sdp::Status::certified ? DistanceStatus::certified
                                                      : DistanceStatus::budget_exhausted;
  }

  // Map back to algebra coordinates, re-verify feasibility of the optimizer
  // directly against the Dirac commutator, and report the honestly evaluated
  // state difference as the lower bound.
  RVec xk = prep.vr * RVec(prep.siginv.asDiagonal() * y);
  RVec full = RVec::Zero(m_);
  for (Eigen::Index j = 0; j < mk; ++j) full(prep.kept[static_cast<size_t>(j)]) = xk(j);
  Mat a = assemble(full);
  const double cn = constraint_norm(a);
  if (cn > 1.0) a /= cn * (1.0 + 1e-12);
  out.optimizer = a;
  out.lower = (delta * a).trace().real();
  if (out.lower > out.upper) out.lower = out.upper;
  return out;
}

DistanceResult spectral_distance(const SpectralTriple& t, const State& phi, const State& psi,
                                 const DistanceOptions& opts) {
  DistanceEngine engine(t, opts);
  return engine.distance(phi, psi);
}

DistanceResult spectral_distance_even(const SpectralTriple& t, const State& phi, const State& psi,
                                      const DistanceOptions& opts) {
  DistanceEngine engine = DistanceEngine::even_reduced(t, opts);
  return engine.distance(phi, psi);
}

Eigen::MatrixXd distance_matrix(const SpectralTriple& t, const std::vector<State>& states,
                                const DistanceOptions& opts,
                                std::vector<DistanceResult>* details) {
  const Eigen::Index n = static_cast<Eigen::Index>(states.size());
  DistanceEngine engine(t, opts);
  RMat out = RMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      DistanceResult r = engine.distance(states[static_cast<size_t>(i)],
                                         states[static_cast<size_t>(j)]);
      out(i, j) = r.status == DistanceStatus::infinite ? kInf : r.upper;
      out(j, i) = out(i, j);
      if (details) details->push_back(std::move(r));
    }
  return out;
}

DiagonalBoundResult diagonal_lower_bound(const SpectralTriple& t, const State& phi,
                                         const State& psi, const DistanceOptions& opts) {
  DistanceEngine engine = DistanceEngine::diagonal_restricted(t, opts);
  DistanceResult r = engine.distance(phi, psi);
  DiagonalBoundResult out;
  out.iterations = r.iterations;
  if (r.status == DistanceStatus::infinite) {
    out.lower = kInf;
    out.optimizer = r.witness ? *r.witness : r.optimizer;
  } else {
    out.lower = r.lower;
    out.optimizer = r.optimizer;
  }
  return out;
}

}  // namespace ncg
