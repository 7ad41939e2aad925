#include "ncg/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ncg::sdp {
namespace {

template <typename MatT>
using VecOf = Eigen::Matrix<typename MatT::Scalar, Eigen::Dynamic, 1>;

inline double real_of(double x) { return x; }
inline double real_of(const Complex& x) { return x.real(); }

template <typename MatT>
VecOf<MatT> vec_t(const Eigen::MatrixBase<MatT>& m) {
  VecOf<MatT> v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v(k++) = m(r, c);
  return v;
}

template <typename MatT>
MatT unvec_t(const VecOf<MatT>& v, Eigen::Index rows, Eigen::Index cols) {
  MatT m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v(k++);
  return m;
}

template <typename MatT>
MatT hermitianized(const MatT& m) {
  return 0.5 * (m + m.adjoint());
}

template <typename MatT>
double largest_singular_value(const MatT& a) {
  if (a.size() == 0) return 0.0;
  MatT g = (a.rows() >= a.cols()) ? MatT(a.adjoint() * a) : MatT(a * a.adjoint());
  Eigen::SelfAdjointEigenSolver<MatT> es(hermitianized(g), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return top > 0.0 ? std::sqrt(top) : 0.0;
}

template <typename MatT>
double min_eigenvalue(const MatT& m) {
  Eigen::SelfAdjointEigenSolver<MatT> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Largest alpha with P + alpha*dP >= 0, for P > 0 (infinity when dP has no
// negative curvature against P).
template <typename MatT>
double max_step(const MatT& P, const MatT& dP) {
  Eigen::LLT<MatT> llt(P);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatT L = llt.matrixL();
  const MatT t1 = L.template triangularView<Eigen::Lower>().solve(dP);
  const MatT b =
      hermitianized(MatT(L.template triangularView<Eigen::Lower>().solve(MatT(t1.adjoint())).adjoint()));
  const double lmin = min_eigenvalue(b);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

template <typename MatT>
class Solver {
 public:
  Solver(const std::vector<MatT>& K, const RVec& c, const Options& opt)
      : K_(K),
        c_(c),
        opt_(opt),
        p_(static_cast<int>(K.front().rows())),
        q_(static_cast<int>(K.front().cols())),
        n_(p_ + q_),
        m_(static_cast<int>(K.size())) {
    SK_.resize(static_cast<Eigen::Index>(p_) * q_, m_);
    for (int l = 0; l < m_; ++l) SK_.col(l) = vec_t(K_[l]);
    check_orthonormality();
  }

  Result<MatT> solve() {
    RVec y = RVec::Zero(m_);
    MatT S = MatT::Identity(n_, n_);
    const double xi = std::max(1.0, c_.cwiseAbs().maxCoeff());
    MatT X = xi * MatT::Identity(n_, n_);

    Result<MatT> best;
    best.y = y;
    best.lower = -std::numeric_limits<double>::infinity();
    best.upper = std::numeric_limits<double>::infinity();
    best.dual = X;

    int stall = 0;
    int steps = 0;
    while (true) {
      absorb_certificates(y, X, best);
      if (best.upper - best.lower <= opt_.tol * std::max(1.0, std::abs(best.upper))) {
        best.status = Status::certified;
        break;
      }
      if (steps >= opt_.max_iterations) break;

      const double mu = real_of((X * S).trace()) / n_;
      if (!(mu > 1e-300)) break;  // complementarity at the floating-point floor

      const MatT W = nt_scaling(S, X);
      RMat M = schur_matrix(W);
      Eigen::LLT<RMat> lltM(M);
      if (lltM.info() != Eigen::Success) {
        M.diagonal().array() += 1e-10 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
        lltM.compute(M);
        if (lltM.info() != Eigen::Success) break;
      }

      // Predictor: pure Newton step toward the complementarity boundary.
      const RVec dy_aff = lltM.solve(c_);
      const MatT B_aff = unvec_t<MatT>(VecOf<MatT>(SK_ * dy_aff.cast<typename MatT::Scalar>()), p_, q_);
      const MatT dS_aff = embed_offdiag(B_aff);
      const MatT dX_aff = hermitianized(MatT(-X - conjugate_offdiag(W, B_aff)));
      const double aS_aff = std::min(1.0, max_step(S, dS_aff));
      const double aX_aff = std::min(1.0, max_step(X, dX_aff));
      double mu_aff =
          real_of(((X + aX_aff * dX_aff) * (S + aS_aff * dS_aff)).trace()) / n_;
      mu_aff = std::max(mu_aff, 0.0);
      const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 1e-6, 0.99);

      // Corrector: recentered step, reusing the factorized Schur complement.
      Eigen::LLT<MatT> lltS(S);
      if (lltS.info() != Eigen::Success) break;
      const MatT SI = lltS.solve(MatT::Identity(n_, n_));
      const RVec rhs = c_ + sigma * mu * trace_against_forms(SI);
      const RVec dy = lltM.solve(rhs);
      const MatT B = unvec_t<MatT>(VecOf<MatT>(SK_ * dy.cast<typename MatT::Scalar>()), p_, q_);
      const MatT dS = embed_offdiag(B);
      const MatT dX = hermitianized(MatT(sigma * mu * SI - X - conjugate_offdiag(W, B)));

      const double aS = std::min(1.0, 0.98 * max_step(S, dS));
      const double aX = std::min(1.0, 0.98 * max_step(X, dX));
      if (std::max(aS, aX) < 1e-12) {
        if (++stall >= 3) break;
      } else {
        stall = 0;
      }

      y += aS * dy;
      S = MatT::Identity(n_, n_) + embed_offdiag(unvec_t<MatT>(VecOf<MatT>(SK_ * y.cast<typename MatT::Scalar>()), p_, q_));
      X = hermitianized(MatT(X + aX * dX));
      ++steps;
    }
    best.iterations = steps;
    return best;
  }

 private:
  void check_orthonormality() const {
    // Full Gram validation is quadratic in the basis size, so large bases get
    // the diagonal plus a deterministic random sample of off-diagonal pairs.
    constexpr double tol = 1e-10;
    for (int l = 0; l < m_; ++l) {
      const double d = std::abs(real_of(SK_.col(l).dot(SK_.col(l))) - 1.0);
      require(d <= tol, "norm-ball solver: basis directions must be unit norm");
    }
    auto check_pair = [&](int i, int j) {
      const double v = std::abs(real_of(SK_.col(i).dot(SK_.col(j))));
      require(v <= tol, "norm-ball solver: basis directions must be orthogonal");
    };
    if (m_ <= 64) {
      for (int i = 0; i < m_; ++i)
        for (int j = i + 1; j < m_; ++j) check_pair(i, j);
    } else {
      std::mt19937_64 rng(0);
      std::uniform_int_distribution<int> pick(0, m_ - 1);
      for (int s = 0; s < 256; ++s) {
        const int i = pick(rng);
        const int j = pick(rng);
        if (i != j) check_pair(i, j);
      }
    }
  }

  // [[0, B*], [B, 0]] in the (q, p) block layout of the inequality matrix.
  MatT embed_offdiag(const MatT& B) const {
    MatT f = MatT::Zero(n_, n_);
    f.block(q_, 0, p_, q_) = B;
    f.block(0, q_, q_, p_) = B.adjoint();
    return f;
  }

  // Vector of Tr(F_l Z) for Hermitian Z, via the lower off-diagonal block.
  RVec trace_against_forms(const MatT& Z) const {
    const VecOf<MatT> z = vec_t(Z.block(q_, 0, p_, q_));
    return 2.0 * (SK_.adjoint() * z).real();
  }

  // Nesterov-Todd scaling point: the unique W > 0 with W S W = X.
  MatT nt_scaling(const MatT& S, const MatT& X) const {
    Eigen::SelfAdjointEigenSolver<MatT> es(hermitianized(S));
    const RVec d = es.eigenvalues().cwiseMax(1e-300);
    const MatT sh = es.eigenvectors() * d.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
    const MatT sih = es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() *
                     es.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<MatT> et(hermitianized(MatT(sh * X * sh)));
    const RVec e = et.eigenvalues().cwiseMax(0.0);
    const MatT th = et.eigenvectors() * e.cwiseSqrt().asDiagonal() * et.eigenvectors().adjoint();
    return hermitianized(MatT(sih * th * sih));
  }

  // W * [[0, B*], [B, 0]] * W assembled from the blocks of W; the sparsity of
  // the off-diagonal form keeps this at a handful of block products.
  MatT conjugate_offdiag(const MatT& W, const MatT& B) const {
    const MatT W1 = W.topLeftCorner(q_, q_);
    const MatT V = W.block(0, q_, q_, p_);
    const MatT W2 = W.block(q_, q_, p_, p_);
    const MatT q11 = W1 * B.adjoint() * V.adjoint() + V * B * W1;
    const MatT q12 = W1 * B.adjoint() * W2 + V * B * V;
    const MatT q22 = V.adjoint() * B.adjoint() * W2 + W2 * B * V;
    MatT out(n_, n_);
    out.topLeftCorner(q_, q_) = hermitianized(q11);
    out.block(0, q_, q_, p_) = q12;
    out.block(q_, 0, p_, q_) = q12.adjoint();
    out.block(q_, q_, p_, p_) = hermitianized(q22);
    return out;
  }

  // Schur complement M_ij = Tr(F_i W F_j W), formed as one large product
  // against the stacked direction matrix instead of m^2 separate traces.
  RMat schur_matrix(const MatT& W) const {
    const MatT W1 = W.topLeftCorner(q_, q_);
    const MatT V = W.block(0, q_, q_, p_);
    const MatT W2 = W.block(q_, q_, p_, p_);
    MatT Y(static_cast<Eigen::Index>(p_) * q_, m_);
    for (int l = 0; l < m_; ++l) {
      const MatT R = W2 * K_[l] * W1 + V.adjoint() * K_[l].adjoint() * V.adjoint();
      Y.col(l) = vec_t(R);
    }
    RMat M = 2.0 * (SK_.adjoint() * Y).real();
    return 0.5 * (M + M.transpose());
  }

  // Extract a feasible primal point and a repaired dual certificate from the
  // current iterates, and fold them into the running best enclosure. Both
  // sides stay valid independently of how the iteration is going.
  void absorb_certificates(const RVec& y, const MatT& X, Result<MatT>& best) const {
    // Primal: exact rescale into the norm ball.
    const MatT A = unvec_t<MatT>(VecOf<MatT>(SK_ * y.cast<typename MatT::Scalar>()), p_, q_);
    const double s = largest_singular_value(A);
    const double scale = std::max(1.0, s * (1.0 + 1e-12));
    const RVec y_feas = y / scale;
    const double lower = c_.dot(y_feas);
    if (lower > best.lower) {
      best.lower = lower;
      best.y = y_feas;
    }

    // Dual: restore the trace equalities exactly (the forms are orthogonal
    // with Tr(F_k F_l) = 2 delta_kl), then shift to the PSD cone. The shift
    // keeps the equalities because every F_l is traceless.
    const RVec r = c_ + trace_against_forms(X);
    MatT Z = X;
    const MatT corr = unvec_t<MatT>(VecOf<MatT>(SK_ * r.cast<typename MatT::Scalar>()), p_, q_);
    Z.block(q_, 0, p_, q_) -= 0.5 * corr;
    Z.block(0, q_, q_, p_) -= 0.5 * corr.adjoint();
    const double lmin = min_eigenvalue(Z);
    const double margin = 1e-14 * (1.0 + std::abs(lmin) + Z.norm());
    const double delta = std::max(0.0, -lmin) + margin;
    Z += delta * MatT::Identity(n_, n_);

    const RVec resid = c_ + trace_against_forms(Z);
    // Any leftover equality error is charged to the bound: feasible points
    // satisfy |y| <= sqrt(min(p, q)) because the directions are orthonormal.
    const double slack = resid.norm() * std::sqrt(static_cast<double>(std::min(p_, q_)));
    const double upper = real_of(Z.trace()) + slack;
    if (upper < best.upper) {
      best.upper = upper;
      best.dual = Z;
      best.dual_residual = resid.cwiseAbs().maxCoeff();
    }
  }

  const std::vector<MatT>& K_;
  RVec c_;
  Options opt_;
  int p_, q_, n_, m_;
  MatT SK_;  // stacked vectorized directions, one column per K_l
};

}  // namespace

template <typename MatT>
Result<MatT> maximize_in_norm_ball(const std::vector<MatT>& K, const Eigen::VectorXd& c,
                                   const Options& opt) {
  require(!K.empty(), "norm-ball solver: need at least one direction");
  require(static_cast<Eigen::Index>(K.size()) == c.size(),
          "norm-ball solver: objective length must match direction count");
  for (const auto& k : K)
    require(k.rows() == K.front().rows() && k.cols() == K.front().cols(),
            "norm-ball solver: directions must share dimensions");
  require(opt.tol > 0.0 && opt.max_iterations >= 1, "norm-ball solver: invalid options");
  Solver<MatT> solver(K, c, opt);
  return solver.solve();
}

template Result<RMat> maximize_in_norm_ball<RMat>(const std::vector<RMat>&, const Eigen::VectorXd&,
                                                  const Options&);
template Result<Mat> maximize_in_norm_ball<Mat>(const std::vector<Mat>&, const Eigen::VectorXd&,
                                                const Options&);

}  // namespace ncg::sdp
