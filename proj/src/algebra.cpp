#include "ncg/algebra.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <utility>

namespace ncg {

namespace {

// Flat index of |l> (x) |i> (x) |r> in C^L (x) C^f (x) C^R.
inline Eigen::Index tensor_index(Eigen::Index l, Eigen::Index i, Eigen::Index r,
                                 Eigen::Index f, Eigen::Index R) {
  return (l * f + i) * R + r;
}

// 1_L (x) z (x) 1_R.
Mat lift_middle(const Mat& z, Eigen::Index L, Eigen::Index R) {
  const Eigen::Index f = z.rows();
  Mat out = Mat::Zero(L * f * R, L * f * R);
  for (Eigen::Index l = 0; l < L; ++l)
    for (Eigen::Index i = 0; i < f; ++i)
      for (Eigen::Index j = 0; j < f; ++j) {
        if (z(i, j) == Complex(0, 0)) continue;
        for (Eigen::Index r = 0; r < R; ++r)
          out(tensor_index(l, i, r, f, R), tensor_index(l, j, r, f, R)) = z(i, j);
      }
  return out;
}

// Middle-factor compression: the f x f matrix z with lift_middle(z)/(L*R) the
// orthogonal projection of m onto 1 (x) M_f (x) 1.
Mat middle_partial_trace(const Mat& m, Eigen::Index L, Eigen::Index f, Eigen::Index R) {
  Mat z = Mat::Zero(f, f);
  for (Eigen::Index i = 0; i < f; ++i)
    for (Eigen::Index j = 0; j < f; ++j) {
      Complex s(0, 0);
      for (Eigen::Index l = 0; l < L; ++l)
        for (Eigen::Index r = 0; r < R; ++r)
          s += m(tensor_index(l, i, r, f, R), tensor_index(l, j, r, f, R));
      z(i, j) = s;
    }
  return z;
}

// Orthonormalize a generating set to a basis (columns of U from the SVD,
// turned back into matrices).
std::vector<Mat> independent_basis(const std::vector<Mat>& gens, double rel_tol) {
  OperatorSubspace s = subspace_span(gens, rel_tol);
  std::vector<Mat> out;
  out.reserve(static_cast<size_t>(s.rank()));
  for (Eigen::Index k = 0; k < s.rank(); ++k) out.push_back(s.basis_matrix(k));
  return out;
}

}  // namespace

MatrixAlgebra make_algebra(Eigen::Index hilbert_dim, const std::vector<Mat>& generators,
                           bool unital, double tol) {
  require(hilbert_dim > 0, "make_algebra: hilbert_dim must be positive");
  require(!generators.empty(), "make_algebra: empty generating set");
  for (const Mat& g : generators)
    require(g.rows() == hilbert_dim && g.cols() == hilbert_dim,
            "make_algebra: generator dimension mismatch");

  // Seed span: generators, their adjoints, and (if unital) the identity.
  std::vector<Mat> seed = generators;
  for (const Mat& g : generators) seed.push_back(g.adjoint());
  if (unital) seed.push_back(Mat::Identity(hilbert_dim, hilbert_dim));
  std::vector<Mat> basis = independent_basis(seed, 1e-12);

  // Close under products; each round adds all pairwise products and
  // re-orthonormalizes until the dimension stabilizes.
  const Eigen::Index max_dim = hilbert_dim * hilbert_dim;
  while (true) {
    std::vector<Mat> extended = basis;
    extended.reserve(basis.size() * (basis.size() + 1));
    for (const Mat& x : basis)
      for (const Mat& y : basis) extended.push_back(x * y);
    std::vector<Mat> closed = independent_basis(extended, 1e-12);
    if (static_cast<Eigen::Index>(closed.size()) == static_cast<Eigen::Index>(basis.size()))
      break;
    basis = std::move(closed);
    require(static_cast<Eigen::Index>(basis.size()) <= max_dim,
            "make_algebra: closure exceeded the full matrix algebra dimension");
  }

  MatrixAlgebra alg;
  alg.hilbert_dim = hilbert_dim;
  alg.unital = unital;
  alg.basis = std::move(basis);
  alg.span = subspace_span(alg.basis);

  // Validate *-closure and product closure of the final span.
  for (const Mat& b : alg.basis) {
    auto st = subspace_contains(alg.span, Mat(b.adjoint()), tol);
    require(st.contained, "make_algebra: span is not closed under adjoints");
  }
  for (const Mat& x : alg.basis)
    for (const Mat& y : alg.basis) {
      auto pr = subspace_contains(alg.span, Mat(x * y), tol);
      require(pr.contained, "make_algebra: span is not closed under products");
    }
  if (unital) {
    auto un = subspace_contains(alg.span, Mat(Mat::Identity(hilbert_dim, hilbert_dim)), tol);
    require(un.contained, "make_algebra: unital flag set but identity not in span");
  }
  return alg;
}

MatrixAlgebra full_matrix_algebra(Eigen::Index n) {
  return lifted_matrix_algebra(1, n, 1);
}

MatrixAlgebra lifted_matrix_algebra(Eigen::Index left, Eigen::Index factor, Eigen::Index right) {
  require(left > 0 && factor > 0 && right > 0,
          "lifted_matrix_algebra: factor dimensions must be positive");
  MatrixAlgebra alg;
  alg.hilbert_dim = left * factor * right;
  alg.unital = true;
  alg.structured = TensorFactorization{left, factor, right};
  return alg;
}

MatrixAlgebra diagonal_algebra(Eigen::Index n) {
  std::vector<Mat> gens;
  gens.reserve(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Mat e = Mat::Zero(n, n);
    e(i, i) = 1.0;
    gens.push_back(e);
  }
  return make_algebra(n, gens);
}

MatrixAlgebra direct_sum(const std::vector<MatrixAlgebra>& parts) {
  require(!parts.empty(), "direct_sum: no summands");
  Eigen::Index n = 0;
  bool unital = true;
  for (const MatrixAlgebra& p : parts) {
    n += p.hilbert_dim;
    unital = unital && p.unital;
  }
  std::vector<Mat> gens;
  Eigen::Index offset = 0;
  for (const MatrixAlgebra& p : parts) {
    for (const Mat& x : algebra_basis(p)) {
      Mat g = Mat::Zero(n, n);
      g.block(offset, offset, p.hilbert_dim, p.hilbert_dim) = x;
      gens.push_back(std::move(g));
    }
    offset += p.hilbert_dim;
  }
  return make_algebra(n, gens, unital);
}

Mat structured_lift(const TensorFactorization& t, const Mat& z) {
  require(z.rows() == t.factor && z.cols() == t.factor,
          "structured_lift: middle-factor dimension mismatch");
  return lift_middle(z, t.left, t.right);
}

Mat structured_compress(const TensorFactorization& t, const Mat& m) {
  require(m.rows() == t.left * t.factor * t.right && m.cols() == m.rows(),
          "structured_compress: dimension mismatch");
  return middle_partial_trace(m, t.left, t.factor, t.right);
}

std::vector<Mat> algebra_basis(const MatrixAlgebra& a) {
  if (!a.structured) return a.basis;
  const auto [L, f, R] = *a.structured;
  const double scale = 1.0 / std::sqrt(static_cast<double>(L * R));
  std::vector<Mat> out;
  out.reserve(static_cast<size_t>(f * f));
  for (Eigen::Index i = 0; i < f; ++i)
    for (Eigen::Index j = 0; j < f; ++j) {
      Mat e = Mat::Zero(f, f);
      e(i, j) = scale;
      out.push_back(lift_middle(e, L, R));
    }
  return out;
}

ContainsResult algebra_contains(const MatrixAlgebra& a, const Mat& m, double tol) {
  require(m.rows() == a.hilbert_dim && m.cols() == a.hilbert_dim,
          "algebra_contains: dimension mismatch");
  if (!a.structured) return subspace_contains(a.span, m, tol);
  const auto [L, f, R] = *a.structured;
  Mat z = middle_partial_trace(m, L, f, R) / static_cast<double>(L * R);
  double residual = (m - lift_middle(z, L, R)).norm();
  return {residual <= tol * std::max(1.0, m.norm()), residual};
}

double commutation_residual(const MatrixAlgebra& a, const Mat& m) {
  require(m.rows() == a.hilbert_dim && m.cols() == a.hilbert_dim,
          "commutation_residual: dimension mismatch");
  const double scale = std::max(1.0, m.norm());
  if (!a.structured) {
    double worst = 0.0;
    for (const Mat& b : a.basis) worst = std::max(worst, comm(m, b).norm());
    return worst / scale;
  }
  // Distance to the commutant M_L (x) 1_f (x) M_R, which is zero exactly when
  // m commutes with everything in 1 (x) M_f (x) 1.
  const auto [L, f, R] = *a.structured;
  Mat g = Mat::Zero(L * R, L * R);
  for (Eigen::Index l = 0; l < L; ++l)
    for (Eigen::Index r = 0; r < R; ++r)
      for (Eigen::Index lp = 0; lp < L; ++lp)
        for (Eigen::Index rp = 0; rp < R; ++rp) {
          Complex s(0, 0);
          for (Eigen::Index i = 0; i < f; ++i)
            s += m(tensor_index(l, i, r, f, R), tensor_index(lp, i, rp, f, R));
          g(l * R + r, lp * R + rp) = s / static_cast<double>(f);
        }
  Mat proj = Mat::Zero(a.hilbert_dim, a.hilbert_dim);
  for (Eigen::Index l = 0; l < L; ++l)
    for (Eigen::Index r = 0; r < R; ++r)
      for (Eigen::Index lp = 0; lp < L; ++lp)
        for (Eigen::Index rp = 0; rp < R; ++rp) {
          const Complex v = g(l * R + r, lp * R + rp);
          if (v == Complex(0, 0)) continue;
          for (Eigen::Index i = 0; i < f; ++i)
            proj(tensor_index(l, i, r, f, R), tensor_index(lp, i, rp, f, R)) = v;
        }
  return (m - proj).norm() / scale;
}

namespace {

// Orthonormalize real matrices over the reals; returns the orthonormal basis.
std::vector<RMat> real_orthonormalize(const std::vector<RMat>& cands,
                                      Eigen::Index rows, Eigen::Index cols) {
  std::vector<RMat> out;
  if (cands.empty()) return out;
  RMat stack(rows * cols, static_cast<Eigen::Index>(cands.size()));
  for (size_t k = 0; k < cands.size(); ++k) {
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        stack(idx++, static_cast<Eigen::Index>(k)) = cands[k](i, j);
  }
  // JacobiSVD: these stacks carry exactly duplicated columns, and BDCSVD's
  // deflation can hand back thin-U columns outside the column space in that
  // regime. The stacks are small, so accuracy wins over speed here.
  Eigen::JacobiSVD<RMat> svd(stack, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-12 * smax && sv(rank) > 0.0) ++rank;
  out.reserve(static_cast<size_t>(rank));
  for (Eigen::Index k = 0; k < rank; ++k) {
    RMat m(rows, cols);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = svd.matrixU()(idx++, k);
    out.push_back(m);
  }
  return out;
}

// Streams the Hermitian directions of a structured algebra: diagonal units,
// then symmetric pairs (entrywise real sector), then i times antisymmetric
// pairs (entrywise imaginary sector). Every element is orthonormal in the
// Hilbert-Schmidt inner product of the big space.
void stream_structured_hermitian(const TensorFactorization& t,
                                 const std::function<void(const Mat&)>& f) {
  const auto [L, fdim, R] = t;
  const double s = 1.0 / std::sqrt(static_cast<double>(L * R));
  const double srt2 = s / std::sqrt(2.0);
  Mat z = Mat::Zero(fdim, fdim);
  for (Eigen::Index i = 0; i < fdim; ++i) {
    z(i, i) = s;
    f(lift_middle(z, L, R));
    z(i, i) = 0.0;
  }
  for (Eigen::Index i = 0; i < fdim; ++i)
    for (Eigen::Index j = i + 1; j < fdim; ++j) {
      z(i, j) = srt2;
      z(j, i) = srt2;
      f(lift_middle(z, L, R));
      z(i, j) = 0.0;
      z(j, i) = 0.0;
    }
  for (Eigen::Index i = 0; i < fdim; ++i)
    for (Eigen::Index j = i + 1; j < fdim; ++j) {
      z(i, j) = Complex(0, srt2);
      z(j, i) = Complex(0, -srt2);
      f(lift_middle(z, L, R));
      z(i, j) = 0.0;
      z(j, i) = 0.0;
    }
}

}  // namespace

std::vector<Mat> hermitian_basis(const MatrixAlgebra& a) {
  if (a.structured) {
    std::vector<Mat> out;
    out.reserve(static_cast<size_t>(a.dim()));
    stream_structured_hermitian(*a.structured, [&](const Mat& h) { out.push_back(h); });
    return out;
  }

  const Eigen::Index n = a.hilbert_dim;

  // When the algebra is closed under entrywise conjugation, the Hermitian
  // part splits into real symmetric matrices plus i times real antisymmetric
  // ones. Building the basis sector by sector keeps every element either
  // exactly real or exactly imaginary, which downstream solvers exploit.
  bool conj_closed = true;
  for (const Mat& b : a.basis)
    if (!subspace_contains(a.span, Mat(b.conjugate()), 1e-10).contained) {
      conj_closed = false;
      break;
    }

  if (conj_closed) {
    std::vector<RMat> sym_cands, antisym_cands;
    for (const Mat& b : a.basis) {
      Mat h1 = 0.5 * (b + b.adjoint());
      Mat h2 = Complex(0, -0.5) * (b - b.adjoint());
      for (const Mat& h : {h1, h2}) {
        RMat s = h.real();           // symmetric since h is Hermitian
        RMat t = h.imag();           // antisymmetric
        if (s.norm() > 1e-14 * std::max(1.0, h.norm())) sym_cands.push_back(s);
        if (t.norm() > 1e-14 * std::max(1.0, h.norm())) antisym_cands.push_back(t);
      }
    }
    std::vector<Mat> out;
    for (const RMat& s : real_orthonormalize(sym_cands, n, n)) {
      Mat h = s.cast<Complex>();
      out.push_back(0.5 * (h + h.adjoint()));
    }
    for (const RMat& t : real_orthonormalize(antisym_cands, n, n)) {
      Mat h = Complex(0, 1) * t.cast<Complex>();
      out.push_back(0.5 * (h + h.adjoint()));
    }
    require(static_cast<Eigen::Index>(out.size()) == a.dim(),
            "hermitian_basis: sector split rank mismatch");
    return out;
  }

  // Generic path: orthonormalize over the reals in (Re, Im) coordinates.
  std::vector<Mat> cands;
  cands.reserve(2 * a.basis.size());
  for (const Mat& b : a.basis) {
    cands.push_back(0.5 * (b + b.adjoint()));
    cands.push_back(Complex(0, -0.5) * (b - b.adjoint()));
  }
  RMat stack(2 * n * n, static_cast<Eigen::Index>(cands.size()));
  for (size_t k = 0; k < cands.size(); ++k) {
    Vec v = vec(cands[k]);
    stack.col(static_cast<Eigen::Index>(k)) << v.real(), v.imag();
  }
  // JacobiSVD for the same deflation-robustness reason as above.
  Eigen::JacobiSVD<RMat> svd(stack, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-12 * smax && sv(rank) > 0.0) ++rank;
  std::vector<Mat> out;
  out.reserve(static_cast<size_t>(rank));
  for (Eigen::Index k = 0; k < rank; ++k) {
    RVec col = svd.matrixU().col(k);
    Vec v(n * n);
    v.real() = col.head(n * n);
    v.imag() = col.tail(n * n);
    Mat h = unvec(v, n, n);
    h = 0.5 * (h + h.adjoint());  // remove rounding-level skew part
    out.push_back(h);
  }
  return out;
}

void for_each_hermitian_direction(const MatrixAlgebra& a,
                                  const std::function<void(const Mat&)>& f) {
  if (a.structured) {
    stream_structured_hermitian(*a.structured, f);
    return;
  }
  for (const Mat& h : hermitian_basis(a)) f(h);
}

State make_state(Mat rho, double tol) {
  require(rho.rows() == rho.cols(), "make_state: density matrix must be square");
  require(is_hermitian(rho, tol), "make_state: density matrix must be Hermitian");
  EigResult e = herm_eig(rho);
  require(e.values.minCoeff() > -tol, "make_state: density matrix must be PSD");
  require(std::abs(rho.trace().real() - 1.0) <= tol && std::abs(rho.trace().imag()) <= tol,
          "make_state: density matrix must have unit trace");
  // Keep the caller's entries bitwise when already Hermitian-symmetric, so
  // exactly-real inputs stay exactly real for the arithmetic reductions.
  if ((rho - rho.adjoint()).norm() != 0.0) rho = 0.5 * (rho + Mat(rho.adjoint()));
  return {std::move(rho)};
}

State vector_state(const Vec& psi) {
  double n2 = psi.squaredNorm();
  require(n2 > 0.0, "vector_state: zero vector");
  Mat rho = (psi * psi.adjoint()) / n2;
  return {std::move(rho)};
}

Complex evaluate(const State& s, const Mat& a) {
  require(a.rows() == s.rho.rows() && a.cols() == s.rho.cols(),
          "evaluate: dimension mismatch");
  return (s.rho * a).trace();
}

}  // namespace ncg
