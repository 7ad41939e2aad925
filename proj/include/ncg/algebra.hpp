// Finite-dimensional *-algebras of operators with explicit bases, plus states.
//
// Two storage forms:
//   - explicit: an orthonormal basis and its span, validated for *-closure;
//   - structured: algebras of the shape 1_L (x) M_f (x) 1_R, described by the
//     three factor dimensions alone. Membership, Hermitian parametrization,
//     and commutant tests are answered from the structure, so spaces where a
//     materialized basis would be quadratic in the space dimension (large
//     oscillator truncations, doubled triples) stay cheap.
// algebra_basis() materializes a structured basis on demand for the small
// cases that genuinely need element lists (one-form spans, gauge checks).
#pragma once

#include "ncg/matrix.hpp"
#include "ncg/subspace.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace ncg {

// The algebra 1_left (x) M_factor (x) 1_right acting on C^left (x) C^factor (x) C^right.
struct TensorFactorization {
  Eigen::Index left = 1;
  Eigen::Index factor = 0;
  Eigen::Index right = 1;
};

struct MatrixAlgebra {
  Eigen::Index hilbert_dim = 0;
  bool unital = true;
  std::vector<Mat> basis;  // explicit orthonormal basis; empty when structured
  OperatorSubspace span;   // span of the explicit basis; empty when structured
  std::optional<TensorFactorization> structured;

  Eigen::Index dim() const {
    if (structured) return structured->factor * structured->factor;
    return static_cast<Eigen::Index>(basis.size());
  }
};

// Validating constructor for explicit algebras: orthonormalizes the span of
// the generators and checks *-closure, product closure, and (if requested)
// that the identity belongs to the span.
MatrixAlgebra make_algebra(Eigen::Index hilbert_dim, const std::vector<Mat>& generators,
                           bool unital = true, double tol = 1e-10);

MatrixAlgebra full_matrix_algebra(Eigen::Index n);
// 1_left (x) M_factor (x) 1_right as a structured algebra.
MatrixAlgebra lifted_matrix_algebra(Eigen::Index left, Eigen::Index factor, Eigen::Index right);
MatrixAlgebra diagonal_algebra(Eigen::Index n);
MatrixAlgebra direct_sum(const std::vector<MatrixAlgebra>& parts);

// Orthonormal basis as an explicit list (materializes structured algebras;
// quadratic in the factor dimension, so intended for small spaces).
std::vector<Mat> algebra_basis(const MatrixAlgebra& a);

// 1_left (x) z (x) 1_right in the factorization's index layout.
Mat structured_lift(const TensorFactorization& t, const Mat& z);
// Sum of the diagonal middle-factor blocks: the f x f matrix pairing against
// lifts, Tr(m * structured_lift(z)) = Tr(structured_compress(m) * z).
Mat structured_compress(const TensorFactorization& t, const Mat& m);

// Membership of an operator in the algebra, with the projection residual.
ContainsResult algebra_contains(const MatrixAlgebra& a, const Mat& m, double tol = 1e-10);

// Relative residual of commutation [m, a] = 0 against the whole algebra:
// per-basis commutator norms for explicit algebras, distance to the
// commutant (M_L (x) 1 (x) M_R) for structured ones.
double commutation_residual(const MatrixAlgebra& a, const Mat& m);

// Real-linear orthonormal basis of the self-adjoint part. For algebras
// closed under entrywise conjugation the list is sector-ordered: entrywise
// real elements first, then purely imaginary ones, each bitwise pure, which
// downstream solvers exploit to switch to real arithmetic.
std::vector<Mat> hermitian_basis(const MatrixAlgebra& a);

// Streams the same list without materializing it (structured algebras
// generate elements one at a time; explicit algebras loop a computed list).
void for_each_hermitian_direction(const MatrixAlgebra& a, const std::function<void(const Mat&)>& f);

struct State {
  Mat rho;
};

State make_state(Mat rho, double tol = 1e-10);
State vector_state(const Vec& psi);
Complex evaluate(const State& phi, const Mat& a);

}  // namespace ncg
