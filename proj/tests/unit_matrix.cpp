#include "doctest.h"

#include "ncg/matrix.hpp"

#include <random>

using namespace ncg;

namespace {

Mat random_complex(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

}  // namespace

TEST_CASE("operator norm matches the largest singular value") {
  // Hand oracle: [[0,2],[0,0]] has singular values {2, 0}.
  Mat a = Mat::Zero(2, 2);
  a(0, 1) = 2.0;
  CHECK(operator_norm(a) == doctest::Approx(2.0).epsilon(1e-12));

  // Unitary invariance of the norm on a random matrix.
  const Mat b = random_complex(4, 4, 11);
  Mat q = random_complex(4, 4, 12);
  Eigen::HouseholderQR<Mat> qr(q);
  q = qr.householderQ();
  CHECK(operator_norm(q * b) == doctest::Approx(operator_norm(b)).epsilon(1e-10));
}

TEST_CASE("hermitian eigendecomposition reconstructs and sorts") {
  Mat a(2, 2);
  a << Complex(1, 0), Complex(1, 0), Complex(1, 0), Complex(1, 0);
  const EigResult e = herm_eig(a);
  CHECK(e.values(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(e.values(1) == doctest::Approx(2.0).epsilon(1e-12));
  const Mat rec = e.vectors * e.values.asDiagonal().toDenseMatrix().cast<Complex>() *
                  e.vectors.adjoint();
  CHECK((rec - a).norm() <= 1e-12);
}

TEST_CASE("hermitian eigendecomposition rejects visibly non-Hermitian input") {
  Mat a = random_complex(3, 3, 5);  // generic: far from Hermitian
  CHECK_THROWS_AS(herm_eig(a), std::invalid_argument);
}

TEST_CASE("row-major vec matches the Kronecker sandwich identity") {
  // vec(A X B) = (A (x) B^T) vec(X) in the row-major convention.
  const Mat a = random_complex(3, 3, 21);
  const Mat x = random_complex(3, 4, 22);
  const Mat b = random_complex(4, 2, 23);
  const Vec left = vec(a * x * b);
  const Vec right = kron(a, b.transpose()) * vec(x);
  CHECK((left - right).norm() <= 1e-12 * std::max(1.0, right.norm()));

  const Mat back = unvec(vec(x), x.rows(), x.cols());
  CHECK((back - x).norm() == 0.0);
}

TEST_CASE("Hilbert-Schmidt inner product and hermiticity defect") {
  const Mat a = random_complex(3, 3, 31);
  CHECK(hs_inner(a, a).real() == doctest::Approx(hs_norm(a) * hs_norm(a)).epsilon(1e-12));
  const Mat h = (a + a.adjoint()) / 2.0;
  CHECK(hermiticity_defect(h) <= 1e-14);
  CHECK(is_hermitian(h));
  CHECK(!is_hermitian(a));
}

TEST_CASE("commutators and real-entry detection") {
  const Mat a = random_complex(3, 3, 41);
  const Mat b = random_complex(3, 3, 42);
  CHECK((comm(a, b) + comm(b, a)).norm() <= 1e-14);
  CHECK((anticomm(a, b) - anticomm(b, a)).norm() <= 1e-14);

  Mat r = Mat::Zero(2, 2);
  r(0, 1) = 3.0;
  CHECK(is_exactly_real(r));
  r(1, 0) = Complex(0.0, 1e-3);
  CHECK(!is_exactly_real(r));
}
