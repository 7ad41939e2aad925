// The category of Dirac operators over a fixed (algebra, Hilbert space) pair:
// morphisms are Hermitian one-forms realizing one operator as an inner
// fluctuation of another. Hom-sets are empty or singletons, so the category
// reduces to existence tests plus one-form bookkeeping.
#pragma once

#include "ncg/triple.hpp"

namespace ncg {

struct GaugeMorphism {
  Mat source;  // D
  Mat target;  // D' = D + omega
  Mat omega;   // Hermitian element of the one-form space at the source
};

struct GaugeCategory {
  MatrixAlgebra algebra;
  double tol = 1e-9;

  // Unique candidate omega = D' - D; present iff it lies in the one-form
  // space of the source.
  std::optional<GaugeMorphism> mor(const Mat& d, const Mat& dprime) const;

  // Diagrammatic composition: f: D -> D', g: D' -> D''.
  GaugeMorphism compose(const GaugeMorphism& f, const GaugeMorphism& g) const;

  // Isomorphism iff the one-form spaces at both endpoints coincide.
  bool is_isomorphism(const GaugeMorphism& f) const;

  // Initial object test: every admissible Hermitian perturbation must be an
  // inner fluctuation. Admissible means all Hermitian matrices, or all
  // Hermitian matrices anticommuting with the grading when one is supplied.
  bool is_initial(const Mat& d, const std::optional<Mat>& grading = std::nullopt) const;

  // Witness pair (identity, 0) demonstrating the absence of a final object;
  // both defining emptiness facts are re-verified through mor().
  std::pair<Mat, Mat> no_final_object_witness() const;
};

// Hermitian matrices anticommuting with gamma form the admissible class of
// graded perturbations; exposed for tests.
std::vector<Mat> anticommuting_hermitian_basis(const Mat& gamma, double tol = 1e-10);

std::vector<Mat> hermitian_matrix_basis(Eigen::Index n);

}  // namespace ncg
