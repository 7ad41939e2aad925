// Finite-dimensional spectral triples: a matrix algebra, a Hermitian Dirac
// operator, and an optional grading. Provides the axiom checks, the commutator
// differential, the bimodule of one-forms, unitary equivalence checks, and the
// commutator-representation doubling used to compare state-space metrics.
#pragma once

#include "ncg/algebra.hpp"

#include <optional>
#include <string>

namespace ncg {

struct SpectralTriple {
  MatrixAlgebra algebra;
  Mat dirac;
  std::optional<Mat> grading;
};

struct CheckResult {
  std::string check;
  bool pass = false;
  double residual = 0.0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  double max_residual() const {
    double r = 0.0;
    for (const auto& c : checks) r = std::max(r, c.residual);
    return r;
  }
};

// Structural and axiom checks: dimensions, Hermitian Dirac, and for graded
// triples gamma*=gamma, gamma^2=1, [gamma,a]=0, gamma D + D gamma = 0, plus
// rejection of the degenerate grading +-identity when D is nonzero.
ValidationReport check_axioms(const SpectralTriple& t, double tol = 1e-10);

// Commutator differential [D, a].
Mat differential(const SpectralTriple& t, const Mat& a);

// Space of one-forms: span of a [D, b] over the algebra.
OperatorSubspace omega1(const SpectralTriple& t, double rel_tol = 1e-9);

// Checks that U implements an equivalence: U unitary, U D U* = D', the
// algebra is carried onto the algebra of t2, and gradings correspond.
ValidationReport unitary_equivalent(const SpectralTriple& t1, const SpectralTriple& t2,
                                    const Mat& u, double tol = 1e-10);

// Doubled triple acting on H (x) H*: the Dirac becomes the commutator action
// D (x) 1 - 1 (x) D^T, the algebra acts on the left factor, and the grading
// (when present) doubles to gamma (x) gamma^T so that it anticommutes with
// the doubled Dirac.
SpectralTriple wigner_double(const SpectralTriple& t);

// Lift of a state along the doubling: rho (x) conj(rho) evaluates any
// left-factor observable a (x) 1 exactly as rho evaluates a, and sends pure
// states to pure states.
State wigner_lift_state(const State& s);

}  // namespace ncg
