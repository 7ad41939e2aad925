// Certified spectral distance between states of a finite spectral
// triple:
//
//   d(phi, psi) = sup { phi(a) - psi(a) : a = a*, ||[D, a]|| <= 1 }.
//
// The Hermitian directions of the algebra turn the sup into a linear program
// over a spectral-norm ball. Directions commuting with D span the kernel of
// the constraint map: if the state difference sees one of them beyond the
// solve tolerance, the distance is infinite and that direction is
// returned as a witness; otherwise the objective is projected onto the
// kernel's orthocomplement (that projection is the meaning of "distance" the
// engine certifies). The remaining problem is reparametrized through an SVD
// into orthonormal constraint directions and handed to the certified
// norm-ball solver, so every answer comes back as an enclosure
// [lower, upper]: `lower` is re-verified by evaluating the states on an
// explicitly feasibility-checked optimizer, `upper` is a dual certificate.
//
// Arithmetic reductions (both exact; see the matching design notes in the
// implementation):
//   - real reduction: when every constraint direction is entrywise real or
//     entrywise purely imaginary and the objective does not see the imaginary
//     sector, the problem restricts losslessly to the real sector;
//   - even reduction: for graded triples, algebra elements are block-diagonal
//     and D off-diagonal in the grading eigenbasis, so the constraint
//     shrinks to one off-diagonal block of half the size.
#pragma once

#include "ncg/sdp.hpp"
#include "ncg/triple.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace ncg {

enum class DistanceStatus { certified, infinite, budget_exhausted };

struct DistanceOptions {
  double tol = 1e-7;         // absolute/relative gap target for the enclosure
  int max_iterations = 500;  // interior-point iteration budget per pair
};

struct DistanceResult {
  double lower = 0.0;
  double upper = 0.0;
  DistanceStatus status = DistanceStatus::budget_exhausted;
  Mat optimizer;             // feasible Hermitian element attaining `lower`
  int iterations = 0;
  std::optional<Mat> witness;  // D-commuting separating direction when infinite
};

// Precomputes the constraint geometry of a triple once (direction
// enumeration, commutator SVD, kernel) and answers distance queries for many
// state pairs against it.
class DistanceEngine {
 public:
  explicit DistanceEngine(SpectralTriple t, DistanceOptions opts = {});

  // Half-size constraint for graded triples. Requires the grading to commute
  // with the algebra and anticommute with D (validated; invalid_argument).
  static DistanceEngine even_reduced(SpectralTriple t, DistanceOptions opts = {});

  // Constraint restricted to the entrywise-diagonal Hermitian directions;
  // yields heuristic lower bounds only (see diagonal_lower_bound).
  static DistanceEngine diagonal_restricted(SpectralTriple t, DistanceOptions opts = {});

  DistanceResult distance(const State& phi, const State& psi) const;

  Eigen::Index direction_count() const { return m_; }
  bool even_mode() const { return even_; }
  const SpectralTriple& triple() const { return triple_; }

 private:
  enum class Flavor { full, even, diagonal };
  DistanceEngine(SpectralTriple t, DistanceOptions opts, Flavor flavor);

  struct Prep;  // SVD reparametrization of one arithmetic path

  void enumerate_directions();
  const Prep& get_prep(bool complex_mode) const;
  RVec objective(const Mat& delta) const;
  Mat assemble(const RVec& coeffs) const;
  double constraint_norm(const Mat& a) const;

  SpectralTriple triple_;
  DistanceOptions opts_;
  Flavor flavor_ = Flavor::full;
  bool even_ = false;
  bool real_capable_ = false;
  Eigen::Index m_ = 0;                 // stored directions
  std::vector<Mat> ks_;                // commutator per direction (even: one block)
  std::vector<int> flag_;              // 0 entrywise real, 1 entrywise imaginary, 2 mixed
  std::vector<Eigen::Index> canon_;    // canonical enumeration index per direction
  std::vector<Mat> hb_;                // materialized directions (explicit algebras only)
  Mat bp_, bm_;                        // grading eigenbasis columns (even mode)
  Mat dpm_;                            // off-diagonal Dirac block (even mode)
  mutable std::shared_ptr<const Prep> preps_[2];
};

DistanceResult spectral_distance(const SpectralTriple& t, const State& phi, const State& psi,
                                 const DistanceOptions& opts = {});
DistanceResult spectral_distance_even(const SpectralTriple& t, const State& phi, const State& psi,
                                      const DistanceOptions& opts = {});

// All pairwise distances (upper bounds; +infinity where separated by a
// commuting direction). Symmetric with zero diagonal.
Eigen::MatrixXd distance_matrix(const SpectralTriple& t, const std::vector<State>& states,
                                const DistanceOptions& opts = {},
                                std::vector<DistanceResult>* details = nullptr);

struct DiagonalBoundResult {
  double lower = 0.0;  // +infinity when a diagonal commuting direction separates
  Mat optimizer;
  int iterations = 0;
};

// Fast heuristic: the sup restricted to entrywise-diagonal directions. Always
// a valid lower bound for the true distance, with no upper certificate.
DiagonalBoundResult diagonal_lower_bound(const SpectralTriple& t, const State& phi,
                                         const State& psi, const DistanceOptions& opts = {});

}  // namespace ncg
