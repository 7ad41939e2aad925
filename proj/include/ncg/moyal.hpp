// Truncated harmonic-oscillator spectral triples: finite Fock-space
// approximations of a noncommutative plane. The Hilbert space is
// C^2 (x) C^N (spinor block times oscillator levels), the Dirac operator is
// built from the truncated annihilation ladder, and the algebra is the full
// matrix algebra on the oscillator factor acting diagonally on the spinor
// blocks (kept in structured form, so nothing of size N^2 is materialized).
//
// Alongside the triple itself this module provides the closed-form metric
// data used to test the distance engine (level-state distances, coherent
// states, the line embedding of the level ladder), spectral dimension/volume
// estimates from the Dirac spectrum, and the rectangular-bimodule
// correspondences between truncations of different size.
#pragma once

#include "ncg/connections.hpp"
#include "ncg/triple.hpp"

#include <vector>

namespace ncg::moyal {

struct MoyalTruncation {
  Eigen::Index levels = 0;  // oscillator levels N
  double theta = 1.0;       // deformation scale
  Mat annihilation;         // N x N truncated ladder, entries (k-1, k) = sqrt(k)
  SpectralTriple triple;    // Dirac sqrt(2/theta) offdiag(a, a*), grading diag(I, -I)
};

// levels >= 2, theta > 0.
MoyalTruncation truncation(Eigen::Index levels, double theta);

// blkdiag(z, z): the algebra element z acting on both spinor blocks.
Mat spin_lift(const MoyalTruncation& m, const Mat& z);

// Vector state of the oscillator level |level> (spin-up block).
State eigenstate(const MoyalTruncation& m, Eigen::Index level);

// Closed-form distance between level states: sqrt(theta/2) sum_{k=min+1}^{max} 1/sqrt(k).
double eigenstate_distance_formula(Eigen::Index m, Eigen::Index n, double theta);

// Truncated coherent vector on the oscillator factor, renormalized; rejects
// (z, levels) whose dropped weight-squared tail reaches 1e-12, with a message
// advising a larger truncation.
Vec coherent_vector(Complex z, double theta, Eigen::Index levels);
State coherent_state(const MoyalTruncation& m, Complex z);

// Weyl translation exp((z a* - conj(z) a)/sqrt(2 theta)) on the oscillator
// factor; exactly unitary by construction (spectral exponential of the
// Hermitian generator).
Mat translation(const MoyalTruncation& m, Complex z);

// Phase rotation diag(exp(i tau n)); complex tau is allowed (imaginary tau
// gives the damping used by radial_element).
Mat rotation(const MoyalTruncation& m, Complex tau);

// Hermitian element a = a* R + R a with R = rotation(i/order), together with
// its normalization b = a / (1 + (e^{1/order} - 1) order) whose Dirac
// commutator norm approaches 1 from below as order grows. Evaluating states
// on b yields certified lower bounds for radial displacements.
struct RadialElement {
  Mat raw;               // N x N Hermitian
  Mat normalized;        // raw / (1 + (e^{1/order} - 1) order)
  double commutator_norm;  // ||[D, spin_lift(normalized)]||
};
RadialElement radial_element(const MoyalTruncation& m, Eigen::Index order);

// Level states embedded on a half-line by their exact successive distances
// x_m = sum_{k<=m} sqrt(theta/2)/sqrt(k), and the Hausdorff distance between
// that point set and the interval [0, x_points].
struct LineEmbedding {
  std::vector<double> positions;  // points + 1 values, positions[0] = 0
  double hausdorff_distance;      // = (1/2) sqrt(theta/2), from the first gap
  double theta;
};
LineEmbedding gh_experiment(double theta, Eigen::Index points);

// Spectral dimension and volume read off the Dirac spectrum: the dimension is
// twice the log-log slope of the eigenvalue counting function of D^2 over the
// interior of the spectrum (kernel removed), the volume is the residue at
// z = 2 of the zeta-type trace 2 (theta/2)^{z/2} sum lambda^{-z/2} completed
// by an Euler-Maclaurin tail, computed by a small contour integral. Error
// fields are heuristic enclosures (fit dispersion, tail-order difference,
// imaginary leakage) that widen at small truncations rather than fail.
struct SpectralEstimates {
  double dimension;
  double dimension_error;
  double volume;
  double volume_error;
};
SpectralEstimates zeta_estimates(double theta, Eigen::Index levels);

// Rectangular-bimodule correspondences between a small truncation (same
// theta, levels small_levels) and m: forward realizes the small triple inside
// the large one (N x n matrices with connection atoms built from the ladder
// mismatch), reverse goes back (n x N matrices). Both intertwine exactly, so
// their composite is the identity correspondence of the small triple up to
// the multiplication-map similarity. Requires 2 <= small_levels <= levels/2.
struct CorrespondencePair {
  MoyalTruncation small;
  Correspondence forward;  // small -> m
  Correspondence reverse;  // m -> small
};
CorrespondencePair correspondence_pair(Eigen::Index small_levels, const MoyalTruncation& m);

// Row-by-column multiplication map witnessing that the round trip
// compose(forward, reverse) is similar to the identity correspondence of the
// small triple: the composite coordinate (xi = e_{ij}, eta = e_{kl}) maps to
// the matrix product e_{ij} e_{kl} = delta_{jk} e_{il} expressed in the
// identity module's orthonormal coordinates.
Mat round_trip_multiplication_map(const CorrespondencePair& pair);

}  // namespace ncg::moyal
