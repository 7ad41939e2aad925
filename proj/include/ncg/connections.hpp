// Bimodules with connection over a spectral triple, the fluctuated triples
// they induce, and correspondences (bimodule + connection + intertwiner)
// between triples, with composition and similarity testing.
//
// Two module shapes cover everything here:
//   - ProjectiveModule: E = p A^k for a projection p on C^k (x) H commuting
//     with id_k (x) A. E (x)_A H is realized concretely as range(p), so the
//     fluctuated triple lives on that compression and no quotient is needed.
//   - RectBimodule: E = m-by-n complex matrices as an M_m-M_n bimodule (the
//     base algebra is M_n, carried in structured form). E (x)_A H is realized
//     by matrix action on the middle tensor factor of H.
//
// A connection is the Grassmannian part (p compose d, entrywise on module
// coordinates) plus correction terms. Each term contributes
// kron(left, omega(D) * right) to the represented correction, where omega is
// a one-form kept in decomposed form omega = sum_mu a_mu [X, b_mu]. Keeping
// the decomposition (rather than an opaque matrix) is what makes composition
// exact: substituting a pulled-back realized Dirac for X is precisely the
// sigma-map that transports one-forms through a correspondence, so composed
// corrections never need to be re-derived numerically.
//
// A correspondence stores its realized operator twice: `op` is the matrix at
// the true source Dirac, and `op_with` rebuilds it with any substitute X.
// Composition chains the closures: op''(X) = op2(U1 op1(X) U1*). Elementary
// realized operators are assembled by least squares over module-coordinate
// spanning columns; the assembly residual is kept as a well-definedness
// witness and stays at rounding level exactly when the connection satisfies
// the Leibniz rule.
#pragma once

#include "ncg/triple.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace ncg {

// One-form in decomposed form: omega(X) = sum_mu a_mu [T(X), b_mu] where the
// optional transform T substitutes a pulled-back operator for X (identity by
// default). At X = D this is an honest element of Omega^1_D(A) whenever all
// a_mu, b_mu lie in the algebra.
struct OneForm {
  std::vector<std::pair<Mat, Mat>> terms;
  std::function<Mat(const Mat&)> transform;

  Mat operator()(const Mat& x) const;
};

// d b = [X, b].
OneForm differential_form(const Mat& b);

// E = p A^k.
struct ProjectiveModule {
  Eigen::Index k = 1;
  Mat p;               // projection on C^k (x) H commuting with id_k (x) A
  MatrixAlgebra over;  // base algebra
};

// Validates p: Hermitian idempotent commuting with id_k (x) A.
ProjectiveModule make_projective_module(Eigen::Index k, Mat p, MatrixAlgebra over,
                                        double tol = 1e-10);
ProjectiveModule free_module(Eigen::Index k, MatrixAlgebra over);

// E = m-by-n matrices over the base algebra M_n (structured middle factor).
struct RectBimodule {
  Eigen::Index m = 1;
  Eigen::Index n = 1;
};

// One correction component. Shapes: `left` acts on module coordinates (k-by-k
// for projective, m-by-m for rectangular); `right` is represented on H for
// projective modules (use structured_lift for structured algebras) and is the
// abstract n-by-n right factor for rectangular ones. The represented
// correction is sum_w kron(left_w, omega_w(D) * right_w) for projective
// modules; for rectangular ones the term maps eta to (left eta right) (x)
// omega.
struct ConnectionTerm {
  Mat left;
  Mat right;
  OneForm omega;
};

struct Connection {
  std::variant<ProjectiveModule, RectBimodule> module;
  SpectralTriple base;
  std::vector<ConnectionTerm> terms;
};

// Compressed-trivial connection nabla = p compose d (no correction terms).
Connection grassmannian_connection(ProjectiveModule m, SpectralTriple base);

// Represented global correction on C^k (x) H (projective modules).
Mat connection_alpha(const Connection& c);

// Recovers a connection from an opaque global correction by decomposing each
// k-by-k block over the one-form dictionary {g_i [D, g_j]}; throws when a
// block is not a one-form within tol. Small algebras only (the dictionary is
// dense in dim(A)^2).
Connection connection_from_alpha(ProjectiveModule m, SpectralTriple base, const Mat& alpha,
                                 double tol = 1e-9);

// Decomposes omega over {g_i [D, g_j]} by least squares; nullopt when the
// residual exceeds tol (i.e. omega is not a one-form of t).
std::optional<OneForm> decompose_one_form(const SpectralTriple& t, const Mat& omega,
                                          double tol = 1e-9);

// Leibniz rule nabla(eta a) = (nabla eta) a + eta (x) d a on deterministic
// pseudo-random module/algebra elements, compared inside the faithful
// realization of E (x) Omega^1 on maps H -> E (x)_A H, plus membership of
// every term coefficient in the algebra.
ValidationReport check_leibniz(const Connection& c, int trials = 12, unsigned seed = 7);

// Hermitian compatibility (eta, nabla xi) - (nabla eta, xi) = d (eta, xi)
// with the A-valued inner product; informational for corrected connections.
ValidationReport check_compatibility(const Connection& c, int trials = 12, unsigned seed = 11);

// Fluctuated triple on the realized space range(p): algebra p (M_k (x) A) p,
// Dirac p (id (x) D) p + alpha, transported grading. Projective modules only;
// throws when alpha fails to be Hermitian on range(p) or the projection does
// not commute with the grading.
SpectralTriple fluctuate(const Connection& c);

struct FluctuationComposite {
  Connection connection;      // composite connection over c1's base
  SpectralTriple triple;      // fluctuate(connection)
  double two_step_residual;   // Dirac mismatch against fluctuating in two steps
};

// Composite of (E1, nabla1) over T with (E2, nabla2) over fluctuate(c1):
// module p'' = (id (x) B1) p2 (id (x) B1)* on C^{k2 k1} (x) H, second-leg
// corrections pulled back through the sigma-substitution.
FluctuationComposite compose_fluctuations(const Connection& c1, const Connection& c2);

// Coordinate-level bimodule realization backing a correspondence. Module
// elements are coordinate vectors of dimension coord_dim = outer * inner; the
// right action of the l-th algebra_basis element of the source algebra acts
// on the inner factor as right_act[l]. `realize` maps coordinate (x) source-H
// vectors onto the realized space of E (x)_A H.
struct ModuleRep {
  Eigen::Index coord_dim = 0;
  Eigen::Index outer = 1;
  std::vector<Mat> right_act;  // inner-by-inner
  Mat realize;                 // realized_dim x (coord_dim * source_dim)
};

struct Correspondence {
  SpectralTriple source;
  SpectralTriple target;
  ModuleRep module;
  Mat u;                          // realized space -> target Hilbert space
  Mat op;                         // realized 1 (x)_nabla D at the true source Dirac
  double assembly_residual = 0.0; // least-squares well-definedness witness
  // Rebuilds the realized operator with X substituted for the source Dirac
  // (the sigma-substitution); the double* receives the assembly residual.
  std::function<Mat(const Mat&, double*)> op_with;
};

// E = A with the multiplication map; realized operator is D itself.
Correspondence identity_correspondence(const SpectralTriple& t);

// Identity module transported along a unitary equivalence u: H_s -> H_t.
Correspondence unitary_correspondence(const SpectralTriple& s, const SpectralTriple& t,
                                      const Mat& u, double tol = 1e-9);

// From base to fluctuate(c) (projective connections).
Correspondence fluctuation_correspondence(const Connection& c);

// Identity module with Dirac D + omega(D); omega(D) must be Hermitian.
Correspondence inner_fluctuation_correspondence(const SpectralTriple& t, const OneForm& omega);

// Coordinate-level correction component for custom realizations: the module
// element with coordinates c acquires the term (coord_map c) (x) omega.
struct CoordTerm {
  Mat coord_map;
  OneForm omega;
};

struct AssembledOp {
  Mat op;
  double residual;  // relative least-squares inconsistency (well-definedness)
};

// Realized operator of a connection given coordinate-level data: solves
// op * realize = realize (id (x) X) + sum_w realize (coord_map_w (x)
// omega_w(X)) by least squares over the spanning columns. The residual
// vanishes exactly when the data descends to the realized quotient.
AssembledOp assemble_realized_op(const Mat& realize, Eigen::Index coord_dim,
                                 Eigen::Index source_dim, const std::vector<CoordTerm>& terms,
                                 const Mat& x);

// ||u (1 (x)_nabla D) - D_target u|| relative to the Dirac scale.
double intertwining_residual(const Correspondence& c);

Correspondence compose_correspondences(const Correspondence& c1, const Correspondence& c2);

// The multiplication-map similarity witnessing that composing with the
// identity correspondence changes nothing: columns of the returned matrix
// send the composite coordinate (algebra element g_m1, module coordinate m2)
// of compose(identity_correspondence(c.source), c) to the coordinates of
// e_m2 right-acted by g_m1 in c's module. Requires c's right-action table.
Mat identity_compose_similarity(const Correspondence& c);

// V: coordinate-level module map from c1's module onto c2's (full
// coord2 x coord1 matrix). Checks that its realization V-hat exists
// (consistency), is unitary, intertwines u and the realized operators, and
// that V itself intertwines the right actions.
ValidationReport similarity_check(const Correspondence& c1, const Correspondence& c2,
                                  const Mat& v, double tol = 1e-9);

}  // namespace ncg
