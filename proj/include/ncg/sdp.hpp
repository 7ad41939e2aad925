// Certified solver for the norm-ball linear program
//
//     maximize  c . y   subject to  || sum_l y_l K_l ||_op <= 1,
//
// the optimization underlying state-space distance computations. The
// constraint is the linear matrix inequality [[I, A(y)*], [A(y), I]] >= 0,
// solved by a primal-dual interior-point method with Nesterov-Todd scaling.
//
// The solver never reports a bare optimum: every result carries a feasible
// primal point (exactly rescaled so the norm constraint holds) and a dual
// certificate matrix Z >= 0 with Tr(F_l Z) = -c_l, whose trace bounds the
// optimum from above by weak duality. Both bounds remain valid on early
// termination, so an exhausted iteration budget still yields an enclosure.
//
// The K_l must be orthonormal for the real part of the Hilbert-Schmidt
// inner product; the caller is expected to have reparametrized accordingly.
// Orthonormality makes the certificate repair exact: the block matrices
// F_l = [[0, K_l*], [K_l, 0]] then satisfy Tr(F_k F_l) = 2 delta_kl, so any
// dual-equality residual can be eliminated by a closed-form correction, and
// the traceless F_l make the PSD repair shift delta*I equality-preserving.
#pragma once

#include "ncg/matrix.hpp"

#include <vector>

namespace ncg::sdp {

enum class Status { certified, budget_exhausted };

struct Options {
  double tol = 1e-7;        // relative duality gap target
  int max_iterations = 500;
};

template <typename MatT>
struct Result {
  Eigen::VectorXd y;        // feasible point (already rescaled into the ball)
  double lower = 0.0;       // c . y of the feasible point
  double upper = 0.0;       // trace of the dual certificate (plus safety slack)
  Status status = Status::budget_exhausted;
  int iterations = 0;
  MatT dual;                // repaired dual certificate Z
  double dual_residual = 0.0;  // max |c_l + Tr(F_l Z)| after repair
};

template <typename MatT>
Result<MatT> maximize_in_norm_ball(const std::vector<MatT>& K, const Eigen::VectorXd& c,
                                   const Options& opt = {});

}  // namespace ncg::sdp
