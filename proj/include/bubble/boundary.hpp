#pragma once

#include "bubble/geometry.hpp"

namespace bubble {

// Both components of the boundary operator at the equator nodes:
//   first:  g(nu, nu_plane)            (orthogonal contact)
//   second: dH/deta + H h_plane(nu,nu) (natural third-order condition)
struct BoundaryResidual {
  VectorXd contact;
  VectorXd natural;
  double sup() const {
    return std::max(contact.cwiseAbs().maxCoeff(),
                    natural.cwiseAbs().maxCoeff());
  }
};

BoundaryResidual boundary_residual(const HemisphereBasis& basis,
                                   const VectorXd& u_coeffs,
                                   const MetricEvaluator& metric);

// Discrete realization of the constrained biharmonic Neumann problem:
// mean-zero w with Delta^2 w = const (fixed by compatibility),
// dw/deta = alpha, d(Delta w)/deta = -beta - 2 alpha, by weighted least
// squares with equator collocation. The system matrix is state independent
// and factorized once per basis.
class BiharmonicSolver {
 public:
  explicit BiharmonicSolver(std::shared_ptr<const HemisphereBasis> basis);

  VectorXd solve(const VectorXd& alpha, const VectorXd& beta) const;
  double compatibility_constant(const VectorXd& alpha,
                                const VectorXd& beta) const;

  // residuals of the trace rows for the returned coefficients
  double trace_residual(const VectorXd& coeffs, const VectorXd& alpha,
                        const VectorXd& beta) const;

 private:
  std::shared_ptr<const HemisphereBasis> basis_;
  MatrixXd row_dn_, row_dnl_;  // equator trace rows
  MatrixXd pinv_;              // pseudo-inverse of the stacked weighted system
  VectorXd pde_rhs_col_;       // column multiplying the compatibility constant
  int n_eq_ = 0;
  double w_bc_ = 0.0;
};

// Newton solve for the correction w_tilde with B[w + w_tilde, g] = 0, using
// the flat-state linearization as the frozen Jacobian.
struct BoundaryCorrection {
  VectorXd coeffs;                     // the correction field
  std::vector<double> residual_history;
  int iterations = 0;
};

BoundaryCorrection boundary_correction(const HemisphereBasis& basis,
                                       const VectorXd& w_coeffs,
                                       const MetricEvaluator& metric,
                                       const BiharmonicSolver& solver,
                                       double tol = 1e-8, int max_iter = 100,
                                       const VectorXd* warm_start = nullptr);

}  // namespace bubble
