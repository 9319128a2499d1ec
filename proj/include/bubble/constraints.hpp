#pragma once

#include "bubble/barycenter.hpp"

namespace bubble {

// Normalized gradients of the constrained quantities (area and the two
// barycenter components), their Gram matrix under the induced L2 product,
// and the projections they generate.
struct ConstraintBasis {
  VectorXd psi[3];     // normalized gradient fields on the grid
  double norm[3] = {0, 0, 0};  // L2(dmu) norms of gradA, gradC^1, gradC^2
  Matrix3d gram = Matrix3d::Identity();
  Matrix3d gram_inv = Matrix3d::Identity();
  VectorXd l2w;        // quadrature weights times the area density
  Vector2d barycenter = Vector2d::Zero();
  double condition = 1.0;
};

ConstraintBasis constraint_basis(const HemisphereBasis& basis,
                                 const GeometryData& geom,
                                 const MetricEvaluator& metric,
                                 const Vector2d& barycenter);

// Barycenter computed internally (extrinsic for pullback metrics, intrinsic
// fixed point otherwise).
ConstraintBasis constraint_basis(const HemisphereBasis& basis,
                                 const GeometryData& geom,
                                 const MetricEvaluator& metric);

VectorXd project_K(const ConstraintBasis& cb, const VectorXd& X);
inline VectorXd project_K_perp(const ConstraintBasis& cb, const VectorXd& X) {
  return X - project_K(cb, X);
}

// W - (<W,H>/<H,H>) H under the induced measure weights.
VectorXd project_H_perp(const VectorXd& H, const VectorXd& W,
                        const VectorXd& l2w);

// Constraint-space correction of the normal velocity induced by the moving
// chart: tau = -sum A^{mu nu} (D2C^mu gdot / |gradC^mu|) psi_nu, with the
// metric derivatives of area and barycenter taken by central differences
// along the shifted-metric pair.
VectorXd tau_correction(const HemisphereBasis& basis, const VectorXd& u_coeffs,
                        const ConstraintBasis& cb, const MetricPath& path);

}  // namespace bubble
