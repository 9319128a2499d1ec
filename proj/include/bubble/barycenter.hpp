#pragma once

#include "bubble/geometry.hpp"

namespace bubble {

// Metric-orthogonal projection onto the plane R^2 x {0}: the unique x with
// g_x(p - x, e_i) = 0, found by the defining contraction, plus its derivative
// in p by implicit differentiation.
struct PlaneProjection {
  Vector2d x = Vector2d::Zero();
  Eigen::Matrix<double, 2, 3> D = Eigen::Matrix<double, 2, 3>::Zero();
  int iterations = 0;
};

PlaneProjection project_plane(const MetricEvaluator& metric, const Vector3d& p,
                              bool with_derivative = true);

struct BarycenterResult {
  Vector2d x = Vector2d::Zero();
  double residual = 0.0;
  int iterations = 0;
};

// Intrinsic two-dimensional barycenter: fixed point of
// x -> x + pi_{R^2}[g, x + mean(log_x f)] - x under the induced measure.
BarycenterResult barycenter_intrinsic(const HemisphereBasis& basis,
                                      const GeometryData& geom,
                                      const MetricEvaluator& metric);

// Extrinsic route: nearest-point projection of the euclidean mean of the
// physical immersion; returns the chart coordinates at the metric's base
// point together with the projected surface point.
struct ExtrinsicBarycenter {
  Vector2d x = Vector2d::Zero();
  Vector3d point = Vector3d::Zero();
};

ExtrinsicBarycenter barycenter_extrinsic(const HemisphereBasis& basis,
                                         const GeometryData& geom,
                                         const PullbackMetric& metric);

// Scalar gradient fields of the barycenter components on the grid, assembled
// from the plane projection derivative, log maps, and the mean curvature.
struct BarycenterGradient {
  VectorXd grad1, grad2;  // grid values of grad C^1, grad C^2
};

BarycenterGradient barycenter_gradient(const HemisphereBasis& basis,
                                       const GeometryData& geom,
                                       const MetricEvaluator& metric,
                                       const Vector2d& x);

}  // namespace bubble
