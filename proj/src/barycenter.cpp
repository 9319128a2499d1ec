#include "bubble/barycenter.hpp"

#include <cmath>

namespace bubble {

PlaneProjection project_plane(const MetricEvaluator& metric, const Vector3d& p,
                              bool with_derivative) {
  PlaneProjection out;
  Vector2d q(p.x(), p.y());
  if (!metric.is_flat()) {
    for (int it = 0; it < 100; ++it) {
      const Vector3d qh(q(0), q(1), 0.0);
      const Matrix3d g = metric.metric(qh);
      const Vector3d d = p - qh;
      Vector2d next;
      for (int i = 0; i < 2; ++i) {
        // q_i = p_i - (delta - g)(p - qh, e_i)
        next(i) = p(i) - (d(i) - g.col(i).dot(d));
      }
      const double step = (next - q).norm();
      q = next;
      out.iterations = it + 1;
      if (step < 1e-14) break;
      if (it == 99)
        throw nonconvergence_error("project_plane: contraction stalled");
    }
  }
  out.x = q;

  if (with_derivative) {
    const Vector3d qh(q(0), q(1), 0.0);
    const Matrix3d g = metric.metric(qh);
    const auto dg = metric.dmetric(qh);
    const Vector3d d = p - qh;
    Matrix2d A;
    Eigen::Matrix<double, 2, 3> B;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j)
        A(i, j) = dg[j].col(i).dot(d) - g(j, i);
      for (int al = 0; al < 3; ++al) B(i, al) = g(al, i);
    }
    out.D = -A.inverse() * B;
  }
  return out;
}

BarycenterResult barycenter_intrinsic(const HemisphereBasis& basis,
                                      const GeometryData& geom,
                                      const MetricEvaluator& metric) {
  const VectorXd w = basis.grid().weights.cwiseProduct(geom.jac);
  const double mu = w.sum();
  BarycenterResult out;
  Vector2d x = Vector2d::Zero();
  for (int it = 0; it < 200; ++it) {
    const Vector3d xh(x(0), x(1), 0.0);
    Vector3d I = Vector3d::Zero();
    for (int i = 0; i < geom.n; ++i)
      I += w(i) * metric.log_map(xh, geom.f[i]);
    I /= mu;
    const Vector2d X = project_plane(metric, xh + I, false).x - x;
    x += X;
    out.iterations = it + 1;
    out.residual = X.norm();
    if (out.residual < 1e-13) break;
  }
  if (out.residual >= 1e-10)
    throw nonconvergence_error("barycenter_intrinsic: fixed point stalled");
  out.x = x;
  return out;
}

ExtrinsicBarycenter barycenter_extrinsic(const HemisphereBasis& basis,
                                         const GeometryData& geom,
                                         const PullbackMetric& metric) {
  const VectorXd w = basis.grid().weights.cwiseProduct(geom.jac);
  const double mu = w.sum();
  ExtrinsicBarycenter out;
  if (metric.lambda() == 0.0) {
    // flat limit: euclidean mean, orthogonal projection
    Vector3d mean = Vector3d::Zero();
    for (int i = 0; i < geom.n; ++i) mean += w(i) * geom.f[i];
    mean /= mu;
    out.x = Vector2d(mean.x(), mean.y());
    out.point = metric.base();
    return out;
  }
  Vector3d mean = Vector3d::Zero();
  for (int i = 0; i < geom.n; ++i) mean += w(i) * metric.chart_map(geom.f[i]);
  mean /= mu;
  const Vector3d q = metric.surface().nearest_point(mean);
  const Vector3d d = q - metric.base();
  out.point = q;
  out.x = Vector2d(d.dot(metric.frame().b1), d.dot(metric.frame().b2)) /
          metric.lambda();
  return out;
}

BarycenterGradient barycenter_gradient(const HemisphereBasis& basis,
                                       const GeometryData& geom,
                                       const MetricEvaluator& metric,
                                       const Vector2d& x) {
  const int n = geom.n;
  const VectorXd w = basis.grid().weights.cwiseProduct(geom.jac);
  const double mu = w.sum();
  const Vector3d xh(x(0), x(1), 0.0);

  std::vector<Vector3d> logs(n);
  Vector3d I = Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    logs[i] = metric.log_map(xh, geom.f[i]);
    I += w(i) * logs[i];
  }
  I /= mu;

  // Mean base-point derivative of the log by central differences.
  const double h = 1e-5;
  Eigen::Matrix<double, 3, 2> M = Eigen::Matrix<double, 3, 2>::Zero();
  for (int a = 0; a < 2; ++a) {
    Vector3d xp = xh, xm = xh;
    xp(a) += h;
    xm(a) -= h;
    Vector3d acc = Vector3d::Zero();
    for (int i = 0; i < n; ++i)
      acc += w(i) * (metric.log_map(xp, geom.f[i]) -
                     metric.log_map(xm, geom.f[i]));
    M.col(a) = acc / (mu * 2.0 * h);
  }

  const PlaneProjection proj = project_plane(metric, xh + I, true);
  Eigen::Matrix<double, 3, 2> E = Eigen::Matrix<double, 3, 2>::Zero();
  E(0, 0) = E(1, 1) = 1.0;
  const Matrix2d A = proj.D * (M + E) - Matrix2d::Identity();
  const Matrix2d T = A.inverse();

  BarycenterGradient out;
  out.grad1.resize(n);
  out.grad2.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vector3d v = I * geom.H(i) +
                       metric.dlog_map(xh, geom.f[i], geom.nu[i]) -
                       logs[i] * geom.H(i);
    const Vector2d gi = -(T * (proj.D * v)) / mu;
    out.grad1(i) = gi(0);
    out.grad2(i) = gi(1);
  }
  return out;
}

}  // namespace bubble
