#include "bubble/metric.hpp"

#include <cmath>

namespace bubble {

std::array<Matrix3d, 3> MetricEvaluator::christoffels(const Vector3d& x) const {
  std::array<Matrix3d, 3> out = {Matrix3d::Zero(), Matrix3d::Zero(),
                                 Matrix3d::Zero()};
  if (is_flat()) return out;
  const Matrix3d g = metric(x);
  const Matrix3d ginv = g.inverse();
  const std::array<Matrix3d, 3> dg = dmetric(x);
  for (int al = 0; al < 3; ++al)
    for (int be = 0; be < 3; ++be)
      for (int ga = 0; ga < 3; ++ga) {
        double acc = 0.0;
        for (int mu = 0; mu < 3; ++mu)
          acc += ginv(al, mu) *
                 (dg[be](mu, ga) + dg[ga](be, mu) - dg[mu](be, ga));
        out[al](be, ga) = 0.5 * acc;
      }
  return out;
}

PullbackMetric::PullbackMetric(std::shared_ptr<const HostSurface> surface,
                               Vector3d p, Frame frame, double lambda)
    : surface_(std::move(surface)),
      p_(std::move(p)),
      frame_(std::move(frame)),
      lambda_(lambda) {
  if (lambda < 0) throw std::invalid_argument("pullback metric: lambda < 0");
}

Matrix3d PullbackMetric::metric(const Vector3d& x) const {
  Matrix3d g = Matrix3d::Identity();
  if (lambda_ == 0.0) return g;
  const Vector2d lx(lambda_ * x(0), lambda_ * x(1));
  ChartJet jet = surface_->chart_height(frame_, p_, lx, /*jet_order=*/2);
  const double d1 = jet.dphi(0), d2 = jet.dphi(1);
  g(0, 0) += d1 * d1;
  g(0, 1) += d1 * d2;
  g(1, 0) += d1 * d2;
  g(1, 1) += d2 * d2;
  g(0, 2) = g(2, 0) = d1;
  g(1, 2) = g(2, 1) = d2;
  return g;
}

std::array<Matrix3d, 3> PullbackMetric::dmetric(const Vector3d& x) const {
  std::array<Matrix3d, 3> out = {Matrix3d::Zero(), Matrix3d::Zero(),
                                 Matrix3d::Zero()};
  if (lambda_ == 0.0) return out;
  const Vector2d lx(lambda_ * x(0), lambda_ * x(1));
  ChartJet jet = surface_->chart_height(frame_, p_, lx, /*jet_order=*/2);
  const double d1 = jet.dphi(0), d2 = jet.dphi(1);
  for (int a = 0; a < 2; ++a) {
    // d/dx_a [dphi_i(lambda x)] = lambda * d2phi_{i,a}
    const double e1 = lambda_ * jet.d2phi(0, a);
    const double e2 = lambda_ * jet.d2phi(1, a);
    Matrix3d& m = out[a];
    m(0, 0) = 2.0 * d1 * e1;
    m(0, 1) = m(1, 0) = d1 * e2 + d2 * e1;
    m(1, 1) = 2.0 * d2 * e2;
    m(0, 2) = m(2, 0) = e1;
    m(1, 2) = m(2, 1) = e2;
  }
  return out;
}

Vector3d PullbackMetric::chart_map(const Vector3d& x) const {
  if (lambda_ == 0.0)
    throw std::invalid_argument("chart_map undefined at lambda = 0");
  const Vector2d lx(lambda_ * x(0), lambda_ * x(1));
  const double phi = surface_->chart_height_only(frame_, p_, lx);
  return p_ + lx(0) * frame_.b1 + lx(1) * frame_.b2 +
         (phi + lambda_ * x(2)) * frame_.normal;
}

Matrix3d PullbackMetric::chart_differential(const Vector3d& x) const {
  const Vector2d lx(lambda_ * x(0), lambda_ * x(1));
  ChartJet jet = surface_->chart_height(frame_, p_, lx, /*jet_order=*/2);
  Matrix3d DF;
  DF.col(0) = lambda_ * (frame_.b1 + jet.dphi(0) * frame_.normal);
  DF.col(1) = lambda_ * (frame_.b2 + jet.dphi(1) * frame_.normal);
  DF.col(2) = lambda_ * frame_.normal;
  return DF;
}

Vector3d PullbackMetric::chart_inverse(const Vector3d& y,
                                       const Vector3d& guess) const {
  Vector3d x = guess;
  for (int it = 0; it < 30; ++it) {
    const Vector3d r = chart_map(x) - y;
    if (r.norm() < 1e-13 * std::max(1.0, lambda_)) return x;
    const Vector3d dx = chart_differential(x).partialPivLu().solve(r);
    x -= dx;
    if (dx.norm() < 1e-14) return x;
  }
  throw nonconvergence_error("chart_inverse: Newton did not converge");
}

Vector3d PullbackMetric::exp_map(const Vector3d& x, const Vector3d& v) const {
  if (lambda_ == 0.0) return x + v;
  const Vector3d w = chart_map(x) + chart_differential(x) * v;
  return chart_inverse(w, x + v);
}

Vector3d PullbackMetric::log_map(const Vector3d& x, const Vector3d& y) const {
  if (lambda_ == 0.0) return y - x;
  return chart_differential(x).partialPivLu().solve(chart_map(y) -
                                                    chart_map(x));
}

Vector3d PullbackMetric::dlog_map(const Vector3d& x, const Vector3d& y,
                                  const Vector3d& v) const {
  if (lambda_ == 0.0) return v;
  return chart_differential(x).partialPivLu().solve(chart_differential(y) * v);
}

void SyntheticMetric::add(double scale, Field f, DField df) {
  parts_.push_back({scale, std::move(f), std::move(df)});
}

Matrix3d SyntheticMetric::metric(const Vector3d& x) const {
  Matrix3d g = Matrix3d::Identity();
  for (const Part& p : parts_) g += p.scale * p.f(x);
  return g;
}

std::array<Matrix3d, 3> SyntheticMetric::dmetric(const Vector3d& x) const {
  std::array<Matrix3d, 3> out = {Matrix3d::Zero(), Matrix3d::Zero(),
                                 Matrix3d::Zero()};
  for (const Part& p : parts_) {
    auto d = p.df(x);
    for (int a = 0; a < 3; ++a) out[a] += p.scale * d[a];
  }
  return out;
}

MetricDirection dmetric_dlambda0(const CurvatureData& cd) {
  const Matrix2d h = cd.h;
  MetricDirection dir;
  dir.value = [h](const Vector3d& x) {
    Matrix3d q = Matrix3d::Zero();
    for (int i = 0; i < 2; ++i) {
      const double v = h(i, 0) * x(0) + h(i, 1) * x(1);
      q(i, 2) = q(2, i) = v;
    }
    return q;
  };
  dir.derivative = [h](const Vector3d&) {
    std::array<Matrix3d, 3> d = {Matrix3d::Zero(), Matrix3d::Zero(),
                                 Matrix3d::Zero()};
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i < 2; ++i) d[a](i, 2) = d[a](2, i) = h(i, a);
    return d;
  };
  return dir;
}

MetricDirection dmetric_dlambda2(const CurvatureData& cd) {
  const Matrix2d h = cd.h;
  // copy the third-derivative block
  std::array<std::array<std::array<double, 2>, 2>, 2> dh{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) dh[a][b][c] = cd.dh[a][b][c];
  MetricDirection dir;
  dir.value = [h, dh](const Vector3d& x) {
    Matrix3d q = Matrix3d::Zero();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double acc = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            acc += 2.0 * h(i, a) * h(j, b) * x(a) * x(b);
        q(i, j) = acc;
      }
    for (int i = 0; i < 2; ++i) {
      double acc = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) acc += dh[i][a][b] * x(a) * x(b);
      q(i, 2) = q(2, i) = acc;
    }
    return q;
  };
  dir.derivative = [h, dh](const Vector3d& x) {
    std::array<Matrix3d, 3> d = {Matrix3d::Zero(), Matrix3d::Zero(),
                                 Matrix3d::Zero()};
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double acc = 0.0;
          for (int a = 0; a < 2; ++a)
            acc += 2.0 * (h(i, c) * h(j, a) + h(i, a) * h(j, c)) * x(a);
          d[c](i, j) = acc;
        }
      for (int i = 0; i < 2; ++i) {
        double acc = 0.0;
        for (int a = 0; a < 2; ++a)
          acc += dh[i][c][a] * x(a) + dh[i][a][c] * x(a);
        d[c](i, 2) = d[c](2, i) = acc;
      }
    }
    return d;
  };
  return dir;
}

MetricPath metric_time_derivative(std::shared_ptr<const HostSurface> surface,
                                  const Vector3d& p, const Frame& frame,
                                  double lambda, const Vector3d& xi_dot,
                                  double h_s) {
  MetricPath path;
  const double speed = xi_dot.norm();
  if (speed < 1e-300 || surface->kind() == "plane") {
    path.scale = 0.0;
    return path;
  }
  const Vector3d dir = xi_dot / speed;
  auto [qp, fp] = surface->walk(frame, p, h_s * dir);
  auto [qm, fm] = surface->walk(frame, p, -h_s * dir);
  path.plus = std::make_shared<PullbackMetric>(surface, qp, fp, lambda);
  path.minus = std::make_shared<PullbackMetric>(surface, qm, fm, lambda);
  path.scale = speed / (2.0 * h_s);
  return path;
}

}  // namespace bubble
