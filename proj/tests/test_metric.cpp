#include <cmath>
#include <random>

#include "bubble/metric.hpp"
#include "doctest.h"

using namespace bubble;

namespace {

Matrix3d fd_pullback(const PullbackMetric& g, const Vector3d& x, double h) {
  // lambda^-2 (DF)^T (DF) with DF by central differences of the chart map.
  Matrix3d DF;
  for (int a = 0; a < 3; ++a) {
    Vector3d xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    DF.col(a) = (g.chart_map(xp) - g.chart_map(xm)) / (2.0 * h);
  }
  return DF.transpose() * DF / (g.lambda() * g.lambda());
}

}  // namespace

TEST_CASE("pullback metric basics") {
  auto plane = std::make_shared<PlaneSurface>();
  Vector3d p(0.2, -0.1, 0.0);
  PullbackMetric gp(plane, p, plane->frame_at(p), 0.3);
  CHECK((gp.metric(Vector3d(0.7, -0.4, 0.6)) - Matrix3d::Identity()).norm() <=
        1e-13);

  auto sph = std::make_shared<SphereSurface>(1.0);
  Vector3d q = sph->sample_point(1.2, 0.5);
  Frame fq = sph->frame_at(q);
  PullbackMetric g0(sph, q, fq, 0.0);
  CHECK((g0.metric(Vector3d(1.0, 0.2, -0.3)) - Matrix3d::Identity()).norm() <=
        1e-14);

  PullbackMetric g(sph, q, fq, 0.1);
  Vector3d x(1.0, 0.0, 0.0);
  ChartJet jet = sph->chart_height(fq, q, Vector2d(0.1, 0.0), 2);
  const Matrix3d m = g.metric(x);
  CHECK(std::abs(m(0, 2) - jet.dphi(0)) <= 1e-12);
  CHECK(std::abs(m(2, 2) - 1.0) <= 1e-14);
}

TEST_CASE("pullback metric equals the finite-difference pullback") {
  auto ell = std::make_shared<EllipsoidSurface>(1.0, 1.2, 0.8);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 6; ++t) {
    Vector3d p = ell->sample_point(0.4 + 1.1 * (U(rng) + 1.0), kPi * U(rng));
    Frame f = ell->frame_at(p);
    const double lam = 0.02 + 0.03 * (U(rng) + 1.0);
    PullbackMetric g(ell, p, f, lam);
    Vector3d x(U(rng), U(rng), U(rng));
    const Matrix3d a = g.metric(x);
    const Matrix3d b = fd_pullback(g, x, 1e-5);
    CHECK((a - b).norm() <= 1e-6 * a.norm());
  }
}

TEST_CASE("metric derivative and Christoffel compatibility") {
  auto ell = std::make_shared<EllipsoidSurface>(1.0, 1.2, 0.8);
  Vector3d p = ell->sample_point(1.0, 0.8);
  Frame f = ell->frame_at(p);
  PullbackMetric g(ell, p, f, 0.08);
  Vector3d x(0.5, -0.3, 0.4);

  // dmetric against finite differences of the metric
  auto dg = g.dmetric(x);
  for (int a = 0; a < 3; ++a) {
    Vector3d xp = x, xm = x;
    xp(a) += 1e-5;
    xm(a) -= 1e-5;
    Matrix3d fd = (g.metric(xp) - g.metric(xm)) / 2e-5;
    CHECK((dg[a] - fd).norm() <= 1e-8);
  }

  // metric compatibility: d_ga g_{al,be} = g_{mu,be} G^mu_{ga,al} +
  // g_{al,mu} G^mu_{ga,be}
  auto G = g.christoffels(x);
  const Matrix3d gm = g.metric(x);
  for (int ga = 0; ga < 3; ++ga)
    for (int al = 0; al < 3; ++al)
      for (int be = 0; be < 3; ++be) {
        double rhs = 0.0;
        for (int mu = 0; mu < 3; ++mu)
          rhs += gm(mu, be) * G[mu](ga, al) + gm(al, mu) * G[mu](ga, be);
        CHECK(std::abs(dg[ga](al, be) - rhs) <= 1e-6);
      }
}

TEST_CASE("flatness: numerically assembled curvature vanishes") {
  auto ell = std::make_shared<EllipsoidSurface>(1.0, 1.2, 0.8);
  Vector3d p = ell->sample_point(0.9, -0.4);
  Frame f = ell->frame_at(p);
  PullbackMetric g(ell, p, f, 0.06);
  Vector3d x(0.4, 0.2, -0.5);
  const double h = 1e-5;
  // R^al_{be,ga,de} = d_ga G^al_{de,be} - d_de G^al_{ga,be} + G G - G G
  auto Gat = [&](const Vector3d& y) { return g.christoffels(y); };
  auto G0 = Gat(x);
  std::array<std::array<Matrix3d, 3>, 3> dG;  // dG[ga][al](de,be)
  for (int ga = 0; ga < 3; ++ga) {
    Vector3d xp = x, xm = x;
    xp(ga) += h;
    xm(ga) -= h;
    auto Gp = Gat(xp), Gm = Gat(xm);
    for (int al = 0; al < 3; ++al) dG[ga][al] = (Gp[al] - Gm[al]) / (2.0 * h);
  }
  double worst = 0.0;
  for (int al = 0; al < 3; ++al)
    for (int be = 0; be < 3; ++be)
      for (int ga = 0; ga < 3; ++ga)
        for (int de = 0; de < 3; ++de) {
          double r = dG[ga][al](de, be) - dG[de][al](ga, be);
          for (int mu = 0; mu < 3; ++mu)
            r += G0[al](ga, mu) * G0[mu](de, be) -
                 G0[al](de, mu) * G0[mu](ga, be);
          worst = std::max(worst, std::abs(r));
        }
  CHECK(worst <= 1e-5);
}

TEST_CASE("dmetric_dlambda0") {
  auto plane = std::make_shared<PlaneSurface>();
  Vector3d pp(0.0, 0.0, 0.0);
  Frame fp = plane->frame_at(pp);
  auto q_plane = dmetric_dlambda0(plane->curvature(fp, pp));
  CHECK(q_plane.value(Vector3d(0.7, 0.2, 0.1)).norm() <= 1e-10);

  const double R = 1.4;
  auto sph = std::make_shared<SphereSurface>(R);
  Vector3d p = sph->sample_point(0.7, 1.9);
  Frame f = sph->frame_at(p);
  auto q0 = dmetric_dlambda0(sph->curvature(f, p));
  Vector3d x(0.6, -0.8, 0.3);
  Matrix3d qv = q0.value(x);
  CHECK(std::abs(qv(0, 2) - x(0) / R) <= 1e-9);
  CHECK(std::abs(qv(1, 2) - x(1) / R) <= 1e-9);
  CHECK(std::abs(qv(0, 0)) <= 1e-12);

  // finite-difference oracle: (g(eps) - delta)/eps -> q0 with O(eps) error
  auto ell = std::make_shared<EllipsoidSurface>(1.0, 1.2, 0.8);
  Vector3d pe = ell->sample_point(1.1, 0.3);
  Frame fe = ell->frame_at(pe);
  auto q0e = dmetric_dlambda0(ell->curvature(fe, pe));
  const double eps = 1e-4;
  PullbackMetric ge(ell, pe, fe, eps);
  Matrix3d fd = (ge.metric(x) - Matrix3d::Identity()) / eps;
  CHECK((fd - q0e.value(x)).norm() <= 10.0 * eps);

  // second derivative direction against a lambda-quadratic fit
  auto q2 = dmetric_dlambda2(ell->curvature(fe, pe));
  PullbackMetric ge2(ell, pe, fe, 2.0 * eps);
  Matrix3d fd2 = (ge2.metric(x) - 2.0 * ge.metric(x) +
                  Matrix3d::Identity()) /
                 (eps * eps);
  CHECK((fd2 - q2.value(x)).norm() <= 1e-2);
}

TEST_CASE("metric time derivative along paths") {
  // stationary path
  auto ell = std::make_shared<EllipsoidSurface>(1.0, 1.2, 0.8);
  Vector3d p = ell->sample_point(1.2, 0.9);
  Frame f = ell->frame_at(p);
  MetricPath still = metric_time_derivative(ell, p, f, 0.05, Vector3d::Zero());
  CHECK(still.derivative(Vector3d(0.3, 0.2, 0.1)).norm() == 0.0);

  // plane host: identically flat family
  auto plane = std::make_shared<PlaneSurface>();
  Vector3d pp(0.1, 0.4, 0.0);
  Frame fp = plane->frame_at(pp);
  MetricPath flat =
      metric_time_derivative(plane, pp, fp, 0.05, Vector3d(0.3, 0.1, 0.0));
  CHECK(flat.derivative(Vector3d(0.5, -0.2, 0.3)).norm() <= 1e-12);

  // sphere host: the chart height is rotation invariant, so the transported
  // family is constant in time.
  auto sph = std::make_shared<SphereSurface>(1.0);
  Vector3d ps = sph->sample_point(1.0, 0.2);
  Frame fs = sph->frame_at(ps);
  Vector3d v = 0.2 * fs.b1 + 0.1 * fs.b2;
  MetricPath sp = metric_time_derivative(sph, ps, fs, 0.05, v);
  CHECK(sp.derivative(Vector3d(0.7, 0.1, -0.2)).norm() <= 1e-7);

  // ellipsoid: second-order convergence of the central difference
  Vector3d ve = 0.15 * f.b1 - 0.3 * f.b2;
  Vector3d x(0.6, -0.2, 0.4);
  MetricPath d1 = metric_time_derivative(ell, p, f, 0.05, ve, 2e-3);
  MetricPath d2 = metric_time_derivative(ell, p, f, 0.05, ve, 1e-3);
  MetricPath d3 = metric_time_derivative(ell, p, f, 0.05, ve, 5e-4);
  const double e1 = (d1.derivative(x) - d3.derivative(x)).norm();
  const double e2 = (d2.derivative(x) - d3.derivative(x)).norm();
  CHECK(e1 > 1e-12);  // nonzero signal
  CHECK(e2 <= 0.5 * e1);
}

TEST_CASE("exponential and logarithm maps") {
  auto sph = std::make_shared<SphereSurface>(1.0);
  Vector3d p = sph->sample_point(0.8, -0.6);
  Frame f = sph->frame_at(p);

  PullbackMetric g0(sph, p, f, 0.0);
  Vector3d x(0.2, -0.1, 0.3), v(0.4, 0.2, -0.5);
  CHECK((g0.exp_map(x, v) - (x + v)).norm() <= 1e-14);

  PullbackMetric g(sph, p, f, 0.05);
  CHECK(g.log_map(x, x).norm() <= 1e-12);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(-0.8, 0.8);
  for (int t = 0; t < 10; ++t) {
    Vector3d xx(U(rng), U(rng), U(rng));
    Vector3d vv(U(rng), U(rng), U(rng));
    Vector3d y = g.exp_map(xx, vv);
    CHECK((g.log_map(xx, y) - vv).norm() <= 1e-10);
    Vector3d back = g.exp_map(xx, g.log_map(xx, y));
    CHECK((back - y).norm() <= 1e-10);
  }
}
