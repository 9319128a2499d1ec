#include "bubble/surface.hpp"

#include <cmath>

namespace bubble {

Vector3d HostSurface::unit_normal_inner(const Vector3d& p) const {
  Vector3d g = gradient(p);
  const double n = g.norm();
  if (n < 1e-14) throw numerical_error("surface: degenerate gradient");
  return -g / n;
}

Frame HostSurface::frame_at(const Vector3d& p) const {
  Frame f;
  f.normal = unit_normal_inner(p);
  // Deterministic tangent seed: the axis least aligned with the normal.
  int axis = 0;
  double best = std::abs(f.normal.x());
  if (std::abs(f.normal.y()) < best) {
    best = std::abs(f.normal.y());
    axis = 1;
  }
  if (std::abs(f.normal.z()) < best) axis = 2;
  Vector3d e = Vector3d::Zero();
  e(axis) = 1.0;
  f.b1 = (e - e.dot(f.normal) * f.normal).normalized();
  f.b2 = f.normal.cross(f.b1);
  return f;
}

double HostSurface::chart_height_only(const Frame& f, const Vector3d& p,
                                      const Vector2d& x) const {
  if (x.norm() >= chart_radius())
    throw chart_domain_error("chart_height: point outside chart radius");
  const Vector3d base = p + x(0) * f.b1 + x(1) * f.b2;
  double phi = 0.0;
  for (int it = 0; it < 60; ++it) {
    const Vector3d y = base + phi * f.normal;
    const double Fv = implicit(y);
    const double dF = gradient(y).dot(f.normal);
    if (std::abs(dF) < 1e-12)
      throw nonconvergence_error("chart_height: tangential gradient");
    const double step = Fv / dF;
    phi -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(phi))) return phi;
  }
  throw nonconvergence_error("chart_height: Newton did not converge");
}

Vector3d HostSurface::chart_point(const Frame& f, const Vector3d& p,
                                  const Vector2d& x) const {
  return p + x(0) * f.b1 + x(1) * f.b2 + chart_height_only(f, p, x) * f.normal;
}

namespace {

// First and second chart derivatives by implicit differentiation at a solved
// height. b[0], b[1] are the frame tangents, n the inner normal.
void chart_jet12(const HostSurface& s, const Vector3d& y, const Vector3d b[2],
                 const Vector3d& n, Vector2d& dphi, Matrix2d& d2phi) {
  const Vector3d g = s.gradient(y);
  const Matrix3d H = s.hessian(y);
  const double D = g.dot(n);
  for (int i = 0; i < 2; ++i) dphi(i) = -g.dot(b[i]) / D;
  Vector3d t[2];
  for (int i = 0; i < 2; ++i) t[i] = b[i] + dphi(i) * n;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double dg_i = t[j].dot(H * b[i]);  // d_j <gradF, b_i>
      const double dD = t[j].dot(H * n);       // d_j <gradF, n>
      d2phi(i, j) = -(dg_i * D - g.dot(b[i]) * dD) / (D * D);
    }
  d2phi = 0.5 * (d2phi + d2phi.transpose());
}

}  // namespace

ChartJet HostSurface::chart_height(const Frame& f, const Vector3d& p,
                                   const Vector2d& x, int jet_order) const {
  ChartJet jet;
  jet.phi = chart_height_only(f, p, x);
  const Vector3d b[2] = {f.b1, f.b2};
  const Vector3d y = p + x(0) * f.b1 + x(1) * f.b2 + jet.phi * f.normal;
  chart_jet12(*this, y, b, f.normal, jet.dphi, jet.d2phi);
  if (jet_order < 3) return jet;

  // Third derivatives: central differences of the analytic second jet.
  const double h = 1e-4 * chart_radius();
  for (int a = 0; a < 2; ++a) {
    Vector2d xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    Vector2d d1p, d1m;
    Matrix2d d2p, d2m;
    const Vector3d yp = chart_point(f, p, xp);
    const Vector3d ym = chart_point(f, p, xm);
    chart_jet12(*this, yp, b, f.normal, d1p, d2p);
    chart_jet12(*this, ym, b, f.normal, d1m, d2m);
    for (int bb = 0; bb < 2; ++bb)
      for (int cc = 0; cc < 2; ++cc)
        jet.d3phi[a][bb][cc] = (d2p(bb, cc) - d2m(bb, cc)) / (2.0 * h);
  }
  // Symmetrize over index permutations.
  for (int a = 0; a < 2; ++a)
    for (int bb = a; bb < 2; ++bb)
      for (int cc = bb; cc < 2; ++cc) {
        const double v =
            (jet.d3phi[a][bb][cc] + jet.d3phi[bb][a][cc] +
             jet.d3phi[cc][bb][a] + jet.d3phi[a][cc][bb] +
             jet.d3phi[bb][cc][a] + jet.d3phi[cc][a][bb]) /
            6.0;
        jet.d3phi[a][bb][cc] = jet.d3phi[a][cc][bb] = jet.d3phi[bb][a][cc] =
            jet.d3phi[bb][cc][a] = jet.d3phi[cc][a][bb] =
                jet.d3phi[cc][bb][a] = v;
      }
  return jet;
}

CurvatureData HostSurface::curvature(const Frame& f, const Vector3d& p) const {
  CurvatureData cd;
  ChartJet jet = chart_height(f, p, Vector2d::Zero(), 3);
  cd.h = jet.d2phi;
  cd.H = cd.h.trace();
  for (int a = 0; a < 2; ++a)
    for (int bb = 0; bb < 2; ++bb)
      for (int cc = 0; cc < 2; ++cc) cd.dh[a][bb][cc] = jet.d3phi[a][bb][cc];
  cd.gradH = grad_H(f, p);
  return cd;
}

double HostSurface::mean_curvature(const Vector3d& p) const {
  const Vector3d g = gradient(p);
  const Matrix3d H = hessian(p);
  const double n = g.norm();
  return (H.trace() * n * n - g.dot(H * g)) / (n * n * n);
}

Vector2d HostSurface::grad_H(const Frame& f, const Vector3d& p) const {
  const double h = 1e-5 * std::max(1.0, min_curvature_radius());
  Vector2d out;
  const Vector3d b[2] = {f.b1, f.b2};
  for (int i = 0; i < 2; ++i) {
    const Vector3d pp = nearest_point(p + h * b[i]);
    const Vector3d pm = nearest_point(p - h * b[i]);
    out(i) = (mean_curvature(pp) - mean_curvature(pm)) / (2.0 * h);
  }
  return out;
}

Vector3d HostSurface::nearest_point(const Vector3d& y) const {
  // First-order initial guess, then Newton on the Lagrange system
  // p - y + mu gradF(p) = 0, F(p) = 0.
  Vector3d g = gradient(y);
  double gn2 = g.squaredNorm();
  if (gn2 < 1e-20) throw numerical_error("nearest_point: degenerate gradient");
  Vector3d p = y - implicit(y) * g / gn2;
  // The inward side is limited by the focal set; outward projections of the
  // supported surfaces stay well defined.
  if (implicit(y) < 0 && (p - y).norm() > reach())
    throw numerical_error("nearest_point: outside tubular neighbourhood");
  double mu = -(y - p).dot(gradient(p)) / gradient(p).squaredNorm();
  for (int it = 0; it < 60; ++it) {
    const Vector3d gp = gradient(p);
    const Matrix3d Hp = hessian(p);
    Eigen::Vector4d r;
    r.head<3>() = p - y + mu * gp;
    r(3) = implicit(p);
    if (r.cwiseAbs().maxCoeff() < 1e-14) break;
    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    J.topLeftCorner<3, 3>() = Matrix3d::Identity() + mu * Hp;
    J.topRightCorner<3, 1>() = gp;
    J.bottomLeftCorner<1, 3>() = gp.transpose();
    Eigen::Vector4d d = J.fullPivLu().solve(-r);
    p += d.head<3>();
    mu += d(3);
    if (d.cwiseAbs().maxCoeff() < 1e-15) break;
  }
  const Vector3d res = y - p;
  const Vector3d n = unit_normal_inner(p);
  if ((res - res.dot(n) * n).norm() > 1e-10 * (1.0 + res.norm()))
    throw nonconvergence_error("nearest_point: optimality residual too large");
  return p;
}

Frame HostSurface::transport(const Frame& f, const Vector3d& p,
                             const Vector3d& q) const {
  (void)p;
  Frame out;
  out.normal = unit_normal_inner(q);
  Vector3d t1 = f.b1 - f.b1.dot(out.normal) * out.normal;
  if (t1.norm() < 1e-8)
    throw numerical_error("transport: frame degenerates, step too large");
  out.b1 = t1.normalized();
  Vector3d t2 = f.b2 - f.b2.dot(out.normal) * out.normal;
  t2 -= t2.dot(out.b1) * out.b1;
  if (t2.norm() < 1e-8)
    throw numerical_error("transport: frame degenerates, step too large");
  out.b2 = t2.normalized();
  return out;
}

std::pair<Vector3d, Frame> HostSurface::walk(const Frame& f, const Vector3d& p,
                                             const Vector3d& v) const {
  const Vector3d q = nearest_point(p + v);
  return {q, transport(f, p, q)};
}

GraphSurface::GraphSurface(std::vector<Term> terms) : terms_(std::move(terms)) {
  // Curvature radius bound from the Hessian of h sampled on the working disk.
  double kmax = 1e-6;
  for (double x = -2.0; x <= 2.0; x += 0.25)
    for (double y = -2.0; y <= 2.0; y += 0.25) {
      const double hxx = height(x, y, 2, 0);
      const double hyy = height(x, y, 0, 2);
      const double hxy = height(x, y, 1, 1);
      const double a = 0.5 * (hxx + hyy);
      const double b = std::sqrt(0.25 * (hxx - hyy) * (hxx - hyy) + hxy * hxy);
      kmax = std::max({kmax, std::abs(a + b), std::abs(a - b)});
    }
  rmin_ = std::min(4.0, 1.0 / kmax);
}

double GraphSurface::height(double x, double y, int dx, int dy) const {
  double acc = 0.0;
  for (const Term& t : terms_) {
    if (t.i < dx || t.j < dy) continue;
    double c = t.c;
    for (int k = 0; k < dx; ++k) c *= (t.i - k);
    for (int k = 0; k < dy; ++k) c *= (t.j - k);
    acc += c * std::pow(x, t.i - dx) * std::pow(y, t.j - dy);
  }
  return acc;
}

double GraphSurface::implicit(const Vector3d& y) const {
  return height(y.x(), y.y(), 0, 0) - y.z();
}

Vector3d GraphSurface::gradient(const Vector3d& y) const {
  return Vector3d(height(y.x(), y.y(), 1, 0), height(y.x(), y.y(), 0, 1),
                  -1.0);
}

Matrix3d GraphSurface::hessian(const Vector3d& y) const {
  Matrix3d h = Matrix3d::Zero();
  h(0, 0) = height(y.x(), y.y(), 2, 0);
  h(0, 1) = h(1, 0) = height(y.x(), y.y(), 1, 1);
  h(1, 1) = height(y.x(), y.y(), 0, 2);
  return h;
}

Vector3d GraphSurface::sample_point(double u, double v) const {
  return Vector3d(u, v, height(u, v, 0, 0));
}

std::shared_ptr<HostSurface> make_surface(const std::string& kind,
                                          const std::vector<double>& params) {
  if (kind == "plane") return std::make_shared<PlaneSurface>();
  if (kind == "sphere") {
    if (params.size() != 1)
      throw std::invalid_argument("sphere surface needs one parameter R");
    return std::make_shared<SphereSurface>(params[0]);
  }
  if (kind == "ellipsoid") {
    if (params.size() != 3)
      throw std::invalid_argument("ellipsoid surface needs parameters a,b,c");
    return std::make_shared<EllipsoidSurface>(params[0], params[1], params[2]);
  }
  if (kind == "graph") {
    if (params.size() % 3 != 0 || params.empty())
      throw std::invalid_argument(
          "graph surface needs coefficient triples i,j,c");
    std::vector<GraphSurface::Term> terms;
    for (size_t k = 0; k + 2 < params.size(); k += 3)
      terms.push_back({static_cast<int>(params[k]),
                       static_cast<int>(params[k + 1]), params[k + 2]});
    return std::make_shared<GraphSurface>(std::move(terms));
  }
  throw std::invalid_argument("unknown surface kind: " + kind);
}

}  // namespace bubble
