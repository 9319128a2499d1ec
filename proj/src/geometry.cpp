#include "bubble/geometry.hpp"

#include <cmath>

namespace bubble {

GeometryData compute_geometry(const HemisphereBasis& basis,
                              const VectorXd& u_coeffs,
                              const MetricEvaluator& metric, bool equator) {
  const auto& grid = basis.grid();
  GeometryData out;
  out.equator = equator;
  const int n = equator ? grid.n_phi : grid.size();
  out.n = n;

  const MatrixXd& Bv = equator ? basis.eq_val() : basis.val();
  const MatrixXd& Bt = equator ? basis.eq_dtheta() : basis.dtheta();
  const MatrixXd& Bp = equator ? basis.eq_dphi() : basis.dphi();
  const MatrixXd& Btt = equator ? basis.eq_dtheta2() : basis.dtheta2();
  const MatrixXd& Btp = equator ? basis.eq_dthetaphi() : basis.dthetaphi();
  const MatrixXd& Bpp = equator ? basis.eq_dphi2() : basis.dphi2();

  const VectorXd u = Bv * u_coeffs;
  const VectorXd ut = Bt * u_coeffs;
  const VectorXd up = Bp * u_coeffs;
  const VectorXd utt = Btt * u_coeffs;
  const VectorXd utp = Btp * u_coeffs;
  const VectorXd upp = Bpp * u_coeffs;

  out.f.resize(n);
  out.omega.resize(n);
  out.ft.resize(n);
  out.fp.resize(n);
  out.nu.resize(n);
  out.gind.resize(n);
  out.ginv.resize(n);
  out.H.resize(n);
  out.h0sq.resize(n);
  out.jac.resize(n);
  out.radial.resize(n);
  out.sin_theta.resize(n);

  const bool flat = metric.is_flat();
  double area_acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double th, ph;
    if (equator) {
      th = 0.5 * kPi;
      ph = grid.phi[i];
    } else {
      th = grid.theta[i / grid.n_phi];
      ph = grid.phi[i % grid.n_phi];
    }
    const double s = std::sin(th), c = std::cos(th);
    const double cp = std::cos(ph), sp = std::sin(ph);
    const Vector3d w(s * cp, s * sp, c);
    const Vector3d wt(c * cp, c * sp, -s);
    const Vector3d wp(-s * sp, s * cp, 0.0);
    const Vector3d wtt = -w;
    const Vector3d wtp(-c * sp, c * cp, 0.0);
    const Vector3d wpp(-s * cp, -s * sp, 0.0);

    const double rho = 1.0 + u(i);
    if (rho <= 0.0)
      throw graph_breakdown_error("geometry: 1 + u must stay positive");

    const Vector3d f = rho * w;
    const Vector3d ft = ut(i) * w + rho * wt;
    const Vector3d fp = up(i) * w + rho * wp;
    const Vector3d ftt = utt(i) * w + 2.0 * ut(i) * wt + rho * wtt;
    const Vector3d ftp = utp(i) * w + ut(i) * wp + up(i) * wt + rho * wtp;
    const Vector3d fpp = upp(i) * w + 2.0 * up(i) * wp + rho * wpp;

    const Matrix3d G = flat ? Matrix3d::Identity() : metric.metric(f);

    Matrix2d g;
    g(0, 0) = ft.dot(G * ft);
    g(0, 1) = g(1, 0) = ft.dot(G * fp);
    g(1, 1) = fp.dot(G * fp);
    const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1);
    if (det <= 0.0)
      throw graph_breakdown_error("geometry: induced metric degenerates");

    Matrix2d gi;
    gi(0, 0) = g(1, 1) / det;
    gi(1, 1) = g(0, 0) / det;
    gi(0, 1) = gi(1, 0) = -g(0, 1) / det;

    // inner g-unit normal
    Vector3d v = ft.cross(fp);
    if (!flat) v = G.inverse() * v;
    const double vn = std::sqrt(v.dot(G * v));
    Vector3d nu = v / vn;
    if (nu.dot(G * f) > 0.0) nu = -nu;

    // second fundamental form via the ambient connection
    Matrix2d h;
    if (flat) {
      h(0, 0) = ftt.dot(nu);
      h(0, 1) = h(1, 0) = ftp.dot(nu);
      h(1, 1) = fpp.dot(nu);
    } else {
      const auto Gamma = metric.christoffels(f);
      auto covariant = [&](const Vector3d& d2f, const Vector3d& di,
                           const Vector3d& dj) {
        Vector3d r = d2f;
        for (int al = 0; al < 3; ++al) r(al) += di.dot(Gamma[al] * dj);
        return r;
      };
      h(0, 0) = covariant(ftt, ft, ft).dot(G * nu);
      h(0, 1) = h(1, 0) = covariant(ftp, ft, fp).dot(G * nu);
      h(1, 1) = covariant(fpp, fp, fp).dot(G * nu);
    }

    const double H = gi(0, 0) * h(0, 0) + 2.0 * gi(0, 1) * h(0, 1) +
                     gi(1, 1) * h(1, 1);
    // |h|^2 = h_ij h_kl g^ik g^jl, |h0|^2 = |h|^2 - H^2/2
    double hsq = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int cc = 0; cc < 2; ++cc)
          for (int d = 0; d < 2; ++d)
            hsq += h(a, b) * h(cc, d) * gi(a, cc) * gi(b, d);
    const double h0sq = hsq - 0.5 * H * H;

    out.f[i] = f;
    out.omega[i] = w;
    out.ft[i] = ft;
    out.fp[i] = fp;
    out.nu[i] = nu;
    out.gind[i] = g;
    out.ginv[i] = gi;
    out.H(i) = H;
    out.h0sq(i) = h0sq;
    out.sin_theta(i) = s;
    out.jac(i) = std::sqrt(det) / s;
    out.radial(i) = w.dot(G * nu);
    if (!equator) area_acc += grid.weights(i) * out.jac(i);
  }
  out.area = equator ? 0.0 : area_acc;
  return out;
}

VectorXd laplace_beltrami(const HemisphereBasis& basis,
                          const GeometryData& geom, const VectorXd& values) {
  if (geom.equator)
    throw std::invalid_argument("laplace_beltrami needs grid geometry");
  const int n = geom.n;
  const VectorXd c = basis.project(values);
  const VectorXd vt = basis.dtheta() * c;
  const VectorXd vp = basis.dphi() * c;

  // Flux vector in Cartesian components (smooth fields on the sphere).
  MatrixXd Vc(n, 3);
  for (int i = 0; i < n; ++i) {
    const double s = geom.sin_theta(i);
    // induced metric in the orthonormal round frame (e_th, e_ph/s)
    const Matrix2d& g = geom.gind[i];
    Matrix2d gf;
    gf(0, 0) = g(0, 0);
    gf(0, 1) = gf(1, 0) = g(0, 1) / s;
    gf(1, 1) = g(1, 1) / (s * s);
    const double det = gf(0, 0) * gf(1, 1) - gf(0, 1) * gf(0, 1);
    const double e1 = vt(i);
    const double e2 = vp(i) / s;
    const double V1 =
        geom.jac(i) * ((gf(1, 1) * e1 - gf(0, 1) * e2) / det);
    const double V2 =
        geom.jac(i) * ((-gf(0, 1) * e1 + gf(0, 0) * e2) / det);
    const double th = std::acos(std::min(1.0, std::max(-1.0, geom.omega[i](2))));
    (void)th;
    const Vector3d eth(geom.omega[i](2) * geom.omega[i](0) / s,
                       geom.omega[i](2) * geom.omega[i](1) / s, -s);
    const Vector3d eph(-geom.omega[i](1) / s, geom.omega[i](0) / s, 0.0);
    const Vector3d V = V1 * eth + V2 * eph;
    Vc(i, 0) = V(0);
    Vc(i, 1) = V(1);
    Vc(i, 2) = V(2);
  }

  // div V = sum_a <grad V^a, e_a> for tangential V
  VectorXd div = VectorXd::Zero(n);
  for (int a = 0; a < 3; ++a) {
    const VectorXd ca = basis.project(Vc.col(a));
    const VectorXd dth = basis.dtheta() * ca;
    const VectorXd dph = basis.dphi() * ca;
    for (int i = 0; i < n; ++i) {
      const double s = geom.sin_theta(i);
      const Vector3d eth(geom.omega[i](2) * geom.omega[i](0) / s,
                         geom.omega[i](2) * geom.omega[i](1) / s, -s);
      const Vector3d eph(-geom.omega[i](1) / s, geom.omega[i](0) / s, 0.0);
      div(i) += dth(i) * eth(a) + dph(i) / s * eph(a);
    }
  }
  return div.cwiseQuotient(geom.jac);
}

WillmoreData willmore(const HemisphereBasis& basis, const VectorXd& u_coeffs,
                      const MetricEvaluator& metric, const GeometryData& geom) {
  (void)u_coeffs;
  (void)metric;
  WillmoreData out;
  out.H_coeffs = basis.project(geom.H);
  const VectorXd lapH = laplace_beltrami(basis, geom, geom.H);
  out.W = 0.5 * (lapH + geom.h0sq.cwiseProduct(geom.H).eval());
  out.energy = willmore_energy(basis, geom);
  return out;
}

double willmore_energy(const HemisphereBasis& basis, const GeometryData& geom) {
  const auto& w = basis.grid().weights;
  return 0.25 * (w.array() * geom.H.array().square() * geom.jac.array()).sum();
}

}  // namespace bubble
