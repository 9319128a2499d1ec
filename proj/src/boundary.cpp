#include "bubble/boundary.hpp"

#include <cmath>

namespace bubble {

namespace {

// Exact d/dtheta of the mean curvature along the equator ring: third graph
// derivatives spectrally, metric derivatives analytically, Christoffel
// derivatives by a short central difference along the meridian tangent.
VectorXd equator_dH_dtheta(const HemisphereBasis& basis,
                           const VectorXd& u_coeffs,
                           const MetricEvaluator& metric,
                           const GeometryData& eq) {
  const auto& grid = basis.grid();
  const int n = grid.n_phi;
  const VectorXd u = basis.eq_val() * u_coeffs;
  const VectorXd ut = basis.eq_dtheta() * u_coeffs;
  const VectorXd up = basis.eq_dphi() * u_coeffs;
  const VectorXd utt = basis.eq_dtheta2() * u_coeffs;
  const VectorXd utp = basis.eq_dthetaphi() * u_coeffs;
  const VectorXd upp = basis.eq_dphi2() * u_coeffs;
  const VectorXd uttt = basis.eq_dtheta3() * u_coeffs;
  const VectorXd uttp = basis.eq_dtheta2phi() * u_coeffs;
  const VectorXd utpp = basis.eq_dthetaphi2() * u_coeffs;

  const bool flat = metric.is_flat();
  VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const double ph = grid.phi[i];
    const double cp = std::cos(ph), sp = std::sin(ph);
    // theta = pi/2: s = 1, c = 0
    const Vector3d w(cp, sp, 0.0);
    const Vector3d wt(0.0, 0.0, -1.0);
    const Vector3d wp(-sp, cp, 0.0);
    const Vector3d wtt = -w;
    const Vector3d wtp(0.0, 0.0, 0.0);  // (-c sp, c cp, 0) at c = 0
    const Vector3d wpp = -w;            // (-s cp, -s sp, 0) at s = 1
    const Vector3d wttt = -wt;
    const Vector3d wttp = -wp;
    const Vector3d wtpp = Vector3d::Zero();  // (-c cp, -c sp, 0) at c = 0

    const double rho = 1.0 + u(i);
    const Vector3d f = rho * w;
    const Vector3d ft = ut(i) * w + rho * wt;
    const Vector3d fp = up(i) * w + rho * wp;
    const Vector3d ftt = utt(i) * w + 2.0 * ut(i) * wt + rho * wtt;
    const Vector3d ftp = utp(i) * w + ut(i) * wp + up(i) * wt + rho * wtp;
    const Vector3d fpp = upp(i) * w + 2.0 * up(i) * wp + rho * wpp;
    const Vector3d fttt =
        uttt(i) * w + 3.0 * utt(i) * wt + 3.0 * ut(i) * wtt + rho * wttt;
    const Vector3d fttp = uttp(i) * w + utt(i) * wp + 2.0 * utp(i) * wt +
                          2.0 * ut(i) * wtp + up(i) * wtt + rho * wttp;
    const Vector3d ftpp = utpp(i) * w + upp(i) * wt + 2.0 * utp(i) * wp +
                          2.0 * up(i) * wtp + ut(i) * wpp + rho * wtpp;

    const Matrix3d G = flat ? Matrix3d::Identity() : metric.metric(f);
    Matrix3d DG = Matrix3d::Zero();  // directional derivative of g along ft
    std::array<Matrix3d, 3> Gam = {Matrix3d::Zero(), Matrix3d::Zero(),
                                   Matrix3d::Zero()};
    std::array<Matrix3d, 3> DGam = Gam;
    if (!flat) {
      const auto dg = metric.dmetric(f);
      for (int a = 0; a < 3; ++a) DG += ft(a) * dg[a];
      Gam = metric.christoffels(f);
      const double h = 1e-5;
      auto Gp = metric.christoffels(f + h * ft);
      auto Gm = metric.christoffels(f - h * ft);
      for (int al = 0; al < 3; ++al) DGam[al] = (Gp[al] - Gm[al]) / (2.0 * h);
    }

    const Matrix2d& g = eq.gind[i];
    const Matrix2d& gi = eq.ginv[i];
    const Vector3d& nu = eq.nu[i];

    // d/dtheta of the induced metric and its inverse
    Matrix2d dg2;
    dg2(0, 0) = 2.0 * ftt.dot(G * ft) + ft.dot(DG * ft);
    dg2(0, 1) = dg2(1, 0) =
        ftt.dot(G * fp) + ft.dot(G * ftp) + ft.dot(DG * fp);
    dg2(1, 1) = 2.0 * ftp.dot(G * fp) + fp.dot(DG * fp);
    const Matrix2d dginv = -gi * dg2 * gi;

    // d/dtheta of the normal
    Vector3d v = ft.cross(fp);
    Vector3d dv_raw = ftt.cross(fp) + ft.cross(ftp);
    Vector3d vG = v, dvG;
    if (!flat) {
      const Matrix3d Ginv = G.inverse();
      vG = Ginv * v;
      dvG = Ginv * dv_raw - Ginv * DG * Ginv * v;
    } else {
      dvG = dv_raw;
    }
    const double vn2 = vG.dot(G * vG);
    const double vn = std::sqrt(vn2);
    double dvn2 = 2.0 * vG.dot(G * dvG);
    if (!flat) dvn2 += vG.dot(DG * vG);
    const double sgn = (vG.dot(G * f) > 0.0) ? -1.0 : 1.0;
    const Vector3d dnu =
        sgn * (dvG / vn - vG * (0.5 * dvn2 / (vn2 * vn)));

    // covariant second derivatives and their theta-derivatives
    auto gamma_vec = [&](const std::array<Matrix3d, 3>& Ga, const Vector3d& a,
                         const Vector3d& b) {
      Vector3d r;
      for (int al = 0; al < 3; ++al) r(al) = a.dot(Ga[al] * b);
      return r;
    };
    Vector3d C[2][2], dC[2][2];
    C[0][0] = ftt + (flat ? Vector3d::Zero() : gamma_vec(Gam, ft, ft));
    C[0][1] = ftp + (flat ? Vector3d::Zero() : gamma_vec(Gam, ft, fp));
    C[1][1] = fpp + (flat ? Vector3d::Zero() : gamma_vec(Gam, fp, fp));
    C[1][0] = C[0][1];
    if (flat) {
      dC[0][0] = fttt;
      dC[0][1] = fttp;
      dC[1][1] = ftpp;
    } else {
      dC[0][0] = fttt + gamma_vec(DGam, ft, ft) + 2.0 * gamma_vec(Gam, ftt, ft);
      dC[0][1] = fttp + gamma_vec(DGam, ft, fp) + gamma_vec(Gam, ftt, fp) +
                 gamma_vec(Gam, ft, ftp);
      dC[1][1] = ftpp + gamma_vec(DGam, fp, fp) + 2.0 * gamma_vec(Gam, ftp, fp);
    }
    dC[1][0] = dC[0][1];

    Matrix2d h2, dh2;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        h2(a, b) = C[a][b].dot(G * nu);
        dh2(a, b) = dC[a][b].dot(G * nu) + C[a][b].dot(G * dnu);
        if (!flat) dh2(a, b) += C[a][b].dot(DG * nu);
      }

    double dH = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        dH += dginv(a, b) * h2(a, b) + gi(a, b) * dh2(a, b);
    out(i) = dH;
  }
  return out;
}

}  // namespace

BoundaryResidual boundary_residual(const HemisphereBasis& basis,
                                   const VectorXd& u_coeffs,
                                   const MetricEvaluator& metric) {
  GeometryData eq = compute_geometry(basis, u_coeffs, metric, true);
  const int n = eq.n;
  BoundaryResidual out;
  out.contact.resize(n);
  out.natural.resize(n);

  const VectorXd dH_dtheta = equator_dH_dtheta(basis, u_coeffs, metric, eq);
  const VectorXd dH_dphi = basis.ring_diff() * eq.H;

  const bool flat = metric.is_flat();
  for (int i = 0; i < n; ++i) {
    const Matrix3d G = flat ? Matrix3d::Identity() : metric.metric(eq.f[i]);
    // metric-unit normal of the plane x3 = 0
    Vector3d npl = G.inverse().col(2);
    npl /= std::sqrt(npl.dot(G * npl));
    if (npl(2) < 0) npl = -npl;
    out.contact(i) = eq.nu[i].dot(G * npl);

    // inward unit conormal of the boundary circle w.r.t. the induced metric
    const Matrix2d& g = eq.gind[i];
    const double a = g(0, 1) / g(1, 1);
    const double nrm = std::sqrt(g(0, 0) - g(0, 1) * g(0, 1) / g(1, 1));
    const double e_th = -1.0 / nrm;
    const double e_ph = a / nrm;
    const double dHdeta = e_th * dH_dtheta(i) + e_ph * dH_dphi(i);

    double hpl = 0.0;
    if (!flat) {
      const auto Gamma = metric.christoffels(eq.f[i]);
      const Vector3d Gn = G * npl;
      for (int ii = 0; ii < 2; ++ii)
        for (int jj = 0; jj < 2; ++jj) {
          double gam_n = 0.0;
          for (int al = 0; al < 3; ++al) gam_n += Gamma[al](ii, jj) * Gn(al);
          hpl += gam_n * eq.nu[i](ii) * eq.nu[i](jj);
        }
    }
    out.natural(i) = dHdeta + eq.H(i) * hpl;
  }
  return out;
}

BiharmonicSolver::BiharmonicSolver(
    std::shared_ptr<const HemisphereBasis> basis)
    : basis_(std::move(basis)) {
  const auto& b = *basis_;
  const int N = b.n_dofs();
  const int ng = b.grid().size();
  n_eq_ = b.grid().n_phi;

  row_dn_ = -b.eq_dtheta();  // d/deta = -d/dtheta on the equator
  MatrixXd lap_cols(N, N);
  for (int j = 0; j < N; ++j) {
    VectorXd e = VectorXd::Zero(N);
    e(j) = 1.0;
    lap_cols.col(j) = b.apply_laplacian(e);
  }
  row_dnl_ = -b.eq_dtheta() * lap_cols;

  // Stacked weighted system: trace rows, interior rows Delta^2 w - c with the
  // compatibility constant on the right-hand side, one mean-zero row. The
  // interior rows act as a regularizer: away from the axisymmetric sector the
  // discrete span has no exactly biharmonic fields, so these rows must stay
  // weak enough not to block the trace realization.
  w_bc_ = 30.0;
  const double w_mean = 30.0;
  const double w_pde = 0.01;
  MatrixXd bilap_rows = b.val() * (lap_cols * lap_cols);
  MatrixXd A(2 * n_eq_ + ng + 1, N);
  A.topRows(n_eq_) = w_bc_ * row_dn_;
  A.middleRows(n_eq_, n_eq_) = w_bc_ * row_dnl_;
  VectorXd sqw = w_pde * b.grid().weights.cwiseSqrt();
  A.middleRows(2 * n_eq_, ng) = sqw.asDiagonal() * bilap_rows;
  A.row(2 * n_eq_ + ng) = w_mean * (b.grid().weights.transpose() * b.val());

  pde_rhs_col_ = sqw;

  Eigen::BDCSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cutoff = s(0) * 1e-12;
  VectorXd sinv = s;
  for (int i = 0; i < s.size(); ++i)
    sinv(i) = (s(i) > cutoff) ? 1.0 / s(i) : 0.0;
  pinv_ = svd.matrixV() * sinv.asDiagonal() * svd.matrixU().transpose();
}

double BiharmonicSolver::compatibility_constant(const VectorXd& alpha,
                                                const VectorXd& beta) const {
  return (beta + 2.0 * alpha).mean();
}

VectorXd BiharmonicSolver::solve(const VectorXd& alpha,
                                 const VectorXd& beta) const {
  if (alpha.size() != n_eq_ || beta.size() != n_eq_)
    throw std::invalid_argument("biharmonic solve: wrong trace length");
  const double c = compatibility_constant(alpha, beta);
  const int ng = basis_->grid().size();
  VectorXd rhs(2 * n_eq_ + ng + 1);
  rhs.head(n_eq_) = w_bc_ * alpha;
  rhs.segment(n_eq_, n_eq_) = w_bc_ * (-beta - 2.0 * alpha);
  rhs.segment(2 * n_eq_, ng) = c * pde_rhs_col_;
  rhs(2 * n_eq_ + ng) = 0.0;
  VectorXd coeffs = pinv_ * rhs;
  if (trace_residual(coeffs, alpha, beta) >
      std::max(1e-3, 0.02 * (alpha.cwiseAbs().maxCoeff() +
                             beta.cwiseAbs().maxCoeff())))
    throw resolution_error(
        "biharmonic solve: trace data not representable at this resolution");
  return coeffs;
}

double BiharmonicSolver::trace_residual(const VectorXd& coeffs,
                                        const VectorXd& alpha,
                                        const VectorXd& beta) const {
  const double r1 = (row_dn_ * coeffs - alpha).cwiseAbs().maxCoeff();
  const double r2 =
      (row_dnl_ * coeffs - (-beta - 2.0 * alpha)).cwiseAbs().maxCoeff();
  return std::max(r1, r2);
}

BoundaryCorrection boundary_correction(const HemisphereBasis& basis,
                                       const VectorXd& w_coeffs,
                                       const MetricEvaluator& metric,
                                       const BiharmonicSolver& solver,
                                       double tol, int max_iter,
                                       const VectorXd* warm_start) {
  BoundaryCorrection out;
  out.coeffs = warm_start ? *warm_start : VectorXd::Zero(basis.n_dofs());
  double best = std::numeric_limits<double>::max();
  VectorXd best_coeffs = out.coeffs;
  for (int it = 0; it < max_iter; ++it) {
    const VectorXd u = w_coeffs + out.coeffs;
    BoundaryResidual r = boundary_residual(basis, u, metric);
    out.residual_history.push_back(r.sup());
    out.iterations = it;
    if (r.sup() < best) {
      best = r.sup();
      best_coeffs = out.coeffs;
    }
    if (r.sup() <= tol) return out;
    const VectorXd delta = solver.solve(-r.contact, -r.natural);
    // The frozen flat-state Jacobian converges linearly with a rate growing
    // with lambda and the data size; each sweep costs one equator pass, so
    // plain iteration with a generous cap is the robust choice.
    const double damp = (it == 0 && !warm_start) ? 0.5 : 1.0;
    out.coeffs += damp * delta;
  }
  BoundaryResidual r =
      boundary_residual(basis, (w_coeffs + out.coeffs).eval(), metric);
  out.residual_history.push_back(r.sup());
  if (r.sup() <= tol) return out;
  if (best <= tol) {
    out.coeffs = best_coeffs;
    return out;
  }
  std::ostringstream oss;
  oss << "boundary correction: Newton stalled, residuals";
  for (double h : out.residual_history) oss << " " << h;
  throw nonconvergence_error(oss.str());
}

}  // namespace bubble
