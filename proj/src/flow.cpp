#include "bubble/flow.hpp"

#include <cmath>

namespace bubble {

Flow::Flow(std::shared_ptr<const HemisphereBasis> basis,
           std::shared_ptr<const HostSurface> surface, FlowParams params)
    : basis_(std::move(basis)),
      surface_(std::move(surface)),
      bsolver_(std::make_shared<BiharmonicSolver>(basis_)),
      params_(std::move(params)) {
  if (params_.lambda < 0.0)
    throw std::invalid_argument("flow: lambda must be nonnegative");
  const double lam_max = surface_->chart_radius() / 1.6;
  if (params_.lambda > lam_max)
    throw regime_error("flow: lambda exceeds the chart regime bound");
  if (params_.dt > dt_max() * (1.0 + 1e-12))
    throw std::invalid_argument("flow: dt exceeds dt_max for this resolution");
}

double Flow::dt_max() const {
  const double L = basis_->L_max();
  const double mu = 0.5 * L * (L + 1.0) * (L * (L + 1.0) - 2.0);
  return 0.5 / mu;
}

VectorXd Flow::x_part(const VectorXd& u_coeffs) const {
  return basis_->x_rep() * (basis_->x_rep().transpose() * u_coeffs);
}

FlowState Flow::admissible_initialize(const Vector3d& p,
                                      const VectorXd& w_seed) const {
  return admissible_initialize(p, w_seed, params_.lambda);
}

FlowState Flow::admissible_initialize(const Vector3d& p,
                                      const VectorXd& w_seed,
                                      double lambda) const {
  FlowState s;
  s.t = 0.0;
  s.xi = surface_->nearest_point(p);
  s.frame = surface_->frame_at(s.xi);
  PullbackMetric g(surface_, s.xi, s.frame, lambda);

  // Remove the kernel components from the seed; they are solved for.
  VectorXd wp = x_part(w_seed);
  const VectorXd k0 = basis_->mode_rep(0, 0);
  const VectorXd k1 = basis_->mode_rep(1, 1);
  const VectorXd k2 = basis_->mode_rep(1, -1);
  wp -= k0.dot(wp) * k0 + k1.dot(wp) * k1 + k2.dot(wp) * k2;

  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  VectorXd wt = VectorXd::Zero(basis_->n_dofs());
  for (int it = 0; it < 30; ++it) {
    const VectorXd w = wp + a(0) * k0 + a(1) * k1 + a(2) * k2;
    BoundaryCorrection bc = boundary_correction(
        *basis_, w, g, *bsolver_, params_.boundary_tol, 100, it ? &wt : nullptr);
    wt = bc.coeffs;
    const VectorXd u = w + wt;
    GeometryData geom = compute_geometry(*basis_, u, g);
    ExtrinsicBarycenter eb = barycenter_extrinsic(*basis_, geom, g);
    Eigen::Vector3d r(geom.area - kTwoPi, eb.x(0), eb.x(1));
    if (r.cwiseAbs().maxCoeff() <= params_.constraint_tol) {
      s.u = u;
      s.w_tilde = wt;
      return s;
    }
    // Jacobian along the kernel modes from the current constraint gradients.
    ConstraintBasis cb = constraint_basis(*basis_, geom, g, eb.x);
    Matrix3d J;
    const VectorXd grads[3] = {-geom.H, cb.norm[1] * cb.psi[1],
                               cb.norm[2] * cb.psi[2]};
    const VectorXd modes[3] = {basis_->synthesize(k0), basis_->synthesize(k1),
                               basis_->synthesize(k2)};
    for (int mu = 0; mu < 3; ++mu)
      for (int nu = 0; nu < 3; ++nu)
        J(mu, nu) = (cb.l2w.array() * grads[mu].array() * modes[nu].array() *
                     geom.radial.array())
                        .sum();
    a -= J.partialPivLu().solve(r);
  }
  throw nonconvergence_error("admissible_initialize: Newton stalled");
}

std::pair<VectorXd, VectorXd> Flow::coupling_fields(
    const FlowState& s, const GeometryData& geom) const {
  const double lam = params_.lambda;
  PullbackMetric g(surface_, s.xi, s.frame, lam);
  CurvatureData cd = surface_->curvature(s.frame, s.xi);

  // Connection coefficients of the transported frame field at xi by central
  // differences through the transport rule (near zero for this transport).
  double Gamma[2][2][2];  // [k][i][j] = <b_k, d_{b_i} b_j>
  {
    const double h = 1e-4 * std::max(1.0, surface_->min_curvature_radius());
    const Vector3d bvec[2] = {s.frame.b1, s.frame.b2};
    for (int i = 0; i < 2; ++i) {
      auto [qp, fp] = surface_->walk(s.frame, s.xi, h * bvec[i]);
      auto [qm, fm] = surface_->walk(s.frame, s.xi, -h * bvec[i]);
      const Vector3d db[2] = {(fp.b1 - fm.b1) / (2.0 * h),
                              (fp.b2 - fm.b2) / (2.0 * h)};
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) Gamma[k][i][j] = bvec[k].dot(db[j]);
    }
  }

  const int n = geom.n;
  VectorXd c1(n), c2(n);
  for (int p = 0; p < n; ++p) {
    const Vector3d& fpt = geom.f[p];
    const Vector2d lx(lam * fpt(0), lam * fpt(1));
    ChartJet jet = surface_->chart_height(s.frame, s.xi, lx, 2);
    const double z = fpt(2);
    const Matrix3d G =
        (lam == 0.0) ? Matrix3d::Identity() : g.metric(fpt);
    for (int i = 0; i < 2; ++i) {
      Vector3d J = Vector3d::Zero();
      J(i) = 1.0;
      for (int k = 0; k < 2; ++k) {
        double gsum = 0.0;
        for (int j = 0; j < 2; ++j) gsum += lam * fpt(j) * Gamma[k][i][j];
        J(k) += gsum - cd.h(i, k) * (jet.phi + lam * z);
      }
      J(2) += lam * z *
              (cd.h(i, 0) * jet.dphi(0) + cd.h(i, 1) * jet.dphi(1));
      const double val = J.dot(G * geom.nu[p]);
      if (i == 0)
        c1(p) = val;
      else
        c2(p) = val;
    }
  }
  return {c1, c2};
}

StateEval Flow::evaluate(const FlowState& s) const {
  StateEval ev;
  PullbackMetric g(surface_, s.xi, s.frame, params_.lambda);
  ev.geom = compute_geometry(*basis_, s.u, g);
  ev.wil = willmore(*basis_, s.u, g, ev.geom);
  ExtrinsicBarycenter eb = barycenter_extrinsic(*basis_, ev.geom, g);
  ev.chart_barycenter = eb.x;
  ev.cb = constraint_basis(*basis_, ev.geom, g, eb.x);
  ev.grad_c1 = ev.cb.norm[1] * ev.cb.psi[1];
  ev.grad_c2 = ev.cb.norm[2] * ev.cb.psi[2];

  ev.ph_perp_w = project_H_perp(ev.geom.H, ev.wil.W, ev.cb.l2w);
  ev.dissipation =
      (ev.cb.l2w.array() * ev.ph_perp_w.array().square()).sum();

  const VectorXd pc1 = project_H_perp(ev.geom.H, ev.grad_c1, ev.cb.l2w);
  const VectorXd pc2 = project_H_perp(ev.geom.H, ev.grad_c2, ev.cb.l2w);
  ev.I1 = (ev.cb.l2w.array() * ev.wil.W.array() * pc1.array()).sum();
  ev.I2 = (ev.cb.l2w.array() * ev.wil.W.array() * pc2.array()).sum();
  ev.xi_dot =
      -params_.lambda * (ev.I1 * s.frame.b1 + ev.I2 * s.frame.b2);

  MetricPath path = metric_time_derivative(surface_, s.xi, s.frame,
                                           params_.lambda, ev.xi_dot);
  ev.tau = tau_correction(*basis_, s.u, ev.cb, path);

  auto [c1, c2] = coupling_fields(s, ev.geom);
  ev.coupling1 = c1;
  ev.coupling2 = c2;
  const VectorXd X = -(ev.I1 * c1 + ev.I2 * c2);

  ev.normal_velocity = ev.tau - project_K_perp(ev.cb, ev.wil.W) -
                       project_K_perp(ev.cb, X);
  if (ev.geom.radial.cwiseAbs().minCoeff() < 0.5)
    throw graph_breakdown_error("flow: radial graph factor below 0.5");
  ev.u_dot = ev.normal_velocity.cwiseQuotient(ev.geom.radial);
  return ev;
}

Vector3d Flow::constraint_correction(FlowState& s) const {
  PullbackMetric g(surface_, s.xi, s.frame, params_.lambda);
  Vector3d first_residual = Vector3d::Zero();
  for (int it = 0; it < 8; ++it) {
    GeometryData geom = compute_geometry(*basis_, s.u, g);
    ExtrinsicBarycenter eb = barycenter_extrinsic(*basis_, geom, g);
    Eigen::Vector3d r(geom.area - kTwoPi, eb.x(0), eb.x(1));
    if (it == 0) first_residual = r;
    if (r.cwiseAbs().maxCoeff() <= params_.constraint_tol) return first_residual;
    ConstraintBasis cb = constraint_basis(*basis_, geom, g, eb.x);
    const VectorXd grads[3] = {-geom.H, cb.norm[1] * cb.psi[1],
                               cb.norm[2] * cb.psi[2]};
    VectorXd dirs[3];
    for (int mu = 0; mu < 3; ++mu) dirs[mu] = basis_->project(cb.psi[mu]);
    Matrix3d J;
    for (int mu = 0; mu < 3; ++mu) {
      const VectorXd dvals = basis_->synthesize(dirs[mu]);
      for (int nu = 0; nu < 3; ++nu)
        J(nu, mu) = (cb.l2w.array() * grads[nu].array() * dvals.array() *
                     geom.radial.array())
                        .sum();
    }
    const Eigen::Vector3d da = J.partialPivLu().solve(-r);
    s.u += da(0) * dirs[0] + da(1) * dirs[1] + da(2) * dirs[2];
  }
  GeometryData geom = compute_geometry(*basis_, s.u, g);
  ExtrinsicBarycenter eb = barycenter_extrinsic(*basis_, geom, g);
  Eigen::Vector3d r(geom.area - kTwoPi, eb.x(0), eb.x(1));
  if (r.cwiseAbs().maxCoeff() > 100.0 * params_.constraint_tol)
    throw nonconvergence_error("constraint correction: Newton stalled");
  return first_residual;
}

void Flow::apply_corrections(FlowState& s, TrajectoryRow* row) const {
  PullbackMetric g(surface_, s.xi, s.frame, params_.lambda);
  const VectorXd w = x_part(s.u);
  BoundaryCorrection bc =
      boundary_correction(*basis_, w, g, *bsolver_, params_.boundary_tol, 100,
                          s.w_tilde.size() ? &s.w_tilde : nullptr);
  s.w_tilde = bc.coeffs;
  s.u = w + bc.coeffs;
  const Vector3d pre = constraint_correction(s);
  if (row) {
    row->area_residual = std::abs(pre(0));
    row->bary_residual = Vector2d(pre(1), pre(2)).norm();
    row->boundary_resid = bc.residual_history.back();
  }
}

void Flow::step(FlowState& s) const {
  const double dt = params_.dt;
  const double theta = params_.imex_theta;
  StateEval ev = evaluate(s);

  // X-class coefficients evolve with the shifted bilaplacian implicit
  // (diagonal on the orthonormal X modes); the correction part of u is
  // rebuilt afterwards.
  const VectorXd a = basis_->x_rep().transpose() * s.u;
  const VectorXd adot = basis_->x_values().transpose() *
                        basis_->grid().weights.cwiseProduct(ev.u_dot);
  const VectorXd& mu = basis_->x_stiffness();
  VectorXd anew(a.size());
  for (int i = 0; i < a.size(); ++i) {
    const double k = 0.5 * mu(i);
    anew(i) = (a(i) + dt * (adot(i) + (1.0 + theta) * k * a(i))) /
              (1.0 + dt * (1.0 + theta) * k);
  }
  VectorXd u_pre = basis_->x_rep() * anew +
                   (s.u - x_part(s.u));  // carry the old correction content

  // barycenter advance (explicit Heun through the surface walk)
  Vector3d xi_new = s.xi;
  Frame frame_new = s.frame;
  if (ev.xi_dot.norm() > 0.0) {
    if (params_.heun_xi) {
      FlowState pred;
      pred.t = s.t + dt;
      pred.u = u_pre;
      auto [xp, fp] = surface_->walk(s.frame, s.xi, dt * ev.xi_dot);
      pred.xi = xp;
      pred.frame = fp;
      StateEval ev2 = evaluate(pred);
      const Vector3d avg = 0.5 * (ev.xi_dot + ev2.xi_dot);
      auto [xn, fn] = surface_->walk(s.frame, s.xi, dt * avg);
      xi_new = xn;
      frame_new = fn;
    } else {
      auto [xn, fn] = surface_->walk(s.frame, s.xi, dt * ev.xi_dot);
      xi_new = xn;
      frame_new = fn;
    }
  }

  s.u = u_pre;
  s.xi = xi_new;
  s.frame = frame_new;
  s.t += dt;
}

Trajectory Flow::run(const FlowState& initial) const {
  Trajectory traj;
  FlowState s = initial;
  double prev_energy = std::numeric_limits<double>::quiet_NaN();
  const int max_steps =
      static_cast<int>(std::ceil(params_.t_end / params_.dt - 1e-9));
  for (int k = 0;; ++k) {
    StateEval ev = evaluate(s);
    TrajectoryRow row;
    row.t = s.t;
    row.t_phys = std::pow(params_.lambda, 4) * s.t;
    row.xi = s.xi;
    row.energy = ev.wil.energy;
    row.area = ev.geom.area;
    auto [ueven, uodd] = SpectralField::from_coeffs(basis_, s.u).parity_split();
    row.u_norm = SpectralField::from_coeffs(basis_, s.u).max_abs();
    row.u_odd_norm = uodd.max_abs();
    row.I1 = ev.I1;
    row.I2 = ev.I2;
    row.dissipation = ev.dissipation;

    if (!std::isnan(prev_energy))
      traj.max_energy_increase =
          std::max(traj.max_energy_increase, row.energy - prev_energy);
    prev_energy = row.energy;

    if (params_.snapshot_every > 0 && k % params_.snapshot_every == 0)
      traj.snapshots.emplace_back(k, s.u);

    const double grad_norm = std::sqrt(std::max(0.0, ev.dissipation));
    if (grad_norm <= params_.stop_tol) {
      traj.rows.push_back(row);
      traj.stop_reason = "stationary";
      break;
    }
    if (k >= max_steps) {
      traj.rows.push_back(row);
      traj.stop_reason = "t_end";
      break;
    }

    step(s);
    apply_corrections(s, &row);
    traj.rows.push_back(row);
  }
  traj.final_state = s;
  return traj;
}

}  // namespace bubble
