#pragma once

#include "bubble/boundary.hpp"
#include "bubble/constraints.hpp"

namespace bubble {

struct FlowParams {
  double lambda = 0.05;
  double dt = 1e-5;
  double t_end = 0.1;
  double stop_tol = 1e-9;        // L2 norm of the projected Willmore gradient
  double boundary_tol = 1e-7;
  double constraint_tol = 1e-10;
  double imex_theta = 0.5;       // stabilization of the implicit factor
  int snapshot_every = 0;        // 0: none
  bool heun_xi = true;
};

struct FlowState {
  double t = 0.0;
  VectorXd u;       // coefficients of the graph function
  Vector3d xi;      // barycenter point on the host surface
  Frame frame;      // transported frame at xi
  VectorXd w_tilde; // cached boundary correction (part of u)
};

// Everything the right-hand side produces at a state.
struct StateEval {
  GeometryData geom;
  WillmoreData wil;
  ConstraintBasis cb;
  Vector2d chart_barycenter;
  VectorXd grad_c1, grad_c2;   // unnormalized barycenter gradients
  VectorXd ph_perp_w;          // P_H_perp of the Willmore gradient
  double dissipation = 0.0;    // int |P_H_perp W|^2 dmu
  double I1 = 0.0, I2 = 0.0;
  Vector3d xi_dot = Vector3d::Zero();
  VectorXd tau;
  VectorXd coupling1, coupling2;  // g(J_i, nu) fields
  VectorXd normal_velocity;       // g(f_dot, nu)
  VectorXd u_dot;                 // values
};

struct TrajectoryRow {
  double t = 0.0, t_phys = 0.0;
  Vector3d xi = Vector3d::Zero();
  double energy = 0.0, area = 0.0;
  double u_norm = 0.0, u_odd_norm = 0.0;
  double I1 = 0.0, I2 = 0.0;
  double dissipation = 0.0;
  double area_residual = 0.0, bary_residual = 0.0, boundary_resid = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  std::string stop_reason;  // "t_end", "stationary"
  FlowState final_state;
  std::vector<std::pair<int, VectorXd>> snapshots;
  double max_energy_increase = 0.0;  // worst per-step energy growth
};

class Flow {
 public:
  Flow(std::shared_ptr<const HemisphereBasis> basis,
       std::shared_ptr<const HostSurface> surface, FlowParams params);

  const HemisphereBasis& basis() const { return *basis_; }
  const HostSurface& surface() const { return *surface_; }
  const FlowParams& params() const { return params_; }
  const BiharmonicSolver& biharmonic() const { return *bsolver_; }
  double dt_max() const;

  PullbackMetric metric_at(const FlowState& s) const {
    return PullbackMetric(surface_, s.xi, s.frame, params_.lambda);
  }

  // Admissible state from an X-class seed: the kernel part and the boundary
  // correction are solved so that B = 0, A = 2 pi, C = 0.
  FlowState admissible_initialize(const Vector3d& p,
                                  const VectorXd& w_seed) const;
  // Same, with the scale overridden (used by the expansion scans).
  FlowState admissible_initialize(const Vector3d& p, const VectorXd& w_seed,
                                  double lambda) const;

  StateEval evaluate(const FlowState& s) const;

  // The frame-motion coupling fields g(J_i, nu) at the grid nodes.
  std::pair<VectorXd, VectorXd> coupling_fields(const FlowState& s,
                                                const GeometryData& geom) const;

  void step(FlowState& s) const;
  // Restore A = 2 pi and C = 0 by a Newton update along the constraint
  // gradients; returns the residuals before the correction.
  Vector3d constraint_correction(FlowState& s) const;

  Trajectory run(const FlowState& initial) const;

 private:
  VectorXd x_part(const VectorXd& u_coeffs) const;
  void apply_corrections(FlowState& s, TrajectoryRow* row) const;

  std::shared_ptr<const HemisphereBasis> basis_;
  std::shared_ptr<const HostSurface> surface_;
  std::shared_ptr<const BiharmonicSolver> bsolver_;
  FlowParams params_;
};

}  // namespace bubble
