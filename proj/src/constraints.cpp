#include "bubble/constraints.hpp"

#include <cmath>

namespace bubble {

ConstraintBasis constraint_basis(const HemisphereBasis& basis,
                                 const GeometryData& geom,
                                 const MetricEvaluator& metric,
                                 const Vector2d& barycenter) {
  ConstraintBasis cb;
  cb.l2w = basis.grid().weights.cwiseProduct(geom.jac);
  cb.barycenter = barycenter;

  BarycenterGradient bg =
      barycenter_gradient(basis, geom, metric, barycenter);
  VectorXd grads[3] = {-geom.H, bg.grad1, bg.grad2};
  for (int mu = 0; mu < 3; ++mu) {
    cb.norm[mu] =
        std::sqrt((cb.l2w.array() * grads[mu].array().square()).sum());
    if (cb.norm[mu] < 1e-12)
      throw regime_error("constraint basis: vanishing gradient norm");
    cb.psi[mu] = grads[mu] / cb.norm[mu];
  }
  for (int mu = 0; mu < 3; ++mu)
    for (int nu = mu; nu < 3; ++nu) {
      const double v =
          (cb.l2w.array() * cb.psi[mu].array() * cb.psi[nu].array()).sum();
      cb.gram(mu, nu) = cb.gram(nu, mu) = v;
    }
  Eigen::SelfAdjointEigenSolver<Matrix3d> es(cb.gram);
  const double emin = es.eigenvalues().minCoeff();
  const double emax = es.eigenvalues().maxCoeff();
  if (emin <= 1e-6)
    throw regime_error("constraint basis: Gram matrix near singular");
  cb.condition = emax / emin;
  cb.gram_inv = cb.gram.inverse();
  return cb;
}

ConstraintBasis constraint_basis(const HemisphereBasis& basis,
                                 const GeometryData& geom,
                                 const MetricEvaluator& metric) {
  Vector2d x;
  if (const auto* pm = dynamic_cast<const PullbackMetric*>(&metric);
      pm != nullptr && pm->lambda() > 0.0) {
    x = barycenter_extrinsic(basis, geom, *pm).x;
  } else {
    x = barycenter_intrinsic(basis, geom, metric).x;
  }
  return constraint_basis(basis, geom, metric, x);
}

VectorXd project_K(const ConstraintBasis& cb, const VectorXd& X) {
  Eigen::Vector3d b;
  for (int mu = 0; mu < 3; ++mu)
    b(mu) = (cb.l2w.array() * cb.psi[mu].array() * X.array()).sum();
  const Eigen::Vector3d c = cb.gram_inv * b;
  return c(0) * cb.psi[0] + c(1) * cb.psi[1] + c(2) * cb.psi[2];
}

VectorXd project_H_perp(const VectorXd& H, const VectorXd& W,
                        const VectorXd& l2w) {
  const double hh = (l2w.array() * H.array().square()).sum();
  if (hh <= 1e-14)
    throw regime_error("project_H_perp: vanishing mean curvature norm");
  const double wh = (l2w.array() * W.array() * H.array()).sum();
  return W - (wh / hh) * H;
}

VectorXd tau_correction(const HemisphereBasis& basis, const VectorXd& u_coeffs,
                        const ConstraintBasis& cb, const MetricPath& path) {
  if (path.scale == 0.0) return VectorXd::Zero(cb.psi[0].size());

  // D2 C^mu . gdot by central differences of area and barycenter under the
  // two shifted pullback metrics (u held fixed).
  double D[3];
  GeometryData gp = compute_geometry(basis, u_coeffs, *path.plus);
  GeometryData gm = compute_geometry(basis, u_coeffs, *path.minus);
  D[0] = (gp.area - gm.area) * path.scale;
  const Vector2d cp = barycenter_extrinsic(basis, gp, *path.plus).x;
  const Vector2d cm = barycenter_extrinsic(basis, gm, *path.minus).x;
  D[1] = (cp(0) - cm(0)) * path.scale;
  D[2] = (cp(1) - cm(1)) * path.scale;

  Eigen::Vector3d rhs;
  for (int mu = 0; mu < 3; ++mu) rhs(mu) = D[mu] / cb.norm[mu];
  const Eigen::Vector3d c = cb.gram_inv * rhs;
  return -(c(0) * cb.psi[0] + c(1) * cb.psi[1] + c(2) * cb.psi[2]);
}

}  // namespace bubble
