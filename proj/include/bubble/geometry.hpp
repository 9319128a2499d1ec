#pragma once

#include "bubble/hemisphere.hpp"
#include "bubble/metric.hpp"

namespace bubble {

// Pointwise geometric data of the radial graph immersion f(w) = (1+u(w)) w
// in (R^3, g). Evaluated either on the quadrature grid or on the equator
// ring.
struct GeometryData {
  int n = 0;
  bool equator = false;
  std::vector<Vector3d> f;      // ambient position
  std::vector<Vector3d> omega;  // unit sphere direction
  std::vector<Vector3d> ft;     // d/dtheta f
  std::vector<Vector3d> fp;     // d/dphi f
  std::vector<Vector3d> nu;     // inner g-unit normal
  std::vector<Matrix2d> gind;   // induced metric in (theta, phi)
  std::vector<Matrix2d> ginv;
  VectorXd H;          // mean curvature, 2 for the round state
  VectorXd h0sq;       // squared norm of the traceless second fundamental form
  VectorXd jac;        // sqrt(det gind)/sin(theta): density against the round measure
  VectorXd radial;     // g(omega, nu): radial graph conversion factor
  VectorXd sin_theta;  // per point
  double area = 0.0;   // only filled on the grid
};

GeometryData compute_geometry(const HemisphereBasis& basis,
                              const VectorXd& u_coeffs,
                              const MetricEvaluator& metric,
                              bool equator = false);

// Laplace-Beltrami of grid values under the induced metric, in divergence
// form. The flux is rebuilt as a smooth tangent vector field in Cartesian
// components so every projected field is regular at the pole.
VectorXd laplace_beltrami(const HemisphereBasis& basis,
                          const GeometryData& geom, const VectorXd& values);

struct WillmoreData {
  VectorXd W;         // scalar Willmore gradient on the grid
  double energy = 0;  // 1/4 int H^2 dmu
  VectorXd H_coeffs;  // projected mean curvature (reused by boundary data)
};

// W = 1/2 (Lap_g H + |h0|^2 H); the ambient curvature term vanishes for the
// flat pullback metrics used here.
WillmoreData willmore(const HemisphereBasis& basis, const VectorXd& u_coeffs,
                      const MetricEvaluator& metric, const GeometryData& geom);

inline double area(const GeometryData& geom) { return geom.area; }
// normal gradient of the area functional: -H
inline VectorXd area_gradient(const GeometryData& geom) { return -geom.H; }

double willmore_energy(const HemisphereBasis& basis, const GeometryData& geom);

}  // namespace bubble
