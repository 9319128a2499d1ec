#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "bubble/common.hpp"

namespace bubble {

using Eigen::Matrix2d;
using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

// Orthonormal tangent frame (b1, b2) at a surface point plus the inner unit
// normal N (pointing into the domain the bubble lives in).
struct Frame {
  Vector3d b1, b2, normal;
};

// Height function jet of the local graph chart over the tangent plane:
// S ni f[p,x] = p + x1 b1 + x2 b2 + phi(x) N.
struct ChartJet {
  double phi = 0.0;
  Vector2d dphi = Vector2d::Zero();
  Matrix2d d2phi = Matrix2d::Zero();
  double d3phi[2][2][2] = {};
};

struct CurvatureData {
  Matrix2d h = Matrix2d::Zero();  // second fundamental form in the frame
  double H = 0.0;                 // h11 + h22
  Vector2d gradH = Vector2d::Zero();  // frame components of grad H^S
  double dh[2][2][2] = {};            // chart derivatives of h
};

// Host surface S = dOmega given as an analytic zero set F = 0 with gradF
// pointing out of Omega. Charts, curvature, projection, and frame transport
// are generic over the implicit function.
class HostSurface {
 public:
  virtual ~HostSurface() = default;

  virtual std::string kind() const = 0;
  virtual double implicit(const Vector3d& y) const = 0;
  virtual Vector3d gradient(const Vector3d& y) const = 0;
  virtual Matrix3d hessian(const Vector3d& y) const = 0;
  // Conservative lower bound on the smallest curvature radius.
  virtual double min_curvature_radius() const = 0;
  // Surface point from two parameters (kind-specific, documented in README).
  virtual Vector3d sample_point(double u, double v) const = 0;

  double chart_radius() const { return 0.25 * min_curvature_radius(); }
  double reach() const { return 0.8 * min_curvature_radius(); }

  Vector3d unit_normal_inner(const Vector3d& p) const;
  Frame frame_at(const Vector3d& p) const;

  // Height of S over p + x1 b1 + x2 b2 along N, with derivatives up to third
  // order (third by central differences of the analytic second jet).
  ChartJet chart_height(const Frame& f, const Vector3d& p, const Vector2d& x,
                        int jet_order = 3) const;
  double chart_height_only(const Frame& f, const Vector3d& p,
                           const Vector2d& x) const;
  Vector3d chart_point(const Frame& f, const Vector3d& p,
                       const Vector2d& x) const;

  CurvatureData curvature(const Frame& f, const Vector3d& p) const;

  // Mean curvature from the divergence of the outward unit normal; the
  // independent oracle for the chart-Hessian trace.
  double mean_curvature(const Vector3d& p) const;
  // Frame components of the tangential gradient of H^S.
  Vector2d grad_H(const Frame& f, const Vector3d& p) const;

  Vector3d nearest_point(const Vector3d& y) const;
  Frame transport(const Frame& f, const Vector3d& p, const Vector3d& q) const;

  // Walk from p along the tangent vector v (ambient step + reprojection),
  // returning the transported frame at the endpoint.
  std::pair<Vector3d, Frame> walk(const Frame& f, const Vector3d& p,
                                  const Vector3d& v) const;
};

class PlaneSurface final : public HostSurface {
 public:
  std::string kind() const override { return "plane"; }
  double implicit(const Vector3d& y) const override { return -y.z(); }
  Vector3d gradient(const Vector3d&) const override {
    return Vector3d(0, 0, -1);
  }
  Matrix3d hessian(const Vector3d&) const override {
    return Matrix3d::Zero();
  }
  double min_curvature_radius() const override { return 40.0; }
  Vector3d sample_point(double u, double v) const override {
    return Vector3d(u, v, 0.0);
  }
};

class SphereSurface final : public HostSurface {
 public:
  explicit SphereSurface(double R) : R_(R) {
    if (R <= 0) throw std::invalid_argument("sphere: R must be positive");
  }
  std::string kind() const override { return "sphere"; }
  double implicit(const Vector3d& y) const override {
    return y.squaredNorm() - R_ * R_;
  }
  Vector3d gradient(const Vector3d& y) const override { return 2.0 * y; }
  Matrix3d hessian(const Vector3d&) const override {
    return 2.0 * Matrix3d::Identity();
  }
  double min_curvature_radius() const override { return R_; }
  Vector3d sample_point(double u, double v) const override {
    return R_ * Vector3d(std::sin(u) * std::cos(v), std::sin(u) * std::sin(v),
                         std::cos(u));
  }
  double radius() const { return R_; }

 private:
  double R_;
};

class EllipsoidSurface final : public HostSurface {
 public:
  EllipsoidSurface(double a, double b, double c) : a_(a), b_(b), c_(c) {
    if (a <= 0 || b <= 0 || c <= 0)
      throw std::invalid_argument("ellipsoid: axes must be positive");
  }
  std::string kind() const override { return "ellipsoid"; }
  double implicit(const Vector3d& y) const override {
    return y.x() * y.x() / (a_ * a_) + y.y() * y.y() / (b_ * b_) +
           y.z() * y.z() / (c_ * c_) - 1.0;
  }
  Vector3d gradient(const Vector3d& y) const override {
    return Vector3d(2.0 * y.x() / (a_ * a_), 2.0 * y.y() / (b_ * b_),
                    2.0 * y.z() / (c_ * c_));
  }
  Matrix3d hessian(const Vector3d&) const override {
    Matrix3d h = Matrix3d::Zero();
    h(0, 0) = 2.0 / (a_ * a_);
    h(1, 1) = 2.0 / (b_ * b_);
    h(2, 2) = 2.0 / (c_ * c_);
    return h;
  }
  double min_curvature_radius() const override {
    const double mn = std::min({a_, b_, c_});
    const double mx = std::max({a_, b_, c_});
    return mn * mn / mx;
  }
  Vector3d sample_point(double u, double v) const override {
    return Vector3d(a_ * std::sin(u) * std::cos(v),
                    b_ * std::sin(u) * std::sin(v), c_ * std::cos(u));
  }
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }

 private:
  double a_, b_, c_;
};

// Graph z = h(x,y) with polynomial height, Omega the region above the graph.
class GraphSurface final : public HostSurface {
 public:
  struct Term {
    int i = 0, j = 0;
    double c = 0.0;
  };
  explicit GraphSurface(std::vector<Term> terms);
  std::string kind() const override { return "graph"; }
  double implicit(const Vector3d& y) const override;
  Vector3d gradient(const Vector3d& y) const override;
  Matrix3d hessian(const Vector3d& y) const override;
  double min_curvature_radius() const override { return rmin_; }
  Vector3d sample_point(double u, double v) const override;
  const std::vector<Term>& terms() const { return terms_; }

 private:
  double height(double x, double y, int dx, int dy) const;
  std::vector<Term> terms_;
  double rmin_ = 1.0;
};

std::shared_ptr<HostSurface> make_surface(const std::string& kind,
                                          const std::vector<double>& params);

}  // namespace bubble
