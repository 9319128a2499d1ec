#pragma once

#include <array>
#include <functional>
#include <memory>

#include "bubble/surface.hpp"

namespace bubble {

// Ambient metric on the chart box Z2, close to the euclidean one. All
// evaluators are pure; geometry only consumes metric values, first spatial
// derivatives, and Christoffel symbols.
class MetricEvaluator {
 public:
  virtual ~MetricEvaluator() = default;
  virtual Matrix3d metric(const Vector3d& x) const = 0;
  virtual std::array<Matrix3d, 3> dmetric(const Vector3d& x) const = 0;
  virtual bool is_flat() const { return false; }

  // Geodesic maps where available (euclidean and pullback metrics).
  virtual Vector3d exp_map(const Vector3d&, const Vector3d&) const {
    throw std::logic_error("exp_map unavailable for this metric");
  }
  virtual Vector3d log_map(const Vector3d&, const Vector3d&) const {
    throw std::logic_error("log_map unavailable for this metric");
  }
  // Derivative of log_x(y) in y applied to v.
  virtual Vector3d dlog_map(const Vector3d&, const Vector3d&,
                            const Vector3d&) const {
    throw std::logic_error("dlog_map unavailable for this metric");
  }

  // Gamma^al_{be,ga} = 0.5 g^{al,mu} (d_be g_{mu,ga} + d_ga g_{be,mu} -
  // d_mu g_{be,ga}); out[al](be,ga).
  std::array<Matrix3d, 3> christoffels(const Vector3d& x) const;
};

class DeltaMetric final : public MetricEvaluator {
 public:
  Matrix3d metric(const Vector3d&) const override {
    return Matrix3d::Identity();
  }
  std::array<Matrix3d, 3> dmetric(const Vector3d&) const override {
    return {Matrix3d::Zero(), Matrix3d::Zero(), Matrix3d::Zero()};
  }
  bool is_flat() const override { return true; }
  Vector3d exp_map(const Vector3d& x, const Vector3d& v) const override {
    return x + v;
  }
  Vector3d log_map(const Vector3d& x, const Vector3d& y) const override {
    return y - x;
  }
  Vector3d dlog_map(const Vector3d&, const Vector3d&,
                    const Vector3d& v) const override {
    return v;
  }
};

// The rescaled pullback of the euclidean metric under the blown-up chart at
// p: entries are built from the chart height derivatives at lambda * (x1,x2)
// and do not depend on x3. Geodesics are pullbacks of straight lines, which
// gives closed-form exponential and logarithm maps.
class PullbackMetric final : public MetricEvaluator {
 public:
  PullbackMetric(std::shared_ptr<const HostSurface> surface, Vector3d p,
                 Frame frame, double lambda);

  Matrix3d metric(const Vector3d& x) const override;
  std::array<Matrix3d, 3> dmetric(const Vector3d& x) const override;
  bool is_flat() const override { return lambda_ == 0.0; }

  // Blown-up chart map, its differential, and its Newton inverse.
  Vector3d chart_map(const Vector3d& x) const;
  Matrix3d chart_differential(const Vector3d& x) const;
  Vector3d chart_inverse(const Vector3d& y, const Vector3d& guess) const;

  Vector3d exp_map(const Vector3d& x, const Vector3d& v) const override;
  Vector3d log_map(const Vector3d& x, const Vector3d& y) const override;
  Vector3d dlog_map(const Vector3d& x, const Vector3d& y,
                    const Vector3d& v) const override;

  const HostSurface& surface() const { return *surface_; }
  const Vector3d& base() const { return p_; }
  const Frame& frame() const { return frame_; }
  double lambda() const { return lambda_; }

 private:
  std::shared_ptr<const HostSurface> surface_;
  Vector3d p_;
  Frame frame_;
  double lambda_;
};

// delta + sum of scaled analytic symmetric-matrix fields; used to probe
// operators in prescribed metric directions.
class SyntheticMetric final : public MetricEvaluator {
 public:
  using Field = std::function<Matrix3d(const Vector3d&)>;
  using DField = std::function<std::array<Matrix3d, 3>(const Vector3d&)>;

  SyntheticMetric() = default;
  void add(double scale, Field f, DField df);

  Matrix3d metric(const Vector3d& x) const override;
  std::array<Matrix3d, 3> dmetric(const Vector3d& x) const override;

 private:
  struct Part {
    double scale;
    Field f;
    DField df;
  };
  std::vector<Part> parts_;
};

// Analytic matrix direction with its derivative field.
struct MetricDirection {
  SyntheticMetric::Field value;
  SyntheticMetric::DField derivative;
};

// d(pullback metric)/dlambda at lambda = 0: rows/columns (i,3) carry
// h_{ia} x^a.
MetricDirection dmetric_dlambda0(const CurvatureData& cd);

// Second lambda-derivative at lambda = 0; the (i,3) entries are
// d_i h_{ab} x^a x^b and the 2x2 block is 2 h_{ia} h_{jb} x^a x^b.
MetricDirection dmetric_dlambda2(const CurvatureData& cd);

// Central-difference time derivative of the metric family along a barycenter
// path: two pullback metrics at points walked +-h_s along the direction of
// xi_dot (frames transported), with d/dt = |xi_dot| * (g+ - g-) / (2 h_s).
struct MetricPath {
  std::shared_ptr<const PullbackMetric> plus;
  std::shared_ptr<const PullbackMetric> minus;
  double scale = 0.0;  // |xi_dot| / (2 h_s); zero for a stationary path

  Matrix3d derivative(const Vector3d& x) const {
    if (scale == 0.0) return Matrix3d::Zero();
    return scale * (plus->metric(x) - minus->metric(x));
  }
};

MetricPath metric_time_derivative(std::shared_ptr<const HostSurface> surface,
                                  const Vector3d& p, const Frame& frame,
                                  double lambda, const Vector3d& xi_dot,
                                  double h_s = 1e-4);

}  // namespace bubble
