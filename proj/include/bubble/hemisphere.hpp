#pragma once

#include <Eigen/Dense>
#include <memory>
#include <utility>
#include <vector>

#include "bubble/common.hpp"

namespace bubble {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Quadrature/collocation nodes on the closed upper hemisphere S2+,
// parameterized by colatitude theta in [0, pi/2] and longitude phi in [0, 2pi).
// Colatitude nodes are Gauss-Legendre in x = cos(theta) on [0,1]; phi is a
// uniform grid. The weights integrate against the round measure sin(theta)
// dtheta dphi, so sum(weights) = 2*pi.
struct HemisphereGrid {
  int n_theta = 0;
  int n_phi = 0;
  std::vector<double> theta;
  std::vector<double> x;   // cos(theta), Gauss-Legendre nodes on [0,1]
  std::vector<double> wx;  // Gauss-Legendre weights on [0,1]
  std::vector<double> phi;
  VectorXd weights;  // size n_theta*n_phi

  int size() const { return n_theta * n_phi; }
  int node(int j, int k) const { return j * n_phi + k; }

  static HemisphereGrid make(int n_theta, int n_phi);
};

struct PointSet {
  std::vector<double> theta;
  std::vector<double> phi;
  int size() const { return static_cast<int>(theta.size()); }
};

enum class NeumannClass { X, Trace };  // l-|m| even: X; odd: trace

struct Mode {
  int l = 0;
  int m = 0;  // signed; m>0 cosine, m<0 sine, m=0 axisymmetric
  NeumannClass cls = NeumannClass::X;
  double eigenvalue = 0.0;  // Laplacian eigenvalue -l(l+1)
};

// Spectral tables for a fixed L_max and grid.
//
// Fields are represented in an internal orthonormal basis: for each azimuthal
// order the colatitude profiles sin^m(theta)*q_k(cos theta) are
// orthonormalized by a discrete Stieltjes recurrence. This basis spans
// exactly the degree-<=L_max restricted-harmonic space, so the Laplacian maps
// it to itself and acts by an exact per-order matrix; analysis of grid values
// is a stable orthogonal projection. The (l,m) eigenmodes live in the same
// space and are kept as explicit coefficient columns: they carry the
// Neumann-class tags, the diagonal picture of Delta(Delta+2) on the X class,
// and the parity bookkeeping. (A direct values -> (l,m)-coefficient solve is
// not exposed: the mixed-parity restricted harmonics are a frame with
// exponentially bad conditioning, while every consumer only needs values,
// derivatives, traces, or X-class inner products.)
class HemisphereBasis {
 public:
  HemisphereBasis(int L_max, const HemisphereGrid& grid);

  int L_max() const { return L_max_; }
  int n_dofs() const { return n_dofs_; }
  int n_modes() const { return static_cast<int>(modes_.size()); }
  const std::vector<Mode>& modes() const { return modes_; }
  const HemisphereGrid& grid() const { return grid_; }
  int mode_index(int l, int m) const;

  // Basis value/derivative matrices on the main grid (rows = nodes).
  const MatrixXd& val() const { return val_; }
  const MatrixXd& dtheta() const { return dth_; }
  const MatrixXd& dphi() const { return dph_; }
  const MatrixXd& dtheta2() const { return dthth_; }
  const MatrixXd& dthetaphi() const { return dthph_; }
  const MatrixXd& dphi2() const { return dphph_; }

  // Equator ring theta = pi/2 at the grid's phi nodes.
  const PointSet& equator() const { return equator_; }
  const MatrixXd& eq_val() const { return eq_val_; }
  const MatrixXd& eq_dtheta() const { return eq_dth_; }
  const MatrixXd& eq_dphi() const { return eq_dph_; }
  const MatrixXd& eq_dtheta2() const { return eq_dthth_; }
  const MatrixXd& eq_dthetaphi() const { return eq_dthph_; }
  const MatrixXd& eq_dphi2() const { return eq_dphph_; }
  const MatrixXd& eq_dtheta3() const { return eq_dth3_; }
  const MatrixXd& eq_dtheta2phi() const { return eq_dth2ph_; }
  const MatrixXd& eq_dthetaphi2() const { return eq_dthph2_; }
  // d/dphi on equator-ring samples of a smooth periodic profile
  const MatrixXd& ring_diff() const { return ring_diff_; }

  // order: 0 value, 1 d/dtheta, 2 d/dphi, 3 d2/dtheta2, 4 d2/dthetadphi,
  // 5 d2/dphi2, 6 d3/dtheta3, 7 d3/dtheta2dphi, 8 d3/dthetadphi2.
  MatrixXd evaluate(const PointSet& pts, int order) const;

  VectorXd synthesize(const VectorXd& coeffs) const { return val_ * coeffs; }
  // Stable orthogonal projection of grid values onto the span.
  VectorXd project(const VectorXd& values) const;

  // Exact action of the Laplacian / of Delta(Delta+2) on coefficients.
  VectorXd apply_laplacian(const VectorXd& coeffs) const;
  VectorXd apply_bilaplacian_shifted(const VectorXd& coeffs) const;

  // Coefficient column of the (l,m) eigenmode, and bulk conversion
  // mode-coefficients -> internal coefficients.
  VectorXd mode_rep(int l, int m) const;
  VectorXd from_mode_coeffs(const VectorXd& mode_c) const;

  // X-class modes are mutually orthonormal; these give the orthogonal
  // X-component in mode coordinates and its embedding.
  const std::vector<int>& x_modes() const { return x_modes_; }
  const std::vector<int>& trace_modes() const { return trace_modes_; }
  const MatrixXd& x_rep() const { return TX_; }          // n_dofs x nX
  const MatrixXd& x_values() const { return x_values_; }  // nodes x nX
  VectorXd x_component(const VectorXd& coeffs) const {
    return TX_.transpose() * coeffs;
  }

  // Gram matrix of the restricted (l,m) modes under the L2(S2+) product.
  const MatrixXd& mode_gram() const { return mode_gram_; }

  // Parity sign (+-1) of each internal dof under (w1,w2,w3)->(-w1,-w2,w3).
  const VectorXd& parity_sign() const { return parity_sign_; }

  double integrate(const VectorXd& values) const {
    return grid_.weights.dot(values);
  }

  // Diagonal of Delta(Delta+2) on the X-class modes: l(l+1)(l(l+1)-2).
  const VectorXd& x_stiffness() const { return x_stiff_; }

 private:
  struct AzBlock {
    int m = 0;
    int nk = 0;                  // number of colatitude profiles (L-m+1)
    std::vector<double> alpha;   // Stieltjes recurrence
    std::vector<double> beta;    // beta[0] = norm of 1
    MatrixXd lap;                // nk x nk exact Laplacian block
  };

  struct Dof {
    int m = 0;  // signed
    int k = 0;  // colatitude profile index
  };

  // theta-profile of block |m|, index k: value and first two derivatives.
  void theta_profile(const AzBlock& blk, double x, double s, double c,
                     MatrixXd& q, int k, double out[4]) const;
  void eval_q(const AzBlock& blk, double x, MatrixXd& q) const;

  int L_max_;
  int n_dofs_;
  HemisphereGrid grid_;
  std::vector<Mode> modes_;
  std::vector<int> index_;
  std::vector<AzBlock> blocks_;  // one per |m|
  std::vector<Dof> dofs_;
  std::vector<int> dof_start_;  // first dof of (m, sign-block)
  MatrixXd lap_;                // n_dofs x n_dofs block-diagonal, exact
  MatrixXd val_, dth_, dph_, dthth_, dthph_, dphph_;
  PointSet equator_;
  MatrixXd eq_val_, eq_dth_, eq_dph_, eq_dthth_, eq_dthph_, eq_dphph_;
  MatrixXd eq_dth3_, eq_dth2ph_, eq_dthph2_;
  MatrixXd ring_diff_;
  MatrixXd T_;           // n_dofs x n_modes, mode columns
  std::vector<int> x_modes_, trace_modes_;
  MatrixXd TX_;          // columns for X-class modes
  MatrixXd x_values_;    // grid values of X-class modes
  MatrixXd mode_gram_;   // T^T T
  VectorXd parity_sign_;
  VectorXd x_stiff_;
};

// A scalar field on the hemisphere held dually as coefficients and grid
// values; the two views are synchronized lazily.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(std::shared_ptr<const HemisphereBasis> basis);

  static SpectralField from_coeffs(std::shared_ptr<const HemisphereBasis> b,
                                   VectorXd c);
  static SpectralField from_values(std::shared_ptr<const HemisphereBasis> b,
                                   VectorXd v);
  static SpectralField from_mode_coeffs(
      std::shared_ptr<const HemisphereBasis> b, const VectorXd& mode_c);
  static SpectralField mode(std::shared_ptr<const HemisphereBasis> b, int l,
                            int m, double amplitude = 1.0);

  const VectorXd& coeffs() const;
  const VectorXd& values() const;
  const HemisphereBasis& basis() const { return *basis_; }
  std::shared_ptr<const HemisphereBasis> basis_ptr() const { return basis_; }

  void set_coeffs(VectorXd c);
  void set_values(VectorXd v);

  SpectralField laplacian() const;
  SpectralField bilaplacian_shifted() const;
  std::pair<SpectralField, SpectralField> parity_split() const;

  double integrate() const { return basis_->integrate(values()); }
  double max_abs() const {
    return values().size() ? values().cwiseAbs().maxCoeff() : 0.0;
  }

 private:
  std::shared_ptr<const HemisphereBasis> basis_;
  mutable VectorXd coeffs_, values_;
  mutable bool coeffs_ok_ = false, values_ok_ = false;
};

enum class TraceOrder { Value, DNormal, DNormalLaplacian };

// Trace on the equator ring; the inner conormal eta points into the
// hemisphere, so d/deta = -d/dtheta at theta = pi/2.
VectorXd equator_trace(const SpectralField& f, TraceOrder order);

void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w);

// Associated Legendre P_l^m(x) without Condon-Shortley phase; columns are
// [P, P', P''] for l = 0..L at fixed m.
void legendre_table(int L, int m, double x, MatrixXd& out);

// Full-hemisphere orthonormal normalization of the (l,m) harmonic.
double mode_norm(int l, int m);

}  // namespace bubble
