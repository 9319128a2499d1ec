#include "bubble/hemisphere.hpp"

#include <cmath>

namespace bubble {

void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = 0.5 * (1.0 + z);
    w[i] = 1.0 / ((1.0 - z * z) * pp * pp);
  }
}

void legendre_table(int L, int m, double x, MatrixXd& out) {
  out.setZero(L + 1, 3);
  if (m > L) return;
  const double u = 1.0 - x * x;
  double dfact = 1.0;
  for (int k = 3; k <= 2 * m - 1; k += 2) dfact *= k;
  double pmm, dpmm, d2pmm;
  if (m == 0) {
    pmm = 1.0;
    dpmm = 0.0;
    d2pmm = 0.0;
  } else {
    const double a = 0.5 * m;
    pmm = dfact * std::pow(u, a);
    dpmm = -dfact * m * x * std::pow(u, a - 1.0);
    d2pmm = -dfact * m * std::pow(u, a - 1.0) +
            dfact * m * (m - 2.0) * x * x * std::pow(u, a - 2.0);
  }
  out(m, 0) = pmm;
  out(m, 1) = dpmm;
  out(m, 2) = d2pmm;
  if (m + 1 <= L) {
    const double c = 2.0 * m + 1.0;
    out(m + 1, 0) = c * x * pmm;
    out(m + 1, 1) = c * (pmm + x * dpmm);
    out(m + 1, 2) = c * (2.0 * dpmm + x * d2pmm);
  }
  for (int l = m + 2; l <= L; ++l) {
    const double a = (2.0 * l - 1.0) / (l - m);
    const double b = (l + m - 1.0) / (l - m);
    out(l, 0) = a * x * out(l - 1, 0) - b * out(l - 2, 0);
    out(l, 1) = a * (out(l - 1, 0) + x * out(l - 1, 1)) - b * out(l - 2, 1);
    out(l, 2) =
        a * (2.0 * out(l - 1, 1) + x * out(l - 1, 2)) - b * out(l - 2, 2);
  }
}

double mode_norm(int l, int m) {
  const double r = std::lgamma(l - m + 1.0) - std::lgamma(l + m + 1.0);
  return std::sqrt((2.0 * l + 1.0) * std::exp(r));
}

HemisphereGrid HemisphereGrid::make(int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 4 || n_phi % 2 != 0)
    throw resolution_error("grid: need n_theta >= 2 and even n_phi >= 4");
  HemisphereGrid g;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  gauss_legendre_01(n_theta, g.x, g.wx);
  g.theta.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) g.theta[j] = std::acos(g.x[j]);
  g.phi.resize(n_phi);
  for (int k = 0; k < n_phi; ++k) g.phi[k] = kTwoPi * k / n_phi;
  g.weights.resize(n_theta * n_phi);
  const double wphi = kTwoPi / n_phi;
  for (int j = 0; j < n_theta; ++j)
    for (int k = 0; k < n_phi; ++k) g.weights[g.node(j, k)] = g.wx[j] * wphi;
  return g;
}

namespace {

// Azimuthal factors, orthonormal over [0, 2pi): value, d/dphi, d2/dphi2.
inline void azimuthal(int m_signed, double phi, double out[3]) {
  const int m = std::abs(m_signed);
  if (m == 0) {
    out[0] = 1.0 / std::sqrt(kTwoPi);
    out[1] = 0.0;
    out[2] = 0.0;
    return;
  }
  const double c = 1.0 / std::sqrt(kPi);
  if (m_signed > 0) {
    out[0] = c * std::cos(m * phi);
    out[1] = -c * m * std::sin(m * phi);
  } else {
    out[0] = c * std::sin(m * phi);
    out[1] = c * m * std::cos(m * phi);
  }
  out[2] = -static_cast<double>(m) * m * out[0];
}

}  // namespace

void HemisphereBasis::eval_q(const AzBlock& blk, double x, MatrixXd& q) const {
  // Rows: k; columns: q, q', q'', q'''. Three-term recurrence and its
  // derivatives.
  q.setZero(blk.nk, 4);
  q(0, 0) = 1.0 / blk.beta[0];
  if (blk.nk == 1) return;
  q(1, 0) = (x - blk.alpha[0]) * q(0, 0) / blk.beta[1];
  q(1, 1) = q(0, 0) / blk.beta[1];
  for (int k = 1; k + 1 < blk.nk; ++k) {
    const double a = blk.alpha[k], b = blk.beta[k], bn = blk.beta[k + 1];
    q(k + 1, 0) = ((x - a) * q(k, 0) - b * q(k - 1, 0)) / bn;
    q(k + 1, 1) = (q(k, 0) + (x - a) * q(k, 1) - b * q(k - 1, 1)) / bn;
    q(k + 1, 2) =
        (2.0 * q(k, 1) + (x - a) * q(k, 2) - b * q(k - 1, 2)) / bn;
    q(k + 1, 3) =
        (3.0 * q(k, 2) + (x - a) * q(k, 3) - b * q(k - 1, 3)) / bn;
  }
}

void HemisphereBasis::theta_profile(const AzBlock& blk, double x, double s,
                                    double c, MatrixXd& q, int k,
                                    double out[4]) const {
  (void)x;
  const int m = blk.m;
  const double q0 = q(k, 0), q1 = q(k, 1), q2 = q(k, 2), q3 = q(k, 3);
  const double sm = std::pow(s, m);
  const double sm1 = (m >= 1) ? std::pow(s, m - 1) : 0.0;
  const double sm2 = (m >= 2) ? std::pow(s, m - 2) : 0.0;
  const double sm3 = (m >= 3) ? std::pow(s, m - 3) : 0.0;
  out[0] = sm * q0;
  out[1] = m * sm1 * c * q0 - sm * s * q1;
  out[2] = m * (m - 1.0) * sm2 * c * c * q0 - m * sm * q0 -
           (2.0 * m + 1.0) * sm * c * q1 + sm * s * s * q2;
  out[3] = m * (m - 1.0) * (m - 2.0) * sm3 * c * c * c * q0 -
           m * (3.0 * m - 2.0) * sm1 * c * q0 -
           3.0 * m * m * sm1 * c * c * q1 + (3.0 * m + 1.0) * sm * s * q1 +
           (3.0 * m + 3.0) * sm * s * c * q2 - sm * s * s * s * q3;
}

HemisphereBasis::HemisphereBasis(int L_max, const HemisphereGrid& grid)
    : L_max_(L_max), grid_(grid) {
  if (L_max < 4) throw resolution_error("basis: L_max must be >= 4");
  if (grid.n_theta < 2 * L_max + 2 || grid.n_phi < 2 * L_max + 2)
    throw resolution_error(
        "basis: grid under-resolved, need n_theta, n_phi >= 2*L_max+2");

  // (l,m) mode list with Neumann-class tags.
  index_.assign((L_max + 1) * (2 * L_max + 1), -1);
  for (int l = 0; l <= L_max; ++l)
    for (int m = -l; m <= l; ++m) {
      Mode md;
      md.l = l;
      md.m = m;
      md.cls = ((l - std::abs(m)) % 2 == 0) ? NeumannClass::X
                                            : NeumannClass::Trace;
      md.eigenvalue = -static_cast<double>(l) * (l + 1);
      index_[l * (2 * L_max + 1) + (m + L_max)] =
          static_cast<int>(modes_.size());
      modes_.push_back(md);
    }

  // Stieltjes recurrences per |m| with an exact 1D rule, then the exact
  // Laplacian block from Delta[s^m q A_m] = s^m [-m(m+1) q - (2m+2) x q' +
  // (1-x^2) q''] A_m. Setup runs in long double: the Laplacian block gets
  // applied twice (Delta^2) and entry roundoff would otherwise surface at
  // the 1e-6 level.
  using ld = long double;
  const int n1d = 2 * L_max + 16;
  std::vector<double> x1d, w1d;
  gauss_legendre_01(n1d, x1d, w1d);
  std::vector<ld> x1(x1d.begin(), x1d.end()), w1(w1d.begin(), w1d.end());
  blocks_.resize(L_max + 1);
  std::vector<std::vector<ld>> alpha_ld(L_max + 1), beta_ld(L_max + 1);
  // Evaluate q, q', q'' in long double by the recurrence.
  auto eval_q_ld = [](const std::vector<ld>& al, const std::vector<ld>& be,
                      int nk, ld x, std::vector<std::array<ld, 3>>& q) {
    q.assign(nk, {0.0L, 0.0L, 0.0L});
    q[0][0] = 1.0L / be[0];
    if (nk == 1) return;
    q[1][0] = (x - al[0]) * q[0][0] / be[1];
    q[1][1] = q[0][0] / be[1];
    for (int k = 1; k + 1 < nk; ++k) {
      const ld a = al[k], b = be[k], bn = be[k + 1];
      q[k + 1][0] = ((x - a) * q[k][0] - b * q[k - 1][0]) / bn;
      q[k + 1][1] = (q[k][0] + (x - a) * q[k][1] - b * q[k - 1][1]) / bn;
      q[k + 1][2] =
          (2.0L * q[k][1] + (x - a) * q[k][2] - b * q[k - 1][2]) / bn;
    }
  };
  std::vector<std::array<ld, 3>> qld;
  for (int m = 0; m <= L_max; ++m) {
    AzBlock& blk = blocks_[m];
    blk.m = m;
    blk.nk = L_max - m + 1;
    std::vector<ld> wm(n1d);
    for (int i = 0; i < n1d; ++i)
      wm[i] = w1[i] * std::pow(1.0L - x1[i] * x1[i], static_cast<ld>(m));
    std::vector<ld> pk(n1d, 0.0L), pkm1(n1d, 0.0L);
    auto& al = alpha_ld[m];
    auto& be = beta_ld[m];
    al.assign(blk.nk, 0.0L);
    be.assign(blk.nk, 0.0L);
    ld norm0 = 0.0L;
    for (int i = 0; i < n1d; ++i) norm0 += wm[i];
    be[0] = std::sqrt(norm0);
    for (int i = 0; i < n1d; ++i) pk[i] = 1.0L / be[0];
    for (int k = 0; k < blk.nk; ++k) {
      ld a = 0.0L;
      for (int i = 0; i < n1d; ++i) a += wm[i] * x1[i] * pk[i] * pk[i];
      al[k] = a;
      if (k + 1 >= blk.nk) break;
      std::vector<ld> r(n1d);
      const ld bprev = (k == 0) ? 0.0L : be[k];
      for (int i = 0; i < n1d; ++i)
        r[i] = (x1[i] - a) * pk[i] - bprev * pkm1[i];
      ld nr = 0.0L;
      for (int i = 0; i < n1d; ++i) nr += wm[i] * r[i] * r[i];
      nr = std::sqrt(nr);
      be[k + 1] = nr;
      pkm1 = pk;
      for (int i = 0; i < n1d; ++i) pk[i] = r[i] / nr;
    }
    blk.alpha.assign(al.begin(), al.end());
    blk.beta.assign(be.begin(), be.end());
    // Laplacian block.
    std::vector<std::vector<ld>> acc(blk.nk, std::vector<ld>(blk.nk, 0.0L));
    for (int i = 0; i < n1d; ++i) {
      eval_q_ld(al, be, blk.nk, x1[i], qld);
      const ld u = 1.0L - x1[i] * x1[i];
      for (int kk = 0; kk < blk.nk; ++kk) {
        const ld lap_theta = -static_cast<ld>(m) * (m + 1.0L) * qld[kk][0] -
                             (2.0L * m + 2.0L) * x1[i] * qld[kk][1] +
                             u * qld[kk][2];
        for (int jj = 0; jj < blk.nk; ++jj)
          acc[jj][kk] += wm[i] * qld[jj][0] * lap_theta;
      }
    }
    blk.lap.resize(blk.nk, blk.nk);
    for (int jj = 0; jj < blk.nk; ++jj)
      for (int kk = 0; kk < blk.nk; ++kk)
        blk.lap(jj, kk) = static_cast<double>(acc[jj][kk]);
  }

  // Internal dof list: for each m, cosine block then (m>0) sine block.
  dof_start_.assign(2 * L_max + 1, -1);
  for (int m = 0; m <= L_max; ++m) {
    dof_start_[m + L_max] = static_cast<int>(dofs_.size());
    for (int k = 0; k < blocks_[m].nk; ++k) dofs_.push_back({m, k});
    if (m > 0) {
      dof_start_[-m + L_max] = static_cast<int>(dofs_.size());
      for (int k = 0; k < blocks_[m].nk; ++k) dofs_.push_back({-m, k});
    }
  }
  n_dofs_ = static_cast<int>(dofs_.size());

  lap_.setZero(n_dofs_, n_dofs_);
  parity_sign_.resize(n_dofs_);
  for (int m = -L_max; m <= L_max; ++m) {
    const int st = dof_start_[m + L_max];
    if (st < 0) continue;
    const AzBlock& blk = blocks_[std::abs(m)];
    lap_.block(st, st, blk.nk, blk.nk) = blk.lap;
    for (int k = 0; k < blk.nk; ++k)
      parity_sign_(st + k) = (std::abs(m) % 2 == 0) ? 1.0 : -1.0;
  }

  // Grid and equator tables.
  PointSet grid_pts;
  grid_pts.theta.resize(grid.size());
  grid_pts.phi.resize(grid.size());
  for (int j = 0; j < grid.n_theta; ++j)
    for (int k = 0; k < grid.n_phi; ++k) {
      grid_pts.theta[grid.node(j, k)] = grid.theta[j];
      grid_pts.phi[grid.node(j, k)] = grid.phi[k];
    }
  val_ = evaluate(grid_pts, 0);
  dth_ = evaluate(grid_pts, 1);
  dph_ = evaluate(grid_pts, 2);
  dthth_ = evaluate(grid_pts, 3);
  dthph_ = evaluate(grid_pts, 4);
  dphph_ = evaluate(grid_pts, 5);

  equator_.theta.assign(grid.n_phi, 0.5 * kPi);
  equator_.phi = grid.phi;
  eq_val_ = evaluate(equator_, 0);
  eq_dth_ = evaluate(equator_, 1);
  eq_dph_ = evaluate(equator_, 2);
  eq_dthth_ = evaluate(equator_, 3);
  eq_dthph_ = evaluate(equator_, 4);
  eq_dphph_ = evaluate(equator_, 5);
  eq_dth3_ = evaluate(equator_, 6);
  eq_dth2ph_ = evaluate(equator_, 7);
  eq_dthph2_ = evaluate(equator_, 8);

  // Spectral differentiation matrix on the uniform equator ring.
  const int np = grid.n_phi;
  ring_diff_.setZero(np, np);
  for (int j = 0; j < np; ++j)
    for (int k = 0; k < np; ++k) {
      if (j == k) continue;
      const int d = j - k;
      ring_diff_(j, k) = 0.5 * ((d % 2 == 0) ? 1.0 : -1.0) /
                         std::tan(0.5 * kTwoPi * d / np);
    }

  // Mode columns: exact 1D inner products of the colatitude parts.
  T_.setZero(n_dofs_, n_modes());
  MatrixXd ptab, q;
  for (int mi = 0; mi < n_modes(); ++mi) {
    const Mode& md = modes_[mi];
    const int m = std::abs(md.m);
    const AzBlock& blk = blocks_[m];
    const int st = dof_start_[md.m + L_max];
    const double nl = mode_norm(md.l, m);
    VectorXd col = VectorXd::Zero(blk.nk);
    for (int i = 0; i < n1d; ++i) {
      legendre_table(md.l, m, x1[i], ptab);
      eval_q(blk, x1[i], q);
      const double wmi = w1[i] * std::pow(1.0 - x1[i] * x1[i], m);
      // <q_k * s^m, nl * P_l^m> with P_l^m = s^m * poly
      const double yp = nl * ptab(md.l, 0) /
                        std::pow(1.0 - x1[i] * x1[i], 0.5 * m);
      for (int k = 0; k < blk.nk; ++k) col(k) += wmi * q(k, 0) * yp;
    }
    T_.col(mi).segment(st, blk.nk) = col;
  }
  mode_gram_ = T_.transpose() * T_;

  for (int mi = 0; mi < n_modes(); ++mi) {
    if (modes_[mi].cls == NeumannClass::X)
      x_modes_.push_back(mi);
    else
      trace_modes_.push_back(mi);
  }
  TX_.resize(n_dofs_, static_cast<int>(x_modes_.size()));
  x_stiff_.resize(static_cast<int>(x_modes_.size()));
  for (size_t i = 0; i < x_modes_.size(); ++i) {
    TX_.col(static_cast<int>(i)) = T_.col(x_modes_[i]);
    const double ev = -modes_[x_modes_[i]].eigenvalue;  // l(l+1)
    x_stiff_(static_cast<int>(i)) = ev * (ev - 2.0);
  }
  x_values_ = val_ * TX_;
}

int HemisphereBasis::mode_index(int l, int m) const {
  if (l < 0 || l > L_max_ || std::abs(m) > l) return -1;
  return index_[l * (2 * L_max_ + 1) + (m + L_max_)];
}

MatrixXd HemisphereBasis::evaluate(const PointSet& pts, int order) const {
  const int np = pts.size();
  MatrixXd out(np, n_dofs_);
  MatrixXd q;
  for (int p = 0; p < np; ++p) {
    const double th = pts.theta[p];
    const double ph = pts.phi[p];
    const double x = std::cos(th), s = std::sin(th);
    for (int m = 0; m <= L_max_; ++m) {
      const AzBlock& blk = blocks_[m];
      eval_q(blk, x, q);
      for (int sgn = 0; sgn < (m == 0 ? 1 : 2); ++sgn) {
        const int ms = (sgn == 0) ? m : -m;
        const int st = dof_start_[ms + L_max_];
        double A[3];
        azimuthal(ms, ph, A);
        for (int k = 0; k < blk.nk; ++k) {
          double W[4];
          theta_profile(blk, x, s, x, q, k, W);  // c == x
          double v = 0.0;
          switch (order) {
            case 0: v = W[0] * A[0]; break;
            case 1: v = W[1] * A[0]; break;
            case 2: v = W[0] * A[1]; break;
            case 3: v = W[2] * A[0]; break;
            case 4: v = W[1] * A[1]; break;
            case 5: v = W[0] * A[2]; break;
            case 6: v = W[3] * A[0]; break;  // d3/dtheta3
            case 7: v = W[2] * A[1]; break;  // d3/dtheta2 dphi
            case 8: v = W[1] * A[2]; break;  // d3/dtheta dphi2
            default: throw std::invalid_argument("evaluate: bad order");
          }
          out(p, st + k) = v;
        }
      }
    }
  }
  return out;
}

VectorXd HemisphereBasis::project(const VectorXd& values) const {
  return val_.transpose() * grid_.weights.cwiseProduct(values);
}

VectorXd HemisphereBasis::apply_laplacian(const VectorXd& coeffs) const {
  return lap_ * coeffs;
}

VectorXd HemisphereBasis::apply_bilaplacian_shifted(
    const VectorXd& coeffs) const {
  VectorXd lc = lap_ * coeffs;
  return lap_ * lc + 2.0 * lc;
}

VectorXd HemisphereBasis::mode_rep(int l, int m) const {
  const int idx = mode_index(l, m);
  if (idx < 0) throw std::invalid_argument("mode_rep: mode out of range");
  return T_.col(idx);
}

VectorXd HemisphereBasis::from_mode_coeffs(const VectorXd& mode_c) const {
  return T_ * mode_c;
}

SpectralField::SpectralField(std::shared_ptr<const HemisphereBasis> basis)
    : basis_(std::move(basis)) {
  coeffs_ = VectorXd::Zero(basis_->n_dofs());
  values_ = VectorXd::Zero(basis_->grid().size());
  coeffs_ok_ = values_ok_ = true;
}

SpectralField SpectralField::from_coeffs(
    std::shared_ptr<const HemisphereBasis> b, VectorXd c) {
  SpectralField f;
  f.basis_ = std::move(b);
  f.coeffs_ = std::move(c);
  f.coeffs_ok_ = true;
  f.values_ok_ = false;
  return f;
}

SpectralField SpectralField::from_values(
    std::shared_ptr<const HemisphereBasis> b, VectorXd v) {
  SpectralField f;
  f.basis_ = std::move(b);
  f.values_ = std::move(v);
  f.values_ok_ = true;
  f.coeffs_ok_ = false;
  return f;
}

SpectralField SpectralField::from_mode_coeffs(
    std::shared_ptr<const HemisphereBasis> b, const VectorXd& mode_c) {
  VectorXd c = b->from_mode_coeffs(mode_c);
  return from_coeffs(std::move(b), std::move(c));
}

SpectralField SpectralField::mode(std::shared_ptr<const HemisphereBasis> b,
                                  int l, int m, double amplitude) {
  VectorXd c = amplitude * b->mode_rep(l, m);
  return from_coeffs(std::move(b), std::move(c));
}

const VectorXd& SpectralField::coeffs() const {
  if (!coeffs_ok_) {
    coeffs_ = basis_->project(values_);
    coeffs_ok_ = true;
  }
  return coeffs_;
}

const VectorXd& SpectralField::values() const {
  if (!values_ok_) {
    values_ = basis_->synthesize(coeffs_);
    values_ok_ = true;
  }
  return values_;
}

void SpectralField::set_coeffs(VectorXd c) {
  coeffs_ = std::move(c);
  coeffs_ok_ = true;
  values_ok_ = false;
}

void SpectralField::set_values(VectorXd v) {
  values_ = std::move(v);
  values_ok_ = true;
  coeffs_ok_ = false;
}

SpectralField SpectralField::laplacian() const {
  return from_coeffs(basis_, basis_->apply_laplacian(coeffs()));
}

SpectralField SpectralField::bilaplacian_shifted() const {
  return from_coeffs(basis_, basis_->apply_bilaplacian_shifted(coeffs()));
}

std::pair<SpectralField, SpectralField> SpectralField::parity_split() const {
  const VectorXd& sign = basis_->parity_sign();
  VectorXd ce = coeffs(), co = coeffs();
  for (int i = 0; i < ce.size(); ++i) {
    if (sign(i) > 0)
      co(i) = 0.0;
    else
      ce(i) = 0.0;
  }
  return {from_coeffs(basis_, std::move(ce)),
          from_coeffs(basis_, std::move(co))};
}

VectorXd equator_trace(const SpectralField& f, TraceOrder order) {
  const auto& b = f.basis();
  const VectorXd& c = f.coeffs();
  switch (order) {
    case TraceOrder::Value:
      return b.eq_val() * c;
    case TraceOrder::DNormal:
      return -(b.eq_dtheta() * c);
    case TraceOrder::DNormalLaplacian:
      return -(b.eq_dtheta() * b.apply_laplacian(c));
  }
  throw std::invalid_argument("equator_trace: bad order");
}

}  // namespace bubble
