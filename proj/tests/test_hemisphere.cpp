#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <tuple>

#include "bubble/hemisphere.hpp"
#include "doctest.h"

using namespace bubble;

namespace {

std::shared_ptr<const HemisphereBasis> default_basis(int L = 16, int nt = 40,
                                                     int np = 80) {
  static std::map<std::tuple<int, int, int>,
                  std::shared_ptr<const HemisphereBasis>>
      cache;
  auto key = std::make_tuple(L, nt, np);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto b = std::make_shared<HemisphereBasis>(L, HemisphereGrid::make(nt, np));
  cache[key] = b;
  return b;
}

// omega components as grid-value fields
VectorXd omega_values(const HemisphereGrid& g, int comp) {
  VectorXd v(g.size());
  for (int j = 0; j < g.n_theta; ++j)
    for (int k = 0; k < g.n_phi; ++k) {
      double s = std::sin(g.theta[j]);
      double w1 = s * std::cos(g.phi[k]);
      double w2 = s * std::sin(g.phi[k]);
      double w3 = g.x[j];
      v(g.node(j, k)) = (comp == 1) ? w1 : (comp == 2) ? w2 : w3;
    }
  return v;
}

// Independent Gram oracle: exact phi-orthogonality plus high-resolution 1D
// Gauss-Legendre in x for the colatitude factor.
double gram_oracle(const Mode& a, const Mode& b, int n1d) {
  if (a.m != b.m) return 0.0;
  std::vector<double> x, w;
  gauss_legendre_01(n1d, x, w);
  const int m = std::abs(a.m);
  const int L = std::max(a.l, b.l);
  MatrixXd tab;
  double acc = 0.0;
  for (int i = 0; i < n1d; ++i) {
    legendre_table(L, m, x[i], tab);
    acc += w[i] * tab(a.l, 0) * tab(b.l, 0);
  }
  const double r1 = std::lgamma(a.l - m + 1.0) - std::lgamma(a.l + m + 1.0);
  const double r2 = std::lgamma(b.l - m + 1.0) - std::lgamma(b.l + m + 1.0);
  double n1 = std::sqrt(2.0 * (2.0 * a.l + 1.0) / (4.0 * kPi) * std::exp(r1));
  double n2 = std::sqrt(2.0 * (2.0 * b.l + 1.0) / (4.0 * kPi) * std::exp(r2));
  return kTwoPi * n1 * n2 * acc;
}

}  // namespace

TEST_CASE("grid quadrature invariants") {
  auto g = HemisphereGrid::make(40, 80);
  CHECK(std::abs(g.weights.sum() - kTwoPi) <= 1e-12 * kTwoPi);
  VectorXd w3 = omega_values(g, 3);
  double i2 = (g.weights.array() * w3.array().square()).sum();
  CHECK(std::abs(i2 - kTwoPi / 3.0) <= 1e-10 * (kTwoPi / 3.0));
  // quadrature op examples
  CHECK(std::abs((g.weights.array() * w3.array()).sum() - kPi) <= 1e-10);
  VectorXd w1 = omega_values(g, 1);
  CHECK(std::abs((g.weights.array() * w1.array()).sum()) <= 1e-12);
}

TEST_CASE("mode tags and eigenvalues") {
  auto b = default_basis();
  const auto& modes = b->modes();
  int i10 = b->mode_index(1, 0);
  CHECK(modes[i10].cls == NeumannClass::Trace);
  int i11 = b->mode_index(1, 1);
  CHECK(modes[i11].cls == NeumannClass::X);
  int i20 = b->mode_index(2, 0);
  CHECK(modes[i20].eigenvalue == doctest::Approx(-6.0).epsilon(1e-14));
  int i21 = b->mode_index(2, 1);
  CHECK(modes[i21].cls == NeumannClass::Trace);
}

TEST_CASE("orthonormality within parity classes and Gram oracle") {
  auto b = default_basis(12, 28, 56);
  const auto& G = b->mode_gram();
  const auto& modes = b->modes();
  double worst_same_class = 0.0;
  for (int i = 0; i < b->n_modes(); ++i) {
    for (int j = 0; j < b->n_modes(); ++j) {
      if (modes[i].cls == modes[j].cls) {
        double target = (i == j) ? 1.0 : 0.0;
        worst_same_class = std::max(worst_same_class, std::abs(G(i, j) - target));
      }
    }
  }
  CHECK(worst_same_class <= 1e-10);

  // Full Gram against the independent 1D oracle (includes the nonzero
  // cross-class entries).
  double worst = 0.0;
  for (int i = 0; i < b->n_modes(); ++i)
    for (int j = i; j < b->n_modes(); ++j) {
      double target = gram_oracle(modes[i], modes[j], 96);
      worst = std::max(worst, std::abs(G(i, j) - target));
    }
  CHECK(worst <= 1e-10);
}

TEST_CASE("analyze/synthesize round trip for band-limited fields") {
  auto b = default_basis();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0.0, 1.0);
  VectorXd c(b->n_dofs());
  for (int i = 0; i < c.size(); ++i) c(i) = N(rng);
  VectorXd v = b->synthesize(c);
  VectorXd v2 = b->synthesize(b->project(v));
  CHECK((v2 - v).cwiseAbs().maxCoeff() <= 1e-9 * v.cwiseAbs().maxCoeff());
}

TEST_CASE("laplacian on low modes") {
  auto b = default_basis();
  const auto& g = b->grid();
  for (int comp : {1, 2, 3}) {
    auto f = SpectralField::from_values(b, omega_values(g, comp));
    VectorXd lap = f.laplacian().values();
    VectorXd target = -2.0 * omega_values(g, comp);
    CHECK((lap - target).cwiseAbs().maxCoeff() <= 1e-8);
  }
  auto one = SpectralField::from_values(b, VectorXd::Ones(g.size()));
  CHECK(one.laplacian().values().cwiseAbs().maxCoeff() <= 1e-8);

  // Delta(Delta+2) annihilates span{1, w1, w2}. (Built in coefficients: the
  // restriction of Delta to the hemisphere span is non-normal, so a second
  // application amplifies projection roundoff on value-built fields.)
  double s2pi = std::sqrt(kTwoPi);
  VectorXd c_span = s2pi * b->mode_rep(0, 0) +
                    2.0 * std::sqrt(2.0 * kPi / 3.0) * b->mode_rep(1, 1) -
                    0.5 * std::sqrt(2.0 * kPi / 3.0) * b->mode_rep(1, -1);
  auto fs = SpectralField::from_coeffs(b, c_span);
  VectorXd span = VectorXd::Ones(g.size()) + 2.0 * omega_values(g, 1) -
                  0.5 * omega_values(g, 2);
  CHECK((fs.values() - span).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(fs.bilaplacian_shifted().values().cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("parity split") {
  auto b = default_basis();
  const auto& g = b->grid();
  VectorXd w1 = omega_values(g, 1), w2 = omega_values(g, 2),
           w3 = omega_values(g, 3);

  auto f1 = SpectralField::from_values(b, w1);
  auto [e1, o1] = f1.parity_split();
  CHECK(e1.values().cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((o1.values() - w1).cwiseAbs().maxCoeff() <= 1e-10);

  auto f3 = SpectralField::from_values(b, w3);
  auto [e3, o3] = f3.parity_split();
  CHECK((e3.values() - w3).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(o3.values().cwiseAbs().maxCoeff() <= 1e-10);

  // f = (w1)^2 w2 is odd; oracle is pointwise evaluation of f o r on the
  // grid (phi -> phi + pi is an index shift for even n_phi).
  VectorXd f = w1.array().square() * w2.array();
  VectorXd f_r(f.size());
  for (int j = 0; j < g.n_theta; ++j)
    for (int k = 0; k < g.n_phi; ++k)
      f_r(g.node(j, k)) = f(g.node(j, (k + g.n_phi / 2) % g.n_phi));
  CHECK((f_r + f).cwiseAbs().maxCoeff() <= 1e-12);  // oracle: odd
  auto ff = SpectralField::from_values(b, f);
  auto [fe, fo] = ff.parity_split();
  CHECK(fe.values().cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((fo.values() - f).cwiseAbs().maxCoeff() <= 1e-9);

  // involution / direct sum
  auto [fee, feo] = fe.parity_split();
  CHECK((fee.values() - fe.values()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(feo.values().cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("equator traces") {
  auto b = default_basis();
  const auto& g = b->grid();

  // X-class mode: vanishing normal derivative at the equator
  auto f = SpectralField::mode(b, 4, 2);
  CHECK(equator_trace(f, TraceOrder::DNormal).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(equator_trace(f, TraceOrder::DNormalLaplacian).cwiseAbs().maxCoeff() <=
        1e-8);

  // omega3 = cos(theta): d/deta = sin(theta) = 1 on the equator
  auto f3 = SpectralField::from_values(b, omega_values(g, 3));
  VectorXd t = equator_trace(f3, TraceOrder::DNormal);
  CHECK((t.array() - 1.0).abs().maxCoeff() <= 1e-9);

  auto one = SpectralField::from_values(b, VectorXd::Ones(g.size()));
  VectorXd tv = equator_trace(one, TraceOrder::Value);
  CHECK((tv.array() - 1.0).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("self-adjointness and coercivity") {
  auto b = default_basis();
  const auto& modes = b->modes();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0.0, 1.0);
  VectorXd cf = VectorXd::Zero(b->n_modes()), cg = VectorXd::Zero(b->n_modes());
  for (int i = 0; i < b->n_modes(); ++i) {
    if (modes[i].cls == NeumannClass::X) {
      cf(i) = N(rng);
      cg(i) = N(rng);
    }
  }
  auto f = SpectralField::from_mode_coeffs(b, cf);
  auto g = SpectralField::from_mode_coeffs(b, cg);
  double a1 = b->integrate(
      (f.laplacian().values().array() * g.values().array()).matrix());
  double a2 = b->integrate(
      (f.values().array() * g.laplacian().values().array()).matrix());
  CHECK(std::abs(a1 - a2) <= 1e-9 * std::max(1.0, std::abs(a1)));

  // Every X-class mode orthogonal to span{1,w1,w2} satisfies the spectral
  // gap <f, Delta(Delta+2) f> >= 24 <f,f>.
  for (int i = 0; i < b->n_modes(); ++i) {
    if (modes[i].cls != NeumannClass::X) continue;
    if (modes[i].l <= 1) continue;  // the kernel span{1, w1, w2}
    auto fi = SpectralField::mode(b, modes[i].l, modes[i].m);
    double num = b->integrate(
        (fi.bilaplacian_shifted().values().array() * fi.values().array())
            .matrix());
    double den = b->integrate(fi.values().array().square().matrix());
    CHECK(num >= 24.0 * den - 1e-6);
  }
}
