#include "oracles.hpp"
#include "pdruin/passage_model.hpp"
#include "pdruin/riccati.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pdruin;

namespace {

constexpr double mu = 1.5, lambda = 0.5, q = 0.5, K = 0.75;

ModelSpec phi_k_model(double k, double l, double qq, double m) {
  ModelSpec s;
  s.drift = phi_k_drift(k, l, qq, m);
  s.jump_rate = l;
  s.kill_rate = qq;
  s.jumps = PhaseType::exponential(m);
  return s;
}

// T(x) with the -mu phi variant of the integrability condition
double rejected_variant(double k, double l, double qq, double m, double x) {
  const DriftSpec d = phi_k_drift(k, l, qq, m);
  const double phi = d(x);
  return (d.derivative(x) / 2 + l + qq - m * phi) / std::sqrt(l * m * std::abs(phi));
}

}  // namespace

TEST(Coefficients, ConstantDrift) {
  ModelSpec m;
  m.drift = DriftSpec::constant(2.0);
  m.jump_rate = 1.0;
  m.kill_rate = 0.5;
  m.jumps = PhaseType::exponential(3.0);
  const auto c = to_riccati(m);
  EXPECT_DOUBLE_EQ(c.b0(0.3), -0.5);
  EXPECT_DOUBLE_EQ(c.b1(4.0), 3.0 + 0.75);
  EXPECT_DOUBLE_EQ(c.b2(1.0), -3.0);
  EXPECT_DOUBLE_EQ(c.db0(1.0), 0.0);
  const auto cf = canonical_form(c, m);
  EXPECT_DOUBLE_EQ(cf.z(2.0), 0.75 - 3.0);
}

TEST(Coefficients, PhiKDrift) {
  const auto m = phi_k_model(K, lambda, q, mu);
  const auto c = to_riccati(m);
  for (double x : {0.0, 0.5, 2.0}) {
    EXPECT_NEAR(c.b0(x), -lambda * mu / ((lambda + q) * (K * std::exp(-2 * mu * x) - 1)), 1e-14);
    EXPECT_DOUBLE_EQ(c.b2(x), -mu);
    EXPECT_NEAR(c.db0(x), oracle::derivative(c.b0, x), 1e-7 * std::abs(c.db0(x)));
  }
  // u = q mu (z + mu) / (lambda + q), z = (lambda + q) / phi - mu
  const auto cf = canonical_form(c, m);
  for (double x : {0.1, 1.0}) {
    const double z = (lambda + q) / m.drift(x) - mu;
    EXPECT_NEAR(cf.z(x), z, 1e-14);
    EXPECT_NEAR(cf.u(x), q * mu * mu / (lambda + q) * (z + mu) / mu, 1e-14);
  }
}

TEST(Coefficients, CanonicalFormQZeroAndSubstitution) {
  const auto m0 = phi_k_model(0.5, 1.0, 0.0, 2.0);
  const auto cf0 = canonical_form(to_riccati(m0), m0);
  EXPECT_EQ(cf0.u(0.7), 0.0);

  // y = mu (eta - 1) from the closed form satisfies y' = -y^2 + z y + u
  const auto m = phi_k_model(K, lambda, q, mu);
  const auto cf = canonical_form(to_riccati(m), m);
  auto y = [&](double x) { return mu * (phi_k_eta(K, lambda, q, mu, x) - 1.0); };
  for (double x : {0.3, 1.0, 2.5}) {
    const double lhs = oracle::derivative(y, x);
    EXPECT_NEAR(lhs, -y(x) * y(x) + cf.z(x) * y(x) + cf.u(x), 1e-8);
  }
}

TEST(Coefficients, Preconditions) {
  ModelSpec m = phi_k_model(K, lambda, q, mu);
  m.jumps = PhaseType::erlang(2, 1.0);
  EXPECT_THROW(to_riccati(m), std::invalid_argument);
  m = phi_k_model(K, lambda, q, mu);
  m.direction = JumpDirection::upward;
  EXPECT_THROW(to_riccati(m), std::invalid_argument);
}

TEST(Integrability, PhiKFamilyPassesWithZeroC1) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> kd(-3.0, 0.95), pos(0.1, 3.0), qd(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    double k = kd(rng);
    if (k == 0.0) k = 0.5;
    const auto m = phi_k_model(k, pos(rng), qd(rng), pos(rng));
    const auto res = integrability_test(to_riccati(m), chebyshev_grid(0.0, 5.0));
    EXPECT_TRUE(res.integrable);
    EXPECT_LT(std::abs(res.params.c1), 1e-8 * res.scale);
    // the identity phi' + 2 mu phi + 2 (lambda + q) = 0 behind it
    const auto& s = std::get<DriftSpec::PhiKFamily>(m.drift.kind());
    for (double x : {0.0, 1.3, 4.0})
      EXPECT_LT(std::abs(m.drift.derivative(x) + 2 * s.mu * m.drift(x) + 2 * (s.lambda + s.q)), 1e-12 * (1 + std::abs(s.K)) * (s.lambda + s.q + 1));
  }
}

TEST(Integrability, ConstantDriftPasses) {
  ModelSpec m = phi_k_model(K, lambda, q, mu);
  m.drift = DriftSpec::constant(1.3);
  EXPECT_TRUE(integrability_test(to_riccati(m), chebyshev_grid(0.0, 5.0)).integrable);
}

TEST(Integrability, PerturbedDriftFails) {
  const DriftSpec base = phi_k_drift(K, lambda, q, mu);
  auto phi = [base](double x) { return base(x) + 0.01 * std::sin(x); };
  auto dphi = [base](double x) { return base.derivative(x) + 0.01 * std::cos(x); };
  const auto res = integrability_test(riccati_coefficients(phi, dphi, lambda, q, mu), chebyshev_grid(0.0, 5.0));
  EXPECT_FALSE(res.integrable);
  EXPECT_GT(res.max_deviation, 1e-4);
}

TEST(Integrability, SignOfTheDriftTermIsPlus) {
  // the implemented test function is, up to kappa, (phi'/2 + lambda + q + mu phi) / sqrt(lambda mu |phi|)
  const auto m = phi_k_model(K, lambda, q, mu);
  const auto res = integrability_test(to_riccati(m), chebyshev_grid(0.0, 5.0));
  for (std::size_t i = 0; i < res.grid.size(); i += 17) {
    const double x = res.grid[i];
    const double phi = m.drift(x);
    const double plus = (m.drift.derivative(x) / 2 + lambda + q + mu * phi) / std::sqrt(lambda * mu * std::abs(phi));
    EXPECT_NEAR(std::abs(res.test_function[i]), std::abs(plus), 1e-12);
  }
  EXPECT_TRUE(res.integrable);
  // the -mu phi variant is far from constant on the same family
  double lo = 1e300, hi = -1e300;
  for (double x : res.grid) {
    const double t = rejected_variant(K, lambda, q, mu, x);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  EXPECT_GT(hi - lo, 0.1);
}

TEST(Integrability, TransformedEquation) {
  const auto m = phi_k_model(K, lambda, q, mu);
  const auto res = integrability_test(to_riccati(m), chebyshev_grid(0.0, 5.0));
  const double k1 = phi_k_k1(K, lambda, q);
  // eta_bar = G eta equals (e^{2 xbar} - K1) / (e^{2 xbar} + K1) and solves d eta_bar / d xbar = 1 - eta_bar^2
  auto ebar = [&](double x) { return res.params.G(x) * phi_k_eta(K, lambda, q, mu, x); };
  for (double x : {0.2, 1.0, 3.0}) {
    const double xb = xbar(x, K, lambda, q, mu);
    EXPECT_NEAR(ebar(x), (std::exp(2 * xb) - k1) / (std::exp(2 * xb) + k1), 1e-12);
    const double d_dx = oracle::derivative(ebar, x);
    const double dxb = oracle::derivative([&](double s) { return xbar(s, K, lambda, q, mu); }, x);
    EXPECT_NEAR(d_dx / dxb, 1.0 - ebar(x) * ebar(x), 1e-9);
    // D is the derivative of the new coordinate (c0 = 1, c1 = 0, |c2| = 1)
    EXPECT_NEAR(std::abs(res.params.D(x)), dxb, 1e-9);
  }
}

TEST(Integrability, Errors) {
  const auto m = phi_k_model(K, lambda, q, mu);
  EXPECT_THROW(integrability_test(to_riccati(m), {}), std::invalid_argument);
  // phi_K with K = 2 vanishes inside [0, 1]
  const auto bad = phi_k_model(2.0, 1.0, 0.0, 1.0);
  EXPECT_THROW(integrability_test(to_riccati(bad), chebyshev_grid(0.0, 1.0)), std::domain_error);
  EXPECT_THROW(chebyshev_grid(0.0, 1.0, 1), std::invalid_argument);
}

TEST(PhiK, DriftValues) {
  const DriftSpec d = phi_k_drift(K, lambda, q, mu);
  EXPECT_NEAR(d(0.0), (lambda + q) / mu * (K - 1), 1e-15);
  EXPECT_NEAR(d(0.0), -1.0 / 6.0, 1e-15);
  EXPECT_NEAR(d(40.0), -(lambda + q) / mu, 1e-15);
  const DriftSpec c = phi_k_drift(0.0, lambda, q, mu);
  EXPECT_TRUE(c.is_constant());
  EXPECT_NEAR(c(3.0), -(lambda + q) / mu, 1e-15);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng);
    EXPECT_LT(std::abs(d.derivative(x) + 2 * mu * d(x) + 2 * (lambda + q)), 1e-12);
  }
}

TEST(PhiK, Xbar) {
  EXPECT_EQ(xbar(0.0, K, lambda, q, mu), 0.0);
  const double x = 1.0;
  const double fd = oracle::derivative([&](double s) { return xbar(s, K, lambda, q, mu); }, x, 1e-3);
  EXPECT_NEAR(fd, std::sqrt(-lambda * mu / phi_k_drift(K, lambda, q, mu)(x)), 1e-8);
  const double big = 40.0;
  const double lin = std::sqrt(lambda / (lambda + q)) * mu * big;
  EXPECT_LT(std::abs(xbar(big, K, lambda, q, mu) - lin) / lin, 0.01);
  EXPECT_THROW(xbar(-1.0, K, lambda, q, mu), std::domain_error);
  EXPECT_THROW(xbar(1.0, 1.2, lambda, q, mu), std::invalid_argument);
}

TEST(PhiK, ClosedFormFrozenValues) {
  // independent high-accuracy integration of the linear system from (1, 1)
  const double psi_ref[] = {1,
                            0.603942196868003,
                            0.475931898782191,
                            0.381910575742606,
                            0.306903858417455,
                            0.246527231523338,
                            0.197961011979429,
                            0.15893663504757,
                            0.127596767787097,
                            0.102434071675291,
                            0.0822328251357195};
  const double m_ref[] = {1,
                          0.847926072842201,
                          0.678969725326764,
                          0.542987484662318,
                          0.435050712320688,
                          0.348966291833012,
                          0.280056378343135,
                          0.224798649359316,
                          0.180457175959603,
                          0.144865944865442,
                          0.116295420838072};
  for (int i = 0; i <= 10; ++i) {
    const auto v = phi_k_closed_form(K, lambda, q, mu, 0.5 * i);
    EXPECT_NEAR(v.psi, psi_ref[i], 1e-11);
    EXPECT_NEAR(v.m, m_ref[i], 1e-11);
  }
  const auto far = phi_k_closed_form(K, lambda, q, mu, 30.0);
  EXPECT_NEAR(far.psi / 1.39628743412642e-06, 1.0, 1e-8);
  EXPECT_NEAR(far.m / 1.97464862631272e-06, 1.0, 1e-8);
  const auto origin = phi_k_closed_form(K, lambda, q, mu, 0.0);
  EXPECT_EQ(origin.psi, 1.0);
  EXPECT_EQ(origin.m, 1.0);
}

TEST(PhiK, ClosedFormSolvesSystem) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> kd(-2.0, 0.9), pos(0.2, 2.0);
  for (int i = 0; i < 20; ++i) {
    const double k = kd(rng), l = pos(rng), qq = pos(rng), m = pos(rng);
    const auto sys = assemble_system(phi_k_model(k, l, qq, m));
    auto y = [&](double x) {
      const auto v = phi_k_closed_form(k, l, qq, m, x);
      oracle::Vec out(2);
      out << v.psi, v.m;
      return out;
    };
    for (double x : {0.1, 0.8, 2.0, 5.0}) EXPECT_LT(oracle::system_residual(sys, y, x), 1e-8);
    // the two branches are solutions as well
    for (int b = 0; b < 2; ++b) {
      auto yb = [&](double x) {
        const auto br = phi_k_branches(k, l, qq, m, x);
        const PsiM v = b == 0 ? br.growing : br.decaying;
        oracle::Vec out(2);
        out << v.psi, v.m;
        return out;
      };
      EXPECT_LT(oracle::system_residual(sys, yb, 1.0), 1e-8);
    }
  }
}

TEST(PhiK, NormalizedPairFromBranches) {
  const double k1 = phi_k_k1(K, lambda, q);
  for (double x : {0.0, 1.0, 4.0}) {
    const auto br = phi_k_branches(K, lambda, q, mu, x);
    const auto v = phi_k_closed_form(K, lambda, q, mu, x);
    EXPECT_NEAR(v.psi, (br.growing.psi + k1 * br.decaying.psi) / (1 + k1), 1e-14);
    EXPECT_NEAR(v.m, (br.growing.m + k1 * br.decaying.m) / (1 + k1), 1e-14);
    EXPECT_NEAR(phi_k_eta(K, lambda, q, mu, x), v.psi / v.m, 1e-14);
  }
}

TEST(PhiK, AsymptoticRate) {
  EXPECT_EQ(asymptotic_rate(1.0, 0.0, 2.0), 0.0);
  EXPECT_NEAR(asymptotic_rate(lambda, q, mu), 1.5 * (std::sqrt(0.5) - 1), 1e-15);
  EXPECT_NEAR(asymptotic_rate(lambda, q, mu), -0.43934, 1e-5);
  EXPECT_NEAR(asymptotic_rate(1.0, 1e12, 2.0), -2.0, 1e-5);
  const double x = 30.0 / mu;
  const double slope =
      oracle::derivative([&](double s) { return std::log(phi_k_closed_form(K, lambda, q, mu, s).psi); }, x);
  EXPECT_LT(std::abs(slope / asymptotic_rate(lambda, q, mu) - 1.0), 0.01);
  EXPECT_THROW(asymptotic_rate(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST(RiccatiNumeric, ConvergesToStableFixedPoint) {
  ModelSpec m;
  m.drift = DriftSpec::constant(-1.0);
  m.jump_rate = 1.0;
  m.kill_rate = 1.0;
  m.jumps = PhaseType::exponential(2.0);
  const auto c = to_riccati(m);
  // b0 = 1, b1 = 0, b2 = -2: fixed points +-1/sqrt2, the positive one attracts forward
  const auto sol = riccati_numeric(c, 0.0, 0.0, 20.0);
  EXPECT_NEAR(sol.eta(20.0), 1.0 / std::sqrt(2.0), 1e-9);
}

TEST(RiccatiNumeric, BlowUpLocated) {
  // eta' = 1 - 2 eta^2 started below -1/sqrt2 runs into a pole
  ModelSpec m;
  m.drift = DriftSpec::constant(-1.0);
  m.jump_rate = 1.0;
  m.kill_rate = 1.0;
  m.jumps = PhaseType::exponential(2.0);
  const double a = 1.0 / std::sqrt(2.0), eta0 = -1.0;
  // separable: (eta - a) / (eta + a) = R0 e^{-4 a x}, eta -> -inf where this ratio reaches 1
  const double ratio0 = (eta0 - a) / (eta0 + a);
  const double pole = std::log(ratio0) / (4.0 * a);
  try {
    riccati_numeric(to_riccati(m), eta0, 0.0, 5.0);
    FAIL() << "expected a blow-up";
  } catch (const RiccatiBlowUp& e) {
    EXPECT_NEAR(e.location, pole, 1e-3);
  }
}

TEST(RiccatiNumeric, MatchesClosedFormEta) {
  const auto m = phi_k_model(K, lambda, q, mu);
  const auto sol = riccati_numeric(to_riccati(m), 1.0, 0.0, 5.0);
  for (double x = 0.0; x <= 5.0; x += 0.25) {
    EXPECT_NEAR(sol.eta(x), phi_k_eta(K, lambda, q, mu, x), 1e-7);
    const auto v = sol.reconstruct(x);
    const auto ref = phi_k_closed_form(K, lambda, q, mu, x);
    EXPECT_NEAR(v.psi, ref.psi, 1e-8);
    EXPECT_NEAR(v.m, ref.m, 1e-8);
  }
}

TEST(RiccatiNumeric, ReconstructionSolvesLinearSystem) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> kd(-2.0, 0.9), pos(0.2, 2.0);
  for (int i = 0; i < 10; ++i) {
    const auto m = phi_k_model(kd(rng), pos(rng), pos(rng), pos(rng));
    const auto sol = riccati_numeric(to_riccati(m), 1.0, 0.0, 6.0);
    std::vector<double> grid;
    std::vector<oracle::Vec> values;
    for (int k = 0; k <= 24; ++k) {
      const double x = 0.25 * k;
      const auto v = sol.reconstruct(x);
      oracle::Vec y(2);
      y << v.psi, v.m;
      grid.push_back(x);
      values.push_back(y);
    }
    EXPECT_LT(oracle::one_step_defect(assemble_system(m), grid, values), 1e-8);
  }
}
