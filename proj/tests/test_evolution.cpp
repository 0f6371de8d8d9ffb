#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "barstab/barstab.hpp"

using namespace barstab;

namespace {

IntegratorConfig config(double dt, double T, int sample_every = 1) {
  IntegratorConfig c;
  c.dt = dt;
  c.T = T;
  c.sample_every = sample_every;
  return c;
}

// Integrates the p/q system u' = A(t) u with the same integrating-factor
// scheme (diagonal of A treated exactly).
std::vector<cplx> integrate_pq(std::vector<cplx> u, double nu, double a, int jmax, int sign, double dt,
                               long steps) {
  const std::size_t n = u.size();
  const Eigen::MatrixXd A0 = build_pq_system(nu, a, 0.0, jmax, sign);
  std::vector<double> half(n), full(n);
  for (std::size_t i = 0; i < n; ++i) {
    half[i] = std::exp(0.5 * dt * A0(i, i));
    full[i] = std::exp(dt * A0(i, i));
  }
  auto rhs = [&](double t, std::span<const cplx> in, std::span<cplx> out) {
    const Eigen::MatrixXd A = build_pq_system(nu, a, t, jmax, sign);
    for (std::size_t r = 0; r < n; ++r) {
      cplx s{};
      for (std::size_t c = 0; c < n; ++c)
        if (c != r) s += A(r, c) * in[c];
      out[r] = s;
    }
  };
  detail::LawsonWork work;
  work.resize(n);
  for (long s = 0; s < steps; ++s)
    detail::lawson_rk4_step(std::span<cplx>(u), half, full, s * dt, dt, rhs, work);
  return u;
}

double relative_error(const SpectralField& got, const SpectralField& want) {
  return (got - want).coeff_norm() / want.coeff_norm();
}

}  // namespace

TEST(EvolveLinear, SingleXModeDecaysViscously) {
  const double nu = 1e-2;
  SpectralField w0(8, 2);
  w0.at(1, 0) = 1.0;
  const Trajectory tr = evolve_linear(w0, nu, 1.0, SliceVariant::full, config(0.5, 1.0 / nu, 10));
  EXPECT_NEAR(tr.snapshots.back()(1, 0).real(), std::exp(-1.0), 1e-8 * std::exp(-1.0));
  SpectralField rest = tr.snapshots.back();
  rest.at(1, 0) = 0.0;
  EXPECT_EQ(rest.coeff_norm(), 0.0);
}

TEST(EvolveLinear, ZeroStaysZero) {
  const Trajectory tr = evolve_linear(SpectralField(6, 3), 1e-3, 1.0, SliceVariant::full, config(0.1, 5.0));
  for (const auto& s : tr.snapshots) EXPECT_EQ(s.coeff_norm(), 0.0);
  for (const auto& d : tr.diagnostics) EXPECT_EQ(d.l2, 0.0);
}

TEST(EvolveLinear, TrajectoryLayout) {
  const Trajectory tr =
      evolve_linear(random_row(8, 2, 2, 1), 1e-3, 1.0, SliceVariant::full, config(0.3, 3.0, 4));
  ASSERT_EQ(tr.times.size(), 11u);
  EXPECT_EQ(tr.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(tr.times.back(), 3.0);
  for (std::size_t i = 1; i < tr.times.size(); ++i) EXPECT_GT(tr.times[i], tr.times[i - 1]);
  const std::vector<double> want{0.0, 1.2, 2.4, 3.0};
  ASSERT_EQ(tr.snapshot_times.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(tr.snapshot_times[i], want[i], 1e-12);
  // Diagnostics are re-derivable from stored fields.
  const DiagnosticSample d = compute_diagnostics(tr.snapshots[1], tr.snapshot_times[1], 1e-3, 1.0);
  EXPECT_EQ(d.l2, tr.diagnostics[4].l2);
  EXPECT_EQ(d.x_norm, tr.diagnostics[4].x_norm);
}

TEST(EvolveLinear, PQCoordinatesMatchTheReducedSystem) {
  const int jmax = 4, N = 2 * jmax + 1;
  const double nu = 1e-2, a = 1.0, dt = 0.05;
  const long steps = 400;
  SpectralField w0(N, 1);
  const SpectralField r = random_field(N, 1, 21, false);
  for (int k = -N; k <= N; ++k) {
    w0.at(k, 1) = r(k, 1);
    w0.at(k, -1) = r(k, -1);
  }
  const Trajectory tr = evolve_linear(w0, nu, a, SliceVariant::full, config(dt, dt * steps, steps));
  const PQCoordinates start = pq_coordinates(w0, jmax), end = pq_coordinates(tr.snapshots.back(), jmax);
  for (int sign : {1, -1}) {
    std::vector<cplx> u;
    for (int j = 0; j <= jmax; ++j) {
      u.push_back((sign > 0 ? start.p_plus : start.p_minus)[j]);
      u.push_back((sign > 0 ? start.q_plus : start.q_minus)[j]);
    }
    const auto v = integrate_pq(u, nu, a, jmax, sign, dt, steps);
    double err = 0.0, norm = 0.0;
    for (int j = 0; j <= jmax; ++j) {
      err += std::norm(v[2 * j] - (sign > 0 ? end.p_plus : end.p_minus)[j]) +
             std::norm(v[2 * j + 1] - (sign > 0 ? end.q_plus : end.q_minus)[j]);
      norm += std::norm(v[2 * j]) + std::norm(v[2 * j + 1]);
    }
    EXPECT_LE(std::sqrt(err / norm), 1e-6);
  }
}

TEST(EvolveLinear, ZeroModeOnRowOneFollowsReducedSystem) {
  // p_0 != 0 drives w^(0, +-1) = p_0 / 2 exactly as the reduced system says.
  const int jmax = 3, N = 2 * jmax + 1;
  const double nu = 1e-2, dt = 0.05;
  const long steps = 200;
  SpectralField w0(N, 1);
  w0.at(0, 1) = 1.0;
  const Trajectory tr = evolve_linear(w0, nu, 1.0, SliceVariant::full, config(dt, dt * steps, steps));
  std::vector<cplx> u(2 * (jmax + 1));
  u[0] = 2.0;
  const auto v = integrate_pq(u, nu, 1.0, jmax, 1, dt, steps);
  EXPECT_NEAR(std::abs(tr.snapshots.back()(0, 1) - 0.5 * v[0]), 0.0, 1e-10);
  EXPECT_GT(std::abs(tr.snapshots.back()(0, 1)), 0.1);
}

TEST(EvolveLinear, MIsInvariant) {
  const SpectralField w0 = project_to_M(random_field(24, 6, 22));
  const Trajectory tr = evolve_linear(w0, 1e-2, 1.0, SliceVariant::full, config(0.1, 100.0));
  for (std::size_t i = 0; i < tr.diagnostics.size(); ++i)
    EXPECT_LE(tr.diagnostics[i].max_pq, 1e-8 * tr.diagnostics[i].l2 / two_pi);
}

TEST(EvolveLinear, RowZeroDecaysDiagonally) {
  const double nu = 2e-2;
  SpectralField w0 = random_field(8, 3, 23);
  const Trajectory tr = evolve_linear(w0, nu, 1.0, SliceVariant::approximate, config(0.2, 20.0));
  for (int k = -8; k <= 8; ++k)
    EXPECT_NEAR(std::abs(tr.snapshots.back()(k, 0) - w0(k, 0) * std::exp(-nu * k * k * 20.0)), 0.0,
                1e-14 * std::abs(w0(k, 0)) + 1e-300);
}

TEST(EvolveLinear, FourthOrderConvergence) {
  const SpectralField w0 = random_row(24, 3, 3, 24);
  auto run = [&](double dt) {
    return evolve_linear(w0, 1e-2, 1.0, SliceVariant::full, config(dt, 12.0, 1 << 30)).snapshots.back();
  };
  const SpectralField ref = run(0.0125);
  const double e1 = (run(0.2) - ref).coeff_norm(), e2 = (run(0.1) - ref).coeff_norm();
  EXPECT_NEAR(e1 / e2, 16.0, 3.0);
}

TEST(EvolveLinear, RealInputStaysConjugateSymmetric) {
  const Trajectory tr = evolve_linear(random_field(12, 4, 25), 1e-3, 1.0, SliceVariant::full, config(0.2, 50.0, 25));
  for (const auto& s : tr.snapshots) EXPECT_LE(conjugate_symmetry_defect(s), 1e-12);
}

TEST(EvolveLinear, Errors) {
  SpectralField mean(4, 2);
  mean.at(0, 0) = 1.0;
  EXPECT_THROW(evolve_linear(mean, 1e-3, 1.0, SliceVariant::full, config(0.1, 1.0)), invalid_input);
  const SpectralField w = random_row(4, 2, 2, 1);
  EXPECT_THROW(evolve_linear(w, 1e-3, 1.0, SliceVariant::full, config(0.0, 1.0)), invalid_input);
  EXPECT_THROW(evolve_linear(w, 1e-3, 1.0, SliceVariant::full, config(0.1, -1.0)), invalid_input);
  EXPECT_THROW(evolve_linear(w, 1e-3, 1.0, SliceVariant::symmetrized, config(0.1, 1.0)), invalid_input);
  EXPECT_THROW(evolve_linear(w, 1e-3, 1.0, SliceVariant::full, config(2.0, 10.0)), invalid_input);
  SpectralField bad = w;
  bad.at(1, 2) = std::nan("");
  try {
    evolve_linear(bad, 1e-3, 1.0, SliceVariant::full, config(0.1, 1.0));
    FAIL() << "expected numerical_blowup";
  } catch (const numerical_blowup& e) {
    EXPECT_EQ(e.step(), 0);
  }
}

TEST(EvolveNonlinear, BarStateIsExact) {
  const double nu = 0.01;
  const SpectralField w0 = bar_state(21, 21, 1, Phase::cosine, 0.0, nu, 1.0);
  IntegratorConfig c = config(1e-3, 2.0, 500);
  c.grid = 64;
  const Trajectory tr = evolve_nonlinear(w0, nu, c);
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i)
    EXPECT_LE(relative_error(tr.snapshots[i], bar_state(21, 21, 1, Phase::cosine, tr.snapshot_times[i], nu, 1.0)),
              1e-6);
  EXPECT_LE(enstrophy_balance_residual(tr), 1e-4);
}

TEST(EvolveNonlinear, DipoleStateIsExact) {
  const double nu = 0.01;
  const SpectralField w0 = dipole_state(21, 21, 1, Phase::cosine, 0.0, nu, 1.0);
  IntegratorConfig c = config(1e-3, 2.0, 500);
  c.grid = 64;
  const Trajectory tr = evolve_nonlinear(w0, nu, c);
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i)
    EXPECT_LE(relative_error(tr.snapshots[i], dipole_state(21, 21, 1, Phase::cosine, tr.snapshot_times[i], nu, 1.0)),
              1e-6);
}

TEST(EvolveNonlinear, ZeroStaysZero) {
  const Trajectory tr = evolve_nonlinear(SpectralField(8, 8, true), 0.01, config(0.01, 0.5));
  for (const auto& s : tr.snapshots) EXPECT_EQ(s.coeff_norm(), 0.0);
  EXPECT_EQ(enstrophy_balance_residual(tr), 0.0);
}

TEST(EvolveNonlinear, RandomFieldEnstrophyBalance) {
  IntegratorConfig c = config(1e-3, 0.5, 100);
  c.grid = 64;
  const Trajectory tr = evolve_nonlinear(random_field(21, 21, 26), 0.01, c);
  EXPECT_LE(enstrophy_balance_residual(tr), 1e-3);
  for (const auto& s : tr.snapshots) {
    EXPECT_LE(conjugate_symmetry_defect(s), 1e-12);
    EXPECT_EQ(s(0, 0), cplx{});
  }
}

TEST(EvolveNonlinear, EulerLimitConservesEnstrophy) {
  const Trajectory tr = evolve_nonlinear(random_field(12, 12, 27), 0.0, config(1e-3, 1.0, 1 << 30));
  const double z0 = tr.diagnostics.front().enstrophy;
  for (const auto& d : tr.diagnostics) EXPECT_LE(std::abs(d.enstrophy - z0), 1e-6 * z0);
}

TEST(EvolveNonlinear, Preconditions) {
  SpectralField complex_field = random_field(6, 6, 1, false);
  EXPECT_THROW(evolve_nonlinear(complex_field, 0.01, config(0.01, 0.1)), invalid_input);
  IntegratorConfig c = config(0.01, 0.1);
  c.grid = 16;
  EXPECT_THROW(evolve_nonlinear(random_field(6, 6, 1), 0.01, c), invalid_input);
  c.grid = 24;
  EXPECT_THROW(evolve_nonlinear(random_field(6, 6, 1), 0.01, c), invalid_input);
  EXPECT_EQ(default_grid(21, true), 64);
  EXPECT_EQ(default_grid(22, true), 128);
}

TEST(EvolveNonlinear, LargeStepWarnsAboutCfl) {
  SpectralField w = bar_state(10, 10, 1, Phase::cosine, 0.0, 0.01, 20.0);
  w += random_field(10, 10, 2);
  const Trajectory tr = evolve_nonlinear(w, 0.01, config(0.5, 0.5));
  EXPECT_FALSE(tr.warnings.empty());
}

TEST(DecayRateFit, SingleModeL2) {
  const double nu = 1e-2;
  SpectralField w0(4, 2);
  w0.at(1, 0) = 1.0;
  const Trajectory tr = evolve_linear(w0, nu, 1.0, SliceVariant::full, config(0.5, 100.0));
  const DecayFit f = decay_rate_fit(tr, NormKind::l2, 0.0, 100.0);
  EXPECT_NEAR(f.rate, 2 * nu, 0.01 * 2 * nu);
}

TEST(DecayRateFit, SyntheticExponential) {
  Trajectory tr;
  for (int i = 0; i <= 20; ++i) {
    DiagnosticSample d;
    d.t = 0.1 * i;
    d.l2 = std::exp(-1.5 * d.t);
    tr.diagnostics.push_back(d);
  }
  const DecayFit f = decay_rate_fit(tr, NormKind::l2, 0.0, 2.0);
  EXPECT_NEAR(f.rate, 3.0, 1e-12);
  EXPECT_NEAR(f.amplitude, 1.0, 1e-12);
  EXPECT_THROW(decay_rate_fit(tr, NormKind::l2, 0.05, 0.15), invalid_input);
  EXPECT_THROW(decay_rate_fit(tr, NormKind::phi, 0.0, 2.0), invalid_input);
}

TEST(DecayRateFit, FloorTruncatesWindow) {
  Trajectory tr;
  for (int i = 0; i <= 100; ++i) {
    DiagnosticSample d;
    d.t = i;
    d.l2 = std::exp(-i);
    tr.diagnostics.push_back(d);
  }
  const DecayFit f = decay_rate_fit(tr, NormKind::l2, 0.0, 100.0, 1e-30);
  EXPECT_EQ(f.samples, 35u);
  EXPECT_NEAR(f.rate, 2.0, 1e-12);
}

TEST(DiagnosticsCsv, HeaderAndRows) {
  const Trajectory tr = evolve_linear(random_row(4, 2, 2, 1), 1e-3, 1.0, SliceVariant::full, config(0.5, 1.0));
  std::ostringstream os;
  write_diagnostics_csv(os, tr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,l2,x_norm,phi,max_pq,enstrophy,grad_norm_sq");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

#if defined(__SSE2__)
TEST(EvolveLinear, RestoresFloatingPointMode) {
  // Compare control bits only; the low six are sticky exception flags.
  const unsigned control = ~0x3Fu;
  const unsigned before = _mm_getcsr() & control;
  evolve_linear(random_row(8, 2, 2, 1), 1e-3, 1.0, SliceVariant::full, config(0.1, 1.0));
  EXPECT_EQ(_mm_getcsr() & control, before);
  // Subnormals survive outside the integrator.
  volatile double tiny = std::numeric_limits<double>::min();
  EXPECT_GT(tiny / 4.0, 0.0);
}
#endif
