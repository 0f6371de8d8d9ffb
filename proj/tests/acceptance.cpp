// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "barstab/barstab.hpp"

using namespace barstab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

Outcome ac1() {
  const std::vector<double> nus{0.005, 0.002, 0.001, 0.0005, 0.00025, 0.0001};
  const auto sweep = nu_sweep(2, 100, nus);
  const ScalingFit all = fit_scaling(sweep);
  const ScalingFit small = fit_scaling(std::vector<SweepEntry>(sweep.begin() + 2, sweep.end()));
  const bool pass = all.slope >= 0.4 && all.slope <= 0.6 && small.slope >= 0.45 && small.slope <= 0.55;
  return {pass, "slope " + num(all.slope) + ", four smallest nu " + num(small.slope)};
}

Outcome ac2() {
  const std::vector<double> nus{0.00025, 0.0001, 0.00005};
  const int count = 30;
  const auto rows = collapse_table(2, 100, nus, count);
  // Rows are grouped by viscosity; the two smallest are the last two groups.
  std::vector<double> rel(count);
  for (int j = 0; j < count; ++j) {
    const double a = rows[count + j].scaled_real, b = rows[2 * count + j].scaled_real;
    rel[j] = std::abs(a - b) / std::abs(b);
  }
  double worst5 = 0.0;
  for (int j = 0; j < 5; ++j) worst5 = std::max(worst5, rel[j]);
  std::vector<double> ranks(count);
  for (int j = 0; j < count; ++j) ranks[j] = j + 1;
  const LineFit trend = least_squares_line(ranks, rel);
  double head = 0.0, tail = 0.0;
  for (int j = 0; j < 5; ++j) head += rel[j] / 5.0;
  for (int j = 20; j < 30; ++j) tail += rel[j] / 10.0;
  const bool pass = worst5 <= 0.15 && trend.slope > 0.0 && tail >= head;
  return {pass, "ranks 1-5 max disagreement " + num(worst5) + ", trend slope " + num(trend.slope) +
                    ", mean 1-5 " + num(head) + " vs 21-30 " + num(tail)};
}

Outcome ac3() {
  const double nu = 1e-3;
  SpectralField w0(32, 4);
  w0.at(1, 0) = 1.0;
  IntegratorConfig cfg;
  cfg.dt = 0.5;
  cfg.T = 1.0 / nu;
  cfg.sample_every = std::numeric_limits<int>::max();
  const SpectralField w = evolve_linear(w0, nu, 1.0, SliceVariant::full, cfg).snapshots.back();
  const double rel = std::abs(w(1, 0) - std::exp(-1.0)) / std::exp(-1.0);
  double leak = 0.0;
  for (int l = -w.ny(); l <= w.ny(); ++l)
    for (int k = -w.nx(); k <= w.nx(); ++k)
      if (!(k == 1 && l == 0)) leak = std::max(leak, std::abs(w(k, l)));
  return {rel <= 1e-8 && leak <= 1e-12, "relative error " + num(rel) + ", leak " + num(leak)};
}

Outcome ac4() {
  const double nu = 1e-3;
  const SpectralField w0 = project_to_M(random_field(64, 64, 4));
  IntegratorConfig cfg;
  cfg.dt = 0.04;
  cfg.T = 1.0 / nu;
  cfg.sample_every = std::numeric_limits<int>::max();
  const Trajectory tr = evolve_linear(w0, nu, 1.0, SliceVariant::full, cfg);
  double worst = 0.0;
  for (const auto& d : tr.diagnostics) worst = std::max(worst, d.max_pq / (d.l2 / two_pi));
  return {worst <= 1e-8, num(static_cast<double>(tr.diagnostics.size())) +
                             " samples, max anomalous / ||w|| " + num(worst)};
}

Outcome ac5() {
  const SpectralField w0 = random_row(64, 2, 2, 5);
  const DecayCheck a = theorem_decay_check(w0, 1e-3, 1.0, 1e3, 0.05);
  const DecayCheck b = theorem_decay_check(w0, 1e-4, 1.0, 1e4, 0.1);
  const double ra = a.rate / a.diffusion_rate, rb = b.rate / b.diffusion_rate;
  const double spread = std::max(a.M, b.M) / std::min(a.M, b.M);
  return {ra >= 5.0 && rb >= 5.0 && spread <= 2.0,
          "rate / diffusion " + num(ra) + " (nu=1e-3), " + num(rb) + " (nu=1e-4); M " + num(a.M) + ", " +
              num(b.M)};
}

Outcome ac6() {
  const double nu = 1e-4;
  const M0Estimate m0 = auto_M0(1.0, 2, nu);
  const HypoConstants c = constants_from_M0(m0.M0_est, 1.0, 2, nu);
  DiagnosticsOptions opts;
  opts.phi = c;
  IntegratorConfig cfg;
  cfg.dt = 0.1;
  cfg.T = 1.0 / nu;
  cfg.sample_every = std::numeric_limits<int>::max();
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Trajectory tr = evolve_linear(random_row(64, 2, 2, seed), nu, 1.0, SliceVariant::approximate, cfg, opts);
    const PhiDissipation r = phi_dissipation_check(tr, c);
    if (r.empty()) return {false, "seed " + std::to_string(seed) + " gave no samples"};
    worst = std::max(worst, r.max_ratio);
    samples += r.ratios.size();
  }
  return {worst < 0.0, "M0 " + num(m0.M0_est) + ", " + std::to_string(samples) +
                           " interior samples, max (dPhi/dt)/Phi " + num(worst)};
}

Outcome ac7() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> M0(1e-3, 10.0), a(0.05, 20.0);
  std::uniform_int_distribution<int> ell(1, 50);
  double worst = 0.0;
  bool pinch = true;
  for (int i = 0; i < 100; ++i) {
    const HypoConstants c = constants_from_M0(M0(gen), a(gen), ell(gen), 1e-3);
    worst = std::max(worst, std::abs(c.beta0 - 4.0 * c.alpha0 * c.alpha0) / c.beta0);
    pinch = pinch && c.beta0 * c.beta0 < c.alpha0 * c.gamma0 / 4.0;
  }
  return {worst <= 1e-12 && pinch, "max relative defect " + num(worst) + (pinch ? ", pinch holds" : ", pinch fails")};
}

Outcome ac8() {
  // Drive estimate_M0 through coefficients 1e3..1e5 times the Laplacian coefficient 1/8.
  const double nu = 1e-3, d = 0.125;
  std::vector<double> lx, ly;
  for (double ratio : {1e3, 2e3, 5e3, 1e4, 2e4, 5e4, 1e5}) {
    const double beta0 = 2.0 * nu * ratio * d / 4.0;  // a = 1, ell = 2
    const M0Estimate e = estimate_M0(beta0, nu, 1.0, 2, 0.0);
    lx.push_back(std::log(e.coefficient));
    ly.push_back(std::log(e.lambda_min));
  }
  const LineFit f = least_squares_line(lx, ly);
  return {std::abs(f.slope - 0.5) <= 0.05 * 0.5, "log-log slope " + num(f.slope)};
}

Outcome ac9() {
  const double nu = 0.01;
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 10.0;
  cfg.sample_every = 100;
  cfg.grid = 64;
  double worst = 0.0, balance = 0.0;
  for (bool dipole : {false, true}) {
    auto exact = [&](double t) {
      return dipole ? dipole_state(21, 21, 1, Phase::cosine, t, nu, 1.0) : bar_state(21, 21, 1, Phase::cosine, t, nu, 1.0);
    };
    const Trajectory tr = evolve_nonlinear(exact(0.0), nu, cfg);
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
      const SpectralField want = exact(tr.snapshot_times[i]);
      worst = std::max(worst, (tr.snapshots[i] - want).coeff_norm() / want.coeff_norm());
    }
    balance = std::max(balance, enstrophy_balance_residual(tr));
  }
  IntegratorConfig rc = cfg;
  rc.T = 1.0;
  balance = std::max(balance, enstrophy_balance_residual(evolve_nonlinear(random_field(21, 21, 9), nu, rc)));
  return {worst <= 1e-6 && balance <= 1e-3, "max relative error " + num(worst) + ", enstrophy residual " + num(balance)};
}

Outcome ac10() {
  double worst = -std::numeric_limits<double>::infinity();
  for (int ell : {1, 2, 3, 5})
    for (double nu : {1e-2, 1e-3, 1e-4})
      for (double t : {0.0, 100.0}) {
        const Spectrum s = spectrum(build_symmetrized_slice({ell, 100, nu, 1.0, t}));
        worst = std::max(worst, least_decaying(s).real());
      }
  const double bar = worst;
  const Spectrum ds = spectrum(build_dipole_symmetrized(20, 1e-3, 1.0, 0.0));
  const double dip = least_decaying(ds).real();
  return {bar <= 1e-10 && dip <= 1e-10, "bar max Re " + num(bar) + ", dipole (N=20) max Re " + num(dip)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 viscosity scaling of the least-decaying eigenvalue", ac1},
      {"AC2 collapse of Re lambda_j / sqrt(nu)", ac2},
      {"AC3 anomalous mode decays viscously", ac3},
      {"AC4 invariance of the rapid-decay subspace", ac4},
      {"AC5 enhanced decay in the X-norm", ac5},
      {"AC6 Phi dissipates along the flow", ac6},
      {"AC7 constant identities", ac7},
      {"AC8 harmonic ground-state scaling", ac8},
      {"AC9 nonlinear exact solutions", ac9},
      {"AC10 symmetrized operators are stable", ac10},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
