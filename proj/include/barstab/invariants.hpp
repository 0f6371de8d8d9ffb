#pragma once

// The invariant suite behind `barstab check`: one entry per property, each
// a small self-contained computation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "barstab/json.hpp"

#include "barstab/barstab.hpp"

namespace barstab {

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline Eigen::MatrixXcd interior(const Eigen::MatrixXcd& m, Eigen::Index skip) {
  return m.block(skip, 0, m.rows() - 2 * skip, m.cols());
}

}  // namespace detail

/// Rebuilds the matrix described by a golden sidecar.
inline Eigen::MatrixXcd rebuild_golden(const nlohmann::json& p) {
  const std::string kind = p.at("kind").get<std::string>();
  if (kind == "bar") {
    const SliceParams sp{p.at("ell").get<int>(), p.at("N").get<int>(), p.at("nu").get<double>(),
                         p.at("a").get<double>(), p.at("t").get<double>()};
    const SliceVariant v = parse_variant(p.at("variant").get<std::string>());
    if (v == SliceVariant::symmetrized) return build_symmetrized_slice(sp).matrix;
    if (v == SliceVariant::adjoint) return adjoint_slice(build_bar_slice(sp, SliceVariant::full)).matrix;
    return build_bar_slice(sp, v).matrix;
  }
  if (kind == "dipole") {
    const bool sym = p.value("symmetrized", false);
    const int N = p.at("N").get<int>();
    const double nu = p.at("nu").get<double>(), a = p.at("a").get<double>(), t = p.at("t").get<double>();
    return sym ? build_dipole_symmetrized(N, nu, a, t).matrix : build_dipole(N, nu, a, t).matrix;
  }
  throw invalid_input("golden sidecar: unknown kind '" + kind + "'");
}

/// Compares a stored matrix CSV against a fresh build. Returns an empty
/// string on agreement, otherwise a description of the first differences.
inline std::string compare_golden(const std::filesystem::path& csv, double tol = 1e-13) {
  std::ifstream side(csv.string() + ".json");
  if (!side) return "missing sidecar " + csv.string() + ".json";
  const nlohmann::json params = nlohmann::json::parse(side);
  const Eigen::MatrixXcd fresh = rebuild_golden(params);
  std::ifstream is(csv);
  if (!is) return "cannot open " + csv.string();
  Eigen::MatrixXcd stored = Eigen::MatrixXcd::Zero(fresh.rows(), fresh.cols());
  std::string diff;
  int reported = 0;
  for (const auto& e : read_matrix_csv(is)) {
    if (e.row < 0 || e.col < 0 || e.row >= stored.rows() || e.col >= stored.cols()) {
      diff += "  entry (" + std::to_string(e.row) + "," + std::to_string(e.col) + ") out of range\n";
      ++reported;
      continue;
    }
    stored(e.row, e.col) = e.value;
  }
  for (Eigen::Index r = 0; r < fresh.rows(); ++r)
    for (Eigen::Index c = 0; c < fresh.cols(); ++c)
      if (std::abs(stored(r, c) - fresh(r, c)) > tol * std::max(1.0, std::abs(fresh(r, c)))) {
        if (reported++ < 10)
          diff += "  (" + std::to_string(r) + "," + std::to_string(c) + ") golden " +
                  format_real(stored(r, c).real()) + "+" + format_real(stored(r, c).imag()) +
                  "i, built " + format_real(fresh(r, c).real()) + "+" +
                  format_real(fresh(r, c).imag()) + "i\n";
      }
  if (reported > 10) diff += "  ... " + std::to_string(reported - 10) + " more\n";
  return diff;
}

inline std::vector<CheckResult> run_invariant_suite(const std::filesystem::path& golden_dir) {
  std::vector<CheckResult> out;
  auto run = [&](const std::string& module, const std::string& name,
                 const std::function<std::pair<bool, std::string>()>& body) {
    CheckResult r{module, name};
    try {
      auto [ok, why] = body();
      r.passed = ok;
      r.detail = why;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(r));
  };
  using detail::fmt;

  // spectral-core
  run("spectral-core", "biot_savart divergence-free and curl recovery", [] {
    const SpectralField w = random_field(12, 12, 11);
    const VelocityField u = biot_savart(w);
    double div = 0.0, curl = 0.0;
    const cplx i{0.0, 1.0};
    for (int l = -12; l <= 12; ++l)
      for (int k = -12; k <= 12; ++k) {
        div = std::max(div, std::abs(double(k) * u.u1(k, l) + double(l) * u.u2(k, l)));
        curl = std::max(curl, std::abs(i * double(k) * u.u2(k, l) - i * double(l) * u.u1(k, l) - w(k, l)));
      }
    return std::pair{div <= 1e-15 && curl <= 1e-15, "div " + fmt(div) + ", curl " + fmt(curl)};
  });
  run("spectral-core", "project_to_M idempotent, contractive, lands in M", [] {
    const SpectralField w = random_field(10, 6, 12);
    const SpectralField p = project_to_M(w);
    const double idem = (project_to_M(p) - p).coeff_norm();
    const bool member = membership_in_M(p, 1e-14).member;
    return std::pair{idem <= 1e-15 && p.coeff_norm() <= w.coeff_norm() && member,
                     "idempotence defect " + fmt(idem)};
  });
  run("spectral-core", "Poincare: grad_norm_sq >= enstrophy", [] {
    bool ok = true;
    for (std::uint64_t s = 1; s <= 20; ++s) {
      const SpectralField w = random_field(6, 6, s);
      ok = ok && grad_norm_sq(w) >= enstrophy(w);
    }
    return std::pair{ok, std::string("20 random fields")};
  });
  run("spectral-core", "real fields synthesize to real samples", [] {
    const SpectralField w = random_field(8, 8, 13);
    double im = 0.0;
    for (const auto& v : synthesize(w, 32)) im = std::max(im, std::abs(v.imag()));
    return std::pair{im <= 1e-12, "max |Im| " + fmt(im)};
  });

  // operators
  run("operators", "[diag(ik), B] = C on interior rows", [] {
    const SliceParams p{2, 12, 1e-3, 1.3, 7.0};
    const Eigen::MatrixXcd D = build_dx(p.N), B = build_B(p), C = build_C(p);
    const double e = detail::max_abs(detail::interior(D * B - B * D - C, 1));
    return std::pair{e <= 1e-14, "max defect " + fmt(e)};
  });
  run("operators", "[B, C] = 0 on interior rows", [] {
    const SliceParams p{3, 12, 1e-3, 0.7, 0.0};
    const Eigen::MatrixXcd B = build_B(p), C = build_C(p);
    const double e = detail::max_abs(detail::interior(B * C - C * B, 2));
    return std::pair{e <= 1e-14, "max defect " + fmt(e)};
  });
  run("operators", "approximate slice = nu Lap + B; full = approximate + 1/(k^2+l^2) correction", [] {
    const SliceParams p{2, 10, 2e-3, 1.1, 3.0};
    const Eigen::MatrixXcd full = build_bar_slice(p, SliceVariant::full).matrix;
    const Eigen::MatrixXcd approx = build_bar_slice(p, SliceVariant::approximate).matrix;
    Eigen::MatrixXcd lap = Eigen::MatrixXcd::Zero(full.rows(), full.cols());
    Eigen::MatrixXcd corr = Eigen::MatrixXcd::Zero(full.rows(), full.cols());
    const Eigen::MatrixXcd B = build_B(p);
    for (int k = -p.N; k <= p.N; ++k) {
      lap(k + p.N, k + p.N) = -p.nu * double(k * k + p.ell * p.ell);
      for (int m : {k - 1, k + 1})
        if (std::abs(m) <= p.N)
          corr(k + p.N, m + p.N) = -B(k + p.N, m + p.N) / double(m * m + p.ell * p.ell);
    }
    const double e1 = detail::max_abs(approx - lap - B);
    const double e2 = detail::max_abs(full - approx - corr);
    return std::pair{e1 <= 1e-15 && e2 <= 1e-15, "defects " + fmt(e1) + ", " + fmt(e2)};
  });
  run("operators", "p/q system matches the 2D generator on rows +-1", [] {
    const double nu = 3e-3, a = 0.9, t = 5.0;
    const int jmax = 4, N = 2 * jmax + 1;
    double worst = 0.0;
    for (int sign : {1, -1}) {
      SpectralField w(N, 1);
      const SpectralField r = random_field(N, 1, 14, false);
      for (int k = -N; k <= N; ++k) w.at(k, sign) = r(k, sign);
      const SpectralField Lw = linear_generator(w, nu, a, t, SliceVariant::full);
      const PQCoordinates before = pq_coordinates(w, jmax), after = pq_coordinates(Lw, jmax);
      const Eigen::MatrixXd A = build_pq_system(nu, a, t, jmax, sign);
      Eigen::VectorXcd x(2 * jmax + 2), y(2 * jmax + 2);
      const auto& p = sign > 0 ? before.p_plus : before.p_minus;
      const auto& q = sign > 0 ? before.q_plus : before.q_minus;
      const auto& pp = sign > 0 ? after.p_plus : after.p_minus;
      const auto& qq = sign > 0 ? after.q_plus : after.q_minus;
      for (int j = 0; j <= jmax; ++j) {
        x(2 * j) = p[j];
        x(2 * j + 1) = q[j];
        y(2 * j) = pp[j];
        y(2 * j + 1) = qq[j];
      }
      worst = std::max(worst, (A.cast<cplx>() * x - y).cwiseAbs().maxCoeff());
    }
    return std::pair{worst <= 1e-14, "max defect " + fmt(worst)};
  });
  run("operators", "symmetrized slice spectrum has Re <= 1e-10", [] {
    double worst = -1e300;
    for (int ell : {1, 2, 5})
      for (double nu : {1e-2, 1e-4}) {
        const auto s = spectrum(build_symmetrized_slice({ell, 30, nu, 1.0, 0.0}));
        worst = std::max(worst, least_decaying(s).real());
      }
    return std::pair{worst <= 1e-10, "max Re " + fmt(worst)};
  });
  run("operators", "2D generator maps e^{imx} to -nu m^2 e^{imx}", [] {
    double worst = 0.0;
    for (int m = 1; m <= 5; ++m) {
      SpectralField w(8, 3);
      w.at(m, 0) = 1.0;
      SpectralField Lw = linear_generator(w, 1e-3, 1.0, 0.0, SliceVariant::full);
      Lw.at(m, 0) += 1e-3 * m * m;
      worst = std::max(worst, Lw.coeff_norm());
    }
    return std::pair{worst == 0.0, "defect " + fmt(worst)};
  });

  // eigensolve
  run("eigensolve", "eigenpair residual <= 1e-8 |M| |v|", [] {
    const Eigen::MatrixXcd M = build_bar_slice({2, 40, 1e-3, 1.0, 0.0}, SliceVariant::full).matrix;
    const EigenPairs ep = eigenpairs(M);
    const double norm = M.operatorNorm();
    double worst = 0.0;
    for (std::size_t j = 0; j < ep.values.size(); ++j) {
      const Eigen::VectorXcd v = ep.vectors.col(Eigen::Index(j));
      worst = std::max(worst, (M * v - ep.values[j] * v).norm() / (norm * v.norm()));
    }
    return std::pair{worst <= 1e-8, "max relative residual " + fmt(worst)};
  });
  run("eigensolve", "spectrum of M^dagger is the conjugate spectrum", [] {
    const OperatorSlice op = build_bar_slice({2, 30, 1e-3, 1.0, 0.0}, SliceVariant::full);
    const auto s = spectrum(op).eigenvalues;
    auto sa = spectrum(adjoint_slice(op)).eigenvalues;
    for (auto& v : sa) v = std::conj(v);
    double worst = 0.0;
    for (const auto& v : s) {
      double best = 1e300;
      for (const auto& u : sa) best = std::min(best, std::abs(u - v));
      worst = std::max(worst, best);
    }
    return std::pair{worst <= 1e-9, "max distance " + fmt(worst)};
  });
  run("eigensolve", "trace equals eigenvalue sum", [] {
    const SliceParams p{2, 50, 1e-3, 1.0, 0.0};
    const auto s = spectrum(build_bar_slice(p, SliceVariant::full)).eigenvalues;
    cplx sum{};
    for (const auto& v : s) sum += v;
    double trace = 0.0;
    for (int k = -p.N; k <= p.N; ++k) trace -= p.nu * (k * k + p.ell * p.ell);
    const double e = std::abs(sum - trace) / std::abs(trace);
    return std::pair{e <= 1e-8, "relative defect " + fmt(e)};
  });
  run("eigensolve", "first 10 eigenvalues stable from N=40 to N=80", [] {
    const auto a = spectrum(build_slice(2, 40, 1e-3, 1.0, SliceVariant::full)).eigenvalues;
    const auto b = spectrum(build_slice(2, 80, 1e-3, 1.0, SliceVariant::full)).eigenvalues;
    double worst = 0.0;
    for (int j = 0; j < 10; ++j) worst = std::max(worst, std::abs(a[j] - b[j]) / std::abs(b[j]));
    return std::pair{worst <= 0.01, "max relative change " + fmt(worst)};
  });

  // evolution
  run("evolution", "M stays invariant under the full linear flow", [] {
    const double nu = 1e-2;
    const SpectralField w0 = project_to_M(random_field(16, 4, 15));
    IntegratorConfig cfg;
    cfg.dt = 0.05;
    cfg.T = 20.0;
    const Trajectory tr = evolve_linear(w0, nu, 1.0, SliceVariant::full, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i)
      worst = std::max(worst, tr.diagnostics[i].max_pq / tr.snapshots[i].coeff_norm());
    return std::pair{worst <= 1e-8, "max relative anomalous coordinate " + fmt(worst)};
  });
  run("evolution", "ell = 0 row decays diagonally", [] {
    const double nu = 1e-2;
    SpectralField w0(6, 2);
    for (int k = 1; k <= 6; ++k) w0.at(k, 0) = cplx{1.0 / k, 0.5};
    IntegratorConfig cfg;
    cfg.dt = 0.1;
    cfg.T = 10.0;
    const Trajectory tr = evolve_linear(w0, nu, 1.0, SliceVariant::full, cfg);
    double worst = 0.0;
    for (int k = 1; k <= 6; ++k)
      worst = std::max(worst, std::abs(tr.snapshots.back()(k, 0) - w0(k, 0) * std::exp(-nu * k * k * cfg.T)) /
                                  std::abs(w0(k, 0)));
    return std::pair{worst <= 1e-12, "max relative error " + fmt(worst)};
  });
  run("evolution", "fourth-order convergence in dt", [] {
    const SpectralField w0 = random_row(24, 2, 2, 16);
    auto final_at = [&](double dt) {
      IntegratorConfig cfg;
      cfg.dt = dt;
      cfg.T = 20.0;
      cfg.sample_every = 1 << 30;
      return evolve_linear(w0, 1e-2, 1.0, SliceVariant::full, cfg).snapshots.back();
    };
    const SpectralField ref = final_at(0.0125);
    const double e1 = (final_at(0.4) - ref).coeff_norm();
    const double e2 = (final_at(0.2) - ref).coeff_norm();
    const double ratio = e1 / e2;
    return std::pair{ratio >= 12.0 && ratio <= 20.0, "error ratio " + fmt(ratio)};
  });
  run("evolution", "nonlinear flow keeps conjugate symmetry", [] {
    IntegratorConfig cfg;
    cfg.dt = 1e-2;
    cfg.T = 0.5;
    cfg.sample_every = 10;
    const Trajectory tr = evolve_nonlinear(random_field(10, 10, 17), 1e-2, cfg);
    double worst = 0.0;
    for (const auto& s : tr.snapshots) worst = std::max(worst, conjugate_symmetry_defect(s));
    return std::pair{worst <= 1e-12, "max defect " + fmt(worst)};
  });
  run("evolution", "Euler limit conserves enstrophy", [] {
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 1.0;
    cfg.sample_every = 1 << 30;
    const Trajectory tr = evolve_nonlinear(random_field(10, 10, 18), 0.0, cfg);
    const double z0 = tr.diagnostics.front().enstrophy;
    double worst = 0.0;
    for (const auto& d : tr.diagnostics) worst = std::max(worst, std::abs(d.enstrophy - z0) / z0);
    return std::pair{worst <= 1e-6, "max relative drift " + fmt(worst)};
  });

  // hypocoercivity
  run("hypocoercivity", "closed-form constants satisfy both inequalities", [] {
    std::mt19937_64 gen(19);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    std::uniform_int_distribution<int> l(1, 20);
    for (int i = 0; i < 100; ++i) {
      const HypoConstants c = constants_from_M0(u(gen), u(gen), l(gen), 1e-4);
      if (!c.valid()) return std::pair{false, std::string("invalid constants at M0=") + fmt(c.M0)};
    }
    return std::pair{true, std::string("100 random parameter sets")};
  });
  run("hypocoercivity", "pinch bounds and Phi >= ||w||^2 / 2", [] {
    const HypoConstants c = constants_from_M0(0.25, 1.0, 2, 1e-4);
    for (std::uint64_t s = 1; s <= 100; ++s) {
      const SpectralField w = random_row(20, 2, 2, s);
      const FunctionalSample f = phi(w, c, 0.0);
      const double lo = f.l2_sq + 0.5 * c.alpha * f.dx_sq + 0.5 * c.gamma * f.c_sq;
      const double hi = f.l2_sq + 1.5 * c.alpha * f.dx_sq + 1.5 * c.gamma * f.c_sq;
      if (!(lo < f.phi_value && f.phi_value < hi && f.phi_value >= 0.5 * f.l2_sq))
        return std::pair{false, "violated for seed " + std::to_string(s)};
    }
    return std::pair{true, std::string("100 random rows")};
  });
  run("hypocoercivity", "estimate_M0 nonincreasing in t", [] {
    const double nu = 1e-3, beta0 = 0.25 / 1024.0;
    double prev = 1e300;
    for (int i = 0; i <= 10; ++i) {
      const double m = estimate_M0(beta0, nu, 1.0, 2, 100.0 * i).M0_est;
      if (m > prev * (1.0 + 1e-12)) return std::pair{false, "increase at t=" + fmt(100.0 * i)};
      prev = m;
    }
    return std::pair{true, std::string("t = 0..1000")};
  });

  // cli goldens
  std::vector<std::filesystem::path> goldens;
  if (std::filesystem::is_directory(golden_dir))
    for (const auto& e : std::filesystem::directory_iterator(golden_dir))
      if (e.path().extension() == ".csv") goldens.push_back(e.path());
  std::sort(goldens.begin(), goldens.end());
  run("cli", "golden matrices present", [&] {
    return std::pair{!goldens.empty(), golden_dir.string()};
  });
  for (const auto& g : goldens)
    run("cli", "golden " + g.filename().string(), [&] {
      const std::string diff = compare_golden(g);
      return std::pair{diff.empty(), diff.empty() ? std::string("matches") : "differs:\n" + diff};
    });
  return out;
}

}  // namespace barstab
