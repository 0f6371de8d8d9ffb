#pragma once

// Harmonic-oscillator constant M0, trajectory-level decay checks and the
// report writers for the hypocoercivity estimates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "barstab/error.hpp"
#include "barstab/evolution.hpp"
#include "barstab/functionals.hpp"
#include "barstab/io.hpp"
#include "barstab/spectral_field.hpp"

namespace barstab {

/// Matrix of H = -d ∂_x^2 + c cos^2 x on {e^{ikx}}, |k| <= N. cos^2 x =
/// 1/2 + (e^{2ix} + e^{-2ix})/4 couples k to k +- 2.
inline Eigen::MatrixXd harmonic_matrix(double d, double c, int N) {
  detail::require(N >= 1, "harmonic_matrix: N must be positive");
  const Eigen::Index n = 2 * N + 1;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double k = static_cast<double>(r - N);
    H(r, r) = d * k * k + 0.5 * c;
    if (r + 2 < n) {
      H(r, r + 2) = 0.25 * c;
      H(r + 2, r) = 0.25 * c;
    }
  }
  return H;
}

/// Smallest eigenvalue of harmonic_matrix(d, c, N).
inline double harmonic_ground_energy(double d, double c, int N) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(harmonic_matrix(d, c, N),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw convergence_failure("harmonic_ground_energy: eigensolver failed (d=" + format_real(d) +
                              ", c=" + format_real(c) + ", N=" + std::to_string(N) + ")");
  return es.eigenvalues()(0);
}

struct M0Estimate {
  double beta0 = 0.0, nu = 0.0, a = 0.0, t = 0.0;
  int ell = 0, N = 0;
  double coefficient = 0.0;  ///< beta0 / (2 nu) (a ell e^{-nu t})^2
  double lambda_min = 0.0;
  double M0_est = 0.0;
};

/// Sharpest M0 with (1/8)||u_x||^2 + beta0/(2 nu) ||C u||^2 >= M0 |ell| sqrt(beta0/nu) ||u||^2
/// on the truncated space: M0 = lambda_min sqrt(nu) / (|ell| sqrt(beta0)).
inline M0Estimate estimate_M0(double beta0, double nu, double a, int ell, double t, int N = 128) {
  detail::require(beta0 > 0.0, "estimate_M0: beta0 must be positive");
  detail::require(nu > 0.0, "estimate_M0: viscosity must be positive");
  detail::require(ell != 0, "estimate_M0: ell must be nonzero");
  detail::require(t >= 0.0, "estimate_M0: time must be non-negative");
  detail::require(N >= 64, "estimate_M0: N must be at least 64");
  M0Estimate e{beta0, nu, a, t, ell, N};
  const double amp = a * ell * std::exp(-nu * t);
  e.coefficient = beta0 / (2.0 * nu) * amp * amp;
  e.lambda_min = std::max(0.0, harmonic_ground_energy(0.125, e.coefficient, N));
  e.M0_est = e.lambda_min * std::sqrt(nu) / (std::abs(ell) * std::sqrt(beta0));
  return e;
}

/// Self-consistent M0: beta0 depends on M0, so iterate M0 <- estimate_M0(beta0(M0)).
/// In the harmonic regime the map is nearly constant at |a|/4.
inline M0Estimate auto_M0(double a, int ell, double nu, double t = 0.0, int N = 128) {
  detail::require(a != 0.0, "auto_M0: amplitude must be nonzero");
  double M0 = std::abs(a) / 4.0;
  M0Estimate e;
  for (int it = 0; it < 200; ++it) {
    const double beta0 = M0 / (512.0 * a * a * std::abs(ell));
    e = estimate_M0(beta0, nu, a, ell, t, N);
    if (!(e.M0_est > 0.0)) throw convergence_failure("auto_M0: estimate collapsed to zero");
    const bool done = std::abs(e.M0_est - M0) <= 1e-12 * M0;
    M0 = e.M0_est;
    if (done) return e;
  }
  throw convergence_failure("auto_M0: fixed point did not converge (a=" + format_real(a) +
                            ", ell=" + std::to_string(ell) + ", nu=" + format_real(nu) + ")");
}

/// 2 nu min(k^2 + l^2) over the nonzero modes: the decay rate of ||w||^2 under diffusion alone.
inline double diffusion_rate(const SpectralField& w, double nu) {
  int m = std::numeric_limits<int>::max();
  for (int l = -w.ny(); l <= w.ny(); ++l)
    for (int k = -w.nx(); k <= w.nx(); ++k)
      if (w(k, l) != cplx{}) m = std::min(m, k * k + l * l);
  detail::require(m != std::numeric_limits<int>::max(), "diffusion_rate: field is zero");
  return 2.0 * nu * m;
}

struct DecayCheck {
  double nu = 0.0, a = 0.0, T = 0.0;
  int ell = 0;            ///< smallest |ell| carried by w0
  double rate = 0.0;      ///< fitted r in ||w||_X^2 ~ K e^{-r t}
  double M = 0.0;         ///< rate / sqrt(nu)
  double K = 0.0;         ///< fitted amplitude / ||w0||_X^2
  double residual = 0.0;
  double diffusion_rate = 0.0;
  std::size_t samples = 0;
};

/// Evolves w0 in M under the approximate operator to time T and fits
/// ln ||w||_X^2 against t, skipping the first 5% of the window.
inline DecayCheck theorem_decay_check(const SpectralField& w0, double nu, double a, double T,
                                      double dt) {
  const MembershipReport m = membership_in_M(w0, 1e-12);
  detail::require(m.member, "theorem_decay_check: initial field is not in M (" + m.worst + ")");
  detail::require(T > 0.0, "theorem_decay_check: T must be positive");
  const double x0 = x_norm_sq(w0, nu, a, 0.0);
  detail::require(x0 > 0.0, "theorem_decay_check: initial field is zero");

  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.T = T;
  cfg.sample_every = std::numeric_limits<int>::max();
  const Trajectory traj = evolve_linear(w0, nu, a, SliceVariant::approximate, cfg);
  const DecayFit fit = decay_rate_fit(traj, NormKind::x_norm, 0.05 * T, T);

  DecayCheck c;
  c.nu = nu;
  c.a = a;
  c.T = T;
  c.ell = std::numeric_limits<int>::max();
  for (int l = 1; l <= w0.ny(); ++l)
    if (!detail::row_is_zero(w0.row(l)) || !detail::row_is_zero(w0.row(-l))) c.ell = std::min(c.ell, l);
  c.rate = fit.rate;
  c.M = fit.rate / std::sqrt(nu);
  c.K = fit.amplitude / x0;
  c.residual = fit.residual;
  c.diffusion_rate = diffusion_rate(w0, nu);
  c.samples = fit.samples;
  return c;
}

struct PhiDissipation {
  std::vector<double> times;
  std::vector<double> ratios;  ///< (dPhi/dt) / Phi at interior samples
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  bool empty() const { return ratios.empty(); }
};

/// Centered-difference (dPhi/dt)/Phi along a trajectory. Phi comes from the
/// per-step diagnostics when the trajectory was run with these constants,
/// otherwise from the stored snapshots. Samples after Phi drops below
/// `floor` times its initial value are discarded.
inline PhiDissipation phi_dissipation_check(const Trajectory& traj, const HypoConstants& c,
                                            double floor = 1e-30) {
  detail::require(c.valid(), "phi_dissipation_check: constants are not valid");
  std::vector<double> ts, ph;
  const bool from_diag = traj.phi_constants && traj.phi_constants->ell == c.ell &&
                         traj.phi_constants->alpha == c.alpha && traj.phi_constants->beta == c.beta &&
                         traj.phi_constants->gamma == c.gamma && traj.phi_constants->a == c.a &&
                         traj.phi_constants->nu == c.nu;
  if (from_diag) {
    for (const auto& d : traj.diagnostics) {
      ts.push_back(d.t);
      ph.push_back(d.phi);
    }
  } else {
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      ts.push_back(traj.snapshot_times[i]);
      ph.push_back(phi(traj.snapshots[i], c, traj.snapshot_times[i]).phi_value);
    }
  }
  PhiDissipation r;
  if (ph.empty() || ph.front() == 0.0) return r;
  std::size_t n = 0;
  while (n < ph.size() && ph[n] >= floor * ph.front()) ++n;
  detail::require(n >= 3, "phi_dissipation_check: Phi falls below the floor before 3 samples");
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d = (ph[i + 1] - ph[i - 1]) / (ts[i + 1] - ts[i - 1]);
    r.times.push_back(ts[i]);
    r.ratios.push_back(d / ph[i]);
  }
  r.min_ratio = *std::min_element(r.ratios.begin(), r.ratios.end());
  r.max_ratio = *std::max_element(r.ratios.begin(), r.ratios.end());
  return r;
}

inline void write_constants_csv(std::ostream& os, const std::vector<HypoConstants>& cs) {
  os << "M0,a,ell,alpha0,beta0,gamma0,checks_passed\n";
  for (const auto& c : cs)
    os << csv_line(c.M0, c.a, c.ell, c.alpha0, c.beta0, c.gamma0, c.valid() ? 1 : 0) << '\n';
}

inline void write_decay_csv(std::ostream& os, const std::vector<DecayCheck>& ds) {
  os << "nu,ell,fitted_M,fitted_K,residual\n";
  for (const auto& d : ds) os << csv_line(d.nu, d.ell, d.M, d.K, d.residual) << '\n';
}

inline void write_m0_csv(std::ostream& os, const std::vector<M0Estimate>& es) {
  os << "beta0,nu,a,ell,t,N,lambda_min,M0_est\n";
  for (const auto& e : es)
    os << csv_line(e.beta0, e.nu, e.a, e.ell, e.t, e.N, e.lambda_min, e.M0_est) << '\n';
}

}  // namespace barstab
