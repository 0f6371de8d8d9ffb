#pragma once

// Time integration in Fourier space with the integrating-factor RK4 scheme
// (Lawson): diffusion exp(-nu (k^2 + l^2) dt) is applied exactly, the rest
// is advanced with classical RK4 evaluated at the stage times t, t + dt/2,
// t + dt.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

#include "barstab/error.hpp"
#include "barstab/fft.hpp"
#include "barstab/functionals.hpp"
#include "barstab/io.hpp"
#include "barstab/operators.hpp"
#include "barstab/spectral_field.hpp"
#include "barstab/stats.hpp"

namespace barstab {

struct IntegratorConfig {
  double dt = 1e-2;
  double T = 1.0;
  int sample_every = 1;  ///< field snapshots every this many steps (diagnostics every step)
  bool dealias = true;   ///< nonlinear only: 2/3 rule
  int grid = 0;          ///< nonlinear only: physical grid size, 0 = smallest valid power of two
};

struct DiagnosticSample {
  double t = 0.0;
  double l2 = 0.0;        ///< (\int w^2)^{1/2}
  double x_norm = 0.0;    ///< X-norm over the rows ell != 0
  double phi = std::numeric_limits<double>::quiet_NaN();  ///< when configured
  double max_pq = 0.0;    ///< largest anomalous coordinate
  double enstrophy = 0.0;
  double grad_norm_sq = 0.0;
};

struct DiagnosticsOptions {
  std::optional<HypoConstants> phi;  ///< evaluate Phi on the row phi->ell
};

struct Trajectory {
  double nu = 0.0;
  double a = 0.0;  ///< bar amplitude used for the X-norm (0 for nonlinear runs)
  std::vector<double> times;
  std::vector<DiagnosticSample> diagnostics;
  std::vector<double> snapshot_times;
  std::vector<SpectralField> snapshots;
  std::optional<HypoConstants> phi_constants;
  std::vector<std::string> warnings;
};

inline DiagnosticSample compute_diagnostics(const SpectralField& w, double t, double nu, double a,
                                            const DiagnosticsOptions& opts = {}) {
  DiagnosticSample d;
  d.t = t;
  d.enstrophy = enstrophy(w);
  d.l2 = std::sqrt(d.enstrophy);
  d.grad_norm_sq = grad_norm_sq(w);
  d.x_norm = nu > 0.0 ? std::sqrt(x_norm_sq_rows(w, nu, a, t))
                      : std::numeric_limits<double>::quiet_NaN();
  if (opts.phi) d.phi = phi(w, *opts.phi, t).phi_value;
  d.max_pq = anomalous_violation(w).max_violation;
  return d;
}

namespace detail {

inline long step_count(const IntegratorConfig& cfg) {
  require(cfg.dt > 0.0 && std::isfinite(cfg.dt), "integrator: dt must be positive");
  require(cfg.T >= 0.0 && std::isfinite(cfg.T), "integrator: T must be non-negative");
  require(cfg.sample_every >= 1, "integrator: sample_every must be at least 1");
  if (cfg.T == 0.0) return 0;
  return static_cast<long>(std::ceil(cfg.T / cfg.dt - 1e-9));
}

// Diffusion drives high modes through the subnormal range, where x86
// arithmetic is ~100x slower. Flush them to zero for the guard's lifetime
// (FTZ and DAZ bits of MXCSR), restoring the caller's mode afterwards.
class FlushSubnormals {
 public:
#if defined(__SSE2__)
  FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~FlushSubnormals() { _mm_setcsr(saved_); }
#else
  FlushSubnormals() = default;
#endif
  FlushSubnormals(const FlushSubnormals&) = delete;
  FlushSubnormals& operator=(const FlushSubnormals&) = delete;

 private:
#if defined(__SSE2__)
  unsigned saved_;
#endif
};

struct LawsonWork {
  std::vector<cplx> k1, k2, k3, k4, tmp;
  void resize(std::size_t n) {
    for (auto* v : {&k1, &k2, &k3, &k4, &tmp}) v->assign(n, cplx{});
  }
};

// One integrating-factor RK4 step of y' = D y + F(t, y), D diagonal, with
// half = exp(D h/2) and full = exp(D h) precomputed.
template <class Rhs>
void lawson_rk4_step(std::span<cplx> y, std::span<const double> half, std::span<const double> full,
                     double t, double h, Rhs&& rhs, LawsonWork& w) {
  const std::size_t n = y.size();
  rhs(t, std::span<const cplx>(y), std::span<cplx>(w.k1));
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = half[i] * (y[i] + 0.5 * h * w.k1[i]);
  rhs(t + 0.5 * h, std::span<const cplx>(w.tmp), std::span<cplx>(w.k2));
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = half[i] * y[i] + 0.5 * h * w.k2[i];
  rhs(t + 0.5 * h, std::span<const cplx>(w.tmp), std::span<cplx>(w.k3));
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = full[i] * y[i] + h * half[i] * w.k3[i];
  rhs(t + h, std::span<const cplx>(w.tmp), std::span<cplx>(w.k4));
  for (std::size_t i = 0; i < n; ++i)
    y[i] = full[i] * y[i] +
           (h / 6.0) * (full[i] * w.k1[i] + 2.0 * half[i] * (w.k2[i] + w.k3[i]) + w.k4[i]);
}

inline bool row_is_zero(std::span<const cplx> row) {
  return std::all_of(row.begin(), row.end(), [](const cplx& c) { return c == cplx{}; });
}

inline void record(Trajectory& traj, const SpectralField& w, double t, long step, long nsteps,
                   const IntegratorConfig& cfg, const DiagnosticsOptions& opts) {
  const DiagnosticSample d = compute_diagnostics(w, t, traj.nu, traj.a, opts);
  if (!std::isfinite(d.l2)) throw numerical_blowup("integrator: solution is NaN or overflowed", step);
  traj.times.push_back(t);
  traj.diagnostics.push_back(d);
  if (step % cfg.sample_every == 0 || step == nsteps) {
    traj.snapshot_times.push_back(t);
    traj.snapshots.push_back(w);
  }
}

}  // namespace detail

/// RK4 stability limit on the imaginary axis is 2 sqrt 2; the explicit
/// advective part has spectral radius at most |a ell|.
inline constexpr double explicit_stability_limit = 2.8;

/// Integrates w_t = L(t) w (bar linearization, full or approximate). Rows
/// ell evolve independently; rows that start at zero stay zero.
inline Trajectory evolve_linear(const SpectralField& w0, double nu, double a, SliceVariant variant,
                                const IntegratorConfig& cfg, const DiagnosticsOptions& opts = {}) {
  detail::require(variant == SliceVariant::full || variant == SliceVariant::approximate,
                  "evolve_linear: variant must be full or approximate");
  detail::require(nu > 0.0, "evolve_linear: viscosity must be positive");
  detail::require(std::abs(w0(0, 0)) == 0.0, "evolve_linear: initial field must have zero mean");
  const long nsteps = detail::step_count(cfg);
  const double h = nsteps > 0 ? cfg.T / static_cast<double>(nsteps) : 0.0;

  std::vector<int> active;
  int max_ell = 0;
  for (int l = -w0.ny(); l <= w0.ny(); ++l)
    if (!detail::row_is_zero(w0.row(l))) {
      active.push_back(l);
      max_ell = std::max(max_ell, std::abs(l));
    }
  detail::require(h * std::abs(a) * max_ell <= explicit_stability_limit,
                  "evolve_linear: dt * |a| * max|ell| = " + std::to_string(h * std::abs(a) * max_ell) +
                      " exceeds the RK4 stability limit " +
                      std::to_string(explicit_stability_limit));

  Trajectory traj;
  traj.nu = nu;
  traj.a = a;
  traj.phi_constants = opts.phi;
  SpectralField w = w0;
  w.set_real(w0.is_real());

  const int width = w.width();
  std::vector<std::vector<double>> half(active.size()), full(active.size());
  for (std::size_t r = 0; r < active.size(); ++r) {
    half[r].resize(width);
    full[r].resize(width);
    for (int k = -w.nx(); k <= w.nx(); ++k) {
      const double d = -nu * static_cast<double>(k * k + active[r] * active[r]);
      half[r][k + w.nx()] = std::exp(0.5 * h * d);
      full[r][k + w.nx()] = std::exp(h * d);
    }
  }
  detail::LawsonWork work;
  work.resize(width);
  const detail::FlushSubnormals ftz;

  detail::record(traj, w, 0.0, 0, nsteps, cfg, opts);
  for (long step = 1; step <= nsteps; ++step) {
    const double t = static_cast<double>(step - 1) * h;
    for (std::size_t r = 0; r < active.size(); ++r) {
      const int l = active[r];
      auto rhs = [&](double s, std::span<const cplx> in, std::span<cplx> out) {
        apply_bar_advection(l, a * std::exp(-nu * s), variant, in, out);
      };
      detail::lawson_rk4_step(w.row(l), half[r], full[r], t, h, rhs, work);
    }
    detail::record(traj, w, static_cast<double>(step) * h, step, nsteps, cfg, opts);
  }
  return traj;
}

/// Smallest power-of-two grid that resolves a field of truncation K
/// (alias-free quadratic products when dealiasing: grid > 3K).
inline int default_grid(int K, bool dealias) {
  const int need = dealias ? 3 * K + 1 : 2 * K + 1;
  int n = 4;
  while (n < need) n *= 2;
  return n;
}

/// Pseudo-spectral -u . grad(w) for a real vorticity field with truncation K
/// on an n x n grid, truncated back to K. With dealiasing the grid must
/// satisfy n > 3K (2/3 rule), which makes the product alias-free.
class NonlinearTerm {
 public:
  NonlinearTerm(int K, int grid, bool dealias) : K_(K), fft_(grid) {
    detail::require((grid & (grid - 1)) == 0, "evolve_nonlinear: grid must be a power of two");
    if (dealias)
      detail::require(3 * K < grid, "evolve_nonlinear: 2/3 rule needs grid > 3 * max wavenumber");
    else
      detail::require(2 * K < grid, "evolve_nonlinear: grid must exceed 2 * max wavenumber");
  }

  double max_speed() const noexcept { return max_speed_; }

  SpectralField operator()(const SpectralField& w) {
    // Pack real pairs into single complex transforms: u1 + i u2 and w_x + i w_y.
    SpectralField vel(K_, K_), grad(K_, K_);
    const cplx i{0.0, 1.0};
    for (int l = -K_; l <= K_; ++l)
      for (int k = -K_; k <= K_; ++k) {
        if (k == 0 && l == 0) continue;
        const cplx c = w(k, l);
        const double r2 = static_cast<double>(k * k + l * l);
        const cplx u1 = i * static_cast<double>(l) / r2 * c;
        const cplx u2 = -i * static_cast<double>(k) / r2 * c;
        vel.at(k, l) = u1 + i * u2;
        grad.at(k, l) = i * static_cast<double>(k) * c + i * (i * static_cast<double>(l) * c);
      }
    const auto u = fft_.to_physical(vel);
    auto g = fft_.to_physical(grad);
    max_speed_ = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      max_speed_ = std::max(max_speed_, std::abs(u[p]));
      g[p] = cplx{u[p].real() * g[p].real() + u[p].imag() * g[p].imag(), 0.0};
    }
    SpectralField n = fft_.to_spectral(g, K_, K_, true);
    n *= -1.0;
    n.at(0, 0) = cplx{};
    return real_part(n);
  }

 private:
  int K_;
  Fft2d fft_;
  double max_speed_ = 0.0;
};

/// Integrates the vorticity equation w_t = nu Lap w - u . grad w.
inline Trajectory evolve_nonlinear(const SpectralField& omega0, double nu,
                                   const IntegratorConfig& cfg, const DiagnosticsOptions& opts = {}) {
  detail::require(omega0.is_real(), "evolve_nonlinear: initial field must be real (reality_flag)");
  detail::require(std::abs(omega0(0, 0)) == 0.0, "evolve_nonlinear: initial field must have zero mean");
  detail::require(nu >= 0.0, "evolve_nonlinear: viscosity must be non-negative");
  const int K = std::max(omega0.nx(), omega0.ny());
  const int grid = cfg.grid > 0 ? cfg.grid : default_grid(K, cfg.dealias);
  NonlinearTerm nonlinear(K, grid, cfg.dealias);
  const long nsteps = detail::step_count(cfg);
  const double h = nsteps > 0 ? cfg.T / static_cast<double>(nsteps) : 0.0;

  Trajectory traj;
  traj.nu = nu;
  traj.a = 0.0;
  traj.phi_constants = opts.phi;
  SpectralField w = resize(omega0, K, K);
  w.set_real(true);

  std::vector<double> half(w.size()), full(w.size());
  for (int l = -K; l <= K; ++l)
    for (int k = -K; k <= K; ++k) {
      const std::size_t idx = static_cast<std::size_t>(l + K) * w.width() + (k + K);
      const double d = -nu * static_cast<double>(k * k + l * l);
      half[idx] = std::exp(0.5 * h * d);
      full[idx] = std::exp(h * d);
    }
  detail::LawsonWork work;
  work.resize(w.size());
  const detail::FlushSubnormals ftz;
  SpectralField scratch(K, K, true);
  bool warned = false;
  auto rhs = [&](double, std::span<const cplx> in, std::span<cplx> out) {
    std::copy(in.begin(), in.end(), scratch.coeffs().begin());
    const SpectralField n = nonlinear(scratch);
    std::copy(n.coeffs().begin(), n.coeffs().end(), out.begin());
    const double cfl = nonlinear.max_speed() * h * grid / two_pi;
    if (cfl > 1.0 && !warned) {
      warned = true;
      traj.warnings.push_back("CFL number " + std::to_string(cfl) + " exceeds 1");
    }
  };

  detail::record(traj, w, 0.0, 0, nsteps, cfg, opts);
  for (long step = 1; step <= nsteps; ++step) {
    detail::lawson_rk4_step(w.coeffs(), half, full, static_cast<double>(step - 1) * h, h, rhs, work);
    detail::record(traj, w, static_cast<double>(step) * h, step, nsteps, cfg, opts);
  }
  return traj;
}

enum class NormKind { l2, x_norm, phi };

inline NormKind parse_norm(const std::string& s) {
  if (s == "l2") return NormKind::l2;
  if (s == "x" || s == "x_norm") return NormKind::x_norm;
  if (s == "phi") return NormKind::phi;
  throw invalid_input("unknown norm '" + s + "'");
}

struct DecayFit {
  double rate = 0.0;       ///< r in norm^2 ~ K e^{-r t}
  double amplitude = 0.0;  ///< K
  double residual = 0.0;   ///< max |ln norm^2 - fit|
  std::size_t samples = 0;
  double t_end = 0.0;      ///< last sample time used
};

/// Least-squares fit of ln(norm^2) against t over diagnostics with t in
/// [t_lo, t_hi]. The window is cut at the first sample whose norm^2 falls
/// below `floor` times the first value in the window. For Phi the value
/// itself is used (it is already quadratic).
inline DecayFit decay_rate_fit(const Trajectory& traj, NormKind which, double t_lo, double t_hi,
                               double floor = 1e-30) {
  std::vector<double> ts, ys;
  double first = 0.0;
  for (const auto& d : traj.diagnostics) {
    if (d.t < t_lo || d.t > t_hi) continue;
    const double v = which == NormKind::l2       ? d.l2 * d.l2
                     : which == NormKind::x_norm ? d.x_norm * d.x_norm
                                                 : d.phi;
    detail::require(std::isfinite(v), "decay_rate_fit: norm not available in trajectory");
    if (ts.empty()) first = v;
    if (!(v > 0.0) || v < floor * first) break;
    ts.push_back(d.t);
    ys.push_back(std::log(v));
  }
  detail::require(ts.size() >= 3, "decay_rate_fit: fewer than 3 samples in window");
  const LineFit line = least_squares_line(ts, ys);
  return {-line.slope, std::exp(line.intercept), line.max_residual, ts.size(), ts.back()};
}

/// max over interior samples of |d/dt(Z/2) + nu G| / (nu G), with Z the
/// enstrophy, G = \int |grad w|^2 and d/dt by centered differences. Samples
/// with nu G = 0 contribute 0 when d/dt(Z/2) = 0 and |d/dt(Z/2)| / Z otherwise.
inline double enstrophy_balance_residual(const Trajectory& traj) {
  const auto& d = traj.diagnostics;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < d.size(); ++i) {
    const double rate = 0.5 * (d[i + 1].enstrophy - d[i - 1].enstrophy) / (d[i + 1].t - d[i - 1].t);
    const double sink = traj.nu * d[i].grad_norm_sq;
    double r = 0.0;
    if (sink > 0.0)
      r = std::abs(rate + sink) / sink;
    else if (rate != 0.0)
      r = std::abs(rate) / d[i].enstrophy;
    worst = std::max(worst, r);
  }
  return worst;
}

inline void write_diagnostics_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,l2,x_norm,phi,max_pq,enstrophy,grad_norm_sq\n";
  for (const auto& d : traj.diagnostics)
    os << csv_line(d.t, d.l2, d.x_norm, d.phi, d.max_pq, d.enstrophy, d.grad_norm_sq) << '\n';
}

}  // namespace barstab
