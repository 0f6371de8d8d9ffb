#pragma once

// X-norm, the hypocoercivity functional Phi and its constants.
//
// Norms on one y-wavenumber row w_ell(x) = sum_k w^(k, ell) e^{ikx} are
// L^2(T^1) norms: ||w_ell||^2 = 2 pi sum_k |w^(k, ell)|^2.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "barstab/error.hpp"
#include "barstab/spectral_field.hpp"

namespace barstab {

/// C^ell w = -i a ell e^{-nu t} cos(x) w, computed exactly: the result holds
/// k = -(N+1)..N+1 for an input row of k = -N..N.
inline std::vector<cplx> apply_C_exact(std::span<const cplx> row, int ell, double amplitude) {
  const auto n = row.size();
  std::vector<cplx> out(n + 2);
  const cplx c{0.0, -0.5 * ell * amplitude};
  for (std::size_t r = 0; r < n; ++r) {
    out[r] += c * row[r];      // e^{-ix} shifts k -> k - 1
    out[r + 2] += c * row[r];  // e^{+ix} shifts k -> k + 1
  }
  return out;
}

struct RowNorms {
  double l2_sq = 0.0;     ///< ||w||^2
  double dx_sq = 0.0;     ///< ||d_x w||^2
  double cross = 0.0;     ///< Re (d_x w, C w)
  double c_sq = 0.0;      ///< ||C w||^2
};

inline RowNorms row_norms(std::span<const cplx> row, int ell, double amplitude) {
  const int N = (static_cast<int>(row.size()) - 1) / 2;
  RowNorms r;
  const auto Cw = apply_C_exact(row, ell, amplitude);
  for (int k = -N; k <= N; ++k) {
    const cplx w = row[k + N];
    r.l2_sq += std::norm(w);
    r.dx_sq += static_cast<double>(k) * k * std::norm(w);
    // (i k w)^* (C w)_k
    r.cross += (std::conj(cplx{0.0, static_cast<double>(k)} * w) * Cw[k + N + 1]).real();
  }
  for (const auto& c : Cw) r.c_sq += std::norm(c);
  r.l2_sq *= two_pi;
  r.dx_sq *= two_pi;
  r.cross *= two_pi;
  r.c_sq *= two_pi;
  return r;
}

/// X-norm squared summed over the rows ell != 0, without checking the ell = 0 row.
inline double x_norm_sq_rows(const SpectralField& w, double nu, double a, double t) {
  const double amplitude = a * std::exp(-nu * t);
  double s = 0.0;
  for (int l = -w.ny(); l <= w.ny(); ++l) {
    if (l == 0) continue;
    const auto row = w.row(l);
    bool zero = true;
    for (const auto& c : row) zero = zero && c == cplx{};
    if (zero) continue;
    const RowNorms r = row_norms(row, l, amplitude);
    const double al = std::abs(l);
    s += r.l2_sq + std::sqrt(nu / al) * r.dx_sq + r.c_sq / (std::sqrt(nu) * std::pow(al, 1.5));
  }
  return s;
}

/// ||w||_X^2 = sum_{ell != 0} [ ||w_ell||^2 + sqrt(nu/|ell|) ||d_x w_ell||^2
///                              + ||C^ell w_ell||^2 / (sqrt(nu) |ell|^{3/2}) ].
/// The ell = 0 row must vanish (relative tolerance `tol`).
inline double x_norm_sq(const SpectralField& w, double nu, double a, double t, double tol = 1e-12) {
  detail::require(nu > 0.0, "x_norm_sq: viscosity must be positive");
  double row0 = 0.0;
  for (const auto& c : w.row(0)) row0 += std::norm(c);
  detail::require(std::sqrt(row0) <= tol * w.coeff_norm(),
                  "x_norm_sq: field has content in the ell = 0 row");
  return x_norm_sq_rows(w, nu, a, t);
}

struct HypoConstants {
  double M0 = 0.0;
  double a = 0.0;
  int ell = 0;
  double nu = 0.0;
  double alpha0 = 0.0, beta0 = 0.0, gamma0 = 0.0;
  double alpha = 0.0, beta = 0.0, gamma = 0.0;  ///< alpha0 sqrt(nu), beta0, gamma0 / sqrt(nu)
  bool pinch_ok = false;     ///< beta0^2 < alpha0 gamma0 / 4
  bool coupling_ok = false;  ///< beta0 >= 4 alpha0^2

  bool valid() const { return pinch_ok && coupling_ok; }
};

namespace detail {

inline HypoConstants finish_constants(HypoConstants c) {
  c.alpha = c.alpha0 * std::sqrt(c.nu);
  c.beta = c.beta0;
  c.gamma = c.gamma0 / std::sqrt(c.nu);
  c.pinch_ok = c.beta0 * c.beta0 < 0.25 * c.alpha0 * c.gamma0;
  // Holds with equality for the closed-form constants, so allow rounding.
  c.coupling_ok = c.beta0 >= 4.0 * c.alpha0 * c.alpha0 * (1.0 - 1e-12);
  return c;
}

inline std::string constants_failure(const HypoConstants& c) {
  std::string why;
  if (!c.pinch_ok) why += " beta0^2 < alpha0*gamma0/4 fails;";
  if (!c.coupling_ok) why += " beta0 >= 4*alpha0^2 fails;";
  return why;
}

}  // namespace detail

/// Closed-form constants from M0:
///   gamma0 = M0^{3/2} / (64 sqrt2 a^3 |ell|^{3/2}),
///   alpha0 = M0^{1/2} / (32 sqrt2 a |ell|^{1/2}),
///   beta0  = M0 / (512 a^2 |ell|).
/// |a| is used so the constants stay positive for either sign of the base state.
inline HypoConstants constants_from_M0(double M0, double a, int ell, double nu) {
  detail::require(M0 > 0.0, "constants_from_M0: M0 must be positive");
  detail::require(a != 0.0, "constants_from_M0: amplitude must be nonzero");
  detail::require(ell != 0, "constants_from_M0: ell must be nonzero");
  detail::require(nu > 0.0, "constants_from_M0: viscosity must be positive");
  HypoConstants c;
  c.M0 = M0;
  c.a = a;
  c.ell = ell;
  c.nu = nu;
  const double A = std::abs(a);
  const double L = std::abs(ell);
  const double sqrt2 = std::sqrt(2.0);
  c.gamma0 = std::pow(M0, 1.5) / (64.0 * sqrt2 * A * A * A * std::pow(L, 1.5));
  c.alpha0 = std::sqrt(M0) / (32.0 * sqrt2 * A * std::sqrt(L));
  c.beta0 = M0 / (512.0 * A * A * L);
  c = detail::finish_constants(c);
  if (!c.valid()) throw invalid_input("constants_from_M0:" + detail::constants_failure(c));
  return c;
}

/// User-supplied constants; rejected unless both validity inequalities hold.
inline HypoConstants constants_override(double M0, double a, int ell, double nu, double alpha0,
                                        double beta0, double gamma0) {
  detail::require(nu > 0.0 && ell != 0, "constants_override: need nu > 0 and ell != 0");
  HypoConstants c;
  c.M0 = M0;
  c.a = a;
  c.ell = ell;
  c.nu = nu;
  c.alpha0 = alpha0;
  c.beta0 = beta0;
  c.gamma0 = gamma0;
  c = detail::finish_constants(c);
  if (!c.valid()) throw invalid_input("invalid hypocoercivity constants:" + detail::constants_failure(c));
  return c;
}

struct FunctionalSample {
  double t = 0.0;
  double phi_value = 0.0;
  double l2_sq = 0.0;
  double dx_sq = 0.0;
  double cross_term = 0.0;
  double c_sq = 0.0;
};

/// Phi = ||w||^2 + alpha ||w_x||^2 - 2 beta Re(w_x, C w) + gamma ||C w||^2 on
/// the row ell = c.ell, with C evaluated at amplitude a e^{-nu t}.
inline FunctionalSample phi(std::span<const cplx> row, const HypoConstants& c, double t) {
  const RowNorms r = row_norms(row, c.ell, c.a * std::exp(-c.nu * t));
  FunctionalSample s;
  s.t = t;
  s.l2_sq = r.l2_sq;
  s.dx_sq = r.dx_sq;
  s.cross_term = r.cross;
  s.c_sq = r.c_sq;
  s.phi_value = r.l2_sq + c.alpha * r.dx_sq - 2.0 * c.beta * r.cross + c.gamma * r.c_sq;
  return s;
}

inline FunctionalSample phi(const SpectralField& w, const HypoConstants& c, double t) {
  return phi(w.row(c.ell), c, t);
}

}  // namespace barstab
