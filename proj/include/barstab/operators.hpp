#pragma once

// Dense matrix representations of the linearizations about the bar state
// a e^{-nu t} cos x (per y-wavenumber slice ell) and about the dipole
// a e^{-nu t} (cos x + cos y).
//
// Slice layout: row/column r <-> x-wavenumber k = modes[r]; for full and
// approximate slices modes = -N..N so r = k + N. Couplings that leave the
// truncation |k| <= N are dropped.
//
// Dipole layout: modes enumerated with l outer, k inner, both -N..N,
// skipping excluded modes (always (0,0); for the symmetrized operator also
// the four modes with k^2 + l^2 = 1).

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "barstab/error.hpp"
#include "barstab/spectral_field.hpp"

namespace barstab {

enum class SliceVariant { full, approximate, adjoint, symmetrized };

inline std::string to_string(SliceVariant v) {
  switch (v) {
    case SliceVariant::full: return "full";
    case SliceVariant::approximate: return "approximate";
    case SliceVariant::adjoint: return "adjoint";
    case SliceVariant::symmetrized: return "symmetrized";
  }
  return "?";
}

inline SliceVariant parse_variant(const std::string& s) {
  if (s == "full") return SliceVariant::full;
  if (s == "approximate" || s == "approx") return SliceVariant::approximate;
  if (s == "adjoint") return SliceVariant::adjoint;
  if (s == "symmetrized" || s == "sym") return SliceVariant::symmetrized;
  throw invalid_input("unknown operator variant '" + s + "'");
}

struct SliceParams {
  int ell = 2;
  int N = 100;
  double nu = 1e-3;
  double a = 1.0;
  double t = 0.0;

  /// Amplitude of the base state at time t, a e^{-nu t}.
  double advective_amplitude() const { return a * std::exp(-nu * t); }
};

struct OperatorSlice {
  SliceParams params;
  SliceVariant variant = SliceVariant::full;
  std::vector<int> modes;  ///< x-wavenumber of each row
  Eigen::MatrixXcd matrix;

  Eigen::Index dim() const { return matrix.rows(); }

  /// Row index of wavenumber k, or -1 when k is not in the index set.
  Eigen::Index row_of(int k) const {
    for (std::size_t r = 0; r < modes.size(); ++r)
      if (modes[r] == k) return static_cast<Eigen::Index>(r);
    return -1;
  }
};

/// The multiplier 1 + Delta^{-1} at (k, l): 1 - 1/(k^2 + l^2).
inline double inverse_laplacian_factor(int k, int l) {
  return 1.0 - 1.0 / static_cast<double>(k * k + l * l);
}

namespace detail {

inline void check_slice_args(const SliceParams& p, const char* who) {
  require(p.ell != 0, std::string(who) + ": ell = 0 is purely diagonal and has no slice");
  require(p.N >= 1, std::string(who) + ": truncation N must be positive");
  require(p.nu > 0.0, std::string(who) + ": viscosity must be positive");
  require(std::isfinite(p.a) && std::isfinite(p.t), std::string(who) + ": non-finite a or t");
}

inline std::vector<int> full_modes(int N) {
  std::vector<int> m;
  m.reserve(2 * N + 1);
  for (int k = -N; k <= N; ++k) m.push_back(k);
  return m;
}

// Column factor multiplying the source coefficient w^(m, ell).
inline double bar_source_factor(int m, int ell, SliceVariant v) {
  return v == SliceVariant::approximate ? 1.0 : inverse_laplacian_factor(m, ell);
}

}  // namespace detail

/// Advective part of the bar linearization on one y-wavenumber row:
///   out(k) = -(ell/2) A [ f(k-1) in(k-1) - f(k+1) in(k+1) ],  A = a e^{-nu t},
/// where f = 1 - 1/(m^2 + ell^2) (full) or 1 (approximate). `in` and `out`
/// hold k = -N..N. ell = 0 yields zero.
inline void apply_bar_advection(int ell, double amplitude, SliceVariant variant,
                                std::span<const cplx> in, std::span<cplx> out) {
  const int n = static_cast<int>(in.size());
  const int N = (n - 1) / 2;
  if (ell == 0 || amplitude == 0.0) {
    for (auto& o : out) o = cplx{};
    return;
  }
  const double c = -0.5 * ell * amplitude;
  for (int r = 0; r < n; ++r) {
    const int k = r - N;
    cplx acc{};
    if (r > 0) acc += detail::bar_source_factor(k - 1, ell, variant) * in[r - 1];
    if (r < n - 1) acc -= detail::bar_source_factor(k + 1, ell, variant) * in[r + 1];
    out[r] = c * acc;
  }
}

/// Linearization about a e^{-nu t} cos x on the slice ell, full or approximate.
inline OperatorSlice build_bar_slice(const SliceParams& p, SliceVariant variant) {
  detail::check_slice_args(p, "build_bar_slice");
  detail::require(variant == SliceVariant::full || variant == SliceVariant::approximate,
                  "build_bar_slice: variant must be full or approximate");
  OperatorSlice op{p, variant, detail::full_modes(p.N), {}};
  const Eigen::Index n = 2 * p.N + 1;
  op.matrix = Eigen::MatrixXcd::Zero(n, n);
  const double A = p.advective_amplitude();
  const double c = 0.5 * p.ell * A;
  for (Eigen::Index r = 0; r < n; ++r) {
    const int k = static_cast<int>(r) - p.N;
    op.matrix(r, r) = -p.nu * (k * k + p.ell * p.ell);
    if (A == 0.0) continue;
    if (r > 0) op.matrix(r, r - 1) = -c * detail::bar_source_factor(k - 1, p.ell, variant);
    if (r < n - 1) op.matrix(r, r + 1) = c * detail::bar_source_factor(k + 1, p.ell, variant);
  }
  return op;
}

/// B = -i a ell e^{-nu t} sin(x) as a multiplication operator on {e^{ikx}}, |k| <= N.
inline Eigen::MatrixXcd build_B(const SliceParams& p) {
  detail::check_slice_args(p, "build_B");
  const Eigen::Index n = 2 * p.N + 1;
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(n, n);
  const double c = 0.5 * p.a * p.ell * std::exp(-p.nu * p.t);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (r > 0) B(r, r - 1) = -c;
    if (r < n - 1) B(r, r + 1) = c;
  }
  return B;
}

/// C = [d/dx, B] = -i a ell e^{-nu t} cos(x) on {e^{ikx}}, |k| <= N.
inline Eigen::MatrixXcd build_C(const SliceParams& p) {
  detail::check_slice_args(p, "build_C");
  const Eigen::Index n = 2 * p.N + 1;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  const cplx c{0.0, -0.5 * p.a * p.ell * std::exp(-p.nu * p.t)};
  for (Eigen::Index r = 0; r < n; ++r) {
    if (r > 0) C(r, r - 1) = c;
    if (r < n - 1) C(r, r + 1) = c;
  }
  return C;
}

/// diag(i k), k = -N..N.
inline Eigen::MatrixXcd build_dx(int N) {
  Eigen::VectorXcd d(2 * N + 1);
  for (int k = -N; k <= N; ++k) d(k + N) = cplx{0.0, static_cast<double>(k)};
  return d.asDiagonal();
}

inline OperatorSlice adjoint_slice(const OperatorSlice& op) {
  OperatorSlice adj = op;
  adj.variant = SliceVariant::adjoint;
  adj.matrix = op.matrix.adjoint();
  return adj;
}

/// sqrt(1 + Delta_ell^{-1}) at wavenumber k.
inline double symmetrizer(int k, int ell) {
  return std::sqrt(inverse_laplacian_factor(k, ell));
}

/// nu Delta_ell + S B S with S = diag(sqrt(1 - 1/(k^2 + ell^2))). For
/// |ell| = 1 the k = 0 row (S = 0) is left out of the index set. The
/// advective part is skew-Hermitian bit for bit.
inline OperatorSlice build_symmetrized_slice(const SliceParams& p) {
  detail::check_slice_args(p, "build_symmetrized_slice");
  OperatorSlice op{p, SliceVariant::symmetrized, {}, {}};
  for (int k = -p.N; k <= p.N; ++k)
    if (k * k + p.ell * p.ell != 1) op.modes.push_back(k);
  const auto n = static_cast<Eigen::Index>(op.modes.size());
  op.matrix = Eigen::MatrixXcd::Zero(n, n);
  const double c = 0.5 * p.ell * p.advective_amplitude();
  for (Eigen::Index r = 0; r < n; ++r) {
    const int k = op.modes[r];
    op.matrix(r, r) = -p.nu * (k * k + p.ell * p.ell);
    // Neighbours in the index set that are also neighbours in k.
    for (Eigen::Index s : {r - 1, r + 1}) {
      if (s < 0 || s >= n) continue;
      const int m = op.modes[s];
      if (std::abs(m - k) != 1) continue;
      const double weight = symmetrizer(k, p.ell) * symmetrizer(m, p.ell);
      op.matrix(r, s) = (m == k - 1 ? -c : c) * weight;
    }
  }
  return op;
}

struct DipoleOperator {
  int N = 0;
  double nu = 0.0;
  double a = 0.0;
  double t = 0.0;
  bool symmetrized = false;
  std::vector<WaveIndex> modes;
  Eigen::MatrixXcd matrix;

  Eigen::Index dim() const { return matrix.rows(); }

  Eigen::Index index_of(int k, int l) const {
    for (std::size_t r = 0; r < modes.size(); ++r)
      if (modes[r].k == k && modes[r].l == l) return static_cast<Eigen::Index>(r);
    return -1;
  }
};

namespace detail {

inline DipoleOperator build_dipole_impl(int N, double nu, double a, double t, bool symmetrized) {
  require(N >= 2, "build_dipole: N must be at least 2");
  require(nu > 0.0, "build_dipole: viscosity must be positive");
  DipoleOperator op{N, nu, a, t, symmetrized, {}, {}};
  for (int l = -N; l <= N; ++l)
    for (int k = -N; k <= N; ++k) {
      const int r2 = k * k + l * l;
      if (r2 == 0 || (symmetrized && r2 == 1)) continue;
      op.modes.push_back({k, l});
    }
  const auto n = static_cast<Eigen::Index>(op.modes.size());
  std::unordered_map<long, Eigen::Index> lookup;
  auto key = [N](int k, int l) { return static_cast<long>(l + N) * (2 * N + 1) + (k + N); };
  for (Eigen::Index r = 0; r < n; ++r) lookup[key(op.modes[r].k, op.modes[r].l)] = r;
  auto find = [&](int k, int l) -> Eigen::Index {
    if (std::abs(k) > N || std::abs(l) > N) return -1;
    auto it = lookup.find(key(k, l));
    return it == lookup.end() ? -1 : it->second;
  };

  op.matrix = Eigen::MatrixXcd::Zero(n, n);
  const double A = a * std::exp(-nu * t);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto [k, l] = op.modes[r];
    op.matrix(r, r) = -nu * (k * k + l * l);
    if (A == 0.0) continue;
    // Raw skew coupling (before the 1 + Delta^{-1} weights): the x-shear
    // part mixes (k +- 1, l), the y-shear part mixes (k, l +- 1).
    struct Link {
      int k, l;
      double raw;
    };
    const Link links[] = {{k - 1, l, -0.5 * l * A},
                          {k + 1, l, 0.5 * l * A},
                          {k, l - 1, 0.5 * k * A},
                          {k, l + 1, -0.5 * k * A}};
    for (const auto& link : links) {
      if (link.raw == 0.0) continue;
      const Eigen::Index s = find(link.k, link.l);
      if (s < 0) continue;
      const double weight =
          symmetrized ? std::sqrt(inverse_laplacian_factor(k, l)) *
                            std::sqrt(inverse_laplacian_factor(link.k, link.l))
                      : inverse_laplacian_factor(link.k, link.l);
      op.matrix(r, s) = link.raw * weight;
    }
  }
  return op;
}

}  // namespace detail

/// Linearization about a e^{-nu t} (cos x + cos y) on |k|, |l| <= N.
inline DipoleOperator build_dipole(int N, double nu, double a, double t) {
  return detail::build_dipole_impl(N, nu, a, t, false);
}

/// The dipole linearization conjugated by sqrt(1 + Delta^{-1}):
/// nu Delta + a e^{-nu t} Q with Q skew-Hermitian.
inline DipoleOperator build_dipole_symmetrized(int N, double nu, double a, double t) {
  return detail::build_dipole_impl(N, nu, a, t, true);
}

/// Generator of the anomalous coordinates u = (p_0, q_0, p_1, q_1, ..., p_jmax, q_jmax)
/// on the row l = sign (sign = +1 or -1), with amplitude a e^{-nu t}:
///   p_j' = -nu (4j^2+1) p_j - (sign/2) A [ f(2j-1) q_{j-1} - f(2j+1) q_j ]
///   q_j' = -nu ((2j+1)^2+1) q_j - (sign/2) A [ f(2j) p_j - f(2j+2) p_{j+1} ]
/// with f(m) = 1 - 1/(m^2 + 1), q_{-1} = -q_0 and p_{jmax+1} dropped.
inline Eigen::MatrixXd build_pq_system(double nu, double a, double t, int jmax, int sign) {
  detail::require(jmax >= 1, "build_pq_system: jmax must be at least 1");
  detail::require(sign == 1 || sign == -1, "build_pq_system: sign must be +1 or -1");
  const Eigen::Index n = 2 * (jmax + 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const double h = 0.5 * sign * a * std::exp(-nu * t);
  auto f = [](int m) { return inverse_laplacian_factor(m, 1); };
  auto P = [](int j) { return 2 * j; };
  auto Q = [](int j) { return 2 * j + 1; };
  for (int j = 0; j <= jmax; ++j) {
    A(P(j), P(j)) = -nu * (4.0 * j * j + 1.0);
    A(Q(j), Q(j)) = -nu * ((2.0 * j + 1.0) * (2.0 * j + 1.0) + 1.0);
    if (j == 0) {
      A(P(0), Q(0)) = 2.0 * h * f(1);
    } else {
      A(P(j), Q(j - 1)) = -h * f(2 * j - 1);
      A(P(j), Q(j)) = h * f(2 * j + 1);
    }
    A(Q(j), P(j)) = -h * f(2 * j);
    if (j < jmax) A(Q(j), P(j + 1)) = h * f(2 * j + 2);
  }
  return A;
}

/// The 2D bar linearization L(t) applied to a field: each row l evolves under
/// its slice, the l = 0 row is pure diffusion.
inline SpectralField linear_generator(const SpectralField& w, double nu, double a, double t,
                                      SliceVariant variant) {
  detail::require(variant == SliceVariant::full || variant == SliceVariant::approximate,
                  "linear_generator: variant must be full or approximate");
  SpectralField out(w.nx(), w.ny(), w.is_real());
  const double A = a * std::exp(-nu * t);
  for (int l = -w.ny(); l <= w.ny(); ++l) {
    auto dst = out.row(l);
    apply_bar_advection(l, A, variant, w.row(l), dst);
    for (int k = -w.nx(); k <= w.nx(); ++k)
      dst[k + w.nx()] -= nu * static_cast<double>(k * k + l * l) * w(k, l);
  }
  return out;
}

}  // namespace barstab
