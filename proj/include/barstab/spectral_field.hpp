#pragma once

// Spectral data types on the torus [-pi, pi]^2.
//
// Fourier convention: w(x, y) = sum_{k,l} w^(k, l) exp(i (k x + l y)) with
// w^(k, l) = (1 / 4 pi^2) \int w exp(-i (k x + l y)), so Parseval reads
// \int |w|^2 = (2 pi)^2 sum |w^|^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "barstab/error.hpp"

namespace barstab {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct WaveIndex {
  int k = 0;  ///< x-wavenumber
  int l = 0;  ///< y-wavenumber

  friend auto operator<=>(const WaveIndex&, const WaveIndex&) = default;
};

/// Dense rectangular array of Fourier coefficients w^(k, l), |k| <= nx, |l| <= ny.
///
/// Storage is row-major in l: all k for a fixed l are contiguous, so a
/// y-wavenumber slice is a span. The (0, 0) slot exists but must stay zero
/// for every field handed to the physical operations.
class SpectralField {
 public:
  SpectralField() = default;

  SpectralField(int nx, int ny, bool reality = false) : nx_(nx), ny_(ny), reality_(reality) {
    detail::require(nx >= 0 && ny >= 0, "SpectralField: truncation must be non-negative");
    coeffs_.assign(static_cast<std::size_t>(width()) * height(), cplx{});
  }

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  int width() const noexcept { return 2 * nx_ + 1; }
  int height() const noexcept { return 2 * ny_ + 1; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  bool is_real() const noexcept { return reality_; }
  void set_real(bool reality) noexcept { reality_ = reality; }

  bool contains(int k, int l) const noexcept {
    return std::abs(k) <= nx_ && std::abs(l) <= ny_;
  }

  /// Coefficient at (k, l); zero outside the truncation.
  cplx operator()(int k, int l) const noexcept {
    return contains(k, l) ? coeffs_[offset(k, l)] : cplx{};
  }

  cplx& at(int k, int l) {
    detail::require(contains(k, l), "SpectralField: index (" + std::to_string(k) + ", " +
                                        std::to_string(l) + ") outside truncation");
    return coeffs_[offset(k, l)];
  }

  std::span<const cplx> row(int l) const {
    detail::require(std::abs(l) <= ny_, "SpectralField: row outside truncation");
    return {coeffs_.data() + static_cast<std::size_t>(l + ny_) * width(),
            static_cast<std::size_t>(width())};
  }
  std::span<cplx> row(int l) {
    detail::require(std::abs(l) <= ny_, "SpectralField: row outside truncation");
    return {coeffs_.data() + static_cast<std::size_t>(l + ny_) * width(),
            static_cast<std::size_t>(width())};
  }

  std::span<const cplx> coeffs() const noexcept { return coeffs_; }
  std::span<cplx> coeffs() noexcept { return coeffs_; }

  /// Sum of |w^|^2 over all stored coefficients (coefficient l2 norm squared).
  double coeff_norm_sq() const noexcept {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return s;
  }
  double coeff_norm() const noexcept { return std::sqrt(coeff_norm_sq()); }

  bool same_shape(const SpectralField& o) const noexcept {
    return nx_ == o.nx_ && ny_ == o.ny_;
  }

  SpectralField& operator+=(const SpectralField& o) {
    detail::require(same_shape(o), "SpectralField: shape mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    reality_ = reality_ && o.reality_;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    detail::require(same_shape(o), "SpectralField: shape mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    reality_ = reality_ && o.reality_;
    return *this;
  }
  SpectralField& operator*=(double s) noexcept {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

 private:
  std::size_t offset(int k, int l) const noexcept {
    return static_cast<std::size_t>(l + ny_) * width() + static_cast<std::size_t>(k + nx_);
  }

  int nx_ = 0;
  int ny_ = 0;
  bool reality_ = false;
  std::vector<cplx> coeffs_;
};

/// Velocity in spectral form; both components share the truncation.
struct VelocityField {
  SpectralField u1;
  SpectralField u2;
};

/// Largest |w^(k,l) - conj(w^(-k,-l))| over the stored indices.
inline double conjugate_symmetry_defect(const SpectralField& w) {
  double worst = 0.0;
  for (int l = -w.ny(); l <= w.ny(); ++l)
    for (int k = -w.nx(); k <= w.nx(); ++k)
      worst = std::max(worst, std::abs(w(k, l) - std::conj(w(-k, -l))));
  return worst;
}

/// Projects onto real-valued functions by averaging each coefficient with
/// the conjugate of its mirror.
inline SpectralField real_part(const SpectralField& w) {
  SpectralField out(w.nx(), w.ny(), true);
  for (int l = -w.ny(); l <= w.ny(); ++l)
    for (int k = -w.nx(); k <= w.nx(); ++k)
      out.at(k, l) = 0.5 * (w(k, l) + std::conj(w(-k, -l)));
  return out;
}

inline VelocityField biot_savart(const SpectralField& omega) {
  detail::require(std::abs(omega(0, 0)) == 0.0,
                  "biot_savart: vorticity must have zero mean (w^(0,0) = 0)");
  VelocityField u{SpectralField(omega.nx(), omega.ny(), omega.is_real()),
                  SpectralField(omega.nx(), omega.ny(), omega.is_real())};
  const cplx i{0.0, 1.0};
  for (int l = -omega.ny(); l <= omega.ny(); ++l) {
    for (int k = -omega.nx(); k <= omega.nx(); ++k) {
      if (k == 0 && l == 0) continue;
      const cplx w = omega(k, l);
      const cplx f = i / static_cast<double>(k * k + l * l);
      u.u1.at(k, l) = f * static_cast<double>(l) * w;
      u.u2.at(k, l) = -f * static_cast<double>(k) * w;
    }
  }
  return u;
}

enum class Phase { cosine, sine };

inline Phase parse_phase(const std::string& s) {
  if (s == "cos" || s == "cosine") return Phase::cosine;
  if (s == "sin" || s == "sine") return Phase::sine;
  throw invalid_input("unknown phase '" + s + "' (expected cos or sin)");
}

namespace detail {

// a e^{-nu m^2 t} cos(m s) or sin(m s) along one axis: writes the two
// coefficients at +m and -m via `put(sign, value)`.
template <class Put>
void put_trig_mode(Phase phase, double amp, Put&& put) {
  if (phase == Phase::cosine) {
    put(+1, cplx{0.5 * amp, 0.0});
    put(-1, cplx{0.5 * amp, 0.0});
  } else {
    put(+1, cplx{0.0, -0.5 * amp});
    put(-1, cplx{0.0, 0.5 * amp});
  }
}

}  // namespace detail

/// a e^{-nu m^2 t} cos(m x) (or sin), an exact solution of the vorticity equation.
inline SpectralField bar_state(int nx, int ny, int m, Phase phase, double t, double nu,
                               double amplitude) {
  detail::require(m >= 1, "bar_state: m must be positive");
  detail::require(m <= nx, "bar_state: m exceeds the x truncation");
  SpectralField w(nx, ny, true);
  const double amp = amplitude * std::exp(-nu * m * m * t);
  detail::put_trig_mode(phase, amp, [&](int s, cplx v) { w.at(s * m, 0) = v; });
  return w;
}

/// a e^{-nu m^2 t} [cos(m x) + cos(m y)] (or sin), the dipole family.
inline SpectralField dipole_state(int nx, int ny, int m, Phase phase, double t, double nu,
                                  double amplitude) {
  detail::require(m >= 1, "dipole_state: m must be positive");
  detail::require(m <= nx && m <= ny, "dipole_state: m exceeds the truncation");
  SpectralField w(nx, ny, true);
  const double amp = amplitude * std::exp(-nu * m * m * t);
  detail::put_trig_mode(phase, amp, [&](int s, cplx v) {
    w.at(s * m, 0) = v;
    w.at(0, s * m) = v;
  });
  return w;
}

/// Anomalous coordinates on the rows l = +1 and l = -1:
///   p_j = w^(2j, l) + w^(-2j, l),  q_j = w^(2j+1, l) - w^(-(2j+1), l).
/// Note p_0 = 2 w^(0, l).
struct PQCoordinates {
  int jmax = 0;
  std::vector<cplx> p_plus, q_plus, p_minus, q_minus;
};

inline PQCoordinates pq_coordinates(const SpectralField& w, int jmax) {
  detail::require(jmax >= 0, "pq_coordinates: jmax must be non-negative");
  detail::require(2 * jmax + 1 <= w.nx(), "pq_coordinates: 2*jmax+1 exceeds the x truncation");
  detail::require(w.ny() >= 1, "pq_coordinates: field has no l = +-1 rows");
  PQCoordinates pq;
  pq.jmax = jmax;
  auto fill = [&](int l, std::vector<cplx>& p, std::vector<cplx>& q) {
    p.resize(jmax + 1);
    q.resize(jmax + 1);
    for (int j = 0; j <= jmax; ++j) {
      p[j] = w(2 * j, l) + w(-2 * j, l);
      q[j] = w(2 * j + 1, l) - w(-(2 * j + 1), l);
    }
  };
  fill(+1, pq.p_plus, pq.q_plus);
  fill(-1, pq.p_minus, pq.q_minus);
  return pq;
}

/// Orthogonal (coefficient-l2) projection onto the rapid-decay subspace M:
/// the l = 0 row is cleared, and on rows l = +-1 even k keep their
/// antisymmetric part while odd k keep their symmetric part.
inline SpectralField project_to_M(const SpectralField& w) {
  SpectralField out = w;
  for (int k = -w.nx(); k <= w.nx(); ++k) out.at(k, 0) = cplx{};
  for (int l : {-1, 1}) {
    if (std::abs(l) > w.ny()) continue;
    for (int k = -w.nx(); k <= w.nx(); ++k) {
      const double sign = (k % 2 == 0) ? -1.0 : 1.0;
      out.at(k, l) = 0.5 * (w(k, l) + sign * w(-k, l));
    }
  }
  return out;
}

struct MembershipReport {
  bool member = false;
  double max_violation = 0.0;  ///< largest anomalous-coordinate magnitude
  double norm = 0.0;           ///< coefficient l2 norm of the field
  std::string worst;           ///< which coordinate attains max_violation
};

/// Largest anomalous coordinate |w^(m,0)|, |p_j^+-|, |q_j^+-| over the truncation.
inline MembershipReport anomalous_violation(const SpectralField& w) {
  MembershipReport r;
  r.norm = w.coeff_norm();
  WaveIndex worst{0, 0};
  auto consider = [&](double v, int k, int l) {
    if (v > r.max_violation) {
      r.max_violation = v;
      worst = {k, l};
    }
  };
  for (int k = -w.nx(); k <= w.nx(); ++k) consider(std::abs(w(k, 0)), k, 0);
  for (int l : {-1, 1}) {
    if (std::abs(l) > w.ny()) continue;
    for (int k = 0; k <= w.nx(); ++k) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      consider(std::abs(w(k, l) + sign * w(-k, l)), k, l);
    }
  }
  if (r.max_violation > 0.0) {
    if (worst.l == 0)
      r.worst = "w(" + std::to_string(worst.k) + ",0)";
    else
      r.worst = std::string(worst.k % 2 == 0 ? "p_" : "q_") + std::to_string(worst.k / 2) +
                (worst.l > 0 ? "+" : "-");
  }
  return r;
}

inline MembershipReport membership_in_M(const SpectralField& w, double tol) {
  MembershipReport r = anomalous_violation(w);
  r.member = r.max_violation <= tol * r.norm;
  return r;
}

/// \int w^2 over the torus.
inline double enstrophy(const SpectralField& w) {
  return two_pi * two_pi * w.coeff_norm_sq();
}

/// \int |grad w|^2 over the torus.
inline double grad_norm_sq(const SpectralField& w) {
  double s = 0.0;
  for (int l = -w.ny(); l <= w.ny(); ++l)
    for (int k = -w.nx(); k <= w.nx(); ++k)
      s += static_cast<double>(k * k + l * l) * std::norm(w(k, l));
  return two_pi * two_pi * s;
}

/// Copies `w` into a field with a different truncation (zero padding or cutting).
inline SpectralField resize(const SpectralField& w, int nx, int ny) {
  SpectralField out(nx, ny, w.is_real());
  for (int l = -std::min(ny, w.ny()); l <= std::min(ny, w.ny()); ++l)
    for (int k = -std::min(nx, w.nx()); k <= std::min(nx, w.nx()); ++k) out.at(k, l) = w(k, l);
  return out;
}

}  // namespace barstab
