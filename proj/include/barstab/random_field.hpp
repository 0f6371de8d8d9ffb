#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "barstab/spectral_field.hpp"

namespace barstab {

/// Seeded smooth random field: complex Gaussian coefficients scaled by
/// exp(-decay (k^2 + l^2)), zero mean. With `real` set, conjugate symmetry
/// is imposed so the field is real-valued in physical space.
inline SpectralField random_field(int nx, int ny, std::uint64_t seed, bool real = true,
                                  double decay = 0.1) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField w(nx, ny, false);
  for (int l = -ny; l <= ny; ++l) {
    for (int k = -nx; k <= nx; ++k) {
      const double envelope = std::exp(-decay * (k * k + l * l));
      const double re = normal(gen);
      const double im = normal(gen);
      // Below this the coefficient would only feed denormals into the integrators.
      w.at(k, l) = envelope > 1e-150 ? envelope * cplx{re, im} : cplx{};
    }
  }
  w.at(0, 0) = cplx{};
  return real ? real_part(w) : w;
}

/// Random field supported on the single y-wavenumber row `ell`.
inline SpectralField random_row(int nx, int ny, int ell, std::uint64_t seed, double decay = 0.1) {
  detail::require(std::abs(ell) <= ny, "random_row: ell outside truncation");
  const SpectralField full = random_field(nx, ny, seed, false, decay);
  SpectralField w(nx, ny, false);
  for (int k = -nx; k <= nx; ++k) w.at(k, ell) = full(k, ell);
  if (ell == 0) w.at(0, 0) = cplx{};
  return w;
}

}  // namespace barstab
