#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <fftw3.h>

#include "barstab/spectral_field.hpp"

namespace barstab {

/// n x n complex FFT on the uniform grid x_j = 2 pi j / n, y_i = 2 pi i / n.
/// Physical arrays are row-major [y][x].
class Fft2d {
 public:
  explicit Fft2d(int n) : n_(n) {
    detail::require(n >= 2, "Fft2d: grid must have at least 2 points");
    buf_.reset(fftw_alloc_complex(static_cast<std::size_t>(n) * n));
    if (!buf_) throw error("Fft2d: allocation failed");
    forward_.reset(fftw_plan_dft_2d(n, n, buf_.get(), buf_.get(), FFTW_FORWARD, FFTW_ESTIMATE));
    backward_.reset(fftw_plan_dft_2d(n, n, buf_.get(), buf_.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
    if (!forward_ || !backward_) throw error("Fft2d: planning failed");
  }

  int n() const noexcept { return n_; }

  /// Samples sum_{k,l} w^(k,l) e^{i(kx+ly)} on the grid. Needs n > 2 max(nx, ny).
  std::vector<cplx> to_physical(const SpectralField& w) const {
    detail::require(2 * w.nx() < n_ && 2 * w.ny() < n_, "Fft2d: grid too coarse for the field");
    cplx* b = data();
    std::fill(b, b + total(), cplx{});
    for (int l = -w.ny(); l <= w.ny(); ++l)
      for (int k = -w.nx(); k <= w.nx(); ++k) b[slot(k, l)] = w(k, l);
    fftw_execute(backward_.get());
    return std::vector<cplx>(b, b + total());
  }

  /// Fourier coefficients of grid samples, truncated to |k| <= nx, |l| <= ny.
  SpectralField to_spectral(const std::vector<cplx>& phys, int nx, int ny, bool real) const {
    detail::require(phys.size() == total(), "Fft2d: sample array has the wrong size");
    detail::require(2 * nx < n_ && 2 * ny < n_, "Fft2d: truncation too large for the grid");
    cplx* b = data();
    std::copy(phys.begin(), phys.end(), b);
    fftw_execute(forward_.get());
    const double scale = 1.0 / static_cast<double>(total());
    SpectralField w(nx, ny, real);
    for (int l = -ny; l <= ny; ++l)
      for (int k = -nx; k <= nx; ++k) w.at(k, l) = scale * b[slot(k, l)];
    return w;
  }

 private:
  struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
  };
  struct BufferDeleter {
    void operator()(fftw_complex* p) const { fftw_free(p); }
  };

  std::size_t total() const noexcept { return static_cast<std::size_t>(n_) * n_; }
  std::size_t slot(int k, int l) const noexcept {
    const int kk = (k % n_ + n_) % n_;
    const int ll = (l % n_ + n_) % n_;
    return static_cast<std::size_t>(ll) * n_ + kk;
  }
  cplx* data() const noexcept { return reinterpret_cast<cplx*>(buf_.get()); }

  int n_;
  std::unique_ptr<fftw_complex, BufferDeleter> buf_;
  std::unique_ptr<fftw_plan_s, PlanDeleter> forward_;
  std::unique_ptr<fftw_plan_s, PlanDeleter> backward_;
};

/// Physical-space samples of a field on an n x n grid.
inline std::vector<cplx> synthesize(const SpectralField& w, int n) {
  return Fft2d(n).to_physical(w);
}

}  // namespace barstab
