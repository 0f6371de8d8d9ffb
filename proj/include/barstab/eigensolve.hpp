#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <future>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "barstab/error.hpp"
#include "barstab/operators.hpp"
#include "barstab/stats.hpp"

namespace barstab {

struct SpectrumSource {
  int ell = 0;
  int N = 0;
  double nu = 0.0;
  double a = 0.0;
  double t = 0.0;
  std::string variant;
};

/// Eigenvalues sorted by descending real part; runs whose real parts agree
/// to within a few ulps of the matrix scale are ordered by ascending imaginary part.
struct Spectrum {
  std::vector<cplx> eigenvalues;
  SpectrumSource source;

  std::size_t size() const { return eigenvalues.size(); }
};

struct EigenPairs {
  std::vector<cplx> values;
  Eigen::MatrixXcd vectors;  ///< column j is the right eigenvector of values[j]
};

namespace detail {

inline std::string describe(const SpectrumSource& s) {
  return "ell=" + std::to_string(s.ell) + " N=" + std::to_string(s.N) +
         " nu=" + std::to_string(s.nu) + " a=" + std::to_string(s.a) +
         " t=" + std::to_string(s.t) + " variant=" + s.variant;
}

inline void check_finite(const Eigen::MatrixXcd& m, const std::string& context) {
  require(m.rows() == m.cols() && m.rows() > 0, "spectrum: matrix must be square and non-empty (" +
                                                   context + ")");
  require(m.allFinite(), "spectrum: matrix has non-finite entries (" + context + ")");
}

// Dense complex eigen-decomposition (Hessenberg reduction + shifted QR, zgeev).
inline void zgeev(Eigen::MatrixXcd work, std::vector<cplx>& values, Eigen::MatrixXcd* vectors,
                  const std::string& context) {
  const auto n = static_cast<lapack_int>(work.rows());
  values.assign(n, cplx{});
  lapack_complex_double* vr = nullptr;
  if (vectors) {
    vectors->resize(n, n);
    vr = reinterpret_cast<lapack_complex_double*>(vectors->data());
  }
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', n,
      reinterpret_cast<lapack_complex_double*>(work.data()), n,
      reinterpret_cast<lapack_complex_double*>(values.data()), nullptr, 1, vr, n);
  if (info > 0)
    throw convergence_failure("eigensolver failed to converge (zgeev info=" +
                              std::to_string(info) + ") for " + context);
  if (info < 0) throw error("zgeev: illegal argument " + std::to_string(-info));
}

inline double tie_tolerance(const std::vector<cplx>& values) {
  double scale = 0.0;
  for (const auto& v : values) scale = std::max(scale, std::abs(v));
  return 64.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1.0);
}

}  // namespace detail

/// Sorts in place by descending real part; groups of nearly equal real part
/// are ordered by ascending imaginary part.
inline void sort_spectrum(std::vector<cplx>& values) {
  std::sort(values.begin(), values.end(), [](const cplx& x, const cplx& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() < y.imag();
  });
  const double tol = detail::tie_tolerance(values);
  std::size_t start = 0;
  while (start < values.size()) {
    std::size_t end = start + 1;
    while (end < values.size() && values[start].real() - values[end].real() <= tol) ++end;
    std::stable_sort(values.begin() + start, values.begin() + end,
                     [](const cplx& x, const cplx& y) { return x.imag() < y.imag(); });
    start = end;
  }
}

/// All eigenvalues of a dense complex matrix, sorted.
inline std::vector<cplx> eigenvalues(const Eigen::MatrixXcd& m, const std::string& context = "") {
  detail::check_finite(m, context);
  std::vector<cplx> values;
  detail::zgeev(m, values, nullptr, context);
  sort_spectrum(values);
  return values;
}

/// Eigenvalues with right eigenvectors (unit 2-norm), in solver order.
inline EigenPairs eigenpairs(const Eigen::MatrixXcd& m, const std::string& context = "") {
  detail::check_finite(m, context);
  EigenPairs out;
  detail::zgeev(m, out.values, &out.vectors, context);
  return out;
}

inline Spectrum spectrum(const OperatorSlice& op) {
  Spectrum s;
  s.source = {op.params.ell, op.params.N, op.params.nu, op.params.a, op.params.t,
              to_string(op.variant)};
  s.eigenvalues = eigenvalues(op.matrix, detail::describe(s.source));
  return s;
}

inline Spectrum spectrum(const DipoleOperator& op) {
  Spectrum s;
  s.source = {0, op.N, op.nu, op.a, op.t, op.symmetrized ? "dipole-symmetrized" : "dipole"};
  s.eigenvalues = eigenvalues(op.matrix, detail::describe(s.source));
  return s;
}

inline cplx least_decaying(const Spectrum& s) {
  detail::require(!s.eigenvalues.empty(), "least_decaying: empty spectrum");
  return s.eigenvalues.front();
}

/// Worker count for parameter sweeps: BARSTAB_THREADS if set, else the
/// hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("BARSTAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Builds the slice for a variant with the advective amplitude a e^{-nu t}
/// pinned to `amplitude` (t = 0, a = amplitude).
inline OperatorSlice build_slice(int ell, int N, double nu, double amplitude, SliceVariant variant) {
  const SliceParams p{ell, N, nu, amplitude, 0.0};
  switch (variant) {
    case SliceVariant::full:
    case SliceVariant::approximate: return build_bar_slice(p, variant);
    case SliceVariant::symmetrized: return build_symmetrized_slice(p);
    case SliceVariant::adjoint: return adjoint_slice(build_bar_slice(p, SliceVariant::full));
  }
  throw invalid_input("build_slice: unknown variant");
}

struct SweepEntry {
  double nu = 0.0;
  Spectrum spectrum;
};

/// One spectrum per viscosity with the advective amplitude held fixed.
/// Entries come back in the order of `nus` regardless of scheduling.
inline std::vector<SweepEntry> nu_sweep(int ell, int N, const std::vector<double>& nus,
                                        double amplitude = 1.0,
                                        SliceVariant variant = SliceVariant::full) {
  detail::require(!nus.empty(), "nu_sweep: empty viscosity list");
  for (std::size_t i = 0; i < nus.size(); ++i) {
    detail::require(nus[i] > 0.0, "nu_sweep: viscosities must be positive");
    for (std::size_t j = 0; j < i; ++j)
      detail::require(nus[i] != nus[j], "nu_sweep: viscosities must be distinct");
  }
  std::vector<SweepEntry> out(nus.size());
  auto solve = [&](std::size_t i) {
    out[i] = {nus[i], spectrum(build_slice(ell, N, nus[i], amplitude, variant))};
  };
  const unsigned workers = std::min<unsigned>(thread_count(), nus.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < nus.size(); ++i) solve(i);
    return out;
  }
  std::vector<std::future<void>> jobs;
  std::atomic<std::size_t> next{0};
  for (unsigned w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < nus.size(); i = next++) solve(i);
    }));
  for (auto& j : jobs) j.get();
  return out;
}

struct ScalingFit {
  std::vector<std::pair<double, double>> samples;  ///< (nu, |Re lambda_1|)
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

/// Least-squares line through (ln nu, ln |Re lambda_1|).
inline ScalingFit fit_scaling(std::vector<std::pair<double, double>> samples) {
  detail::require(samples.size() >= 3, "fit_scaling: need at least 3 samples");
  std::vector<double> x, y;
  for (const auto& [nu, rate] : samples) {
    detail::require(nu > 0.0, "fit_scaling: viscosity must be positive");
    detail::require(rate != 0.0 && std::isfinite(rate),
                    "fit_scaling: |Re lambda_1| is zero or non-finite");
    x.push_back(std::log(nu));
    y.push_back(std::log(std::abs(rate)));
  }
  const LineFit line = least_squares_line(x, y);
  return {std::move(samples), line.slope, line.intercept, line.max_residual};
}

inline ScalingFit fit_scaling(const std::vector<SweepEntry>& sweep) {
  std::vector<std::pair<double, double>> samples;
  for (const auto& e : sweep) samples.emplace_back(e.nu, std::abs(least_decaying(e.spectrum).real()));
  return fit_scaling(std::move(samples));
}

struct CollapseRow {
  int rank = 0;  ///< 1-based position in the sorted spectrum
  double nu = 0.0;
  double scaled_real = 0.0;  ///< Re lambda_rank / sqrt(nu)
};

/// For each nu: the first `count` eigenvalues' real parts divided by sqrt(nu).
/// Rows are grouped by nu in input order, ranks ascending.
inline std::vector<CollapseRow> collapse_table(const std::vector<SweepEntry>& sweep, int count) {
  detail::require(count >= 1, "collapse_table: count must be positive");
  std::vector<CollapseRow> rows;
  for (const auto& e : sweep) {
    detail::require(static_cast<std::size_t>(count) <= e.spectrum.size(),
                    "collapse_table: count exceeds the matrix dimension");
    for (int j = 0; j < count; ++j)
      rows.push_back({j + 1, e.nu, e.spectrum.eigenvalues[j].real() / std::sqrt(e.nu)});
  }
  return rows;
}

inline std::vector<CollapseRow> collapse_table(int ell, int N, const std::vector<double>& nus,
                                               int count, double amplitude = 1.0,
                                               SliceVariant variant = SliceVariant::full) {
  detail::require(count >= 1 && count <= 2 * N + 1,
                  "collapse_table: count exceeds the matrix dimension");
  return collapse_table(nu_sweep(ell, N, nus, amplitude, variant), count);
}

}  // namespace barstab
