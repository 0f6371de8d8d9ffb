#pragma once

// CSV interchange formats.
//
//   field:  "# Nx=<int> Ny=<int> reality_flag=<0|1>" then "k,l,re,im" rows
//           for every stored coefficient, k fastest.
//   matrix: "row,col,re,im" rows for each nonzero entry, with a JSON sidecar
//           "<path>.json" holding the build parameters.
//
// Reals are written with %.17g so files round-trip exactly.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include "barstab/json.hpp"

#include "barstab/spectral_field.hpp"

namespace barstab {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Joins values into one CSV line (no trailing newline).
template <class... Ts>
std::string csv_line(const Ts&... values) {
  std::ostringstream os;
  bool first = true;
  auto put = [&](const auto& v) {
    if (!first) os << ',';
    first = false;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>)
      os << format_real(v);
    else
      os << v;
  };
  (put(values), ...);
  return os.str();
}

inline void write_field_csv(std::ostream& os, const SpectralField& w) {
  os << "# Nx=" << w.nx() << " Ny=" << w.ny() << " reality_flag=" << (w.is_real() ? 1 : 0)
     << '\n';
  os << "k,l,re,im\n";
  for (int l = -w.ny(); l <= w.ny(); ++l)
    for (int k = -w.nx(); k <= w.nx(); ++k)
      os << csv_line(k, l, w(k, l).real(), w(k, l).imag()) << '\n';
}

inline SpectralField read_field_csv(std::istream& is) {
  std::string line;
  int nx = -1, ny = -1, reality = 0;
  if (!std::getline(is, line) ||
      std::sscanf(line.c_str(), "# Nx=%d Ny=%d reality_flag=%d", &nx, &ny, &reality) != 3)
    throw invalid_input("field csv: malformed header line '" + line + "'");
  if (!std::getline(is, line) || line.rfind("k,l,re,im", 0) != 0)
    throw invalid_input("field csv: missing column header");
  SpectralField w(nx, ny, reality != 0);
  long lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    int k = 0, l = 0;
    double re = 0, im = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &k, &l, &re, &im) != 4 || !w.contains(k, l))
      throw invalid_input("field csv: bad row at line " + std::to_string(lineno));
    w.at(k, l) = cplx{re, im};
  }
  return w;
}

inline void save_field_csv(const std::string& path, const SpectralField& w) {
  std::ofstream os(path);
  if (!os) throw error("cannot open " + path + " for writing");
  write_field_csv(os, w);
}

inline SpectralField load_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw error("cannot open " + path);
  return read_field_csv(is);
}

struct MatrixEntry {
  long row = 0;
  long col = 0;
  cplx value;
};

inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXcd& m) {
  os << "row,col,re,im\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(r, c) != cplx{}) os << csv_line(r, c, m(r, c).real(), m(r, c).imag()) << '\n';
}

inline std::vector<MatrixEntry> read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("row,col,re,im", 0) != 0)
    throw invalid_input("matrix csv: missing column header");
  std::vector<MatrixEntry> entries;
  long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    MatrixEntry e;
    double re = 0, im = 0;
    if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%lf", &e.row, &e.col, &re, &im) != 4)
      throw invalid_input("matrix csv: bad row at line " + std::to_string(lineno));
    e.value = cplx{re, im};
    entries.push_back(e);
  }
  return entries;
}

inline void save_matrix_csv(const std::string& path, const Eigen::MatrixXcd& m,
                            const nlohmann::json& params) {
  std::ofstream os(path);
  if (!os) throw error("cannot open " + path + " for writing");
  write_matrix_csv(os, m);
  std::ofstream side(path + ".json");
  if (!side) throw error("cannot open " + path + ".json for writing");
  side << params.dump(2) << '\n';
}

}  // namespace barstab
