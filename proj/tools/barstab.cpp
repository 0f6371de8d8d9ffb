// barstab: experiment runner for the bar-state linearization studies.
//
//   barstab spectrum  --ell 2 --N 100 --nu 1e-3 [--variant full] [--out DIR]
//   barstab sweep     --nus 0.005,0.002,... [--variant full]
//   barstab collapse  --nus 0.00025,0.0001,0.00005 --count 30
//   barstab evolve    --init bar|dipole|mode|random|random-M|zero|file --solver linear|nonlinear
//   barstab hypo      --ell 2 --nu 1e-4 --M0 auto|<value>
//   barstab check
//
// Every subcommand accepts --config FILE (key=value lines); flags win over
// the file. Outputs land in --out (default "."), with manifest.json.
// Exit codes: 0 success, 1 check or run failure, 2 usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include "barstab/json.hpp"
#include <openssl/evp.h>

#include "barstab/barstab.hpp"
#include "barstab/invariants.hpp"

namespace fs = std::filesystem;
using namespace barstab;

namespace {

const std::vector<double> sweep_nus{0.005, 0.002, 0.001, 0.0005, 0.00025, 0.0001};
const std::vector<double> collapse_nus{0.00025, 0.0001, 0.00005};

std::string sha256_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw error("cannot read " + p.string() + " for digest");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char b[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

struct Common {
  std::string config;
  std::string out = ".";
};

// Output directory plus the list of files written, for the manifest.
struct Run {
  fs::path dir;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;

  std::ofstream open(const std::string& name) {
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream os(p);
    if (!os) throw error("cannot open " + p.string() + " for writing");
    outputs.push_back(p);
    return os;
  }
};

void begin(Run& run, const Common& c) {
  run.dir = c.out;
  if (!c.config.empty()) run.inputs.push_back(c.config);
}

nlohmann::json resolved_parameters(const CLI::App& sub) {
  nlohmann::json params = nlohmann::json::object();
  std::istringstream is(sub.config_to_str(true, false));
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.empty() || line[0] == '#' || line[0] == '[') continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\"'");
      const auto e = s.find_last_not_of(" \t\"'");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    params[key] = trim(line.substr(eq + 1));
  }
  return params;
}

void write_manifest(const Run& run, const CLI::App& sub, double seconds) {
  nlohmann::json m;
  m["subcommand"] = sub.get_name();
  m["version"] = BARSTAB_VERSION;
  m["parameters"] = resolved_parameters(sub);
  nlohmann::json in = nlohmann::json::object(), out = nlohmann::json::object();
  for (const auto& p : run.inputs) in[p.string()] = sha256_file(p);
  for (const auto& p : run.outputs) out[fs::relative(p, run.dir).string()] = sha256_file(p);
  m["inputs"] = in;
  m["outputs"] = out;
  m["wall_clock_seconds"] = seconds;
  fs::create_directories(run.dir);
  std::ofstream os(run.dir / "manifest.json");
  os << m.dump(2) << '\n';
}

void write_spectrum_rows(std::ostream& os, double nu, int ell, int N, const std::string& variant,
                         const std::vector<cplx>& values, std::size_t count) {
  for (std::size_t j = 0; j < std::min(count, values.size()); ++j)
    os << csv_line(nu, ell, N, variant, j + 1, values[j].real(), values[j].imag()) << '\n';
}

const char* spectrum_header = "nu,ell,N,variant,rank,re,im\n";

void write_fit(Run& run, const ScalingFit& fit) {
  auto os = run.open("fit.csv");
  os << "slope,intercept,max_residual,n_samples\n"
     << csv_line(fit.slope, fit.intercept, fit.max_residual, fit.samples.size()) << '\n';
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key=value file; command-line flags take precedence");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
}

// Splices `key=value` lines from --config FILE into argv as --key=value,
// skipping keys already given on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(key);
    if (key == "config") path = eq != std::string::npos ? a.substr(eq + 1) : i + 1 < args.size() ? args[i + 1] : "";
  }
  if (path.empty()) return args;
  std::ifstream is(path);
  if (!is) throw invalid_input("cannot read config file " + path);
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#' || line[b] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_input(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](const std::string& x) {
      const auto f = x.find_first_not_of(" \t");
      return f == std::string::npos ? std::string{} : x.substr(f, x.find_last_not_of(" \t") - f + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key == "config" || given.count(key)) continue;
    extra.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumOpts {
  Common common;
  std::string op = "bar";
  int ell = 2, N = 100;
  double nu = 1e-3, amp = 1.0, t = 0.0;
  std::string variant = "full";
  std::string matrix_out;
};

void cmd_spectrum(const SpectrumOpts& o, Run& run) {
  Eigen::MatrixXcd matrix;
  Spectrum s;
  nlohmann::json params;
  std::string variant = o.variant;
  if (o.op == "dipole") {
    detail::require(o.variant == "full" || o.variant == "symmetrized",
                    "dipole operator: variant must be full or symmetrized");
    const DipoleOperator d = o.variant == "symmetrized" ? build_dipole_symmetrized(o.N, o.nu, o.amp, o.t)
                                                        : build_dipole(o.N, o.nu, o.amp, o.t);
    s = spectrum(d);
    matrix = d.matrix;
    variant = "dipole-" + o.variant;
    params = {{"kind", "dipole"}, {"N", o.N}, {"nu", o.nu}, {"a", o.amp}, {"t", o.t},
              {"symmetrized", o.variant == "symmetrized"}};
  } else {
    detail::require(o.op == "bar", "unknown operator '" + o.op + "' (expected bar or dipole)");
    const SliceVariant v = parse_variant(o.variant);
    const SliceParams p{o.ell, o.N, o.nu, o.amp, o.t};
    const OperatorSlice slice = v == SliceVariant::symmetrized ? build_symmetrized_slice(p)
                                : v == SliceVariant::adjoint   ? adjoint_slice(build_bar_slice(p, SliceVariant::full))
                                                               : build_bar_slice(p, v);
    s = spectrum(slice);
    matrix = slice.matrix;
    params = {{"kind", "bar"}, {"ell", o.ell}, {"N", o.N}, {"nu", o.nu}, {"a", o.amp}, {"t", o.t},
              {"variant", o.variant}};
  }
  {
    auto os = run.open("spectrum.csv");
    os << spectrum_header;
    write_spectrum_rows(os, o.nu, o.op == "dipole" ? 0 : o.ell, o.N, variant, s.eigenvalues,
                        s.eigenvalues.size());
  }
  if (!o.matrix_out.empty()) {
    const fs::path p = run.dir / o.matrix_out;
    fs::create_directories(p.parent_path());
    save_matrix_csv(p.string(), matrix, params);
    run.outputs.push_back(p);
    run.outputs.push_back(p.string() + ".json");
  }
  const cplx top = least_decaying(s);
  std::cout << s.size() << " eigenvalues; least decaying " << format_real(top.real()) << " + "
            << format_real(top.imag()) << "i\n";
}

// ---------------------------------------------------------------- sweep / collapse

struct SweepOpts {
  Common common;
  int ell = 2, N = 100;
  std::vector<double> nus = sweep_nus;
  double amp = 1.0;
  std::string variant = "full";
  int ranks = 1;
};

void cmd_sweep(const SweepOpts& o, Run& run) {
  const auto sweep = nu_sweep(o.ell, o.N, o.nus, o.amp, parse_variant(o.variant));
  {
    auto os = run.open("sweep.csv");
    os << spectrum_header;
    for (const auto& e : sweep)
      write_spectrum_rows(os, e.nu, o.ell, o.N, o.variant, e.spectrum.eigenvalues,
                          static_cast<std::size_t>(o.ranks));
  }
  for (const auto& e : sweep)
    std::cout << "nu=" << format_real(e.nu) << "  Re lambda_1=" << format_real(least_decaying(e.spectrum).real())
              << '\n';
  if (sweep.size() >= 3) {
    const ScalingFit fit = fit_scaling(sweep);
    write_fit(run, fit);
    std::cout << "slope " << format_real(fit.slope) << " over " << sweep.size() << " samples\n";
  }
}

struct CollapseOpts {
  Common common;
  int ell = 2, N = 100, count = 30;
  std::vector<double> nus = collapse_nus;
  double amp = 1.0;
};

void cmd_collapse(const CollapseOpts& o, Run& run) {
  const auto rows = collapse_table(o.ell, o.N, o.nus, o.count, o.amp);
  auto os = run.open("collapse.csv");
  os << "rank,nu,scaled_re\n";
  for (const auto& r : rows) os << csv_line(r.rank, r.nu, r.scaled_real) << '\n';
  std::cout << rows.size() << " rows\n";
}

// ---------------------------------------------------------------- evolve

struct EvolveOpts {
  Common common;
  std::string init = "bar";
  std::string solver = "linear";
  std::string variant = "full";
  std::string phase = "cos";
  std::string file;
  int m = 1, k = 1, l = 0, Nx = 32, Ny = 4;
  std::uint64_t seed = 1;
  double nu = 1e-3, a = 1.0, T = 1.0, dt = 1e-2;
  int sample_every = 100, grid = 0;
  bool no_dealias = false;
};

SpectralField initial_field(const EvolveOpts& o, Run& run) {
  if (o.init == "zero") return SpectralField(o.Nx, o.Ny, true);
  if (o.init == "bar") return bar_state(o.Nx, o.Ny, o.m, parse_phase(o.phase), 0.0, o.nu, o.a);
  if (o.init == "dipole") return dipole_state(o.Nx, o.Ny, o.m, parse_phase(o.phase), 0.0, o.nu, o.a);
  if (o.init == "mode") {
    SpectralField w(o.Nx, o.Ny, false);
    detail::require(w.contains(o.k, o.l) && (o.k != 0 || o.l != 0), "mode (k,l) outside truncation or zero");
    w.at(o.k, o.l) = 1.0;
    return w;
  }
  if (o.init == "random") return random_field(o.Nx, o.Ny, o.seed);
  if (o.init == "random-M") return project_to_M(random_field(o.Nx, o.Ny, o.seed));
  if (o.init == "file") {
    detail::require(!o.file.empty(), "--init file needs --file");
    run.inputs.push_back(o.file);
    return load_field_csv(o.file);
  }
  throw invalid_input("unknown init '" + o.init + "'");
}

void cmd_evolve(const EvolveOpts& o, Run& run) {
  const SpectralField w0 = initial_field(o, run);
  IntegratorConfig cfg;
  cfg.dt = o.dt;
  cfg.T = o.T;
  cfg.sample_every = o.sample_every;
  cfg.dealias = !o.no_dealias;
  cfg.grid = o.grid;
  Trajectory tr;
  if (o.solver == "linear") {
    // The bar amplitude is a property of the base state here, not of w0.
    tr = evolve_linear(w0, o.nu, o.a, parse_variant(o.variant), cfg);
  } else {
    detail::require(o.solver == "nonlinear", "unknown solver '" + o.solver + "'");
    detail::require(conjugate_symmetry_defect(w0) <= 1e-12 * w0.coeff_norm(),
                    "nonlinear solver needs a real initial field");
    tr = evolve_nonlinear(real_part(w0), o.nu, cfg);
  }
  {
    auto os = run.open("diagnostics.csv");
    write_diagnostics_csv(os, tr);
  }
  {
    auto os = run.open("snapshots.csv");
    os << "index,t,file\n";
    char name[64];
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
      std::snprintf(name, sizeof name, "snapshots/field_%06zu.csv", i);
      os << csv_line(i, tr.snapshot_times[i], std::string(name)) << '\n';
    }
  }
  fs::create_directories(run.dir / "snapshots");
  char name[64];
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    std::snprintf(name, sizeof name, "snapshots/field_%06zu.csv", i);
    auto os = run.open(name);
    write_field_csv(os, tr.snapshots[i]);
  }
  for (const auto& w : tr.warnings) std::cerr << "warning: " << w << '\n';
  const auto& last = tr.diagnostics.back();
  std::cout << tr.diagnostics.size() - 1 << " steps to t=" << format_real(last.t)
            << "; l2=" << format_real(last.l2) << " max_pq=" << format_real(last.max_pq) << '\n';
}

// ---------------------------------------------------------------- hypo

struct HypoOpts {
  Common common;
  int ell = 2, N = 64;
  double nu = 1e-4, a = 1.0;
  std::string M0 = "auto";
  double alpha0 = 0.0, beta0 = 0.0, gamma0 = 0.0;
  double T = 0.0, dt = 0.0;
  std::uint64_t seed = 1;
};

void cmd_hypo(const HypoOpts& o, Run& run, const CLI::App& sub) {
  detail::require(o.ell != 0, "--ell must be nonzero");
  std::vector<M0Estimate> estimates;
  double M0 = 0.0;
  if (o.M0 == "auto") {
    estimates.push_back(auto_M0(o.a, o.ell, o.nu));
    M0 = estimates.back().M0_est;
  } else {
    try {
      M0 = std::stod(o.M0);
    } catch (const std::exception&) {
      throw invalid_input("--M0 must be 'auto' or a number");
    }
    estimates.push_back(estimate_M0(M0 / (512.0 * o.a * o.a * std::abs(o.ell)), o.nu, o.a, o.ell, 0.0));
  }
  const bool override = sub.count("--alpha0") + sub.count("--beta0") + sub.count("--gamma0") > 0;
  if (override)
    detail::require(sub.count("--alpha0") && sub.count("--beta0") && sub.count("--gamma0"),
                    "constant overrides need all of --alpha0, --beta0, --gamma0");
  const HypoConstants c = override ? constants_override(M0, o.a, o.ell, o.nu, o.alpha0, o.beta0, o.gamma0)
                                   : constants_from_M0(M0, o.a, o.ell, o.nu);

  const double T = o.T > 0.0 ? o.T : 1.0 / o.nu;
  const double dt = o.dt > 0.0 ? o.dt : std::min(0.1, T / 20000.0);
  const int ny = std::abs(o.ell);
  const SpectralField w0 = project_to_M(random_row(o.N, ny, o.ell, o.seed));
  const DecayCheck d = theorem_decay_check(w0, o.nu, o.a, T, dt);

  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.T = T;
  cfg.sample_every = std::numeric_limits<int>::max();
  DiagnosticsOptions opts;
  opts.phi = c;
  const Trajectory tr = evolve_linear(w0, o.nu, o.a, SliceVariant::approximate, cfg, opts);
  const PhiDissipation pd = phi_dissipation_check(tr, c);

  {
    auto os = run.open("constants.csv");
    write_constants_csv(os, {c});
  }
  {
    auto os = run.open("m0.csv");
    write_m0_csv(os, estimates);
  }
  {
    auto os = run.open("decay.csv");
    write_decay_csv(os, {d});
  }
  {
    auto os = run.open("phi.csv");
    os << "n_samples,min_ratio,max_ratio\n" << csv_line(pd.ratios.size(), pd.min_ratio, pd.max_ratio) << '\n';
  }
  std::cout << "M0=" << format_real(M0) << " fitted M=" << format_real(d.M)
            << " rate/diffusion=" << format_real(d.rate / d.diffusion_rate)
            << " max dPhi/dt/Phi=" << format_real(pd.max_ratio) << '\n';
}

// ---------------------------------------------------------------- check

int cmd_check(const std::string& golden) {
  const auto results = run_invariant_suite(golden);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.module << ": " << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << '\n';
    failed += r.passed ? 0 : 1;
  }
  std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra, decay estimates and simulations for bar-state linearizations"};
  app.set_version_flag("--version", BARSTAB_VERSION);
  app.require_subcommand(1);

  SpectrumOpts so;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues of one operator");
  add_common(spectrum_cmd, so.common);
  spectrum_cmd->add_option("--operator", so.op, "bar or dipole")->capture_default_str();
  spectrum_cmd->add_option("--ell", so.ell, "y-wavenumber of the slice")->capture_default_str();
  spectrum_cmd->add_option("--N", so.N, "truncation |k| <= N")->capture_default_str();
  spectrum_cmd->add_option("--nu", so.nu, "viscosity")->capture_default_str();
  spectrum_cmd->add_option("--amp", so.amp, "amplitude a (with t, a e^{-nu t} is the advective factor)")
      ->capture_default_str();
  spectrum_cmd->add_option("--t", so.t, "time")->capture_default_str();
  spectrum_cmd->add_option("--variant", so.variant, "full, approximate, adjoint or symmetrized")->capture_default_str();
  spectrum_cmd->add_option("--matrix-out", so.matrix_out, "also export the matrix (relative to --out)");

  SweepOpts sw;
  auto* sweep = app.add_subcommand("sweep", "least-decaying eigenvalue across viscosities");
  add_common(sweep, sw.common);
  sweep->add_option("--ell", sw.ell)->capture_default_str();
  sweep->add_option("--N", sw.N)->capture_default_str();
  sweep->add_option("--nus", sw.nus, "viscosities")->delimiter(',')->capture_default_str();
  sweep->add_option("--amp", sw.amp)->capture_default_str();
  sweep->add_option("--variant", sw.variant)->capture_default_str();
  sweep->add_option("--ranks", sw.ranks, "eigenvalues written per viscosity")->capture_default_str();

  CollapseOpts co;
  auto* collapse = app.add_subcommand("collapse", "Re lambda_j / sqrt(nu) table");
  add_common(collapse, co.common);
  collapse->add_option("--ell", co.ell)->capture_default_str();
  collapse->add_option("--N", co.N)->capture_default_str();
  collapse->add_option("--nus", co.nus)->delimiter(',')->capture_default_str();
  collapse->add_option("--count", co.count)->capture_default_str();
  collapse->add_option("--amp", co.amp)->capture_default_str();

  EvolveOpts eo;
  auto* evolve = app.add_subcommand("evolve", "time integration, linear or nonlinear");
  add_common(evolve, eo.common);
  evolve->add_option("--init", eo.init, "zero, bar, dipole, mode, random, random-M or file")
      ->capture_default_str();
  evolve->add_option("--solver", eo.solver, "linear or nonlinear")->capture_default_str();
  evolve->add_option("--variant", eo.variant, "linear operator: full or approximate")->capture_default_str();
  evolve->add_option("--phase", eo.phase, "cos or sin (bar, dipole)")->capture_default_str();
  evolve->add_option("--file", eo.file, "field CSV for --init file");
  evolve->add_option("--m", eo.m, "wavenumber of bar/dipole")->capture_default_str();
  evolve->add_option("--k", eo.k, "mode x-wavenumber")->capture_default_str();
  evolve->add_option("--l", eo.l, "mode y-wavenumber")->capture_default_str();
  evolve->add_option("--Nx", eo.Nx, "x truncation")->capture_default_str();
  evolve->add_option("--Ny", eo.Ny, "y truncation")->capture_default_str();
  evolve->add_option("--seed", eo.seed)->capture_default_str();
  evolve->add_option("--nu", eo.nu)->capture_default_str();
  evolve->add_option("--a", eo.a, "bar amplitude (linear) or initial amplitude")->capture_default_str();
  evolve->add_option("--T", eo.T, "final time")->capture_default_str();
  evolve->add_option("--dt", eo.dt)->capture_default_str();
  evolve->add_option("--sample-every", eo.sample_every, "steps between field snapshots")->capture_default_str();
  evolve->add_option("--grid", eo.grid, "nonlinear grid size (0 = automatic)")->capture_default_str();
  evolve->add_flag("--no-dealias", eo.no_dealias, "disable the 2/3 rule");

  HypoOpts ho;
  auto* hypo = app.add_subcommand("hypo", "constants, M0 and decay checks");
  add_common(hypo, ho.common);
  hypo->add_option("--ell", ho.ell)->capture_default_str();
  hypo->add_option("--N", ho.N, "row truncation")->capture_default_str();
  hypo->add_option("--nu", ho.nu)->capture_default_str();
  hypo->add_option("--a", ho.a)->capture_default_str();
  hypo->add_option("--M0", ho.M0, "auto or a positive value")->capture_default_str();
  hypo->add_option("--alpha0", ho.alpha0, "override (with --beta0, --gamma0)");
  hypo->add_option("--beta0", ho.beta0);
  hypo->add_option("--gamma0", ho.gamma0);
  hypo->add_option("--T", ho.T, "final time (0 = 1/nu)")->capture_default_str();
  hypo->add_option("--dt", ho.dt, "time step (0 = min(0.1, T/20000))")->capture_default_str();
  hypo->add_option("--seed", ho.seed)->capture_default_str();

  std::string golden = BARSTAB_GOLDEN_DIR;
  auto* check = app.add_subcommand("check", "run the invariant suite");
  check->add_option("--golden", golden, "golden matrix directory")->capture_default_str();

  try {
    std::vector<std::string> args;
    try {
      args = expand_config(argc, argv);
    } catch (const invalid_input& e) {
      std::cerr << "usage error: " << e.what() << '\n';
      return 2;
    }
    std::reverse(args.begin(), args.end());
    args.pop_back();
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (check->parsed()) return cmd_check(golden);
    const auto start = std::chrono::steady_clock::now();
    Run run;
    CLI::App* sub = nullptr;
    if (spectrum_cmd->parsed()) {
      begin(run, so.common);
      cmd_spectrum(so, run);
      sub = spectrum_cmd;
    } else if (sweep->parsed()) {
      begin(run, sw.common);
      cmd_sweep(sw, run);
      sub = sweep;
    } else if (collapse->parsed()) {
      begin(run, co.common);
      cmd_collapse(co, run);
      sub = collapse;
    } else if (evolve->parsed()) {
      begin(run, eo.common);
      cmd_evolve(eo, run);
      sub = evolve;
    } else if (hypo->parsed()) {
      begin(run, ho.common);
      cmd_hypo(ho, run, *hypo);
      sub = hypo;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (sub) write_manifest(run, *sub, secs);
    return 0;
  } catch (const invalid_input& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
