// ionsim command-line front end.
//
// Wraps the libionsim C API: runs parameter sweeps of the lineshape /
// Bloch / cavity / entanglement models and writes plottable CSV files
// ('#'-prefixed metadata comments, 9 significant digits).
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error.

#include "ionsim.h"

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void check_status(ionsim_status st) {
  if (st == IONSIM_OK) return;
  const std::string msg = ionsim_last_error();
  if (st == IONSIM_ERR_IO) throw IoError(msg);
  throw ConfigError(msg);
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<double> linspace(double start, double stop, int points) {
  if (points < 2) throw ConfigError("grid needs at least 2 points");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = start + (stop - start) * i / (points - 1);
  return g;
}

// ---- CSV writer ------------------------------------------------------

class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::string& subcommand)
      : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open output file '" + path + "'");
    out_ << "# ionsim " << ionsim_version() << "\n";
    out_ << "# subcommand: " << subcommand << "\n";
  }

  void comment(const std::string& key, const std::string& value) {
    out_ << "# " << key << ": " << value << "\n";
  }
  void comment(const std::string& key, double value) { comment(key, fmt9(value)); }

  void header(const std::vector<std::string>& cols) {
    for (size_t i = 0; i < cols.size(); ++i)
      out_ << (i ? "," : "") << cols[i];
    out_ << "\n";
  }

  void row(const std::vector<double>& vals) {
    for (size_t i = 0; i < vals.size(); ++i)
      out_ << (i ? "," : "") << fmt9(vals[i]);
    out_ << "\n";
  }

  void raw_row(const std::vector<std::string>& vals) {
    for (size_t i = 0; i < vals.size(); ++i)
      out_ << (i ? "," : "") << vals[i];
    out_ << "\n";
  }

  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failure on '" + path_ + "'");
  }

private:
  std::string path_;
  std::ofstream out_;
};

std::string resolve_output(const std::string& requested, const std::string& fallback) {
  std::filesystem::path p = requested.empty() ? fallback : requested;
  if (p.is_relative()) {
    if (const char* dir = std::getenv("IONSIM_OUTDIR"); dir && *dir)
      p = std::filesystem::path(dir) / p;
  }
  return p.string();
}

// ---- shared option bundles ------------------------------------------

struct GridOpts {
  double start = -30.0;
  double stop = 30.0;
  int points = 601;

  void add(CLI::App* cmd) {
    cmd->add_option("--start", start, "sweep start (MHz)");
    cmd->add_option("--stop", stop, "sweep stop (MHz)");
    cmd->add_option("--points", points, "number of sweep points")
        ->check(CLI::Range(2, 2000000));
  }
};

struct SchemeOpts {
  std::string preset = "two_level";
  std::string scheme_file;
  ionsim_preset_options opt{};
  CLI::Option *o_preset = nullptr, *o_gamma = nullptr, *o_gamma0 = nullptr,
              *o_omega_r = nullptr, *o_delta_g = nullptr, *o_epsilon = nullptr,
              *o_delta_b = nullptr, *o_probe = nullptr, *o_repump = nullptr;

  void add(CLI::App* cmd) {
    ionsim_preset_options_default(&opt);
    o_preset = cmd->add_option("--preset", preset,
                               "level-scheme preset: two_level, lambda, "
                               "ba138_4level, ba138_8level");
    cmd->add_option("--scheme", scheme_file,
                    "JSON level-scheme file (overrides --preset)");
    o_gamma = cmd->add_option("--gamma", opt.gamma, "optical HWHM (MHz)");
    o_gamma0 = cmd->add_option("--gamma0", opt.gamma0, "ground dephasing (MHz)");
    o_omega_r = cmd->add_option("--omega-r", opt.omega_r, "control Rabi (MHz)");
    o_delta_g = cmd->add_option("--delta-g", opt.delta_g, "probe detuning (MHz)");
    o_epsilon = cmd->add_option("--epsilon", opt.epsilon, "solid-angle fraction");
    o_delta_b = cmd->add_option("--delta-b", opt.delta_b, "Zeeman splitting (MHz)");
    o_probe = cmd->add_option("--probe-rabi", opt.probe_rabi,
                              "probe Rabi (MHz, 0 = auto weak)");
    o_repump = cmd->add_option("--repump-rabi", opt.repump_rabi,
                               "repump Rabi (MHz)");
  }

  ionsim_scheme* make() const {
    ionsim_scheme* s = scheme_file.empty()
                           ? ionsim_scheme_preset(preset.c_str(), &opt)
                           : ionsim_scheme_load(scheme_file.c_str());
    if (!s) {
      const std::string msg = ionsim_last_error();
      if (!scheme_file.empty() && msg.find("cannot open") != std::string::npos)
        throw IoError(msg);
      throw ConfigError(msg);
    }
    return s;
  }

  void describe(CsvWriter& csv) const {
    if (!scheme_file.empty()) {
      csv.comment("scheme", scheme_file);
      return;
    }
    csv.comment("preset", preset);
    csv.comment("gamma", opt.gamma);
    csv.comment("gamma0", opt.gamma0);
    csv.comment("omega_r", opt.omega_r);
    csv.comment("delta_g", opt.delta_g);
    csv.comment("epsilon", opt.epsilon);
    csv.comment("delta_b", opt.delta_b);
    csv.comment("probe_rabi", opt.probe_rabi);
    csv.comment("repump_rabi", opt.repump_rabi);
  }
};

// Set an option's target only if the user did not pass it explicitly, so
// figure presets act as overridable defaults.
template <typename T>
void preset_default(CLI::Option* opt, T& target, T value) {
  if (!opt || opt->count() == 0) target = value;
}

// ---- subcommand state -------------------------------------------------

struct CommonArgs {
  std::string output;
  std::string figure;
};

struct SpectrumCmd {
  CommonArgs common;
  SchemeOpts scheme;
  GridOpts grid;
};

struct FaradayCmd {
  CommonArgs common;
  GridOpts grid;
  ionsim_doublet_params p{{5.5, 0.008, 0.0}, 9.0, 0.9, 0.1};
};

struct EitCmd {
  CommonArgs common;
  GridOpts grid;
  ionsim_lambda_params p{5.5, 0.0, 2.0, 0.0};
  double epsilon = 0.04;
};

struct BlochFitCmd {
  CommonArgs common;
  SchemeOpts scheme;
  GridOpts grid;
};

struct CavityCmd {
  CommonArgs common;
  ionsim_cavity_params p{0.04, 0.5, 0.3, 493e-9};
  double r2 = -1.0;          // power reflectivity alternative to r
  double scan_lambda = 2.0;  // scan width in wavelengths
  double reflection_amplitude = 1.0;
  int points = 801;
  CLI::Option* o_r = nullptr;
  CLI::Option* o_r2 = nullptr;
};

struct ProtocolOpts {
  ionsim_protocol_params p{};
  std::vector<double> phases_in;
  bool calibrate = false;
  double psi_fraction = 0.89;
  double dark_fraction = 0.02;

  void add(CLI::App* cmd, bool with_phases) {
    ionsim_protocol_params_default(&p);
    cmd->add_option("--pe", p.p_e, "excitation probability per atom");
    cmd->add_option("--eta", p.eta, "photon detection efficiency");
    cmd->add_option("--dark-rate", p.dark_rate, "detector dark counts (1/s)");
    cmd->add_option("--gate", p.gate, "herald gate window (s)");
    cmd->add_option("--duty", p.duty_cycle, "protocol repetition rate (1/s)");
    cmd->add_option("--kappa-recoil", p.kappa_recoil,
                    "coherence factor from photon recoil");
    cmd->add_option("--kappa-b", p.kappa_dephasing,
                    "coherence factor from magnetic dephasing");
    cmd->add_option("--phase-jitter", p.phase_jitter_sigma,
                    "std-dev of the collective phase (rad)");
    cmd->add_option("--double-scatter", p.double_scatter,
                    "same-ion double-scatter channel weight");
    cmd->add_option("--readout-fidelity", p.readout_fidelity,
                    "state-discrimination fidelity");
    if (with_phases)
      cmd->add_option("--phases", phases_in,
                      "phi_L,A phi_L,B phi_D,A phi_D,B (rad)")
          ->expected(4);
    cmd->add_flag("--calibrate", calibrate,
                  "fit gate and double-scatter weight to the target herald "
                  "decomposition");
    cmd->add_option("--psi-fraction", psi_fraction,
                    "calibration target: coherent single-excitation fraction");
    cmd->add_option("--dark-fraction", dark_fraction,
                    "calibration target: dark-count fraction");
  }

  void finalize() {
    if (phases_in.size() == 4)
      for (int i = 0; i < 4; ++i) p.phases[i] = phases_in[i];
    if (!calibrate) return;
    check_status(ionsim_calibrate_herald_model(p.p_e, p.eta, p.dark_rate,
                                               psi_fraction, dark_fraction,
                                               &p.gate, &p.double_scatter));
  }

  void describe(CsvWriter& csv) const {
    csv.comment("pe", p.p_e);
    csv.comment("eta", p.eta);
    csv.comment("dark_rate", p.dark_rate);
    csv.comment("gate", p.gate);
    csv.comment("duty", p.duty_cycle);
    csv.comment("kappa_recoil", p.kappa_recoil);
    csv.comment("kappa_b", p.kappa_dephasing);
    csv.comment("phase_jitter", p.phase_jitter_sigma);
    csv.comment("double_scatter", p.double_scatter);
    csv.comment("readout_fidelity", p.readout_fidelity);
  }
};

struct EntangleAnalyticCmd {
  CommonArgs common;
  ProtocolOpts proto;
};

struct EntangleMcCmd {
  CommonArgs common;
  ProtocolOpts proto;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 1;
  int parity_points = 0;
  bool single_pulse = false;
  CLI::Option* o_parity = nullptr;
  CLI::Option* o_trials = nullptr;
  CLI::Option* o_calibrate = nullptr;
};

struct RatioMapCmd {
  CommonArgs common;
  double eta_min = 1e-4;
  double eta_max = 1.0;
  int eta_points = 41;
  double f_min = 0.5;
  double f_max = 0.99;
  int f_points = 50;
};

// ---- subcommand runners ----------------------------------------------

void run_spectrum(const SpectrumCmd& c) {
  ionsim_scheme* s = c.scheme.make();
  const auto grid = linspace(c.grid.start, c.grid.stop, c.grid.points);
  std::vector<double> t(grid.size()), phase(grid.size());
  const ionsim_status st =
      ionsim_probe_spectrum(s, grid.data(), grid.size(), t.data(), phase.data());
  ionsim_scheme_free(s);
  check_status(st);

  CsvWriter csv(resolve_output(c.common.output, "spectrum.csv"), "spectrum");
  if (!c.common.figure.empty()) csv.comment("figure", c.common.figure);
  c.scheme.describe(csv);
  csv.comment("grid", fmt9(c.grid.start) + " .. " + fmt9(c.grid.stop) + " / " +
                          std::to_string(c.grid.points));
  csv.header({"detuning_mhz", "transmission", "phase_rad"});
  for (size_t i = 0; i < grid.size(); ++i) csv.row({grid[i], t[i], phase[i]});
  csv.finish();
}

void run_faraday(const FaradayCmd& c) {
  const auto grid = linspace(c.grid.start, c.grid.stop, c.grid.points);
  CsvWriter csv(resolve_output(c.common.output, "faraday.csv"), "faraday");
  if (!c.common.figure.empty()) csv.comment("figure", c.common.figure);
  csv.comment("gamma", c.p.base.gamma);
  csv.comment("epsilon", c.p.base.epsilon);
  csv.comment("delta0", c.p.base.delta0);
  csv.comment("delta_b", c.p.delta_b);
  csv.comment("rho_minus", c.p.rho_minus);
  csv.comment("rho_plus", c.p.rho_plus);
  csv.header({"detuning_mhz", "i0", "i45", "i90", "theta_rad", "theta_est_rad"});
  for (const double d : grid) {
    double stokes[6];
    double exact = 0.0, est = 0.0;
    check_status(ionsim_polarimetry(d, &c.p, stokes));
    check_status(ionsim_faraday_angle(d, &c.p, &exact, &est));
    csv.row({d, stokes[0], stokes[1], stokes[2], exact, est});
  }
  csv.finish();
}

void run_eit(const EitCmd& c) {
  const auto grid = linspace(c.grid.start, c.grid.stop, c.grid.points);
  CsvWriter csv(resolve_output(c.common.output, "eit.csv"), "eit");
  if (!c.common.figure.empty()) csv.comment("figure", c.common.figure);
  csv.comment("gamma", c.p.gamma);
  csv.comment("gamma0", c.p.gamma0);
  csv.comment("omega_r", c.p.omega_r);
  csv.comment("delta_g", c.p.delta_g);
  csv.comment("epsilon", c.epsilon);
  csv.header({"two_photon_detuning_mhz", "transmission", "phase_rad", "chi_re",
              "chi_im"});
  for (const double d : grid) {
    double re = 0.0, im = 0.0;
    check_status(ionsim_eit_susceptibility(d, &c.p, &re, &im));
    const double ar = 1.0 - 2.0 * c.epsilon * re;
    const double ai = -2.0 * c.epsilon * im;
    csv.row({d, ar * ar + ai * ai, std::atan2(ai, ar), re, im});
  }
  csv.finish();
}

void run_bloch_fit(const BlochFitCmd& c) {
  if (!c.scheme.scheme_file.empty() ||
      (c.scheme.preset != "two_level" && c.scheme.preset != "lambda"))
    throw ConfigError(
        "bloch-fit compares solver and analytic paths; only the two_level "
        "and lambda presets have an analytic reference");

  ionsim_scheme* s = c.scheme.make();
  const auto grid = linspace(c.grid.start, c.grid.stop, c.grid.points);
  std::vector<double> t(grid.size()), phase(grid.size());
  const ionsim_status st =
      ionsim_probe_spectrum(s, grid.data(), grid.size(), t.data(), phase.data());
  ionsim_scheme_free(s);
  check_status(st);

  CsvWriter csv(resolve_output(c.common.output, "bloch-fit.csv"), "bloch-fit");
  c.scheme.describe(csv);
  csv.header({"detuning_mhz", "transmission_solver", "phase_solver",
              "transmission_model", "phase_model"});
  for (size_t i = 0; i < grid.size(); ++i) {
    double tm = 0.0, pm = 0.0;
    if (c.scheme.preset == "two_level") {
      const ionsim_two_level_params tl{c.scheme.opt.gamma, c.scheme.opt.epsilon,
                                       c.scheme.opt.delta_g};
      check_status(ionsim_transmission(grid[i], &tl, &tm));
      check_status(ionsim_phase_shift(grid[i], &tl, &pm));
    } else {
      const ionsim_lambda_params lp{c.scheme.opt.gamma, c.scheme.opt.gamma0,
                                    c.scheme.opt.omega_r, c.scheme.opt.delta_g};
      double re = 0.0, im = 0.0;
      check_status(ionsim_eit_susceptibility(grid[i], &lp, &re, &im));
      const double ar = 1.0 - 2.0 * c.scheme.opt.epsilon * re;
      const double ai = -2.0 * c.scheme.opt.epsilon * im;
      tm = ar * ar + ai * ai;
      pm = std::atan2(ai, ar);
    }
    csv.row({grid[i], t[i], phase[i], tm, pm});
  }
  csv.finish();
}

void run_cavity(CavityCmd& c) {
  if (c.o_r2->count() > 0) {
    if (c.o_r->count() > 0)
      throw ConfigError("give either --r or --r2, not both");
    if (c.r2 < 0.0 || c.r2 > 1.0)
      throw ConfigError("--r2 must be in [0, 1]");
    c.p.r = std::sqrt(c.r2);
  }
  const double span = c.scan_lambda * c.p.wavelength;
  const auto pos = linspace(-span / 2.0, span / 2.0, c.points);
  std::vector<double> t(pos.size()), refl(pos.size());
  check_status(ionsim_fringe_scan(&c.p, pos.data(), pos.size(),
                                  c.reflection_amplitude, t.data(), refl.data()));
  double fin = 0.0;
  check_status(ionsim_finesse(&c.p, &fin));

  CsvWriter csv(resolve_output(c.common.output, "cavity.csv"), "cavity");
  if (!c.common.figure.empty()) csv.comment("figure", c.common.figure);
  csv.comment("epsilon", c.p.epsilon);
  csv.comment("r", c.p.r);
  csv.comment("atom_mirror_distance_m", c.p.atom_mirror_distance);
  csv.comment("wavelength_m", c.p.wavelength);
  csv.comment("scan_lambda", c.scan_lambda);
  csv.comment("finesse", fin);
  csv.header({"displacement_m", "transmission", "reflection"});
  for (size_t i = 0; i < pos.size(); ++i) csv.row({pos[i], t[i], refl[i]});
  csv.finish();
}

void run_entangle_analytic(EntangleAnalyticCmd& c) {
  c.proto.finalize();
  const ionsim_protocol_params& p = c.proto.p;

  double f1 = 0.0, ps1 = 0.0, eta2 = 0.0, two_eta2 = 0.0;
  check_status(ionsim_analytic_single_photon(p.p_e, p.eta, &f1, &ps1));
  check_status(ionsim_analytic_two_photon(p.eta, &eta2, &two_eta2));

  double rho[32];
  double herald = 0.0;
  check_status(ionsim_herald_project(&p, rho, &herald));
  double fid = 0.0, par = 0.0;
  check_status(ionsim_fidelity(rho, &fid));
  check_status(ionsim_parity(rho, &par));
  // ge/eg coherence of the heralded state (column-major, element (1,2)).
  const double coherence = 2.0 * rho[2 * 9];
  const double rate_per_min = ps1 * p.duty_cycle * 60.0;
  const double pop_gg = rho[2 * 0];
  const double pop_single = rho[2 * 5] + rho[2 * 10];
  const double pop_ee = rho[2 * 15];

  CsvWriter csv(resolve_output(c.common.output, "entangle-analytic.csv"),
                "entangle-analytic");
  if (!c.common.figure.empty()) csv.comment("figure", c.common.figure);
  c.proto.describe(csv);
  csv.header({"quantity", "value"});
  const std::vector<std::pair<std::string, double>> rows = {
      {"fidelity_single_photon", f1},
      {"success_single_photon", ps1},
      {"success_two_photon_eta2", eta2},
      {"success_two_photon_2eta2", two_eta2},
      {"events_per_min", rate_per_min},
      {"herald_probability", herald},
      {"heralded_population_gg", pop_gg},
      {"heralded_population_single", pop_single},
      {"heralded_population_ee", pop_ee},
      {"heralded_coherence", coherence},
      {"heralded_fidelity", fid},
      {"heralded_parity", par},
  };
  for (const auto& [k, v] : rows) csv.raw_row({k, fmt9(v)});
  csv.finish();
}

void run_entangle_mc(EntangleMcCmd& c) {
  c.proto.finalize();
  const ionsim_protocol_params& p = c.proto.p;

  CsvWriter csv(resolve_output(c.common.output, "entangle-mc.csv"),
                "entangle-mc");
  if (!c.common.figure.empty()) csv.comment("figure", c.common.figure);
  c.proto.describe(csv);
  csv.comment("trials", static_cast<double>(c.trials));
  csv.comment("seed", static_cast<double>(c.seed));

  if (c.parity_points > 0) {
    std::vector<double> phis(c.parity_points);
    for (int i = 0; i < c.parity_points; ++i)
      phis[i] = 2.0 * kPi * i / c.parity_points;
    std::vector<double> mean(phis.size()), se(phis.size());
    std::vector<std::uint64_t> n(phis.size());
    ionsim_mc_stats stats{};
    check_status(ionsim_monte_carlo_parity(&p, c.trials, c.seed,
                                           c.single_pulse ? 0 : 1, phis.data(),
                                           phis.size(), mean.data(), se.data(),
                                           n.data(), &stats));
    csv.comment("n_heralds", static_cast<double>(stats.n_heralds));
    csv.comment("herald_rate_per_min", stats.herald_rate_per_min);
    csv.comment("pulse", c.single_pulse ? "single" : "double");
    csv.header({"phi_rad", "parity", "std_error", "samples"});
    for (size_t i = 0; i < phis.size(); ++i)
      csv.row({phis[i], mean[i], se[i], static_cast<double>(n[i])});
  } else {
    ionsim_mc_stats stats{};
    check_status(ionsim_monte_carlo(&p, c.trials, c.seed, &stats));
    csv.comment("n_heralds", static_cast<double>(stats.n_heralds));
    csv.comment("herald_rate_per_min", stats.herald_rate_per_min);
    csv.header({"category", "count", "fraction"});
    const char* names[3] = {"gg", "single", "ee"};
    for (int i = 0; i < 3; ++i)
      csv.raw_row({names[i], std::to_string(stats.counts[i]),
                   fmt9(stats.fractions[i])});
  }
  csv.finish();
}

void run_ratio_map(const RatioMapCmd& c) {
  if (c.eta_min <= 0.0 || c.eta_max < c.eta_min)
    throw ConfigError("ratio-map needs 0 < --eta-min <= --eta-max");
  if (c.f_min <= 0.0 || c.f_max < c.f_min || c.f_max > 1.0)
    throw ConfigError("ratio-map needs 0 < --f-min <= --f-max <= 1");
  if (c.eta_points < 2 || c.f_points < 2)
    throw ConfigError("ratio-map grids need at least 2 points per axis");

  CsvWriter csv(resolve_output(c.common.output, "ratio-map.csv"), "ratio-map");
  csv.comment("eta_grid", fmt9(c.eta_min) + " .. " + fmt9(c.eta_max) +
                              " (log) / " + std::to_string(c.eta_points));
  csv.comment("fidelity_grid", fmt9(c.f_min) + " .. " + fmt9(c.f_max) + " / " +
                                   std::to_string(c.f_points));
  csv.header({"eta", "target_fidelity", "success_ratio"});
  const double lmin = std::log(c.eta_min);
  const double lmax = std::log(c.eta_max);
  for (int i = 0; i < c.eta_points; ++i) {
    const double eta =
        std::exp(lmin + (lmax - lmin) * i / (c.eta_points - 1));
    for (int j = 0; j < c.f_points; ++j) {
      const double f = c.f_min + (c.f_max - c.f_min) * j / (c.f_points - 1);
      double ratio = 0.0;
      check_status(ionsim_success_ratio(eta, f, &ratio));
      csv.row({eta, f, ratio});
    }
  }
  csv.finish();
}

// ---- figure presets ----------------------------------------------------

void apply_figure(SpectrumCmd& c) {
  if (c.common.figure.empty()) return;
  if (c.common.figure != "fig3b")
    throw ConfigError("spectrum supports --figure fig3b only");
  preset_default(c.scheme.o_preset, c.scheme.preset, std::string("two_level"));
  preset_default(c.scheme.o_epsilon, c.scheme.opt.epsilon, 0.04);
  preset_default(c.scheme.o_gamma, c.scheme.opt.gamma, 5.5);
}

void apply_figure(FaradayCmd& c, CLI::App* cmd) {
  if (c.common.figure.empty()) return;
  if (c.common.figure != "fig3a")
    throw ConfigError("faraday supports --figure fig3a only");
  preset_default(cmd->get_option("--epsilon"), c.p.base.epsilon, 0.008);
  preset_default(cmd->get_option("--gamma"), c.p.base.gamma, 5.5);
  preset_default(cmd->get_option("--delta-b"), c.p.delta_b, 9.0);
  preset_default(cmd->get_option("--rho-minus"), c.p.rho_minus, 0.9);
  preset_default(cmd->get_option("--rho-plus"), c.p.rho_plus, 0.1);
}

void apply_figure(EitCmd& c, CLI::App* cmd) {
  if (c.common.figure.empty()) return;
  if (c.common.figure != "fig4b")
    throw ConfigError("eit supports --figure fig4b only");
  preset_default(cmd->get_option("--gamma"), c.p.gamma, 5.5);
  preset_default(cmd->get_option("--gamma0"), c.p.gamma0, 0.02);
  preset_default(cmd->get_option("--omega-r"), c.p.omega_r, 2.0);
  preset_default(cmd->get_option("--delta-g"), c.p.delta_g, 0.0);
  preset_default(cmd->get_option("--epsilon"), c.epsilon, 0.04);
  preset_default(cmd->get_option("--start"), c.grid.start, -15.0);
  preset_default(cmd->get_option("--stop"), c.grid.stop, 15.0);
}

void apply_figure(CavityCmd& c, CLI::App* cmd) {
  if (c.common.figure.empty()) return;
  if (c.common.figure != "fig5")
    throw ConfigError("cavity supports --figure fig5 only");
  preset_default(cmd->get_option("--epsilon"), c.p.epsilon, 0.04);
  preset_default(c.o_r2, c.r2, 0.25);
  if (c.o_r->count() == 0 && c.o_r2->count() == 0) c.p.r = 0.5;
  preset_default(cmd->get_option("--scan-lambda"), c.scan_lambda, 2.0);
}

void apply_figure(EntangleMcCmd& c) {
  if (c.common.figure.empty()) return;
  if (c.common.figure == "fig6a") {
    if (c.o_parity->count() == 0) c.parity_points = 0;
  } else if (c.common.figure == "fig6b") {
    preset_default(c.o_parity, c.parity_points, 16);
  } else {
    throw ConfigError("entangle-mc supports --figure fig6a or fig6b");
  }
  // Herald decomposition calibrated to the measured channel fractions.
  if (c.o_calibrate->count() == 0) c.proto.calibrate = true;
  preset_default(c.o_trials, c.trials, std::uint64_t{2000000});
}

// ---- config-file front end ---------------------------------------------

int line_of_offset(const std::string& text, size_t offset) {
  int line = 1;
  for (size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

int line_of_key(const std::string& text, const std::string& key) {
  const size_t pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

// Translates {"subcommand": ..., "output": ..., "params": {...}} into an
// argv vector so config files share the flag schema (and its strictness).
std::vector<std::string> config_to_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ":" + std::to_string(line_of_offset(text, e.byte)) +
                      ": " + e.what());
  }

  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "subcommand" && it.key() != "output" && it.key() != "params")
      throw ConfigError(path + ":" +
                        std::to_string(line_of_key(text, it.key())) +
                        ": unknown key '" + it.key() + "'");
  if (!j.contains("subcommand") || !j["subcommand"].is_string())
    throw ConfigError(path + ":1: missing string key 'subcommand'");

  std::vector<std::string> args;
  args.push_back(j["subcommand"].get<std::string>());
  if (j.contains("output"))
    args.insert(args.end(), {"--output", j["output"].get<std::string>()});
  if (j.contains("params")) {
    if (!j["params"].is_object())
      throw ConfigError(path + ":" + std::to_string(line_of_key(text, "params")) +
                        ": 'params' must be an object");
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
      const std::string flag = "--" + it.key();
      if (it.value().is_boolean()) {
        if (it.value().get<bool>()) args.push_back(flag);
      } else if (it.value().is_string()) {
        args.insert(args.end(), {flag, it.value().get<std::string>()});
      } else if (it.value().is_number()) {
        std::ostringstream v;
        v.precision(17);
        v << it.value().get<double>();
        args.insert(args.end(), {flag, v.str()});
      } else if (it.value().is_array()) {
        args.push_back(flag);
        for (const auto& x : it.value()) {
          std::ostringstream v;
          v.precision(17);
          v << x.get<double>();
          args.push_back(v.str());
        }
      } else {
        throw ConfigError(path + ":" +
                          std::to_string(line_of_key(text, it.key())) +
                          ": unsupported value type for '" + it.key() + "'");
      }
    }
  }
  return args;
}

void add_common(CLI::App* cmd, CommonArgs& c, const char* figures = nullptr) {
  cmd->add_option("--output,-o", c.output, "output CSV path");
  if (figures)
    cmd->add_option("--figure", c.figure,
                    std::string("figure preset: ") + figures);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"ionsim: single-ion free-space light-matter interaction models"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", ionsim_version());

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file: {subcommand, output, params{flag: value}}");

  SpectrumCmd spectrum;
  auto* sp = app.add_subcommand("spectrum",
                                "weak-probe transmission/phase spectrum "
                                "(Bloch steady-state solver)");
  add_common(sp, spectrum.common, "fig3b");
  spectrum.scheme.add(sp);
  spectrum.grid.add(sp);

  FaradayCmd faraday;
  auto* fa = app.add_subcommand("faraday",
                                "Zeeman-doublet polarimetry: extinction and "
                                "rotation angle");
  add_common(fa, faraday.common, "fig3a");
  fa->add_option("--gamma", faraday.p.base.gamma, "optical HWHM (MHz)");
  fa->add_option("--epsilon", faraday.p.base.epsilon, "solid-angle fraction");
  fa->add_option("--delta0", faraday.p.base.delta0, "line-center offset (MHz)");
  fa->add_option("--delta-b", faraday.p.delta_b, "Zeeman splitting (MHz)");
  fa->add_option("--rho-minus", faraday.p.rho_minus, "sigma- ground population");
  fa->add_option("--rho-plus", faraday.p.rho_plus, "sigma+ ground population");
  faraday.grid.add(fa);

  EitCmd eit;
  auto* ei = app.add_subcommand("eit",
                                "single-atom dark-resonance transmission "
                                "(analytic Lambda susceptibility)");
  add_common(ei, eit.common, "fig4b");
  ei->add_option("--gamma", eit.p.gamma, "optical HWHM (MHz)");
  ei->add_option("--gamma0", eit.p.gamma0, "ground dephasing (MHz)");
  ei->add_option("--omega-r", eit.p.omega_r, "control Rabi (MHz)");
  ei->add_option("--delta-g", eit.p.delta_g, "probe detuning (MHz)");
  ei->add_option("--epsilon", eit.epsilon, "solid-angle fraction");
  eit.grid.add(ei);

  BlochFitCmd bloch_fit;
  auto* bf = app.add_subcommand("bloch-fit",
                                "solver vs analytic model cross-check for the "
                                "two_level and lambda presets");
  add_common(bf, bloch_fit.common);
  bloch_fit.scheme.add(bf);
  bloch_fit.grid.add(bf);

  CavityCmd cavity;
  auto* ca = app.add_subcommand("cavity",
                                "atom-mirror interference fringe scan");
  add_common(ca, cavity.common, "fig5");
  ca->add_option("--epsilon", cavity.p.epsilon, "solid-angle fraction");
  cavity.o_r = ca->add_option("--r", cavity.p.r, "mirror amplitude reflectivity");
  cavity.o_r2 = ca->add_option("--r2", cavity.r2, "mirror power reflectivity");
  ca->add_option("--distance", cavity.p.atom_mirror_distance,
                 "atom-mirror distance (m)");
  ca->add_option("--wavelength", cavity.p.wavelength, "wavelength (m)");
  ca->add_option("--scan-lambda", cavity.scan_lambda,
                 "scan width in wavelengths");
  ca->add_option("--reflection-amplitude", cavity.reflection_amplitude,
                 "scale of the reflection counter-fringe");
  ca->add_option("--points", cavity.points, "number of scan points")
      ->check(CLI::Range(2, 2000000));

  EntangleAnalyticCmd ent_an;
  auto* ea = app.add_subcommand("entangle-analytic",
                                "closed-form protocol rates and heralded-state "
                                "reconstruction");
  add_common(ea, ent_an.common);
  ent_an.proto.add(ea, /*with_phases=*/true);

  EntangleMcCmd ent_mc;
  auto* em = app.add_subcommand("entangle-mc",
                                "Monte-Carlo protocol trials: herald histogram "
                                "or parity oscillation");
  add_common(em, ent_mc.common, "fig6a, fig6b");
  ent_mc.proto.add(em, /*with_phases=*/true);
  ent_mc.o_trials = em->add_option("--trials", ent_mc.trials, "number of trials");
  em->add_option("--seed", ent_mc.seed, "random seed");
  ent_mc.o_parity =
      em->add_option("--parity-points", ent_mc.parity_points,
                     "parity-curve phase settings (0 = herald histogram)");
  em->add_flag("--single-pulse", ent_mc.single_pulse,
               "use the single-pulse analysis sequence");
  ent_mc.o_calibrate = em->get_option("--calibrate");

  RatioMapCmd ratio;
  auto* rm = app.add_subcommand("ratio-map",
                                "single- vs two-photon success ratio over an "
                                "(eta, fidelity) grid");
  add_common(rm, ratio.common);
  rm->add_option("--eta-min", ratio.eta_min, "detection efficiency, low end");
  rm->add_option("--eta-max", ratio.eta_max, "detection efficiency, high end");
  rm->add_option("--eta-points", ratio.eta_points, "log-grid points in eta");
  rm->add_option("--f-min", ratio.f_min, "target fidelity, low end");
  rm->add_option("--f-max", ratio.f_max, "target fidelity, high end");
  rm->add_option("--f-points", ratio.f_points, "grid points in fidelity");

  try {
    app.parse(argc, argv);
    if (!config_path.empty()) {
      if (app.get_subcommands().size() > 0)
        throw ConfigError("--config replaces the subcommand; give one or the other");
      const auto args = config_to_args(config_path);
      std::vector<const char*> cargv;
      cargv.push_back(argv[0]);
      for (const auto& a : args) cargv.push_back(a.c_str());
      app.clear();
      app.parse(static_cast<int>(cargv.size()), cargv.data());
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }

  try {
    if (sp->parsed()) {
      apply_figure(spectrum);
      run_spectrum(spectrum);
    } else if (fa->parsed()) {
      apply_figure(faraday, fa);
      run_faraday(faraday);
    } else if (ei->parsed()) {
      apply_figure(eit, ei);
      run_eit(eit);
    } else if (bf->parsed()) {
      run_bloch_fit(bloch_fit);
    } else if (ca->parsed()) {
      apply_figure(cavity, ca);
      run_cavity(cavity);
    } else if (ea->parsed()) {
      run_entangle_analytic(ent_an);
    } else if (em->parsed()) {
      apply_figure(ent_mc);
      run_entangle_mc(ent_mc);
    } else if (rm->parsed()) {
      run_ratio_map(ratio);
    } else {
      std::cerr << app.help() << "\n";
      return kExitConfig;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
