#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlga/complexity.hpp"
#include "qlga/config.hpp"
#include "qlga/evolve.hpp"
#include "qlga/io.hpp"
#include "qlga/oracle.hpp"
#include "qlga/spectral.hpp"
#include "qlga/state.hpp"

namespace qlga::commands {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kCapacityError = 3, kNumericalError = 4 };

// CSV headers are part of the output contract; tests pin them.
inline constexpr const char* kSpectrumHeader = "state_index,level,site,position,re,im,continuum_value";
inline constexpr const char* kDispersionHeader = "k,omega_measured,omega_eq6,omega_eq8prime,status";
inline constexpr const char* kArbitrateHeader = "k,omega_measured,omega_eq6,omega_eq8prime";

inline std::string evolve_header(std::size_t sites) {
  std::string h = "t,norm";
  for (std::size_t s = 0; s < sites; ++s) h += ",rho_" + std::to_string(s);
  return h;
}

struct Options {
  fs::path out_dir = ".";
  unsigned threads = 1;
};

namespace detail {

inline fs::path output_path(const Options& opts, const std::string& name) {
  if (name.empty() || fs::path(name).has_parent_path())
    throw ConfigError("output names must be plain file names, got '" + name + "'");
  return opts.out_dir / name;
}

inline SectorState initial_state(const config::Section& run, const QlgaModel& model) {
  const std::string kind = run.text("initial");
  const LatticeSpec& lat = model.lattice;
  auto vec_or_zero = [&](const std::string& key, std::size_t size) {
    if (!run.has(key)) return std::vector<double>(size, 0.0);
    auto v = run.numbers(key);
    if (v.size() != size) throw ConfigError("[run] " + key + " needs " + std::to_string(size) + " entries");
    return v;
  };
  if (kind == "point") {
    const long long slot = run.integer("slot");
    if (slot < 0 || static_cast<std::size_t>(slot) >= lat.slots()) throw ConfigError("[run] slot out of range");
    return point_state(lat, static_cast<SlotIndex>(slot));
  }
  if (kind == "configuration") {
    std::vector<SlotIndex> slots;
    for (double s : run.numbers("slots")) {
      if (s < 0 || s != std::floor(s) || s >= static_cast<double>(lat.slots()))
        throw ConfigError("[run] slots must be valid slot indices");
      slots.push_back(static_cast<SlotIndex>(s));
    }
    model.check_sector(static_cast<int>(slots.size()));
    return configuration_state(lat, slots);
  }
  if (kind == "gaussian") {
    const auto d = static_cast<std::size_t>(lat.dimension());
    WavepacketParams p{vec_or_zero("center", d), run.number("sigma"), vec_or_zero("k", d)};
    if (!run.has("center")) throw ConfigError("[run] gaussian needs center");
    return gaussian_state(lat, p);
  }
  if (kind == "product_gaussian") {
    const auto centers = run.numbers("centers");
    model.check_sector(static_cast<int>(centers.size()));
    if (lat.dimension() != 1) throw ConfigError("[run] product_gaussian is 1D only");
    const auto ks = vec_or_zero("ks", centers.size());
    std::vector<WavepacketParams> packets;
    for (std::size_t i = 0; i < centers.size(); ++i) packets.push_back({{centers[i]}, run.number("sigma"), {ks[i]}});
    return product_gaussian_state(lat, packets);
  }
  throw ConfigError("[run] initial must be point, configuration, gaussian or product_gaussian");
}

inline json complex_list(const std::vector<cplx>& zs) {
  json a = json::array();
  for (const cplx& z : zs) a.push_back({z.real(), z.imag()});
  return a;
}

inline double nan_if_throws(auto&& f) {
  try {
    return f();
  } catch (const InvalidArgument&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Irrep phases (mu, nu) of the model's single-particle rule.
inline std::pair<cplx, cplx> mu_nu(const QlgaModel& model) {
  if (const auto* c1 = std::get_if<Collision1DParams>(&model.collision)) return {c1->q() + c1->p(), c1->q() - c1->p()};
  const auto& cd = std::get<CollisionDDParams>(model.collision);
  return {cd.mu, cd.nu};
}

}  // namespace detail

inline int cmd_evolve(const config::RunConfig& cfg, const Options& opts, std::ostream& log) {
  const QlgaModel model = config::build_model(cfg.model);
  const auto& run = cfg.run;
  run.restrict_to({"steps", "initial", "slot", "slots", "center", "sigma", "k", "centers", "ks", "csv", "snapshot"});
  const long long steps = run.integer("steps");
  if (steps < 0) throw ConfigError("[run] steps must be non-negative");
  const fs::path csv_path = detail::output_path(opts, run.text("csv", "evolve.csv"));
  const fs::path snap_path = detail::output_path(opts, run.text("snapshot", "final_state.json"));
  const SectorState init = detail::initial_state(run, model);
  model.check_sector(init.particles());

  io::AtomicFile csv(csv_path);
  csv.stream() << evolve_header(model.lattice.sites()) << '\n';
  const SectorState final_state = evolve(
      init, model, steps,
      [&](long long t, double norm, const std::vector<double>& rho) {
        auto& os = csv.stream();
        os << t << ',' << io::num(norm);
        for (double r : rho) os << ',' << io::num(r);
        os << '\n';
      },
      ExecutionOptions{opts.threads});
  io::write_json(snap_path, io::state_to_json(final_state));
  csv.commit();
  log << "evolve: " << steps << " steps, n = " << init.particles() << ", basis " << init.size()
      << ", final norm " << io::num(final_state.norm()) << '\n';
  return kOk;
}

inline int cmd_spectrum(const config::RunConfig& cfg, const Options& opts, std::ostream& log) {
  const QlgaModel model = config::build_model(cfg.model);
  const auto& run = cfg.run;
  run.restrict_to({"levels", "parity_class", "csv", "summary"});
  const auto* c1 = std::get_if<Collision1DParams>(&model.collision);
  if (model.lattice.dimension() != 1 || !c1) throw ConfigError("spectrum needs a 1D model with theta");
  if (!cfg.model.has("potential") || cfg.model.text("potential") != "quadratic")
    throw ConfigError("spectrum needs potential = quadratic");
  if (model.pair_potential) throw ConfigError("spectrum is single-particle; remove pair_potential");
  OscillatorConfig oc;
  oc.l_sites = model.lattice.extent();
  oc.a = cfg.model.number("potential_a");
  oc.theta = c1->theta;
  oc.eps = model.eps;
  oc.levels = static_cast<int>(run.integer("levels", 4));
  oc.parity_class = static_cast<int>(run.integer("parity_class", 0));
  if (oc.levels < 1 || oc.levels > 64) throw ConfigError("[run] levels must be in [1, 64]");
  if (oc.parity_class != 0 && oc.parity_class != 1) throw ConfigError("[run] parity_class must be 0 or 1");
  if (oc.a <= 0.0) throw ConfigError("[model] potential_a must be positive for the oscillator");
  const fs::path csv_path = detail::output_path(opts, run.text("csv", "spectrum.csv"));
  const fs::path json_path = detail::output_path(opts, run.text("summary", "spectrum.json"));

  const OscillatorReport rep = oscillator_eigenstate_experiment(oc);

  io::AtomicFile csv(csv_path);
  csv.stream() << kSpectrumHeader << '\n';
  json states = json::array();
  for (std::size_t i = 0; i < rep.states.size(); ++i) {
    const auto& st = rep.states[i];
    for (std::size_t s = 0; s < rep.sites.size(); ++s) {
      csv.stream() << i << ',' << st.level << ',' << rep.sites[s] << ',' << io::num(rep.positions[s]) << ','
                   << io::num(st.profile[s].real()) << ',' << io::num(st.profile[s].imag()) << ','
                   << io::num(st.continuum[s]) << '\n';
    }
    states.push_back({{"level", st.level},
                      {"energy", st.energy},
                      {"continuum_energy", st.continuum_energy},
                      {"overlap", st.overlap},
                      {"nodes", st.nodes}});
  }
  double worst = 0.0;
  for (const cplx& z : rep.eigenvalues) worst = std::max(worst, std::abs(std::abs(z) - 1.0));
  const json summary = {{"l_sites", oc.l_sites},
                        {"a", oc.a},
                        {"theta_over_pi", oc.theta / std::numbers::pi},
                        {"eps", oc.eps},
                        {"parity_class", oc.parity_class},
                        {"mass", rep.mass},
                        {"omega", rep.omega},
                        {"states", std::move(states)},
                        {"branch_energies", rep.branch_energies},
                        {"eigenvalues", detail::complex_list(rep.eigenvalues)},
                        {"max_unit_circle_deviation", worst}};
  io::write_json(json_path, summary);
  csv.commit();
  log << "spectrum: l = " << oc.l_sites << ", " << rep.eigenvalues.size() << " sublattice eigenvalues\n";
  for (const auto& st : rep.states)
    log << "  level " << st.level << ": E = " << io::num(st.energy) << " (continuum " << io::num(st.continuum_energy)
        << "), overlap " << io::num(st.overlap) << ", nodes " << st.nodes << '\n';
  return kOk;
}

inline int cmd_dispersion(const config::RunConfig& cfg, const Options& opts, std::ostream& log) {
  const QlgaModel model = config::build_model(cfg.model);
  const auto& run = cfg.run;
  run.restrict_to({"k_max", "k_count", "axis", "csv", "summary"});
  if (model.potential || model.pair_potential) throw ConfigError("dispersion needs a free model (no potentials)");
  const double k_max = run.number("k_max", 0.2);
  const long long count = run.integer("k_count", 21);
  const long long axis = run.integer("axis", 0);
  if (!(k_max > 0.0) || k_max > std::numbers::pi) throw ConfigError("[run] k_max must be in (0, pi]");
  if (count < 3 || count > 100000) throw ConfigError("[run] k_count must be in [3, 1e5]");
  if (axis < 0 || axis >= model.lattice.dimension()) throw ConfigError("[run] axis out of range");
  const fs::path csv_path = detail::output_path(opts, run.text("csv", "dispersion.csv"));
  const fs::path json_path = detail::output_path(opts, run.text("summary", "dispersion.json"));

  const auto [mu, nu] = detail::mu_nu(model);
  const int d = model.lattice.dimension();
  const double m_general = detail::nan_if_throws([&] { return mass_dd(mu, nu, d); });
  const double m_cf = detail::nan_if_throws([&] { return mass_closed_form(mu, d); });
  const auto ks = oracle::k_grid(k_max, static_cast<int>(count));
  const auto rows = oracle::dispersion_scan(model, ks, static_cast<int>(axis));

  io::AtomicFile csv(csv_path);
  csv.stream() << kDispersionHeader << '\n';
  std::vector<double> fk, fw;
  int branch_errors = 0;
  for (const auto& r : rows) {
    csv.stream() << io::num(r.k) << ',' << (r.omega ? io::num(*r.omega) : std::string{}) << ','
                 << io::num(r.k * r.k / (2.0 * m_general)) << ',' << io::num(r.k * r.k / (2.0 * m_cf)) << ','
                 << (r.omega ? "ok" : "branch_error") << '\n';
    if (r.omega) {
      fk.push_back(r.k);
      fw.push_back(*r.omega);
    } else {
      ++branch_errors;
    }
  }
  json summary = {{"k_max", k_max}, {"k_count", count}, {"axis", axis}, {"m_eq6", m_general},
                  {"m_eq8prime", m_cf}, {"branch_errors", branch_errors}};
  if (const auto* c1 = std::get_if<Collision1DParams>(&model.collision))
    summary["mass_1d"] = detail::nan_if_throws([&] { return mass_1d(*c1); });
  if (fk.size() >= 3) {
    const auto fit = oracle::fit_mass(fk, fw);
    summary["m_fitted"] = fit.mass;
    summary["r_squared"] = fit.r_squared;
    log << "dispersion: fitted mass " << io::num(fit.mass) << " (R^2 " << io::num(fit.r_squared) << ")\n";
  }
  io::write_json(json_path, summary);
  csv.commit();
  return kOk;
}

inline int cmd_arbitrate(const config::RunConfig& cfg, const Options& opts, std::ostream& log) {
  const QlgaModel model = config::build_model(cfg.model);
  const auto& run = cfg.run;
  run.restrict_to({"k_max", "k_count", "lambda_sweep", "csv", "summary"});
  const auto* cd = std::get_if<CollisionDDParams>(&model.collision);
  if (!cd) throw ConfigError("arbitrate needs the D-dimensional rule (mu, nu, lambda)");
  if (model.potential || model.pair_potential) throw ConfigError("arbitrate needs a free model (no potentials)");
  if (!cd->continuum_valid()) throw ConfigError("[model] need mu != nu and mu != lambda");
  const double k_max = run.number("k_max", 0.2);
  const long long count = run.integer("k_count", 21);
  if (!(k_max > 0.0) || k_max > 1.0) throw ConfigError("[run] k_max must be in (0, 1]");
  if (count < 3 || count > 100000) throw ConfigError("[run] k_count must be in [3, 1e5]");
  std::vector<double> sweep;
  if (run.has("lambda_sweep")) sweep = run.numbers("lambda_sweep");
  const fs::path csv_path = detail::output_path(opts, run.text("csv", "arbitrate.csv"));
  const fs::path json_path = detail::output_path(opts, run.text("summary", "arbitrate.json"));

  const auto rep = oracle::arbitrate_mass_formulas(cd->mu, cd->nu, cd->lambda, cd->dimension, k_max, static_cast<int>(count));
  json sweep_out = json::array();
  double spread = 0.0;
  for (double lam : sweep) {
    const cplx l = config::phase_from_pi_units(lam);
    const double m = oracle::arbitrate_mass_formulas(cd->mu, cd->nu, l, cd->dimension, k_max, static_cast<int>(count)).m_measured;
    spread = std::max(spread, std::abs(m - rep.m_measured) / std::abs(rep.m_measured));
    sweep_out.push_back({{"lambda_over_pi", lam}, {"m_measured", m}});
  }

  io::AtomicFile csv(csv_path);
  csv.stream() << kArbitrateHeader << '\n';
  for (const auto& r : rep.rows)
    csv.stream() << io::num(r.k) << ',' << io::num(r.omega_measured) << ',' << io::num(r.omega_general) << ','
                 << io::num(r.omega_closed_form) << '\n';
  json summary = {{"D", cd->dimension},
                  {"m_eq6", rep.m_general},
                  {"m_eq8prime", rep.m_closed_form},
                  {"m_measured", rep.m_measured},
                  {"m_measured_diagonal", rep.m_measured_diagonal},
                  {"r_squared", rep.r_squared},
                  {"matches", rep.verdict},
                  {"lambda_sweep", std::move(sweep_out)}};
  if (!sweep.empty()) {
    summary["lambda_max_relative_spread"] = spread;
    summary["lambda_independent_1pct"] = spread <= 0.01;
  }
  io::write_json(json_path, summary);
  csv.commit();
  log << "arbitrate: m_eq6 " << io::num(rep.m_general) << ", m_eq8prime " << io::num(rep.m_closed_form) << ", measured "
      << io::num(rep.m_measured) << " -> " << rep.verdict << '\n';
  return kOk;
}

struct EstimateRow {
  ResourceEstimate estimate;
  std::string inputs;
};

inline std::vector<EstimateRow> estimate_rows(long long q, long long dimension, long long n) {
  if (q < 1 || dimension < 1 || n < 0) throw ConfigError("estimate needs q >= 1, D >= 1, n >= 0");
  std::uint64_t l = 1;
  for (long long i = 0; i < dimension; ++i) {
    if (l > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(q) / 64)
      throw ConfigError("lattice size q^D too large");
    l *= static_cast<std::uint64_t>(q);
  }
  const std::uint64_t m = 2 * static_cast<std::uint64_t>(dimension);
  if (static_cast<std::uint64_t>(n) > l * m) throw ConfigError("n exceeds the number of slots l*m");
  const std::string qd = "q=" + std::to_string(q) + " D=" + std::to_string(dimension);
  return {{count_variables(l, m, static_cast<std::uint64_t>(n)),
           "l=" + std::to_string(l) + " m=" + std::to_string(m) + " n=" + std::to_string(n)},
          {t_classical(q, dimension, n), qd + " n=" + std::to_string(n)},
          {t_quantum(q, dimension), qd},
          {t_quantum_pairwise(q, dimension), qd}};
}

inline int cmd_estimate(long long q, long long dimension, long long n, std::ostream& out) {
  const auto rows = estimate_rows(q, dimension, n);
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %-28s %14s  %s\n", "formula", "inputs", "log10", "exact");
  out << line;
  for (const auto& r : rows) {
    const std::string exact = r.estimate.exact_ops ? std::to_string(*r.estimate.exact_ops) : "-";
    std::snprintf(line, sizeof line, "%-20s %-28s %14.6f  %s\n", r.estimate.formula_id.c_str(), r.inputs.c_str(),
                  r.estimate.log10_ops, exact.c_str());
    out << line;
  }
  return kOk;
}

/// Runs `body` and maps library errors onto exit codes.
template <class Body>
int guarded(Body&& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kCapacityError;
  } catch (const NumericalError& e) {
    err << "numerical tolerance failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

/// Entry point for the config-driven subcommands.
inline int run(const std::string& command, const fs::path& config_path, const Options& opts, std::ostream& log,
               std::ostream& err) {
  return guarded(
      [&]() -> int {
        const config::RunConfig cfg = config::load(config_path);
        if (!fs::is_directory(opts.out_dir)) throw ConfigError("output directory does not exist: " + opts.out_dir.string());
        if (command == "evolve") return cmd_evolve(cfg, opts, log);
        if (command == "spectrum") return cmd_spectrum(cfg, opts, log);
        if (command == "dispersion") return cmd_dispersion(cfg, opts, log);
        if (command == "arbitrate") return cmd_arbitrate(cfg, opts, log);
        if (command == "estimate") {
          cfg.run.restrict_to({"q", "D", "n"});
          return cmd_estimate(cfg.run.integer("q"), cfg.run.integer("D"), cfg.run.integer("n"), log);
        }
        throw ConfigError("unknown command '" + command + "'");
      },
      err);
}

}  // namespace qlga::commands
