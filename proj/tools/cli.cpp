#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <iostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>

#include "qgbec/constants.hpp"
#include "qgbec/cube_potential.hpp"
#include "qgbec/errors.hpp"
#include "qgbec/experiment.hpp"
#include "qgbec/parallel.hpp"
#include "qgbec/quadrature.hpp"
#include "qgbec/spectrum.hpp"
#include "qgbec/thermo.hpp"

#ifndef QGBEC_VERSION
#define QGBEC_VERSION "unknown"
#endif

namespace qgbec::cli {

namespace {

using nlohmann::ordered_json;
using spectrum::GravityTheory;

[[noreturn]] void bad_config(const std::string& msg) { throw Error(ErrorKind::InvalidParameters, msg); }

// ---------------------------------------------------------------- output

using Cell = std::variant<std::monostate, double, std::int64_t, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_number(v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return csv_field(v);
        }
      },
      c);
}

ordered_json json_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return v;
        }
      },
      c);
}

void write_table(std::ostream& os, const ordered_json& meta, const Table& table, OutputFormat format) {
  if (format == OutputFormat::Json) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : table.rows) {
      ordered_json obj = ordered_json::object();
      for (std::size_t i = 0; i < table.columns.size(); ++i) obj[table.columns[i]] = json_cell(row[i]);
      rows.push_back(std::move(obj));
    }
    os << ordered_json{{"meta", meta}, {"rows", rows}}.dump(2) << '\n';
    return;
  }
  for (const auto& [key, value] : meta.items()) os << "# " << key << ": " << value.dump() << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << '\n';
  }
}

Cell optional_cell(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

// ---------------------------------------------------------------- config

TheorySelector parse_theory(const std::string& s) {
  if (s == "quantum") return TheorySelector::Quantum;
  if (s == "classical") return TheorySelector::Classical;
  if (s == "both") return TheorySelector::Both;
  bad_config("theory must be quantum, classical or both (got '" + s + "')");
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  bad_config("format must be csv or json (got '" + s + "')");
}

template <class T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_config(std::string("config key '") + key + "' has the wrong type");
  }
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      bad_config(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

std::vector<GravityTheory> theories_of(TheorySelector t) {
  switch (t) {
    case TheorySelector::Quantum: return {GravityTheory::Quantum};
    case TheorySelector::Classical: return {GravityTheory::Classical};
    case TheorySelector::Both: break;
  }
  return {GravityTheory::Classical, GravityTheory::Quantum};
}

// ---------------------------------------------------------------- context

struct Context {
  RunConfig config;
  units::Species species;

  units::GasParameters params() const {
    return units::GasParameters(species, config.N_atoms, config.L_m, config.g_em_override_J_m3);
  }

  thermo::ThermoOptions thermo_options() const {
    return {.rel_tol = config.rel_tol, .shell_budget = 1'000'000, .fixed_cutoff = config.shell_cutoff};
  }

  std::vector<double> temperatures() const {
    if (config.T_sweep_K) {
      return experiment::geometric_range(config.T_sweep_K->start_K, config.T_sweep_K->stop_K,
                                         config.T_sweep_K->points);
    }
    if (config.T_K) return {*config.T_K};
    bad_config(config.command + ": a temperature is required (--T-K or --T-start-K/--T-stop-K/--T-points)");
  }
};

units::Species resolve_species(const RunConfig& cfg) {
  units::SpeciesRegistry registry;
  if (cfg.species_file) registry.load_json_file(*cfg.species_file);
  const auto& spec = cfg.species;
  units::Species s;
  if (spec.mass_u) {
    if (!spec.a_s_nm) bad_config("inline species '" + spec.name + "' needs a_s_nm");
    s = units::make_species(spec.name, *spec.mass_u, *spec.a_s_nm, spec.three_body_rate_m6_per_s.value_or(0.0));
  } else {
    s = registry.lookup(spec.name);
    if (spec.a_s_nm) s.scattering_length_m = *spec.a_s_nm * units::kNanometre;
    if (spec.three_body_rate_m6_per_s) s.three_body_rate = *spec.three_body_rate_m6_per_s;
  }
  s.validate();
  return s;
}

ordered_json base_meta(const Context& ctx) {
  const auto& s = ctx.species;
  return {{"tool", "qgbec"},
          {"version", QGBEC_VERSION},
          {"constants", std::string(units::kConstantsVersion)},
          {"command", ctx.config.command},
          {"species",
           {{"name", s.name},
            {"mass_kg", s.mass_kg},
            {"a_s_m", s.scattering_length_m},
            {"three_body_rate_m6_per_s", s.three_body_rate}}},
          {"config", to_json(ctx.config)}};
}

ordered_json couplings_meta(const spectrum::CouplingSet& c) {
  return {{"g_em_J_m3", c.g_em()},
          {"g_g0_J_m3", c.g_g0()},
          {"gk_prefactor_J_m3", c.gravity().gk_prefactor},
          {"density_m3", c.density()},
          {"regime", std::string(spectrum::to_string(c.regime()))}};
}

std::vector<cube::ModeIndex> representative_modes(int max_n2, bool include_zero) {
  std::vector<cube::ModeIndex> modes;
  for (int nx = 0; nx * nx <= max_n2; ++nx) {
    for (int ny = 0; ny <= nx; ++ny) {
      for (int nz = 0; nz <= ny; ++nz) {
        const cube::ModeIndex m{nx, ny, nz};
        if (m.n2() > max_n2 || (m.is_zero() && !include_zero)) continue;
        modes.push_back(m);
      }
    }
  }
  std::sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
    return a.n2() != b.n2() ? a.n2() < b.n2() : b < a;
  });
  return modes;
}

// ---------------------------------------------------------------- commands

void cmd_potential(const Context& ctx, ordered_json& meta, Table& t) {
  const double m = ctx.species.mass_kg;
  const double l = ctx.config.L_m;
  const double tol = std::clamp(ctx.config.rel_tol, 2e-12, 1e-3);
  meta["oracle"] = {{"method", "1d"}, {"rel_tol", tol}};
  t.columns = {"nx", "ny", "nz", "n2", "gk_approx_J_m3", "gk_oracle_J_m3", "rel_error"};
  for (const auto& mode : representative_modes(ctx.config.max_n2, true)) {
    const double approx = mode.is_zero() ? cube::v0_closed_form(m, l) : cube::gk_approx(mode, m, l);
    const double exact = mode.is_zero() ? cube::gk_oracle_1d(cube::zero_mode, m, l, tol)
                                        : cube::gk_oracle_1d(mode, m, l, tol);
    t.rows.push_back({std::int64_t{mode.nx}, std::int64_t{mode.ny}, std::int64_t{mode.nz}, mode.n2(), approx, exact,
                      (approx - exact) / exact});
  }
}

void cmd_spectrum(const Context& ctx, ordered_json& meta, Table& t) {
  const auto c = spectrum::build_couplings(ctx.params());
  meta["couplings"] = couplings_meta(c);
  meta["mu_classical_J"] = spectrum::chemical_potential(c, GravityTheory::Classical).mu;
  meta["mu_quantum_J"] = spectrum::chemical_potential(c, GravityTheory::Quantum).mu;
  t.columns = {"n2", "multiplicity", "k_per_m", "epsilon_cg_J", "epsilon_qg_J", "rel_deviation_percent",
               "stable_cg", "stable_qg"};
  for (std::int64_t s = 1; s <= ctx.config.max_n2; ++s) {
    const auto r = thermo::shell_multiplicity(s);
    if (r == 0) continue;
    auto eval = [&](GravityTheory th) -> std::optional<double> {
      try {
        return spectrum::shell_energy(c, th, s);
      } catch (const DynamicalInstability&) {
        return std::nullopt;
      }
    };
    const auto cg = eval(GravityTheory::Classical);
    const auto qg = eval(GravityTheory::Quantum);
    Cell dev{};
    if (cg && qg) dev = 100.0 * std::abs(*qg - *cg) / *cg;
    const double k = 2.0 * std::numbers::pi * std::sqrt(static_cast<double>(s)) / c.box_length();
    t.rows.push_back({s, r, k, optional_cell(cg), optional_cell(qg), dev, cg.has_value(), qg.has_value()});
  }
}

void cmd_heatcap(const Context& ctx, ordered_json& meta, Table& t) {
  const auto c = spectrum::build_couplings(ctx.params());
  meta["couplings"] = couplings_meta(c);
  const auto opts = ctx.thermo_options();
  if (ctx.config.theory == TheorySelector::Both) {
    t.columns = {"T_K", "cv_cg_over_kB", "cv_qg_over_kB", "rel_deviation_percent", "shells_cg", "shells_qg",
                 "converged"};
    for (double temp : ctx.temperatures()) {
      const auto d = experiment::heatcap_deviation(c, temp, opts);
      t.rows.push_back({temp, d.classical, d.quantum, d.rel_deviation_percent, d.shells_classical,
                        d.shells_quantum, true});
    }
    return;
  }
  t.columns = {"T_K", "cv_over_kB", "shells_used", "converged", "theory"};
  const auto theory = theories_of(ctx.config.theory).front();
  for (double temp : ctx.temperatures()) {
    const auto r = thermo::heat_capacity(c, theory, temp, opts);
    t.rows.push_back({temp, r.c_v_over_kB, r.shells_used, r.converged, std::string(spectrum::to_string(theory))});
  }
}

void cmd_scan(const Context& ctx, ordered_json& meta, Table& t) {
  const auto& cfg = ctx.config;
  experiment::ScanGrid grid{cfg.scan_N_atoms.empty() ? std::vector<double>{cfg.N_atoms} : cfg.scan_N_atoms,
                            cfg.scan_L_m.empty() ? std::vector<double>{cfg.L_m} : cfg.scan_L_m,
                            cfg.scan_T_K.empty() ? ctx.temperatures() : cfg.scan_T_K};
  meta["grid_points"] = grid.atom_counts.size() * grid.box_lengths_m.size() * grid.temperatures_K.size();
  t.columns = {"N_atoms",          "L_m",          "T_K",
               "cv_cg_over_kB",    "cv_qg_over_kB", "cv_rel_deviation_percent",
               "eps_cg_J",         "eps_qg_J",      "eps_rel_deviation_percent",
               "dilute",           "non_relativistic_size", "non_relativistic_velocity",
               "error_kind",       "error_message"};
  const auto rows = experiment::scan(ctx.species, cfg.g_em_override_J_m3, grid, ctx.thermo_options());
  for (const auto& r : rows) {
    std::vector<Cell> row{r.atom_count, r.box_length_m, r.temperature_K};
    if (r.heatcap) {
      row.insert(row.end(), {r.heatcap->classical, r.heatcap->quantum, r.heatcap->rel_deviation_percent});
    } else {
      row.insert(row.end(), 3, Cell{});
    }
    if (r.energy) {
      row.insert(row.end(), {r.energy->classical, r.energy->quantum, r.energy->rel_deviation_percent});
    } else {
      row.insert(row.end(), 3, Cell{});
    }
    if (r.validity) {
      for (const auto& f : r.validity->flags) row.emplace_back(f.passed);
    } else {
      row.insert(row.end(), 3, Cell{});
    }
    if (r.error) {
      row.emplace_back(std::string(to_string(r.error->kind)));
      row.emplace_back(r.error->message);
    } else {
      row.insert(row.end(), 2, Cell{});
    }
    t.rows.push_back(std::move(row));
  }
}

void cmd_validate(const Context& ctx, ordered_json&, Table& t) {
  const auto v = experiment::validity_report(ctx.params());
  t.columns = {"diluteness", "relativistic_radius_m", "schwarzschild_ratio", "three_body_half_life_s",
               "estimated_velocity_m_s"};
  std::vector<Cell> row{v.diluteness, v.relativistic_radius, v.schwarzschild_ratio,
                        optional_cell(v.three_body_half_life), v.estimated_velocity};
  for (const auto& f : v.flags) {
    t.columns.push_back(f.name);
    row.emplace_back(f.passed);
  }
  t.columns.push_back("all_passed");
  row.emplace_back(v.all_passed());
  t.rows.push_back(std::move(row));
}

void cmd_nl_threshold(const Context& ctx, ordered_json& meta, Table& t) {
  const auto r = experiment::nl_threshold(ctx.species, ctx.config.n_k2, ctx.config.deviation_percent);
  if (r.quoted_consistent && !*r.quoted_consistent) {
    meta["note"] = "quoted value " + format_number(*r.quoted_value) +
                   " disagrees with the threshold formula evaluated here (" + format_number(r.nl) + ")";
  }
  t.columns = {"species", "n_k2", "deviation_percent", "nl_threshold_m", "quoted_value_m", "quoted_consistent"};
  t.rows.push_back({r.species, r.n_k2, r.deviation_percent, r.nl, optional_cell(r.quoted_value),
                    r.quoted_consistent ? Cell{*r.quoted_consistent} : Cell{}});
}

void cmd_reconcile(const Context& ctx, ordered_json& meta, Table& t) {
  experiment::ReconcileOptions opts;
  opts.thermo = ctx.thermo_options();
  meta["note"] = "g_em of the configuration is ignored; it is the fitted quantity";
  t.columns = {"T_K",           "cv_target_over_kB", "g_em_fit_J_m3", "cv_cg_over_kB", "cv_qg_over_kB",
               "rel_deviation_percent", "regime",    "iterations"};
  for (double temp : ctx.temperatures()) {
    const auto r = experiment::reconcile_cv_target(ctx.params(), temp, ctx.config.cv_target_over_kB, opts);
    t.rows.push_back({temp, ctx.config.cv_target_over_kB, r.g_em, r.cv_classical_over_kB, r.cv_quantum_over_kB,
                      r.deviation_percent, std::string(spectrum::to_string(r.regime)),
                      std::int64_t{r.iterations}});
  }
}

void cmd_compare_oracle(const Context& ctx, ordered_json& meta, Table& t) {
  const auto& cfg = ctx.config;
  double worst = 0.0;
  if (cfg.oracle_op == "heatcap") {
    const auto c = spectrum::build_couplings(ctx.params());
    t.columns = {"theory", "T_K", "max_n2", "shell_sum_cv_over_kB", "direct_sum_cv_over_kB", "rel_difference"};
    thermo::ThermoOptions opts = ctx.thermo_options();
    opts.fixed_cutoff = cfg.max_n2;
    const int reach = static_cast<int>(std::sqrt(static_cast<double>(cfg.max_n2))) + 1;
    for (auto theory : theories_of(cfg.theory)) {
      for (double temp : ctx.temperatures()) {
        const double shell = thermo::heat_capacity(c, theory, temp, opts).c_v_over_kB;
        numeric::CompensatedSum direct;
        for (int x = -reach; x <= reach; ++x) {
          for (int y = -reach; y <= reach; ++y) {
            for (int z = -reach; z <= reach; ++z) {
              const cube::ModeIndex m{x, y, z};
              if (m.is_zero() || m.n2() > cfg.max_n2) continue;
              direct.add(thermo::mode_term(spectrum::shell_energy(c, theory, m.n2()), temp));
            }
          }
        }
        const double diff = direct.value() == 0.0 ? std::abs(shell)
                                                  : std::abs(shell - direct.value()) / std::abs(direct.value());
        worst = std::max(worst, diff);
        t.rows.push_back({std::string(spectrum::to_string(theory)), temp, std::int64_t{cfg.max_n2}, shell,
                          direct.value(), diff});
      }
    }
  } else if (cfg.oracle_op == "potential") {
    const double m = ctx.species.mass_kg;
    const double l = cfg.L_m;
    const double tol = std::clamp(cfg.rel_tol, 2e-12, 1e-3);
    const cube::Oracle3dOptions o3{.grid = cfg.oracle_grid_cells, .order = 2};
    meta["oracle_3d"] = {{"grid_cells", o3.grid}, {"order", o3.order}};
    t.columns = {"nx", "ny", "nz", "n2", "oracle_1d_J_m3", "oracle_3d_J_m3", "rel_difference"};
    for (const auto& mode : representative_modes(cfg.max_n2, true)) {
      const double a = mode.is_zero() ? cube::gk_oracle_1d(cube::zero_mode, m, l, tol)
                                      : cube::gk_oracle_1d(mode, m, l, tol);
      const double b = mode.is_zero() ? cube::gk_oracle_3d(cube::zero_mode, m, l, o3)
                                      : cube::gk_oracle_3d(mode, m, l, o3);
      const double diff = std::abs(a - b) / std::abs(a);
      worst = std::max(worst, diff);
      t.rows.push_back({std::int64_t{mode.nx}, std::int64_t{mode.ny}, std::int64_t{mode.nz}, mode.n2(), a, b, diff});
    }
  } else {
    bad_config("compare-oracle: --op must be heatcap or potential (got '" + cfg.oracle_op + "')");
  }
  meta["max_rel_difference"] = worst;
}

using Command = void (*)(const Context&, ordered_json&, Table&);

struct CommandInfo {
  const char* name;
  const char* help;
  Command fn;
};

constexpr CommandInfo kCommands[] = {
    {"potential", "gravitational Fourier coefficients: approximation vs exact oracle", cmd_potential},
    {"spectrum", "quasiparticle energies per shell for both theories", cmd_spectrum},
    {"heatcap", "heat capacity at one temperature or a geometric sweep", cmd_heatcap},
    {"scan", "N x L x T grid of heat-capacity and energy deviations", cmd_scan},
    {"validate", "validity checks of the approximations", cmd_validate},
    {"nl-threshold", "N L product needed for a given energy deviation", cmd_nl_threshold},
    {"reconcile-cv", "fit g_em so the classical heat capacity hits a target", cmd_reconcile},
    {"compare-oracle", "cross-check an implementation against an independent oracle", cmd_compare_oracle},
};

// ---------------------------------------------------------------- flags

struct Flags {
  std::string config;
  std::string species;
  std::string species_file;
  double mass_u = 0.0;
  double a_s_nm = 0.0;
  double three_body_rate = 0.0;
  double N = 0.0;
  double L = 0.0;
  double T = 0.0;
  double T_start = 0.0;
  double T_stop = 0.0;
  int T_points = 0;
  std::string theory;
  double g_em = 0.0;
  double rel_tol = 0.0;
  std::string format;
  std::string out;
  int threads = 0;
  std::int64_t shell_cutoff = 0;
  int max_n2 = 0;
  std::int64_t n_k2 = 0;
  double deviation_percent = 0.0;
  double cv_target = 0.0;
  std::string op;
  int grid = 0;
  std::vector<double> N_values, L_values, T_values;
  std::vector<double> N_range, L_range, T_range;
};

void add_flags(CLI::App* sub, Flags& f, const std::string& name) {
  sub->add_option("--config", f.config, "JSON run configuration; explicit flags override it");
  sub->add_option("--species", f.species, "species name (built-in: Yb-174, H-1)");
  sub->add_option("--species-file", f.species_file, "JSON file with extra species");
  sub->add_option("--mass-u", f.mass_u, "inline species mass in u (needs --a-s-nm)");
  sub->add_option("--a-s-nm", f.a_s_nm, "s-wave scattering length in nm");
  sub->add_option("--three-body-rate", f.three_body_rate, "three-body loss rate in m^6/s");
  sub->add_option("--N", f.N, "atom count");
  sub->add_option("--L-m", f.L, "box edge in metres");
  sub->add_option("--T-K", f.T, "temperature in kelvin");
  sub->add_option("--T-start-K", f.T_start, "geometric sweep start (K)");
  sub->add_option("--T-stop-K", f.T_stop, "geometric sweep stop (K)");
  sub->add_option("--T-points", f.T_points, "geometric sweep points");
  sub->add_option("--theory", f.theory, "quantum | classical | both")
      ->check(CLI::IsMember({"quantum", "classical", "both"}));
  sub->add_option("--g-em-J-m3", f.g_em, "contact coupling override in J m^3");
  sub->add_option("--rel-tol", f.rel_tol, "relative tolerance");
  sub->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", f.out, "output path (default stdout)");
  sub->add_option("--threads", f.threads, "worker cap (0 = hardware)");
  sub->add_option("--shell-cutoff", f.shell_cutoff, "sum exactly shells 1..cutoff");
  if (name == "potential" || name == "spectrum" || name == "compare-oracle") {
    sub->add_option("--max-n2", f.max_n2, "largest squared mode index");
  }
  if (name == "nl-threshold") {
    sub->add_option("--n-k2", f.n_k2, "squared mode index");
    sub->add_option("--deviation-percent", f.deviation_percent, "target energy deviation in percent");
  }
  if (name == "reconcile-cv") sub->add_option("--cv-target", f.cv_target, "target c_V / k_B");
  if (name == "compare-oracle") {
    sub->add_option("--op", f.op, "heatcap | potential");
    sub->add_option("--grid", f.grid, "3D oracle cells per edge");
  }
  if (name == "scan") {
    sub->add_option("--N-values", f.N_values, "atom counts")->delimiter(',');
    sub->add_option("--L-values-m", f.L_values, "box edges (m)")->delimiter(',');
    sub->add_option("--T-values-K", f.T_values, "temperatures (K)")->delimiter(',');
    sub->add_option("--N-range", f.N_range, "start,stop,points (geometric)")->delimiter(',')->expected(3);
    sub->add_option("--L-range-m", f.L_range, "start,stop,points (geometric)")->delimiter(',')->expected(3);
    sub->add_option("--T-range-K", f.T_range, "start,stop,points (geometric)")->delimiter(',')->expected(3);
  }
}

std::vector<double> range_of(const std::vector<double>& r, const char* flag) {
  if (r.size() != 3 || r[2] != std::floor(r[2]) || r[2] < 1) {
    bad_config(std::string(flag) + " expects start,stop,points");
  }
  return experiment::geometric_range(r[0], r[1], static_cast<int>(r[2]));
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad_config("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    bad_config("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

RunConfig merge(CLI::App* sub, const Flags& f) {
  auto given = [&](const char* flag) { return sub->count(flag) > 0; };
  RunConfig cfg = given("--config") ? load_config_file(f.config) : RunConfig{};
  cfg.command = sub->get_name();
  if (given("--species")) cfg.species.name = f.species;
  if (given("--species-file")) cfg.species_file = f.species_file;
  if (given("--mass-u")) cfg.species.mass_u = f.mass_u;
  if (given("--a-s-nm")) cfg.species.a_s_nm = f.a_s_nm;
  if (given("--three-body-rate")) cfg.species.three_body_rate_m6_per_s = f.three_body_rate;
  if (given("--N")) cfg.N_atoms = f.N;
  if (given("--L-m")) cfg.L_m = f.L;
  if (given("--T-K")) {
    cfg.T_K = f.T;
    cfg.T_sweep_K.reset();
  }
  const int sweep_flags = given("--T-start-K") + given("--T-stop-K") + given("--T-points");
  if (sweep_flags != 0) {
    if (sweep_flags != 3) bad_config("a temperature sweep needs --T-start-K, --T-stop-K and --T-points");
    if (given("--T-K")) bad_config("--T-K and a temperature sweep are mutually exclusive");
    cfg.T_sweep_K = TemperatureSweep{f.T_start, f.T_stop, f.T_points};
    cfg.T_K.reset();
  }
  if (given("--theory")) cfg.theory = parse_theory(f.theory);
  if (given("--g-em-J-m3")) cfg.g_em_override_J_m3 = f.g_em;
  if (given("--rel-tol")) cfg.rel_tol = f.rel_tol;
  if (given("--format")) cfg.format = parse_format(f.format);
  if (given("--out")) cfg.output_path = f.out;
  if (given("--threads")) cfg.threads = f.threads;
  if (given("--shell-cutoff")) cfg.shell_cutoff = f.shell_cutoff;
  if (sub->get_option_no_throw("--max-n2") && given("--max-n2")) cfg.max_n2 = f.max_n2;
  if (sub->get_option_no_throw("--n-k2") && given("--n-k2")) cfg.n_k2 = f.n_k2;
  if (sub->get_option_no_throw("--deviation-percent") && given("--deviation-percent")) {
    cfg.deviation_percent = f.deviation_percent;
  }
  if (sub->get_option_no_throw("--cv-target") && given("--cv-target")) cfg.cv_target_over_kB = f.cv_target;
  if (sub->get_option_no_throw("--op") && given("--op")) cfg.oracle_op = f.op;
  if (sub->get_option_no_throw("--grid") && given("--grid")) cfg.oracle_grid_cells = f.grid;
  if (cfg.command == "scan") {
    if (given("--N-values")) cfg.scan_N_atoms = f.N_values;
    if (given("--L-values-m")) cfg.scan_L_m = f.L_values;
    if (given("--T-values-K")) cfg.scan_T_K = f.T_values;
    if (given("--N-range")) cfg.scan_N_atoms = range_of(f.N_range, "--N-range");
    if (given("--L-range-m")) cfg.scan_L_m = range_of(f.L_range, "--L-range-m");
    if (given("--T-range-K")) cfg.scan_T_K = range_of(f.T_range, "--T-range-K");
  }
  if (cfg.max_n2 < 0 || cfg.max_n2 > 10000) bad_config("--max-n2 must lie in [0, 10000]");
  if (cfg.threads < 0) bad_config("--threads must be >= 0");
  return cfg;
}

void emit_error(std::ostream& err, const Error& e) {
  ordered_json obj{{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
  if (const auto* d = dynamic_cast<const DynamicalInstability*>(&e)) {
    obj["shell_n2"] = d->shell();
    obj["radicand"] = d->radicand();
  }
  err << ordered_json{{"error", obj}}.dump() << '\n';
}

}  // namespace

std::string_view to_string(TheorySelector t) noexcept {
  switch (t) {
    case TheorySelector::Quantum: return "quantum";
    case TheorySelector::Classical: return "classical";
    case TheorySelector::Both: return "both";
  }
  return "both";
}

std::string_view to_string(OutputFormat f) noexcept { return f == OutputFormat::Json ? "json" : "csv"; }

ordered_json to_json(const RunConfig& c) {
  ordered_json species{{"name", c.species.name}};
  if (c.species.mass_u) species["mass_u"] = *c.species.mass_u;
  if (c.species.a_s_nm) species["a_s_nm"] = *c.species.a_s_nm;
  if (c.species.three_body_rate_m6_per_s) species["three_body_rate_m6_per_s"] = *c.species.three_body_rate_m6_per_s;

  ordered_json j;
  j["command"] = c.command;
  j["species"] = species;
  if (c.species_file) j["species_file"] = *c.species_file;
  j["N_atoms"] = c.N_atoms;
  j["L_m"] = c.L_m;
  if (c.T_K) j["T_K"] = *c.T_K;
  if (c.T_sweep_K) {
    j["T_sweep_K"] = {{"start", c.T_sweep_K->start_K}, {"stop", c.T_sweep_K->stop_K},
                      {"points", c.T_sweep_K->points}};
  }
  j["theory"] = std::string(to_string(c.theory));
  if (c.g_em_override_J_m3) j["g_em_override_J_m3"] = *c.g_em_override_J_m3;
  j["rel_tol"] = c.rel_tol;
  j["format"] = std::string(to_string(c.format));
  if (c.output_path) j["output_path"] = *c.output_path;
  j["threads"] = c.threads;
  j["max_n2"] = c.max_n2;
  j["n_k2"] = c.n_k2;
  j["deviation_percent"] = c.deviation_percent;
  j["cv_target_over_kB"] = c.cv_target_over_kB;
  j["oracle_op"] = c.oracle_op;
  j["oracle_grid_cells"] = c.oracle_grid_cells;
  if (c.shell_cutoff) j["shell_cutoff"] = *c.shell_cutoff;
  if (!c.scan_N_atoms.empty()) j["scan_N_atoms"] = c.scan_N_atoms;
  if (!c.scan_L_m.empty()) j["scan_L_m"] = c.scan_L_m;
  if (!c.scan_T_K.empty()) j["scan_T_K"] = c.scan_T_K;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad_config("config must be a JSON object");
  check_keys(j,
             {"command", "species", "species_file", "N_atoms", "L_m", "T_K", "T_sweep_K", "theory",
              "g_em_override_J_m3", "rel_tol", "format", "output_path", "threads", "max_n2", "n_k2",
              "deviation_percent", "cv_target_over_kB", "oracle_op", "oracle_grid_cells", "shell_cutoff",
              "scan_N_atoms", "scan_L_m", "scan_T_K"},
             "config");
  RunConfig c;
  auto opt = [&](const char* key, auto& target) {
    if (j.contains(key)) target = get_as<std::decay_t<decltype(target)>>(j.at(key), key);
  };
  auto opt_optional = [&](const char* key, auto& target) {
    using T = typename std::decay_t<decltype(target)>::value_type;
    if (j.contains(key)) target = get_as<T>(j.at(key), key);
  };
  opt("command", c.command);
  if (j.contains("species")) {
    const auto& s = j.at("species");
    if (s.is_string()) {
      c.species.name = s.get<std::string>();
    } else if (s.is_object()) {
      check_keys(s, {"name", "mass_u", "a_s_nm", "three_body_rate_m6_per_s"}, "species");
      if (s.contains("name")) c.species.name = get_as<std::string>(s.at("name"), "species.name");
      if (s.contains("mass_u")) c.species.mass_u = get_as<double>(s.at("mass_u"), "species.mass_u");
      if (s.contains("a_s_nm")) c.species.a_s_nm = get_as<double>(s.at("a_s_nm"), "species.a_s_nm");
      if (s.contains("three_body_rate_m6_per_s")) {
        c.species.three_body_rate_m6_per_s =
            get_as<double>(s.at("three_body_rate_m6_per_s"), "species.three_body_rate_m6_per_s");
      }
    } else {
      bad_config("config key 'species' must be a name or an object");
    }
  }
  opt_optional("species_file", c.species_file);
  opt("N_atoms", c.N_atoms);
  opt("L_m", c.L_m);
  opt_optional("T_K", c.T_K);
  if (j.contains("T_sweep_K")) {
    const auto& s = j.at("T_sweep_K");
    if (!s.is_object()) bad_config("config key 'T_sweep_K' must be an object");
    check_keys(s, {"start", "stop", "points"}, "T_sweep_K");
    if (!s.contains("start") || !s.contains("stop") || !s.contains("points")) {
      bad_config("T_sweep_K needs start, stop and points");
    }
    c.T_sweep_K = TemperatureSweep{get_as<double>(s.at("start"), "T_sweep_K.start"),
                                   get_as<double>(s.at("stop"), "T_sweep_K.stop"),
                                   get_as<int>(s.at("points"), "T_sweep_K.points")};
  }
  if (j.contains("theory")) c.theory = parse_theory(get_as<std::string>(j.at("theory"), "theory"));
  opt_optional("g_em_override_J_m3", c.g_em_override_J_m3);
  opt("rel_tol", c.rel_tol);
  if (j.contains("format")) c.format = parse_format(get_as<std::string>(j.at("format"), "format"));
  opt_optional("output_path", c.output_path);
  opt("threads", c.threads);
  opt("max_n2", c.max_n2);
  opt("n_k2", c.n_k2);
  opt("deviation_percent", c.deviation_percent);
  opt("cv_target_over_kB", c.cv_target_over_kB);
  opt("oracle_op", c.oracle_op);
  opt("oracle_grid_cells", c.oracle_grid_cells);
  opt_optional("shell_cutoff", c.shell_cutoff);
  opt("scan_N_atoms", c.scan_N_atoms);
  opt("scan_L_m", c.scan_L_m);
  opt("scan_T_K", c.scan_T_K);
  return c;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qgbec: quasiparticle spectra and heat capacity of a self-gravitating BEC in a box", "qgbec"};
  app.set_version_flag("--version", QGBEC_VERSION);
  app.require_subcommand(1);
  Flags flags;
  for (const auto& info : kCommands) add_flags(app.add_subcommand(info.name, info.help), flags, info.name);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << QGBEC_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "error: " << e.what() << '\n' << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  Context ctx;
  try {
    ctx.config = merge(sub, flags);
    ctx.species = resolve_species(ctx.config);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n' << sub->help();
    return 2;
  }

  const Command fn = std::find_if(std::begin(kCommands), std::end(kCommands), [&](const CommandInfo& c) {
                       return ctx.config.command == c.name;
                     })->fn;
  const std::size_t previous_limit = worker_limit();
  set_worker_limit(static_cast<std::size_t>(ctx.config.threads));
  struct Restore {
    std::size_t limit;
    ~Restore() { set_worker_limit(limit); }
  } restore{previous_limit};

  ordered_json meta = base_meta(ctx);
  Table table;
  try {
    fn(ctx, meta, table);
  } catch (const Error& e) {
    if (e.is_usage_error()) {
      err << "error: " << e.what() << '\n' << sub->help();
      return 2;
    }
    emit_error(err, e);
    return 1;
  }

  if (ctx.config.output_path) {
    std::ofstream file(*ctx.config.output_path, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << *ctx.config.output_path << "'\n";
      return 2;
    }
    write_table(file, meta, table, ctx.config.format);
    if (!file) {
      err << "error: write to '" << *ctx.config.output_path << "' failed\n";
      return 1;
    }
  } else {
    write_table(out, meta, table, ctx.config.format);
  }
  return 0;
}

}  // namespace qgbec::cli
