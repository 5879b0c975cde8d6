#include "qensemble/scenario.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "qensemble/ensemble.hpp"
#include "qensemble/error.hpp"
#include "qensemble/optics.hpp"
#include "qensemble/squarewell.hpp"
#include "qensemble/wavepacket.hpp"

namespace qens {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::array<Scenario, 6> kScenarios{Scenario::ensemble, Scenario::well,
                                             Scenario::spread,   Scenario::collapse,
                                             Scenario::eraser,   Scenario::bomb};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ValidationError("key '" + key + "': '" + text + "' is not a finite number");
  }
  return v;
}

std::vector<KeySpec> with_common(std::vector<KeySpec> keys) {
  keys.push_back({"units", Quantity::dimensionless, "natural", "natural | si"});
  keys.push_back({"seed", Quantity::count, std::to_string(kDefaultSeed), "Monte-Carlo seed"});
  return keys;
}

const KeySpec kMass{"mass", Quantity::mass, "auto", "particle mass (auto: 1 or electron mass)"};
const KeySpec kHbar{"hbar", Quantity::action, "auto", "reduced Planck constant (auto: 1 or SI)"};

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::ensemble: return "ensemble";
    case Scenario::well: return "well";
    case Scenario::spread: return "spread";
    case Scenario::collapse: return "collapse";
    case Scenario::eraser: return "eraser";
    case Scenario::bomb: return "bomb";
  }
  return "ensemble";
}

Scenario parse_scenario(std::string_view text) {
  for (Scenario s : kScenarios) {
    if (to_string(s) == text) return s;
  }
  throw ValidationError("unknown scenario '" + std::string(text) + "'");
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::json ? "json" : "csv"; }

OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "json") return OutputFormat::json;
  throw ValidationError("unknown output format '" + std::string(text) + "' (csv | json)");
}

const std::vector<KeySpec>& scenario_keys(Scenario s) {
  static const std::map<Scenario, std::vector<KeySpec>> table{
      {Scenario::ensemble,
       with_common({{"E_T", Quantity::energy, "1", "total particle energy"},
                    {"V", Quantity::energy, "-3,0,0.5", "comma-separated potential values"},
                    kMass,
                    kHbar,
                    {"r_max", Quantity::length, "0", "radial extent (0: 8π over the largest k_hi)"},
                    {"n_r", Quantity::count, "101", "radial nodes"},
                    {"kinetic-convention", Quantity::dimensionless, "as_printed", "as_printed | m | 2m"}})},
      {Scenario::spread,
       with_common({{"b", Quantity::length, "1", "Gaussian width"},
                    {"k0", Quantity::wavenumber, "5", "carrier wavenumber"},
                    {"t", Quantity::time, "0,0.5,1,2", "comma-separated times"},
                    {"x_min", Quantity::length, "-10", "grid start"},
                    {"x_max", Quantity::length, "25", "grid end"},
                    {"n_x", Quantity::count, "701", "grid nodes"},
                    kMass,
                    kHbar})},
      {Scenario::collapse,
       with_common({{"E_k", Quantity::energy, "1", "kinetic energy bound of the incoming ensemble"},
                    {"E_rfa", Quantity::energy, "0.25", "analyzer threshold"},
                    kMass,
                    kHbar,
                    {"r_max", Quantity::length, "0", "radial extent (0: 8π over k0)"},
                    {"n_r", Quantity::count, "101", "radial nodes"},
                    {"kinetic-convention", Quantity::dimensionless, "as_printed", "as_printed | m | 2m"},
                    {"threshold-form", Quantity::dimensionless, "energy_threshold",
                     "energy_threshold | as_printed"}})},
      {Scenario::well,
       with_common({{"V0", Quantity::energy, "4", "well depth"},
                    {"x0", Quantity::length, "1", "well half-width"},
                    {"E_T", Quantity::energy, "1", "total particle energy (below V0)"},
                    kMass,
                    kHbar,
                    {"x_max", Quantity::length, "0", "profile half-extent (0: 4 x0)"},
                    {"n_x", Quantity::count, "801", "profile nodes"},
                    {"n_k", Quantity::count, "2001", "member quadrature nodes"},
                    {"inner-decay", Quantity::dimensionless, "as_printed", "as_printed | member_consistent"},
                    {"resonance_tolerance", Quantity::dimensionless, "1e-06",
                     "members with |cos(k1 x0)| below this are excluded"}})},
      {Scenario::eraser,
       with_common({{"n_phi", Quantity::count, "64", "phase samples over [0, 2π)"},
                    {"E1", Quantity::dimensionless, "1", "incident E amplitude"},
                    {"B1", Quantity::dimensionless, "1", "incident B amplitude"},
                    {"c", Quantity::velocity, "1", "speed of light"}})},
      {Scenario::bomb,
       with_common({{"reflectivity", Quantity::probability, "0.5", "splitter reflectivity r"},
                    {"efficiency", Quantity::probability, "0.02", "detector efficiency"},
                    {"n_trials", Quantity::count, "100000", "Monte-Carlo photons"}})},
  };
  return table.at(s);
}

namespace {

const KeySpec* find_key(Scenario s, const std::string& key) {
  for (const KeySpec& k : scenario_keys(s)) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

bool is_numeric_key(const KeySpec& k) {
  return k.quantity != Quantity::dimensionless || k.name == "E1" || k.name == "B1" ||
         k.name == "resonance_tolerance";
}

}  // namespace

std::string ScenarioConfig::value(const std::string& key) const {
  const KeySpec* spec = find_key(scenario, key);
  if (spec == nullptr) {
    throw ValidationError("scenario '" + std::string(to_string(scenario)) + "' has no key '" + key + "'");
  }
  const auto it = params.find(key);
  return it != params.end() ? it->second : spec->default_value;
}

double ScenarioConfig::number(const std::string& key) const { return parse_double(key, value(key)); }

std::size_t ScenarioConfig::count(const std::string& key) const {
  const double v = number(key);
  if (v < 0.0 || v != std::floor(v) || v > 1e15) {
    throw ValidationError("key '" + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::vector<double> ScenarioConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(value(key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ValidationError("key '" + key + "' needs at least one value");
  return out;
}

UnitSystem ScenarioConfig::units() const { return parse_unit_system(value("units")); }

void ScenarioConfig::validate() const {
  for (const auto& [key, text] : params) {
    const KeySpec* spec = find_key(scenario, key);
    if (spec == nullptr) {
      std::string known;
      for (const KeySpec& k : scenario_keys(scenario)) known += (known.empty() ? "" : ", ") + k.name;
      throw ValidationError("unknown key '" + key + "' for scenario '" +
                            std::string(to_string(scenario)) + "' (known: " + known + ")");
    }
    const bool automatic = (key == "mass" || key == "hbar") && text == "auto";
    if (is_numeric_key(*spec) && !automatic) numbers(key);
  }
  units();
}

std::pair<std::string, std::string> parse_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ValidationError("expected key=value, got '" + std::string(text) + "'");
  }
  std::string key = trim(text.substr(0, eq));
  if (key.empty()) throw ValidationError("empty key in '" + std::string(text) + "'");
  return {key, trim(text.substr(eq + 1))};
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    try {
      auto [key, value] = parse_assignment(line);
      if (out.count(key)) throw ValidationError("duplicate key '" + key + "'");
      out[key] = value;
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

bool RunReport::oracles_passed() const {
  return std::all_of(deltas.begin(), deltas.end(), [](const OracleDelta& d) { return d.passed; });
}

namespace {

ParticleModel particle_from(const ScenarioConfig& cfg, double total_energy) {
  const UnitSystem units = cfg.units();
  const bool si = units == UnitSystem::si;
  const double mass = cfg.value("mass") == "auto" ? (si ? si::electron_mass : 1.0) : cfg.number("mass");
  const double hbar = cfg.value("hbar") == "auto" ? (si ? si::hbar : 1.0) : cfg.number("hbar");
  return ParticleModel(mass, hbar, total_energy, units);
}

Grid1D grid_from(double lo, double hi, std::size_t n) {
  if (n < 2) throw ValidationError("grids need at least 2 nodes");
  return Grid1D(lo, hi, n);
}

double relative(double value, double reference) {
  return reference == 0.0 ? std::abs(value) : std::abs(value - reference) / std::abs(reference);
}

struct Builder {
  RunResult result;

  void output(std::string name, double value, Quantity q) {
    result.report.outputs.push_back({std::move(name), value, q});
  }
  /// |value − reference| (relative when `rel`) checked against tolerance.
  void delta(std::string name, double value, double reference, double tolerance, bool rel,
             Quantity q) {
    const double d = rel ? relative(value, reference) : std::abs(value - reference);
    const bool ok = d <= tolerance;
    if (!ok) {
      std::ostringstream diff;
      diff << name << ": value " << format_number(value) << " reference " << format_number(reference)
           << " delta " << format_number(d) << " > tolerance " << format_number(tolerance) << "\n";
      result.report.oracle_diff += diff.str();
    }
    result.report.deltas.push_back({std::move(name), value, reference, d, tolerance, ok, q});
  }
  void note(std::string text) { result.report.notes.push_back(std::move(text)); }
  void columns(std::vector<Column> cols) { result.table.columns = std::move(cols); }
  void row(std::vector<double> values) { result.table.rows.push_back(std::move(values)); }
};

double coefficient(const ParticleModel& p, KineticConvention c, double printed) {
  switch (c) {
    case KineticConvention::mass: return p.mass();
    case KineticConvention::twice_mass: return 2.0 * p.mass();
    case KineticConvention::as_printed: break;
  }
  return printed * p.mass();
}

// ψ(0) of a flat ensemble over the ball of radius k: (2π)^{-3/2} 4π √m k³/3.
double center_density(double mass, double k) {
  const double psi = std::pow(2.0 * kPi, -1.5) * 4.0 * kPi * std::sqrt(mass) * k * k * k / 3.0;
  return psi * psi;
}

void run_ensemble(const ScenarioConfig& cfg, Builder& out) {
  const double E_T = cfg.number("E_T");
  const ParticleModel p = particle_from(cfg, E_T);
  const std::vector<double> Vs = cfg.numbers("V");
  const KineticConvention conv = parse_kinetic_convention(cfg.value("kinetic-convention"));
  const double c = coefficient(p, conv, 1.0);

  std::vector<KRange> ranges;
  double k_ref = 0.0;
  for (std::size_t i = 0; i < Vs.size(); ++i) {
    const KRange r = allowed_k_range(p, Vs[i], conv);
    ranges.push_back(r);
    k_ref = std::max(k_ref, r.hi);
    const std::string tag = std::to_string(i + 1);
    out.output("V_" + tag, Vs[i], Quantity::energy);
    out.output("k_lo_" + tag, r.lo, Quantity::wavenumber);
    out.output("k_hi_" + tag, r.hi, Quantity::wavenumber);
    out.note("potential " + tag + ": V = " + format_number(Vs[i]) + ", regime " +
             std::string(to_string(r.regime)));
    out.delta("k_hi_" + tag, r.hi, std::sqrt(c * std::abs(E_T - Vs[i])) / p.hbar(), 1e-12, true,
              Quantity::wavenumber);
  }

  double r_max = cfg.number("r_max");
  if (r_max < 0.0) throw ValidationError("r_max must be non-negative");
  if (r_max == 0.0) {
    if (!(k_ref > 0.0)) throw ValidationError("every k-range is empty; set r_max explicitly");
    r_max = 8.0 * kPi / k_ref;
  }
  const Grid1D grid = grid_from(0.0, r_max, cfg.count("n_r"));
  EnsembleOptions opts;
  opts.convention = conv;

  std::vector<Column> cols{{"r", Quantity::length}};
  std::vector<RealField> rhos;
  for (std::size_t i = 0; i < Vs.size(); ++i) {
    cols.push_back({"rho_" + std::to_string(i + 1), Quantity::ensemble_density});
    const ComplexField psi =
        potential_wavefunction(p, PotentialSpec::constant(Vs[i]), grid, opts, Exec::parallel);
    rhos.push_back(ensemble_density(psi));
    out.delta("rho_" + std::to_string(i + 1) + "(r=0)", rhos.back()[0],
              center_density(p.mass(), ranges[i].hi), 1e-8, true, Quantity::ensemble_density);
  }
  out.columns(std::move(cols));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::vector<double> row{grid.node(j)};
    for (const RealField& rho : rhos) row.push_back(rho[j]);
    out.row(std::move(row));
  }
}

void run_spread(const ScenarioConfig& cfg, Builder& out) {
  const double b = cfg.number("b");
  const double k0 = cfg.number("k0");
  const std::vector<double> times = cfg.numbers("t");
  const ParticleModel p = particle_from(cfg, 0.0);
  const DispersionLaw law = DispersionLaw::of(p);
  const Grid1D grid = grid_from(cfg.number("x_min"), cfg.number("x_max"), cfg.count("n_x"));
  const GaussianPacket gauss{b, k0};
  validate(InitialPacket{gauss});

  std::vector<Column> cols{{"x", Quantity::length}};
  std::vector<RealField> columns;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    const std::string tag = std::to_string(j + 1);
    cols.push_back({"rho_gauss_t" + tag, Quantity::line_density});
    cols.push_back({"rho_mode_t" + tag, Quantity::line_density});
    out.output("t_" + tag, t, Quantity::time);

    const Propagation g = propagate(gauss, law, t, grid);
    const Propagation m = propagate(SingleModePacket{k0}, law, t, grid);
    columns.push_back(ensemble_density(g.psi));
    columns.push_back(ensemble_density(m.psi));
    out.output("truncation_bound_t" + tag, g.truncation_bound, Quantity::amplitude);

    // The spectrum carries no 1/b prefactor, so |ψ|² b² is compared.
    const double tau = p.hbar() * t / (p.mass() * b * b);
    const double half = 4.0 * b * std::sqrt(1.0 + tau * tau);
    const double center = p.hbar() * k0 * t / p.mass();
    double worst_textbook = 0.0, worst_printed = 0.0, worst_mode = 0.0;
    std::size_t in_window = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      worst_mode = std::max(worst_mode, std::abs(columns[columns.size() - 1][i] - 1.0));
      const double x = grid.node(i);
      if (std::abs(x - center) > half) continue;
      ++in_window;
      const double num = columns[columns.size() - 2][i] * b * b;
      worst_textbook = std::max(
          worst_textbook, relative(num, closed_form_density(gauss, p, x, t, SpreadingForm::textbook)));
      worst_printed = std::max(
          worst_printed, relative(num, closed_form_density(gauss, p, x, t, SpreadingForm::as_printed)));
    }
    if (in_window > 0) {
      out.delta("gauss_vs_textbook_max_rel_t" + tag, worst_textbook, 0.0, 1e-4, false,
                Quantity::dimensionless);
      out.output("gauss_vs_as_printed_max_rel_t" + tag, worst_printed, Quantity::dimensionless);
    } else {
      out.note("t_" + tag + ": packet centre window lies outside the grid; no closed-form comparison");
    }
    out.delta("mode_max_abs_dev_t" + tag, worst_mode, 0.0, 1e-14, false, Quantity::dimensionless);
  }
  out.note("as-printed spreading form is reported, not asserted; comparison window is ±4 widths "
           "around the moving centre");
  out.columns(std::move(cols));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid.node(i)};
    for (const RealField& c : columns) row.push_back(c[i]);
    out.row(std::move(row));
  }
}

void run_collapse(const ScenarioConfig& cfg, Builder& out) {
  const double E_k = cfg.number("E_k");
  if (E_k < 0.0) throw ValidationError("E_k must be non-negative");
  const ParticleModel p = particle_from(cfg, 2.0 * E_k);
  const KineticConvention conv = parse_kinetic_convention(cfg.value("kinetic-convention"));
  const std::string form_text = cfg.value("threshold-form");
  ThresholdForm form;
  if (form_text == "energy_threshold") {
    form = ThresholdForm::energy_threshold;
  } else if (form_text == "as_printed") {
    form = ThresholdForm::as_printed;
  } else {
    throw ValidationError("threshold-form must be energy_threshold or as_printed");
  }
  const FilterResult f = apply_retarding_filter(p, cfg.number("E_rfa"), conv, form);
  out.output("k_before_lo", f.before.lo, Quantity::wavenumber);
  out.output("k_before_hi", f.before.hi, Quantity::wavenumber);
  out.output("k_after_lo", f.after.lo, Quantity::wavenumber);
  out.output("k_after_hi", f.after.hi, Quantity::wavenumber);
  out.output("fully_blocked", f.fully_blocked ? 1.0 : 0.0, Quantity::count);

  EnsembleAmplitude amp = member_amplitude(p);
  amp.range = f.before;
  const double fraction = surviving_fraction(f, amp);
  const double ratio = f.after.lo / f.before.hi;
  out.delta("surviving_fraction", fraction, f.fully_blocked ? 0.0 : 1.0 - ratio * ratio * ratio, 1e-10,
            false, Quantity::probability);

  double r_max = cfg.number("r_max");
  if (r_max < 0.0) throw ValidationError("r_max must be non-negative");
  if (r_max == 0.0) r_max = 8.0 * kPi / f.before.hi;
  const Grid1D grid = grid_from(0.0, r_max, cfg.count("n_r"));
  const RealField before = ensemble_density(shell_wavefunction(p, f.before, grid));
  const RealField after = ensemble_density(shell_wavefunction(p, f.after, grid));
  out.columns({{"r", Quantity::length},
               {"rho_before", Quantity::ensemble_density},
               {"rho_after", Quantity::ensemble_density}});
  for (std::size_t i = 0; i < grid.size(); ++i) out.row({grid.node(i), before[i], after[i]});
}

void run_well(const ScenarioConfig& cfg, Builder& out) {
  const ParticleModel p = particle_from(cfg, cfg.number("E_T"));
  const WellConfig well(cfg.number("V0"), cfg.number("x0"), p);
  double x_max = cfg.number("x_max");
  if (x_max < 0.0) throw ValidationError("x_max must be non-negative");
  if (x_max == 0.0) x_max = 4.0 * well.x0;
  const Grid1D grid = grid_from(-x_max, x_max, cfg.count("n_x"));

  WellDensityOptions opts;
  opts.n_k = cfg.count("n_k");
  opts.resonance_tolerance = cfg.number("resonance_tolerance");
  const std::string decay = cfg.value("inner-decay");
  if (decay == "as_printed") {
    opts.inner = InnerDecay::as_printed;
  } else if (decay == "member_consistent") {
    opts.inner = InnerDecay::member_consistent;
  } else {
    throw ValidationError("inner-decay must be as_printed or member_consistent");
  }
  const WellDensity d = well_ensemble_density(well, grid, opts);

  out.output("k_inner_max", well.k_inner_max(), Quantity::wavenumber);
  out.output("k_outer_max", well.k_outer_max(), Quantity::wavenumber);
  out.output("raw_integral", d.raw_integral, Quantity::dimensionless);
  out.output("excluded_inner", d.excluded_inner, Quantity::wavenumber);
  out.output("excluded_outer", d.excluded_outer, Quantity::wavenumber);
  out.output("excluded_nodes", static_cast<double>(d.excluded_nodes), Quantity::count);
  out.note("members with |cos(k1 x0)| < " + format_number(opts.resonance_tolerance) +
           " are excluded; excluded_inner and excluded_outer give the removed k-measure");

  const std::vector<double> roots = bound_state_members(well);
  out.output("bound_state_count", static_cast<double>(roots.size()), Quantity::count);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const WellMember m = pair_member(well, roots[i]);
    const std::string tag = std::to_string(i + 1);
    out.output("bound_k1_" + tag, m.k1, Quantity::wavenumber);
    out.delta("bound_pair_identity_" + tag, m.k1 * m.k1 + m.k2 * m.k2, well.k_total() * well.k_total(),
              1e-12, true, Quantity::dimensionless);
  }

  double asym = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    asym = std::max(asym, std::abs(d.rho[i] - d.rho[grid.size() - 1 - i]));
    peak = std::max(peak, d.rho[i]);
  }
  out.delta("evenness_max_rel", peak > 0.0 ? asym / peak : asym, 0.0, 1e-10, false, Quantity::dimensionless);
  out.delta("normalization", integrate_1d(d.rho), 1.0, 1e-8, false, Quantity::dimensionless);

  out.columns({{"x", Quantity::length}, {"rho", Quantity::line_density}});
  for (std::size_t i = 0; i < grid.size(); ++i) out.row({grid.node(i), d.rho[i]});
}

void run_eraser(const ScenarioConfig& cfg, Builder& out) {
  EraserConfig base;
  base.E1 = cfg.number("E1");
  base.B1 = cfg.number("B1");
  base.c = cfg.number("c");
  const AgreementReport a = formalism_agreement(cfg.count("n_phi"), base);

  std::vector<Column> cols{{"phi", Quantity::angle}};
  for (const StageAgreement& s : a.stages) {
    cols.push_back({"fields_" + std::string(to_string(s.stage)), Quantity::intensity});
  }
  for (const StageAgreement& s : a.stages) {
    cols.push_back({"statevector_" + std::string(to_string(s.stage)), Quantity::probability});
  }
  out.columns(std::move(cols));
  for (std::size_t j = 0; j < a.stages[0].phi.size(); ++j) {
    std::vector<double> row{a.stages[0].phi[j]};
    for (const StageAgreement& s : a.stages) row.push_back(s.fields[j]);
    for (const StageAgreement& s : a.stages) row.push_back(s.statevector[j]);
    out.row(std::move(row));
  }

  const std::array<double, 3> expected_visibility{1.0, 0.0, 1.0};
  for (std::size_t i = 0; i < a.stages.size(); ++i) {
    const std::string stage(to_string(a.stages[i].stage));
    out.delta("visibility_fields_" + stage, a.stages[i].visibility_fields, expected_visibility[i], 1e-12,
              false, Quantity::dimensionless);
    out.delta("visibility_statevector_" + stage, a.stages[i].visibility_statevector,
              expected_visibility[i], 1e-12, false, Quantity::dimensionless);
  }
  out.output("proportionality_constant", a.constant, Quantity::intensity);
  out.delta("formalism_max_deviation", a.max_deviation, 0.0, kAgreementTolerance, false,
            Quantity::intensity);
  out.delta("diagonal_to_baseline_peak", a.diagonal_to_baseline_peak, 0.5, 1e-12, false,
            Quantity::dimensionless);
  if (!a.agree) out.result.report.oracle_diff += a.diff;
}

void run_bomb(const ScenarioConfig& cfg, Builder& out) {
  MZConfig mz;
  mz.reflectivity = cfg.number("reflectivity");
  mz.detector_efficiency = cfg.number("efficiency");
  mz.validate();
  const std::uint64_t n = cfg.count("n_trials");
  const double r = mz.reflectivity;

  out.columns({{"bomb_present", Quantity::count},
               {"p_bright", Quantity::probability},
               {"p_dark", Quantity::probability},
               {"p_absorbed", Quantity::probability},
               {"n_absorbed", Quantity::count},
               {"n_detected_bright", Quantity::count},
               {"n_detected_dark", Quantity::count},
               {"n_undetected", Quantity::count}});
  for (bool present : {false, true}) {
    MZConfig c = mz;
    c.bomb_present = present;
    const MZOutcome o = mz_probabilities(c);
    const EfficiencyLedger l = efficiency_account(c, n, cfg.seed);
    out.row({present ? 1.0 : 0.0, o.bright, o.dark, o.absorbed, static_cast<double>(l.absorbed),
             static_cast<double>(l.detected_bright), static_cast<double>(l.detected_dark),
             static_cast<double>(l.undetected)});
    const std::string tag = present ? "_bomb" : "_clear";
    out.delta("probability_sum" + tag, o.bright + o.dark + o.absorbed, 1.0,
              4.0 * std::numeric_limits<double>::epsilon(), false, Quantity::probability);
    if (present) {
      out.delta("p_absorbed" + tag, o.absorbed, r, 1e-15, false, Quantity::probability);
      out.delta("p_bright" + tag, o.bright, (1.0 - r) * (1.0 - r), 1e-15, false, Quantity::probability);
      out.delta("p_dark" + tag, o.dark, r * (1.0 - r), 1e-15, false, Quantity::probability);
      out.output("expected_undetected_share", l.expected_undetected_share, Quantity::probability);
      out.output("empirical_undetected_share", l.empirical_undetected_share, Quantity::probability);
      out.output("within_three_sigma", l.within_three_sigma ? 1.0 : 0.0, Quantity::count);
    } else {
      out.delta("p_dark" + tag, o.dark, 0.0, 1e-12, false, Quantity::probability);
    }
  }
  out.note("Monte-Carlo counts use a counter-based generator; identical for a given seed");
}

}  // namespace

RunResult run(const ScenarioConfig& cfg) {
  cfg.validate();
  Builder out;
  RunReport& report = out.result.report;
  report.scenario = cfg.scenario;
  report.units = cfg.units();
  report.seed = cfg.seed;
  for (const KeySpec& k : scenario_keys(cfg.scenario)) {
    if (k.name == "seed") continue;
    report.inputs.push_back({k.name, cfg.value(k.name)});
  }
  switch (cfg.scenario) {
    case Scenario::ensemble: run_ensemble(cfg, out); break;
    case Scenario::spread: run_spread(cfg, out); break;
    case Scenario::collapse: run_collapse(cfg, out); break;
    case Scenario::well: run_well(cfg, out); break;
    case Scenario::eraser: run_eraser(cfg, out); break;
    case Scenario::bomb: run_bomb(cfg, out); break;
  }
  for (const auto& row : out.result.table.rows) {
    for (double v : row) {
      if (!std::isfinite(v)) throw NumericalError("non-finite value in output table");
    }
  }
  return std::move(out.result);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string table_to_csv(const Table& table, UnitSystem units) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i].name + "[" + std::string(unit_label(units, table.columns[i].quantity)) + "]";
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::string quote(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

std::string json_number(double v) { return std::isfinite(v) ? format_number(v) : "null"; }

std::string report_body(const RunReport& r, bool with_time, const std::string& indent) {
  const std::string in = indent + "  ";
  const std::string in2 = in + "  ";
  const auto label = [&](Quantity q) { return quote(unit_label(r.units, q)); };
  std::ostringstream o;
  o << "{\n";
  o << in << "\"scenario\": " << quote(to_string(r.scenario)) << ",\n";
  o << in << "\"units\": " << quote(to_string(r.units)) << ",\n";
  o << in << "\"seed\": " << r.seed << ",\n";
  o << in << "\"inputs\": [";
  for (std::size_t i = 0; i < r.inputs.size(); ++i) {
    const KeySpec* spec = find_key(r.scenario, r.inputs[i].first);
    o << (i ? "," : "") << "\n" << in2 << "{\"key\": " << quote(r.inputs[i].first)
      << ", \"value\": " << quote(r.inputs[i].second)
      << ", \"unit\": " << label(spec ? spec->quantity : Quantity::dimensionless) << "}";
  }
  o << "\n" << in << "],\n";
  o << in << "\"outputs\": [";
  for (std::size_t i = 0; i < r.outputs.size(); ++i) {
    const ReportValue& v = r.outputs[i];
    o << (i ? "," : "") << "\n" << in2 << "{\"name\": " << quote(v.name)
      << ", \"value\": " << json_number(v.value) << ", \"unit\": " << label(v.quantity) << "}";
  }
  o << "\n" << in << "],\n";
  o << in << "\"oracle_deltas\": [";
  for (std::size_t i = 0; i < r.deltas.size(); ++i) {
    const OracleDelta& d = r.deltas[i];
    o << (i ? "," : "") << "\n" << in2 << "{\"name\": " << quote(d.name)
      << ", \"value\": " << json_number(d.value) << ", \"reference\": " << json_number(d.reference)
      << ", \"delta\": " << json_number(d.delta) << ", \"tolerance\": " << json_number(d.tolerance)
      << ", \"passed\": " << (d.passed ? "true" : "false") << ", \"unit\": " << label(d.quantity) << "}";
  }
  o << "\n" << in << "],\n";
  o << in << "\"notes\": [";
  for (std::size_t i = 0; i < r.notes.size(); ++i) {
    o << (i ? "," : "") << "\n" << in2 << quote(r.notes[i]);
  }
  o << "\n" << in << "],\n";
  o << in << "\"oracles_passed\": " << (r.oracles_passed() ? "true" : "false") << ",\n";
  o << in << "\"oracle_diff\": " << quote(r.oracle_diff);
  if (with_time) o << ",\n" << in << "\"wall_time_s\": " << json_number(r.wall_seconds);
  o << "\n" << indent << "}";
  return o.str();
}

}  // namespace

std::string result_to_json(const RunResult& result) {
  const RunReport& r = result.report;
  std::ostringstream o;
  o << "{\n  \"schema_version\": " << kSchemaVersion << ",\n";
  o << "  \"scenario\": " << quote(to_string(r.scenario)) << ",\n";
  o << "  \"units\": " << quote(to_string(r.units)) << ",\n";
  o << "  \"columns\": [";
  for (std::size_t i = 0; i < result.table.columns.size(); ++i) {
    const Column& c = result.table.columns[i];
    o << (i ? ", " : "") << "{\"name\": " << quote(c.name)
      << ", \"unit\": " << quote(unit_label(r.units, c.quantity)) << "}";
  }
  o << "],\n  \"rows\": [";
  for (std::size_t j = 0; j < result.table.rows.size(); ++j) {
    o << (j ? "," : "") << "\n    [";
    const auto& row = result.table.rows[j];
    for (std::size_t i = 0; i < row.size(); ++i) o << (i ? ", " : "") << json_number(row[i]);
    o << "]";
  }
  o << "\n  ],\n  \"report\": " << report_body(r, false, "  ") << "\n}\n";
  return o.str();
}

std::string report_to_json(const RunReport& report) {
  return "{\n  \"schema_version\": " + std::to_string(kSchemaVersion) +
         ",\n  \"report\": " + report_body(report, true, "  ") + "\n}\n";
}

void write_output(const RunResult& result, const ScenarioConfig& cfg) {
  if (cfg.output_path.empty()) throw ValidationError("no output path");
  std::ofstream out(cfg.output_path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + cfg.output_path + "'");
  out << (cfg.format == OutputFormat::json ? result_to_json(result)
                                           : table_to_csv(result.table, result.report.units));
  if (!out) throw NumericalError("failed writing '" + cfg.output_path + "'");
}

}  // namespace qens
