#include "qensemble/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "qensemble/ensemble.hpp"
#include "qensemble/numerics.hpp"
#include "qensemble/optics.hpp"
#include "qensemble/squarewell.hpp"
#include "qensemble/wavepacket.hpp"

namespace qens {

namespace {

constexpr double kPi = std::numbers::pi;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fixed(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Outcome {
  bool passed;
  std::string detail;
};

CriterionResult timed(std::string id, std::string title, const std::function<Outcome()>& body,
                      double time_limit = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r{std::move(id), std::move(title), false, {}, 0.0};
  try {
    Outcome o = body();
    r.passed = o.passed;
    r.detail = std::move(o.detail);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit > 0.0 && r.seconds >= time_limit) {
    r.passed = false;
    r.detail += "; over the " + fixed(time_limit, 0) + " s budget";
  }
  return r;
}

DispersionLaw law_for(const ParticleModel& p, const AcceptanceOptions& opts) {
  DispersionLaw law = DispersionLaw::of(p);
  if (opts.corrupt_dispersion) law.coefficient *= 1.1;
  return law;
}

Outcome parseval() {
  double worst = 0.0;
  for (double m : {1.0, 2.0}) {
    for (double k : {0.1, 1.0, 10.0}) {
      const ParticleModel p(m, 1.0, k * k / m);
      const double ref = 4.0 * kPi * m * k * k * k / 3.0;
      worst = std::max(worst, std::abs(parseval_norm(p, k) - ref) / ref);
    }
  }
  return {worst <= 1e-8, "max relative error " + sci(worst)};
}

Outcome range_monotonicity() {
  const ParticleModel p = ParticleModel::natural(1.0);
  const double a = allowed_k_range(p, -3.0).hi;
  const double b = allowed_k_range(p, 0.0).hi;
  const double c = allowed_k_range(p, 0.5).hi;
  const double err = std::max({std::abs(a - 2.0), std::abs(b - 1.0), std::abs(c - std::sqrt(0.5))});
  return {a > b && b > c && err <= 1e-12,
          "k_hi = " + fixed(a, 12) + ", " + fixed(b, 12) + ", " + fixed(c, 12) + "; max error " + sci(err)};
}

Outcome single_mode(const AcceptanceOptions& opts) {
  const ParticleModel p = ParticleModel::natural(1.0);
  const Grid1D grid(-20.0, 20.0, 401);
  double worst = 0.0;
  for (double t : {0.0, 1.0, 5.0}) {
    const Propagation prop = propagate(SingleModePacket{5.0}, law_for(p, opts), t, grid, {}, opts.exec);
    for (const cplx& v : prop.psi.values) worst = std::max(worst, std::abs(std::norm(v) - 1.0));
  }
  return {worst <= 4.0 * std::numeric_limits<double>::epsilon(), "max | |psi|^2 - 1 | = " + sci(worst)};
}

Outcome spreading(const AcceptanceOptions& opts) {
  const ParticleModel p = ParticleModel::natural(1.0);
  const GaussianPacket g{1.0, 5.0};
  double worst = 0.0, printed = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    const double w = std::sqrt(1.0 + t * t);
    const double centre = 5.0 * t;
    const Grid1D grid(centre - 4.0 * w, centre + 4.0 * w, 401);
    const Propagation prop = propagate(g, law_for(p, opts), t, grid, {}, opts.exec);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double num = std::norm(prop.psi[i]);
      const double x = grid.node(i);
      const double ref = closed_form_density(g, p, x, t, SpreadingForm::textbook);
      worst = std::max(worst, std::abs(num - ref) / ref);
      const double alt = closed_form_density(g, p, x, t, SpreadingForm::as_printed);
      printed = std::max(printed, std::abs(num - alt) / alt);
    }
  }
  return {worst <= 1e-4,
          "max relative deviation vs textbook " + sci(worst) + "; as-printed form deviates up to " + sci(printed)};
}

Outcome force_consistency() {
  const ParticleModel p = ParticleModel::natural(1.0);
  const Grid1D grid(-8.0, 8.0, 2001);
  RealField amp(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) amp[i] = std::exp(-0.5 * grid.node(i) * grid.node(i));
  const ForceField f = intrinsic_force(amp, p, 1.0, 6);
  const Derivative dphi = derivative(intrinsic_potential(amp, p, 1.0), 6);
  double analytic = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!f.is_interior(i)) continue;
    const double x = grid.node(i);
    analytic = std::max(analytic, std::abs(f.force[i] - 2.0 * x * std::exp(-x * x)));
    cross = std::max(cross, std::abs(f.force[i] + dphi.values[i]));
  }
  return {analytic <= 1e-8 && cross <= 1e-8,
          "interior max error vs analytic " + sci(analytic) + ", vs -grad(phi) " + sci(cross)};
}

Outcome equilibrium() {
  // Node 1125 sits on the analytic peak x = b/√2.
  const double s = 1.0 / std::sqrt(2.0);
  const Grid1D grid(-8.0 * s, 8.0 * s, 2001);
  const EquilibriumReport flat = equilibrium_check(RealField(grid, std::vector<double>(grid.size(), 0.75)));
  RealField gauss(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) gauss[i] = std::exp(-0.5 * grid.node(i) * grid.node(i));
  const EquilibriumReport g = equilibrium_check(gauss);
  const double scale = std::sqrt(2.0) * std::exp(-0.5);
  const bool pinned = std::abs(g.residual - scale) <= 1e-8;
  return {flat.residual == 0.0 && flat.stable && g.residual > 0.1 && !g.stable && pinned,
          "constant residual " + sci(flat.residual) + ", Gaussian residual " + fixed(g.residual, 9) +
              " (analytic peak " + fixed(scale, 9) + ")"};
}

Outcome collapse() {
  const ParticleModel p = ParticleModel::natural(2.0);  // E_k = 1
  const FilterResult f = apply_retarding_filter(p, 0.25);
  const FilterResult f_printed =
      apply_retarding_filter(p, 0.75, KineticConvention::as_printed, ThresholdForm::as_printed);
  EnsembleAmplitude amp = member_amplitude(p);
  amp.range = f.before;
  const double frac = surviving_fraction(f, amp);
  const double frac_printed = surviving_fraction(f_printed, amp);
  const double half = std::abs(f.after.lo - 0.5 * f.before.hi);
  const double err = std::max(std::abs(frac - 0.875), std::abs(frac_printed - 0.875));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 1.25);
  int nested = 0;
  for (int i = 0; i < 100; ++i) {
    const double e = dist(rng);
    const FilterResult r = apply_retarding_filter(p, e);
    const bool blocked_ok = e <= p.kinetic_energy() || r.fully_blocked;
    if (r.before.contains(r.after) && r.after.lo <= r.after.hi && blocked_ok) ++nested;
  }
  return {half <= 1e-15 && err <= 1e-10 && nested == 100,
          "surviving fraction " + fixed(frac, 12) + " (printed form " + fixed(frac_printed, 12) +
              "), nesting " + std::to_string(nested) + "/100"};
}

Outcome well_structure(Exec exec) {
  const WellConfig cfg(4.0, 1.0, ParticleModel::natural(1.0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.0, cfg.k_inner_max());
  const double kt2 = cfg.k_total() * cfg.k_total();
  double pair = 0.0;
  int edges = 0;
  for (int i = 0; i < 1000; ++i) {
    const WellMember m = pair_member(cfg, dist(rng));
    pair = std::max(pair, std::abs(m.k1 * m.k1 + m.k2 * m.k2 - kt2) / kt2);
    const EdgeValues e = member_edge_values(m, cfg);
    if (e.inner == e.outer && member_wavefunction(m, cfg, -cfg.x0) == member_wavefunction(m, cfg, cfg.x0)) {
      ++edges;
    }
  }
  const Grid1D grid(-4.0, 4.0, 801);
  const WellDensity d = well_ensemble_density(cfg, grid, {}, exec);
  double asym = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    asym = std::max(asym, std::abs(d.rho[i] - d.rho[grid.size() - 1 - i]));
  }
  const double norm = std::abs(integrate_1d(d.rho) - 1.0);
  return {pair <= 1e-12 && edges == 1000 && asym <= 1e-10 && norm <= 1e-8,
          "pair identity " + sci(pair) + ", exact edges " + std::to_string(edges) + "/1000, evenness " +
              sci(asym) + ", norm error " + sci(norm)};
}

Outcome eraser() {
  const AgreementReport a = formalism_agreement(64);
  const std::array<double, 3> expected{1.0, 0.0, 1.0};
  double vis = 0.0;
  std::string shown;
  for (std::size_t i = 0; i < 3; ++i) {
    vis = std::max({vis, std::abs(a.stages[i].visibility_fields - expected[i]),
                    std::abs(a.stages[i].visibility_statevector - expected[i])});
    shown += (i ? "/" : "") + fixed(a.stages[i].visibility_fields, 6);
  }
  const double peak = std::abs(a.diagonal_to_baseline_peak - 0.5);
  return {vis <= 1e-12 && peak <= 1e-12 && a.agree,
          "visibilities " + shown + ", peak ratio " + fixed(a.diagonal_to_baseline_peak, 12) +
              ", formalism deviation " + sci(a.max_deviation)};
}

Outcome bomb(Exec exec) {
  double dark = 0.0;
  for (int i = 0; i <= 10; ++i) {
    MZConfig c;
    c.reflectivity = i / 10.0;
    dark = std::max(dark, mz_probabilities(c).dark);
  }
  MZConfig present;
  present.bomb_present = true;
  const MZOutcome o = mz_probabilities(present);
  const bool exact = o.absorbed == 0.5 && o.bright == 0.25 && o.dark == 0.25;
  const EfficiencyLedger l = efficiency_account(present, 100000, kDefaultSeed, exec);
  const bool share = std::abs(l.expected_undetected_share - 0.98) <= 1e-15;
  return {dark <= 1e-12 && exact && share && l.within_three_sigma,
          "clear dark port " + sci(dark) + ", bomb {" + fixed(o.absorbed, 3) + ", " + fixed(o.bright, 3) +
              ", " + fixed(o.dark, 3) + "}, undetected share " + fixed(l.empirical_undetected_share, 5) +
              " (expected " + fixed(l.expected_undetected_share, 5) + ")" +
              (l.within_three_sigma ? ", within 3 sigma" : ", OUTSIDE 3 sigma")};
}

Outcome uncertainty(Exec exec) {
  const GaussianSpectrum g{1.0, 0.0};
  const Spectrum1D gauss{-8.0, 8.0, [g](double k) { return cplx(g(k), 0.0); }};
  const double product = uncertainty_analysis(gauss, {}, exec).product;

  std::mt19937_64 rng(20260419);
  std::uniform_real_distribution<double> width(0.5, 1.5), centre(-3.0, 3.0), coef(-1.0, 1.0),
      chirp(-0.5, 0.5);
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    const double s = width(rng), c = centre(rng), a1 = coef(rng), a2 = coef(rng), beta = chirp(rng);
    const Spectrum1D spec{c - 8.0 * s, c + 8.0 * s, [=](double k) {
                            const double u = (k - c) / s;
                            return std::exp(-0.5 * u * u) * (1.0 + a1 * u + a2 * u * u) *
                                   std::polar(1.0, beta * u * u);
                          }};
    lowest = std::min(lowest, uncertainty_analysis(spec, {}, exec).product);
  }
  return {std::abs(product - 0.5) <= 1e-3 && lowest >= 0.5 - 1e-6,
          "Gaussian product " + fixed(product, 9) + ", lowest of 20 random spectra " + fixed(lowest, 9)};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  std::vector<CriterionResult> out;
  out.push_back(timed("AC1", "Parseval norm of the flat ensemble", parseval, 1.0));
  out.push_back(timed("AC2", "ensemble range monotonic in V", range_monotonicity));
  out.push_back(timed("AC3", "single mode does not spread", [&] { return single_mode(opts); }));
  out.push_back(timed("AC4", "Gaussian spreading matches closed form", [&] { return spreading(opts); }, 10.0));
  out.push_back(timed("AC5", "intrinsic force consistency", force_consistency));
  out.push_back(timed("AC6", "equilibrium condition", equilibrium));
  out.push_back(timed("AC7", "collapse fraction and range nesting", collapse));
  out.push_back(timed("AC8", "square-well structure", [&] { return well_structure(opts.exec); }));
  out.push_back(timed("AC9", "eraser visibilities and formalism agreement", eraser));
  out.push_back(timed("AC10", "interaction-free statistics", [&] { return bomb(opts.exec); }, 5.0));
  out.push_back(timed("AC11", "uncertainty floor", [&] { return uncertainty(opts.exec); }));
  return out;
}

namespace {

Outcome inv_numerics() {
  const Grid1D grid = Grid1D::odd(-1.0, 2.0, 31);
  RealField cubic(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.node(i);
    cubic[i] = x * x * x - x;
  }
  const double simpson = std::abs(integrate_1d(cubic) - 2.25);
  const Derivative d = derivative(RealField(grid, std::vector<double>(grid.size(), 3.5)), 6);
  double flat = 0.0;
  for (double v : d.values.values) flat = std::max(flat, std::abs(v));
  const double mode = std::abs(std::abs(superpose(SingleMode{2.0, std::sqrt(2.0 * kPi)}, 0.7)) - 1.0);
  return {simpson <= 1e-14 && flat == 0.0 && mode <= 1e-15,
          "cubic Simpson error " + sci(simpson) + ", constant derivative " + sci(flat)};
}

Outcome inv_ensemble() {
  const ParticleModel p = ParticleModel::natural(1.0);
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (double V = -5.0; V < 1.0; V += 0.25) {
    const double hi = allowed_k_range(p, V).hi;
    monotone = monotone && hi < prev;
    prev = hi;
  }
  const double ratio = parseval_norm(ParticleModel::natural(4.0), 2.0) / parseval_norm(p, 1.0);
  return {monotone && std::abs(ratio - 8.0) <= 1e-12, "k_hi strictly decreasing; k^3 scaling " + fixed(ratio, 12)};
}

Outcome inv_squarewell() {
  const WellConfig cfg(30.0, 0.5, ParticleModel::natural(20.0));
  const std::vector<double> roots = bound_state_members(cfg);
  double worst = 0.0;
  for (double k1 : roots) {
    const WellMember m = pair_member(cfg, k1);
    worst = std::max(worst, std::abs(m.k2 - m.k1 * std::tan(m.k1 * cfg.x0)) / m.k2);
    worst = std::max(worst, std::abs(normalization_audit(cfg, m).relative_discrepancy));
  }
  return {!roots.empty() && worst <= 1e-8,
          std::to_string(roots.size()) + " bound member(s); derivative match and norm " + sci(worst)};
}

Outcome inv_wavepacket(const AcceptanceOptions& opts) {
  const ParticleModel p = ParticleModel::natural(1.0);
  const Grid1D grid(-15.0, 30.0, 901);
  double norm0 = 0.0, worst_norm = 0.0, worst_v = 0.0, prev_width = 0.0;
  bool widening = true;
  for (double t : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    const Propagation prop = propagate(GaussianPacket{1.0, 5.0}, law_for(p, opts), t, grid, {}, opts.exec);
    const Moments m = density_moments(ensemble_density(prop.psi));
    if (t == 0.0) norm0 = m.norm;
    worst_norm = std::max(worst_norm, std::abs(m.norm - norm0) / norm0);
    if (t > 0.0) worst_v = std::max(worst_v, std::abs(m.mean / t - 5.0) / 5.0);
    widening = widening && m.stddev >= prev_width;
    prev_width = m.stddev;
  }
  return {worst_norm <= 1e-6 && worst_v <= 0.01 && widening,
          "norm drift " + sci(worst_norm) + ", centroid velocity error " + sci(worst_v)};
}

Outcome inv_optics() {
  PolarizedBeam b = PolarizedBeam::horizontal(1.0, 1.0);
  b = polarize(rotate_polarization(split(b, 0.3).second), axis::diagonal());
  double range_ok = 1.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = counter_uniform(kDefaultSeed, i);
    if (!(u >= 0.0 && u < 1.0)) range_ok = 0.0;
  }
  double sum_err = 0.0;
  for (int i = 0; i <= 10; ++i) {
    for (bool present : {false, true}) {
      const MZOutcome o = mz_probabilities({present, i / 10.0, 0.02});
      sum_err = std::max(sum_err, std::abs(o.bright + o.dark + o.absorbed - 1.0));
    }
  }
  return {b.orthogonality_residual() <= 1e-15 && range_ok == 1.0 &&
              sum_err <= 4.0 * std::numeric_limits<double>::epsilon(),
          "beam orthogonality " + sci(b.orthogonality_residual()) + ", outcome sum error " + sci(sum_err)};
}

Outcome inv_parallel() {
  const ParticleModel p = ParticleModel::natural(1.0);
  const Grid1D grid(-5.0, 15.0, 201);
  const DispersionLaw law = DispersionLaw::of(p);
  const auto a = propagate(GaussianPacket{1.0, 5.0}, law, 1.0, grid, {}, Exec::serial).psi.values;
  const auto b = propagate(GaussianPacket{1.0, 5.0}, law, 1.0, grid, {}, Exec::parallel).psi.values;
  MZConfig c;
  c.bomb_present = true;
  const EfficiencyLedger s = efficiency_account(c, 50000, 3, Exec::serial);
  const EfficiencyLedger q = efficiency_account(c, 50000, 3, Exec::parallel);
  const bool same = a == b && s.absorbed == q.absorbed && s.detected_bright == q.detected_bright &&
                    s.detected_dark == q.detected_dark && s.undetected == q.undetected;
  return {same, same ? "serial and parallel kernels bitwise identical" : "serial and parallel differ"};
}

}  // namespace

std::vector<CriterionResult> run_invariants(const AcceptanceOptions& opts) {
  std::vector<CriterionResult> out;
  out.push_back(timed("INV-numerics", "quadrature and stencil exactness", inv_numerics));
  out.push_back(timed("INV-ensemble", "range ordering and norm scaling", inv_ensemble));
  out.push_back(timed("INV-squarewell", "bound members", inv_squarewell));
  out.push_back(timed("INV-wavepacket", "norm, transport and spreading", [&] { return inv_wavepacket(opts); }));
  out.push_back(timed("INV-optics", "beam geometry and outcome sums", inv_optics));
  out.push_back(timed("INV-parallel", "serial reference agreement", inv_parallel));
  return out;
}

std::string format_result(const CriterionResult& r) {
  return std::string(r.passed ? "PASS" : "FAIL") + " [" + r.id + "] " + r.title + ": " + r.detail;
}

}  // namespace qens
