#include "qensemble/squarewell.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qens {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxResonances = 1e7;

double paired(double k_total, double k) { return std::sqrt(std::max(k_total * k_total - k * k, 0.0)); }

// Measure of {k in [lo, hi] : |cos(k x0)| < tol}, mapped through `map` to
// the integration variable.
template <class Map>
double excluded_measure(double lo, double hi, double x0, double tol, Map map) {
  const double half = std::asin(std::min(tol, 1.0)) / x0;
  double total = 0.0;
  const double first = std::ceil((lo - half) * x0 / kPi - 0.5);
  if (hi * x0 / kPi - std::max(first, 0.0) > kMaxResonances) {
    throw ValidationError("well has more than " + std::to_string(static_cast<long long>(kMaxResonances)) +
                          " resonant members; reduce V0 or x0");
  }
  for (double j = std::max(first, 0.0);; j += 1.0) {
    const double root = (j + 0.5) * kPi / x0;
    if (root - half > hi) break;
    const double a = std::max(root - half, lo);
    const double b = std::min(root + half, hi);
    if (b > a) total += std::abs(map(b) - map(a));
  }
  return total;
}

}  // namespace

WellConfig::WellConfig(double V0_, double x0_, ParticleModel particle_)
    : V0(V0_), x0(x0_), particle(particle_) {
  if (!std::isfinite(V0) || !(V0 > 0.0)) throw ValidationError("well depth V0 must be positive");
  if (!std::isfinite(x0) || !(x0 > 0.0)) throw ValidationError("well half-width x0 must be positive");
  if (!(particle.total_energy() < V0)) {
    throw ValidationError("square-well ensemble needs E_T < V0 (bound regime)");
  }
}

double WellConfig::k_inner_max() const {
  return std::sqrt(particle.mass() * particle.total_energy()) / particle.hbar();
}

double WellConfig::k_outer_max() const {
  return std::sqrt(particle.mass() * (V0 - particle.total_energy())) / particle.hbar();
}

double WellConfig::k_total() const { return std::sqrt(particle.mass() * V0) / particle.hbar(); }

double member_amplitude_well(const WellConfig& cfg, double k1, double k2) {
  if (!(k2 >= 0.0)) throw ValidationError("k2 must be non-negative");
  const double m = cfg.particle.mass();
  // |cos| keeps χ0 >= 0; the sign only flips the member globally.
  return std::sqrt(m * k2 / (1.0 + k2 * cfg.x0)) * std::exp(k2 * cfg.x0) * std::abs(std::cos(k1 * cfg.x0));
}

WellMember pair_member(const WellConfig& cfg, double k1) {
  const double k_max = cfg.k_inner_max();
  if (!std::isfinite(k1) || k1 < 0.0 || k1 > k_max * (1.0 + 1e-12)) {
    throw ValidationError("k1 = " + std::to_string(k1) + " outside the inner range [0, " +
                          std::to_string(k_max) + "]");
  }
  if (std::abs(std::cos(k1 * cfg.x0)) < kResonanceTolerance) {
    throw ResonantMemberError("resonant member: cos(k1 x0) = 0 at k1 = " + std::to_string(k1));
  }
  const double k2 = paired(cfg.k_total(), k1);
  return {k1, k2, member_amplitude_well(cfg, k1, k2)};
}

namespace {

double inner_branch(const WellMember& member, const WellConfig& cfg, double ax) {
  return member.chi0 * std::exp(-member.k2 * cfg.x0) *
         (std::cos(member.k1 * ax) / std::cos(member.k1 * cfg.x0));
}

double outer_branch(const WellMember& member, double ax) {
  return member.chi0 * std::exp(-member.k2 * ax);
}

}  // namespace

double member_wavefunction(const WellMember& member, const WellConfig& cfg, double x) {
  const double ax = std::abs(x);
  return ax >= cfg.x0 ? outer_branch(member, ax) : inner_branch(member, cfg, ax);
}

EdgeValues member_edge_values(const WellMember& member, const WellConfig& cfg) {
  return {inner_branch(member, cfg, cfg.x0), outer_branch(member, cfg.x0)};
}

NormalizationAudit normalization_audit(const WellConfig& cfg, const WellMember& member) {
  if (!(member.k2 > 0.0)) throw ValidationError("audit needs k2 > 0 for a normalizable tail");
  const auto sq = [&](double x) {
    const double v = member_wavefunction(member, cfg, x);
    return v * v;
  };
  const double inner = integrate_function(sq, -cfg.x0, cfg.x0, 4001);
  const double tail_end = cfg.x0 + 40.0 / member.k2;
  const double outer = 2.0 * integrate_function(sq, cfg.x0, tail_end, 8001);
  const double integral = inner + outer;
  const double mass = cfg.particle.mass();
  return {integral, mass, (integral - mass) / mass};
}

WellDensity well_ensemble_density(const WellConfig& cfg, const Grid1D& grid,
                                  const WellDensityOptions& opts, Exec exec) {
  const double x0 = cfg.x0;
  const double kt = cfg.k_total();
  const double tol = opts.resonance_tolerance;

  WellDensity out{RealField(grid)};

  // Inner integrand without the cos²(k1 x) factor, tabulated on k1.
  const Grid1D k1_grid = Grid1D::odd(0.0, cfg.k_inner_max(), opts.n_k);
  std::vector<double> inner_weight(k1_grid.size(), 0.0);
  for (std::size_t j = 0; j < k1_grid.size(); ++j) {
    const double k1 = k1_grid.node(j);
    const double c = std::cos(k1 * x0);
    if (std::abs(c) < tol) {
      ++out.excluded_nodes;
      continue;
    }
    const double k2 = paired(kt, k1);
    const double chi0 = member_amplitude_well(cfg, k1, k2);
    const double decay =
        std::exp(-2.0 * (opts.inner == InnerDecay::as_printed ? k1 : k2) * x0);
    inner_weight[j] = chi0 * chi0 * decay / (c * c);
  }

  // Outer integrand without the e^{−2 k2 |x|} factor, tabulated on k2.
  const Grid1D k2_grid = Grid1D::odd(0.0, cfg.k_outer_max(), opts.n_k);
  std::vector<double> outer_weight(k2_grid.size(), 0.0);
  for (std::size_t j = 0; j < k2_grid.size(); ++j) {
    const double k2 = k2_grid.node(j);
    const double k1 = paired(kt, k2);
    if (std::abs(std::cos(k1 * x0)) < tol) {
      ++out.excluded_nodes;
      continue;
    }
    const double chi0 = member_amplitude_well(cfg, k1, k2);
    outer_weight[j] = chi0 * chi0;
  }

  out.excluded_inner = excluded_measure(0.0, cfg.k_inner_max(), x0, tol, [](double k) { return k; });
  out.excluded_outer = excluded_measure(paired(kt, cfg.k_outer_max()), kt, x0, tol,
                                        [kt](double k1) { return paired(kt, k1); });

  for_each_index(grid.size(), exec, [&](std::size_t i) {
    const double ax = std::abs(grid.node(i));
    std::vector<double> integrand;
    double h = 0.0;
    if (ax <= x0) {
      integrand.resize(k1_grid.size());
      for (std::size_t j = 0; j < k1_grid.size(); ++j) {
        const double c = std::cos(k1_grid.node(j) * ax);
        integrand[j] = inner_weight[j] * c * c;
      }
      h = k1_grid.spacing();
    } else {
      integrand.resize(k2_grid.size());
      for (std::size_t j = 0; j < k2_grid.size(); ++j) {
        integrand[j] = outer_weight[j] * std::exp(-2.0 * k2_grid.node(j) * ax);
      }
      h = k2_grid.spacing();
    }
    out.rho[i] = 2.0 * integrate_uniform(std::span<const double>(integrand), h);
  });

  out.raw_integral = integrate_1d(out.rho);
  if (!(out.raw_integral > 0.0) || !std::isfinite(out.raw_integral)) {
    throw NumericalError("well ensemble density has no positive integral on this grid");
  }
  for (double& v : out.rho.values) v /= out.raw_integral;
  return out;
}

std::vector<double> bound_state_members(const WellConfig& cfg, std::size_t scan_nodes) {
  const double kt = cfg.k_total();
  const double x0 = cfg.x0;
  // k1 sin(k1 x0) − k2 cos(k1 x0) vanishes exactly on bound states and has no poles.
  const auto g = [&](double k1) { return k1 * std::sin(k1 * x0) - paired(kt, k1) * std::cos(k1 * x0); };
  std::vector<double> roots;
  const Grid1D scan(0.0, cfg.k_inner_max(), std::max<std::size_t>(scan_nodes, 2));
  double a = scan.node(0);
  double ga = g(a);
  for (std::size_t i = 1; i < scan.size(); ++i) {
    const double b = scan.node(i);
    const double gb = g(b);
    if (gb == 0.0) {
      roots.push_back(b);
    } else if ((ga < 0.0) != (gb < 0.0) && ga != 0.0) {
      double lo = a, hi = b, glo = ga;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    ga = gb;
  }
  return roots;
}

}  // namespace qens
