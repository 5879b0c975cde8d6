#include "qensemble/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "qensemble/error.hpp"

namespace qens {

namespace {

constexpr double kPi = std::numbers::pi;

double coefficient(const ParticleModel& p, KineticConvention convention, double printed_factor) {
  switch (convention) {
    case KineticConvention::mass: return p.mass();
    case KineticConvention::twice_mass: return 2.0 * p.mass();
    case KineticConvention::as_printed: break;
  }
  return printed_factor * p.mass();
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ValidationError(std::string(what) + " must be finite");
}

}  // namespace

ParticleModel::ParticleModel(double mass, double hbar, double total_energy, UnitSystem units)
    : mass_(mass), hbar_(hbar), total_energy_(total_energy), units_(units) {
  require_finite(mass, "mass");
  require_finite(hbar, "hbar");
  require_finite(total_energy, "total energy");
  if (!(mass > 0.0)) throw ValidationError("mass must be positive");
  if (!(hbar > 0.0)) throw ValidationError("hbar must be positive");
  if (total_energy < 0.0) throw ValidationError("total energy must be non-negative");
}

ParticleModel ParticleModel::natural(double total_energy) {
  return ParticleModel(1.0, 1.0, total_energy, UnitSystem::natural);
}

ParticleModel ParticleModel::electron_si(double total_energy_joule) {
  return ParticleModel(si::electron_mass, si::hbar, total_energy_joule, UnitSystem::si);
}

double ParticleModel::velocity() const { return std::sqrt(total_energy_ / mass_); }

std::string_view to_string(Regime regime) {
  return regime == Regime::oscillatory ? "oscillatory" : "decaying";
}

PotentialSpec PotentialSpec::constant(double value) {
  require_finite(value, "potential");
  std::ostringstream name;
  name << "constant V=" << value;
  return {[value](double) { return value; }, name.str()};
}

PotentialSpec PotentialSpec::piecewise(std::vector<double> breaks, std::vector<double> values) {
  if (values.size() != breaks.size() + 1) {
    throw ValidationError("piecewise potential needs one more value than breakpoints");
  }
  if (!std::is_sorted(breaks.begin(), breaks.end())) {
    throw ValidationError("piecewise breakpoints must be ascending");
  }
  for (double v : values) require_finite(v, "potential");
  std::ostringstream name;
  name << "piecewise with " << values.size() << " segments";
  return {[breaks = std::move(breaks), values = std::move(values)](double r) {
            const auto it = std::upper_bound(breaks.begin(), breaks.end(), r);
            return values[static_cast<std::size_t>(it - breaks.begin())];
          },
          name.str()};
}

PotentialSpec PotentialSpec::square_well(double V0, double x0) {
  require_finite(V0, "well depth");
  if (!(x0 > 0.0)) throw ValidationError("well half-width must be positive");
  std::ostringstream name;
  name << "square well V0=" << V0 << " x0=" << x0;
  return {[V0, x0](double x) { return std::abs(x) <= x0 ? 0.0 : V0; }, name.str()};
}

KineticConvention parse_kinetic_convention(std::string_view text) {
  if (text == "as_printed") return KineticConvention::as_printed;
  if (text == "m") return KineticConvention::mass;
  if (text == "2m") return KineticConvention::twice_mass;
  throw ValidationError("unknown kinetic convention '" + std::string(text) +
                        "' (as_printed|m|2m)");
}

std::string_view to_string(KineticConvention convention) {
  switch (convention) {
    case KineticConvention::mass: return "m";
    case KineticConvention::twice_mass: return "2m";
    case KineticConvention::as_printed: break;
  }
  return "as_printed";
}

KRange allowed_k_range(const ParticleModel& p, double V, KineticConvention convention) {
  require_finite(V, "potential");
  const double c = coefficient(p, convention, 1.0);
  const double excess = p.total_energy() - V;
  if (excess > 0.0) return {0.0, std::sqrt(c * excess) / p.hbar(), Regime::oscillatory};
  if (excess < 0.0) return {0.0, std::sqrt(-c * excess) / p.hbar(), Regime::decaying};
  return {0.0, 0.0, Regime::oscillatory};
}

double EnsembleAmplitude::chi0() const { return std::sqrt(mass); }

cplx EnsembleAmplitude::operator()(double k) const {
  return (k >= range.lo && k <= range.hi) ? cplx(chi0(), 0.0) : cplx{};
}

EnsembleAmplitude member_amplitude(const ParticleModel& p) {
  return {allowed_k_range(p, 0.0), p.mass()};
}

namespace {

cplx ensemble_value(const ParticleModel& p, const KRange& range, double r,
                    const QuadratureOptions& quadrature) {
  if (range.width() == 0.0) return {};
  const double chi0 = std::sqrt(p.mass());
  if (range.regime == Regime::oscillatory) {
    return superpose([chi0](double) { return cplx(chi0, 0.0); }, range.interval(), r, 3,
                     quadrature);
  }
  const double ar = std::abs(r);
  const std::size_t n = oscillatory_nodes(range.width(), ar, quadrature);
  const double radial = integrate_function(
      [&](double k) { return chi0 * k * k * std::exp(-k * ar); }, range.lo, range.hi, n);
  return {4.0 * kPi * radial / std::pow(2.0 * kPi, 1.5), 0.0};
}

}  // namespace

ComplexField potential_wavefunction(const ParticleModel& p, const PotentialSpec& V,
                                    const Grid1D& grid, const EnsembleOptions& opts, Exec exec) {
  ComplexField psi(grid);
  for_each_index(grid.size(), exec, [&](std::size_t i) {
    const double r = grid.node(i);
    psi[i] = ensemble_value(p, allowed_k_range(p, V(r), opts.convention), r, opts.quadrature);
  });
  return psi;
}

ComplexField free_wavefunction(const ParticleModel& p, const Grid1D& grid,
                               const EnsembleOptions& opts, Exec exec) {
  return potential_wavefunction(p, PotentialSpec::constant(0.0), grid, opts, exec);
}

ComplexField shell_wavefunction(const ParticleModel& p, const KRange& shell, const Grid1D& grid,
                                const QuadratureOptions& quadrature, Exec exec) {
  if (shell.lo < 0.0 || shell.hi < shell.lo) throw ValidationError("invalid k-shell");
  ComplexField psi(grid);
  for_each_index(grid.size(), exec, [&](std::size_t i) {
    psi[i] = ensemble_value(p, shell, grid.node(i), quadrature);
  });
  return psi;
}

double parseval_norm(const ParticleModel& p, double k, std::size_t n_k) {
  if (!(k >= 0.0)) throw ValidationError("parseval_norm requires k >= 0");
  const double m = p.mass();
  return integrate_ball([m](double) { return cplx(m, 0.0); }, KBall(k, n_k)).real();
}

FilterResult apply_retarding_filter(const ParticleModel& p, double E_rfa,
                                    KineticConvention convention, ThresholdForm form) {
  require_finite(E_rfa, "retarding threshold");
  if (E_rfa < 0.0) throw ValidationError("retarding threshold must be non-negative");
  const double c = coefficient(p, convention, 2.0);
  const double E_k = p.kinetic_energy();
  const double k0 = std::sqrt(c * E_k) / p.hbar();
  FilterResult out;
  out.before = {0.0, k0, Regime::oscillatory};
  if (E_rfa > E_k) {
    out.after = {k0, k0, Regime::oscillatory};
    out.fully_blocked = true;
    return out;
  }
  const double edge_energy = form == ThresholdForm::energy_threshold ? E_rfa : E_k - E_rfa;
  const double k1 = std::min(std::sqrt(c * edge_energy) / p.hbar(), k0);
  out.after = {k1, k0, Regime::oscillatory};
  out.fully_blocked = k1 == k0;
  return out;
}

double surviving_fraction(const FilterResult& filter, const EnsembleAmplitude& amplitude,
                          std::size_t n_k) {
  const auto weight = [&](double k) { return cplx(std::norm(amplitude(k)), 0.0); };
  const double total = integrate_shell(weight, filter.before.lo, filter.before.hi, n_k).real();
  if (!(total > 0.0)) throw ValidationError("unfiltered ensemble is empty");
  if (filter.after.width() == 0.0) return 0.0;
  return integrate_shell(weight, filter.after.lo, filter.after.hi, n_k).real() / total;
}

RealField ensemble_density(const ComplexField& psi) {
  RealField rho(psi.grid);
  for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi[i]);
  return rho;
}

UncertaintyReport uncertainty_analysis(const Spectrum1D& spectrum, const UncertaintyOptions& opts,
                                       Exec exec) {
  if (!std::isfinite(spectrum.k_lo) || !std::isfinite(spectrum.k_hi) ||
      !(spectrum.k_lo < spectrum.k_hi)) {
    throw ValidationError("spectrum needs a finite interval k_lo < k_hi");
  }
  if (!spectrum.amplitude) throw ValidationError("spectrum has no amplitude");
  const double span = spectrum.k_hi - spectrum.k_lo;

  // Momentum side, on a fine fixed grid.
  const Grid1D kfine = Grid1D::odd(spectrum.k_lo, spectrum.k_hi, 4097);
  ComplexField amp(kfine);
  RealField weight(kfine);
  for (std::size_t i = 0; i < kfine.size(); ++i) {
    amp[i] = spectrum.amplitude(kfine.node(i));
    weight[i] = std::norm(amp[i]);
  }
  Moments kmom;
  try {
    kmom = density_moments(weight);
  } catch (const std::exception&) {
    throw ValidationError("spectrum is not normalizable");
  }
  if (!std::isfinite(kmom.norm) || !std::isfinite(kmom.stddev)) {
    throw ValidationError("spectrum is not normalizable");
  }

  // Size the position window from the k-space estimate of <x> and <x²>,
  // where x acts as i d/dk.
  double half_width = opts.x_half_width;
  if (half_width <= 0.0) {
    RealField re(kfine), im(kfine);
    for (std::size_t i = 0; i < kfine.size(); ++i) {
      re[i] = amp[i].real();
      im[i] = amp[i].imag();
    }
    const Derivative dre = derivative(re, 4);
    const Derivative dim = derivative(im, 4);
    RealField first(kfine), second(kfine);
    for (std::size_t i = 0; i < kfine.size(); ++i) {
      const cplx d(dre.values[i], dim.values[i]);
      first[i] = (std::conj(amp[i]) * cplx(0.0, 1.0) * d).real();
      second[i] = std::norm(d);
    }
    const double mean = integrate_1d(first) / kmom.norm;
    const double spread = std::sqrt(std::max(integrate_1d(second) / kmom.norm - mean * mean, 0.0));
    half_width = std::max(100.0 / span, std::abs(mean) + 12.0 * spread);
  }

  const std::size_t n_k = opts.n_k != 0 ? opts.n_k
                                        : std::max<std::size_t>(
                                              257, static_cast<std::size_t>(4.0 * span * half_width) + 1);
  const std::size_t n_x = opts.n_x != 0 ? opts.n_x
                                        : std::max<std::size_t>(
                                              257, static_cast<std::size_t>(8.0 * half_width * span / kPi) + 1);
  const Grid1D kgrid = Grid1D::odd(spectrum.k_lo, spectrum.k_hi, n_k);
  std::vector<cplx> samples(kgrid.size());
  for (std::size_t j = 0; j < kgrid.size(); ++j) samples[j] = spectrum.amplitude(kgrid.node(j));

  const Grid1D xgrid = Grid1D::odd(-half_width, half_width, n_x);
  RealField density(xgrid);
  for_each_index(xgrid.size(), exec, [&](std::size_t i) {
    const double x = xgrid.node(i);
    std::vector<cplx> integrand(kgrid.size());
    for (std::size_t j = 0; j < kgrid.size(); ++j) {
      integrand[j] = samples[j] * std::polar(1.0, kgrid.node(j) * x);
    }
    const cplx psi =
        integrate_uniform(std::span<const cplx>(integrand), kgrid.spacing()) / std::sqrt(2.0 * kPi);
    density[i] = std::norm(psi);
  });
  const Moments xmom = density_moments(density);
  return {xmom.stddev, kmom.stddev, xmom.stddev * kmom.stddev, half_width};
}

double uncertainty_product(const Spectrum1D& spectrum, const UncertaintyOptions& opts) {
  return uncertainty_analysis(spectrum, opts).product;
}

}  // namespace qens
