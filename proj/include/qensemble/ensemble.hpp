#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qensemble/numerics.hpp"
#include "qensemble/parallel.hpp"
#include "qensemble/units.hpp"

namespace qens {

/// Single-particle constants. The total energy E_T = ħω = m u² splits
/// evenly into a kinetic part E_K and an intrinsic field part E_F.
class ParticleModel {
 public:
  ParticleModel(double mass, double hbar, double total_energy,
                UnitSystem units = UnitSystem::natural);

  /// ħ = m = 1.
  static ParticleModel natural(double total_energy);
  /// Electron in SI units.
  static ParticleModel electron_si(double total_energy_joule);

  double mass() const { return mass_; }
  double hbar() const { return hbar_; }
  double total_energy() const { return total_energy_; }
  double omega() const { return total_energy_ / hbar_; }
  double velocity() const;
  double kinetic_energy() const { return 0.5 * total_energy_; }
  double field_energy() const { return 0.5 * total_energy_; }
  UnitSystem units() const { return units_; }

 private:
  double mass_;
  double hbar_;
  double total_energy_;
  UnitSystem units_;
};

enum class Regime { oscillatory, decaying };

std::string_view to_string(Regime regime);

struct KRange {
  double lo = 0.0;
  double hi = 0.0;
  Regime regime = Regime::oscillatory;

  double width() const { return hi - lo; }
  bool contains(const KRange& other) const { return lo <= other.lo && other.hi <= hi; }
  KInterval interval() const { return {lo, hi}; }
};

/// External potential V(r). Piecewise-constant profiles are first class.
struct PotentialSpec {
  std::function<double(double)> V;
  std::string description;

  double operator()(double r) const { return V(r); }

  static PotentialSpec constant(double value);
  /// values[i] applies on [breaks[i-1], breaks[i]); values.size() == breaks.size() + 1.
  static PotentialSpec piecewise(std::vector<double> breaks, std::vector<double> values);
  /// 0 inside |x| <= x0, V0 outside.
  static PotentialSpec square_well(double V0, double x0);
};

/// Which prefactor relates k² to an energy: the one printed next to each
/// formula (m/ħ² for ensemble ranges, 2m/ħ² for the retarding analyzer), or a
/// forced choice for both.
enum class KineticConvention { as_printed, mass, twice_mass };

KineticConvention parse_kinetic_convention(std::string_view text);
std::string_view to_string(KineticConvention convention);

/// Allowed wavevector magnitudes where the potential equals V:
/// E_T > V gives [0, √(m(E_T−V))/ħ] oscillatory, E_T < V gives
/// [0, √(m(V−E_T))/ħ] decaying, and E_T == V the empty oscillatory range.
KRange allowed_k_range(const ParticleModel& p, double V,
                       KineticConvention convention = KineticConvention::as_printed);

/// Flat member amplitude χ₀(k) = √m on its range, zero elsewhere.
struct EnsembleAmplitude {
  KRange range;
  double mass = 1.0;

  double chi0() const;
  cplx operator()(double k) const;
};

EnsembleAmplitude member_amplitude(const ParticleModel& p);

struct EnsembleOptions {
  QuadratureOptions quadrature{};
  KineticConvention convention = KineticConvention::as_printed;
};

/// ψ(r) of the free ensemble: the flat amplitude superposed over the ball
/// |k| <= √(m E_T)/ħ, isotropic 3-D.
ComplexField free_wavefunction(const ParticleModel& p, const Grid1D& grid,
                               const EnsembleOptions& opts = {}, Exec exec = Exec::parallel);

/// ψ(r) in an external potential. Each node gets its own allowed range;
/// oscillatory nodes use the sinc kernel, decaying nodes the printed e^{−k|r|}
/// kernel (no angular integration).
ComplexField potential_wavefunction(const ParticleModel& p, const PotentialSpec& V,
                                    const Grid1D& grid, const EnsembleOptions& opts = {},
                                    Exec exec = Exec::parallel);

/// Flat-amplitude ψ(r) restricted to a k-shell (used for filtered ensembles).
ComplexField shell_wavefunction(const ParticleModel& p, const KRange& shell, const Grid1D& grid,
                                const QuadratureOptions& quadrature = {},
                                Exec exec = Exec::parallel);

/// ∫ d³r |ψ|² evaluated as the ball quadrature of |χ₀|² = m over |k| <= k.
double parseval_norm(const ParticleModel& p, double k, std::size_t n_k = 1025);

struct FilterResult {
  KRange before;
  KRange after;
  bool fully_blocked = false;
};

/// Lower edge of the surviving shell. `energy_threshold` keeps members whose
/// kinetic energy ħ²k²/2m is at least E_rfa (k₁² = 2m E_rfa/ħ²);
/// `as_printed` uses k₁² = 2m(E_k − E_rfa)/ħ², which removes the whole
/// ensemble at E_rfa = 0.
enum class ThresholdForm { energy_threshold, as_printed };

/// Retarding-field analyzer at threshold E_rfa acting on the free ensemble
/// with kinetic bound E_k = p.kinetic_energy(). E_rfa above E_k blocks every
/// member; negative thresholds are rejected.
FilterResult apply_retarding_filter(const ParticleModel& p, double E_rfa,
                                    KineticConvention convention = KineticConvention::as_printed,
                                    ThresholdForm form = ThresholdForm::energy_threshold);

/// Share of the integrated density ∫|χ₀|² d³k that survives the filter.
double surviving_fraction(const FilterResult& filter, const EnsembleAmplitude& amplitude,
                          std::size_t n_k = 1025);

/// Pointwise |ψ|².
RealField ensemble_density(const ComplexField& psi);

/// A 1-D spectrum supported on [k_lo, k_hi].
struct Spectrum1D {
  double k_lo = 0.0;
  double k_hi = 0.0;
  Amplitude amplitude;
};

struct UncertaintyOptions {
  /// Half-width of the position window; 0 picks one from the spectrum.
  double x_half_width = 0.0;
  std::size_t n_x = 0;
  std::size_t n_k = 0;
};

struct UncertaintyReport {
  double delta_x = 0.0;
  double delta_k = 0.0;
  /// ΔX·ΔP in units of ħ.
  double product = 0.0;
  double x_half_width = 0.0;
};

/// Synthesizes ψ(x) from the spectrum and takes ΔX from |ψ(x)|² and
/// ΔP = ħΔk from |ψ̂(k)|².
UncertaintyReport uncertainty_analysis(const Spectrum1D& spectrum,
                                       const UncertaintyOptions& opts = {},
                                       Exec exec = Exec::parallel);
double uncertainty_product(const Spectrum1D& spectrum, const UncertaintyOptions& opts = {});

}  // namespace qens
