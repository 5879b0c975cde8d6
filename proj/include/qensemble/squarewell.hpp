#pragma once

#include <vector>

#include "qensemble/ensemble.hpp"
#include "qensemble/error.hpp"
#include "qensemble/numerics.hpp"
#include "qensemble/parallel.hpp"

namespace qens {

/// Symmetric 1-D well: V = 0 for |x| <= x0, V0 outside; bound regime E_T < V0.
struct WellConfig {
  WellConfig(double V0, double x0, ParticleModel particle);

  double V0;
  double x0;
  ParticleModel particle;

  /// Upper edge of the inner range, √(m E_T)/ħ.
  double k_inner_max() const;
  /// Upper edge of the outer decay range, √(m (V0 − E_T))/ħ.
  double k_outer_max() const;
  /// √(m V0)/ħ; every member satisfies k1² + k2² = this².
  double k_total() const;
};

/// Thrown for members sitting on a pole of the inner solution, cos(k1 x0) = 0.
class ResonantMemberError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct WellMember {
  double k1 = 0.0;
  double k2 = 0.0;
  double chi0 = 0.0;
};

inline constexpr double kResonanceTolerance = 1e-6;

/// Pairs k1 with k2 = √(mV0/ħ² − k1²) and fills in the member amplitude.
WellMember pair_member(const WellConfig& cfg, double k1);

/// Piecewise member solution: χ0 e^{k2 x} left of the well, χ0 e^{−k2 x0}
/// cos(k1 x)/cos(k1 x0) inside, χ0 e^{−k2 x} right of it. Values match at
/// ±x0 by construction; derivatives generally do not.
double member_wavefunction(const WellMember& member, const WellConfig& cfg, double x);

/// Inner and outer branch formulas both evaluated at x = x0.
struct EdgeValues {
  double inner = 0.0;
  double outer = 0.0;
};

EdgeValues member_edge_values(const WellMember& member, const WellConfig& cfg);

/// χ0(k1, k2) = √(m k2 / (1 + k2 x0)) e^{k2 x0} |cos(k1 x0)|.
double member_amplitude_well(const WellConfig& cfg, double k1, double k2);

/// ∫|χ(x)|² dx by quadrature next to the member mass it is meant to carry.
struct NormalizationAudit {
  double integral = 0.0;
  double mass = 0.0;
  double relative_discrepancy = 0.0;
};

NormalizationAudit normalization_audit(const WellConfig& cfg, const WellMember& member);

/// Inner-region decay factor of the ensemble integrand: the printed
/// e^{−2 k1 x0}, or e^{−2 k2 x0} obtained by squaring the member solution.
enum class InnerDecay { as_printed, member_consistent };

struct WellDensityOptions {
  std::size_t n_k = 2001;
  InnerDecay inner = InnerDecay::as_printed;
  double resonance_tolerance = kResonanceTolerance;
};

struct WellDensity {
  RealField rho;
  /// ∫ρ dx before renormalization.
  double raw_integral = 0.0;
  /// k1-measure removed around cos(k1 x0) = 0 in the inner integral, and
  /// k2-measure removed in the outer integral (paired through k1).
  double excluded_inner = 0.0;
  double excluded_outer = 0.0;
  std::size_t excluded_nodes = 0;
};

/// Ensemble density: inner nodes integrate members over k1 in [0, k_inner_max],
/// outer nodes integrate over k2 in [0, k_outer_max] with k1 paired. The
/// result is renormalized to unit integral over the grid.
WellDensity well_ensemble_density(const WellConfig& cfg, const Grid1D& grid,
                                  const WellDensityOptions& opts = {},
                                  Exec exec = Exec::parallel);

/// Members in [0, k_inner_max] that also satisfy the even bound-state
/// derivative condition k2 = k1 tan(k1 x0).
std::vector<double> bound_state_members(const WellConfig& cfg, std::size_t scan_nodes = 4096);

}  // namespace qens
