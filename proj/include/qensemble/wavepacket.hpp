#pragma once

#include <variant>
#include <vector>

#include "qensemble/ensemble.hpp"
#include "qensemble/numerics.hpp"
#include "qensemble/parallel.hpp"

namespace qens {

/// e^{−x²/2b² + i k0 x} at t = 0.
struct GaussianPacket {
  double b = 1.0;
  double k0 = 0.0;
};

/// e^{i k0 x}: a single retained mode.
struct SingleModePacket {
  double k0 = 0.0;
};

using InitialPacket = std::variant<GaussianPacket, SingleModePacket>;

void validate(const InitialPacket& packet);

/// ω(k) = coefficient · ħ k² / m. The physical coefficient is 1/2; anything
/// else is a deliberately broken law used for fault injection.
struct DispersionLaw {
  double hbar = 1.0;
  double mass = 1.0;
  double coefficient = 0.5;

  static DispersionLaw of(const ParticleModel& p);

  double omega(double k) const { return coefficient * hbar * k * k / mass; }
  double group_velocity(double k) const { return 2.0 * coefficient * hbar * k / mass; }
};

/// e^{−(k − k0)² b² / 2}, truncated to k0 ± 8/b.
struct GaussianSpectrum {
  double b = 1.0;
  double k0 = 0.0;

  static constexpr double kTruncation = 8.0;

  double operator()(double k) const;
  KInterval support() const { return {k0 - kTruncation / b, k0 + kTruncation / b}; }
};

using PacketSpectrum = std::variant<GaussianSpectrum, SingleMode>;

/// Gaussian packets get their analytic spectrum. A single mode becomes the
/// symbolic √(2π)·δ(k − k0), the symmetric-convention transform of e^{i k0 x}.
PacketSpectrum packet_spectrum(const InitialPacket& packet);

struct PropagationOptions {
  /// Largest phase advance of the integrand between adjacent k nodes.
  double phase_step = 0.1;
  std::size_t min_nodes = 513;
};

struct Propagation {
  ComplexField psi;
  /// Bound on |ψ| error from dropping the spectrum outside k0 ± 8/b.
  double truncation_bound = 0.0;
};

/// ψ(x, t) = (2π)^{-1/2} ∫ dk e^{i(kx − ω(k)t)} ψ̂(k). Single modes are
/// evaluated in closed form.
Propagation propagate(const InitialPacket& packet, const DispersionLaw& law, double t,
                      const Grid1D& grid, const PropagationOptions& opts = {},
                      Exec exec = Exec::parallel);

/// `as_printed`: (1+τ²)^{-1} exp[−(1+τ²)^{-2} (x − vt)² / b²]
/// `textbook`:   (1+τ²)^{-1/2} exp[−(1+τ²)^{-1} (x − vt)² / b²]
/// with τ = ħt/(m b²) and v = ħk0/m. Both equal e^{−x²/b²} at t = 0.
enum class SpreadingForm { as_printed, textbook };

double closed_form_density(const GaussianPacket& packet, const ParticleModel& p, double x,
                           double t, SpreadingForm form);

/// (ħ²k²/m²)·|amplitude|², pointwise.
RealField intrinsic_potential(const RealField& amplitude, const ParticleModel& p, double k);

/// −∇φ written as −(ħ²k²/m²)(ψ*∇ψ + ψ∇ψ*) with ∇ψ from central differences.
/// Nodes within `boundary_nodes` of an end use reduced or one-sided stencils.
struct ForceField {
  RealField force;
  std::size_t boundary_nodes = 0;
  bool is_interior(std::size_t i) const {
    return i >= boundary_nodes && i + boundary_nodes < force.size();
  }
};

ForceField intrinsic_force(const RealField& amplitude, const ParticleModel& p, double k,
                           int stencil_order = 6);

struct EquilibriumReport {
  double residual = 0.0;
  bool stable = false;
};

inline constexpr double kEquilibriumThreshold = 1e-8;

/// max |ψ*∇ψ + ψ∇ψ*| over interior nodes; stable when it is at most 1e-8.
EquilibriumReport equilibrium_check(const ComplexField& amplitude, int stencil_order = 6);
EquilibriumReport equilibrium_check(const RealField& amplitude, int stencil_order = 6);

/// Q = ∇²R / R. Nodes with R <= 1e-12 are masked (value 0, flag set).
struct QuantumPotential {
  RealField q;
  std::vector<bool> masked;
  std::size_t masked_count = 0;
};

QuantumPotential quantum_potential(const RealField& R, int stencil_order = 4);

}  // namespace qens
