#include "qensemble/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qensemble/error.hpp"

namespace qens {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate(const InitialPacket& packet) {
  std::visit(overloaded{
                 [](const GaussianPacket& g) {
                   if (!std::isfinite(g.b) || !(g.b > 0.0)) {
                     throw ValidationError("Gaussian width b must be positive");
                   }
                   if (!std::isfinite(g.k0)) throw ValidationError("carrier k0 must be finite");
                 },
                 [](const SingleModePacket& s) {
                   if (!std::isfinite(s.k0)) throw ValidationError("mode k0 must be finite");
                 },
             },
             packet);
}

DispersionLaw DispersionLaw::of(const ParticleModel& p) { return {p.hbar(), p.mass(), 0.5}; }

double GaussianSpectrum::operator()(double k) const {
  const double d = (k - k0) * b;
  return std::exp(-0.5 * d * d);
}

PacketSpectrum packet_spectrum(const InitialPacket& packet) {
  validate(packet);
  return std::visit(overloaded{
                        [](const GaussianPacket& g) -> PacketSpectrum {
                          return GaussianSpectrum{g.b, g.k0};
                        },
                        [](const SingleModePacket& s) -> PacketSpectrum {
                          return SingleMode{s.k0, cplx(std::sqrt(2.0 * kPi), 0.0)};
                        },
                    },
                    packet);
}

Propagation propagate(const InitialPacket& packet, const DispersionLaw& law, double t,
                      const Grid1D& grid, const PropagationOptions& opts, Exec exec) {
  if (!std::isfinite(t) || t < 0.0) throw ValidationError("propagation time must be >= 0");
  const PacketSpectrum spectrum = packet_spectrum(packet);
  Propagation out{ComplexField(grid)};

  if (const auto* mode = std::get_if<SingleMode>(&spectrum)) {
    const cplx evolution = std::polar(1.0, -law.omega(mode->k0) * t);
    for_each_index(grid.size(), exec, [&](std::size_t i) {
      out.psi[i] = superpose(*mode, grid.node(i)) * evolution;
    });
    return out;
  }

  const auto& gauss = std::get<GaussianSpectrum>(spectrum);
  const KInterval support = gauss.support();
  out.truncation_bound = std::erfc(GaussianSpectrum::kTruncation / std::sqrt(2.0)) / gauss.b;

  const double v_lo = law.group_velocity(support.lo);
  const double v_hi = law.group_velocity(support.hi);
  for_each_index(grid.size(), exec, [&](std::size_t i) {
    const double x = grid.node(i);
    // Fastest phase variation of the integrand across the support.
    const double rate = std::max(std::abs(x - v_lo * t), std::abs(x - v_hi * t)) + gauss.b;
    QuadratureOptions q{opts.phase_step, opts.min_nodes};
    const std::size_t n = oscillatory_nodes(support.width(), rate, q);
    const cplx sum = integrate_function(
        [&](double k) { return gauss(k) * std::polar(1.0, k * x - law.omega(k) * t); },
        support.lo, support.hi, n);
    out.psi[i] = sum / std::sqrt(2.0 * kPi);
  });
  return out;
}

double closed_form_density(const GaussianPacket& packet, const ParticleModel& p, double x,
                           double t, SpreadingForm form) {
  validate(packet);
  const double b = packet.b;
  const double tau = p.hbar() * t / (p.mass() * b * b);
  const double growth = 1.0 + tau * tau;
  const double shift = x - p.hbar() * packet.k0 * t / p.mass();
  const double s2 = shift * shift / (b * b);
  if (form == SpreadingForm::as_printed) {
    return std::exp(-s2 / (growth * growth)) / growth;
  }
  return std::exp(-s2 / growth) / std::sqrt(growth);
}

RealField intrinsic_potential(const RealField& amplitude, const ParticleModel& p, double k) {
  const double u = p.hbar() * k / p.mass();
  RealField phi(amplitude.grid);
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    if (!std::isfinite(amplitude[i])) throw ValidationError("amplitude must be finite");
    phi[i] = u * u * amplitude[i] * amplitude[i];
  }
  return phi;
}

ForceField intrinsic_force(const RealField& amplitude, const ParticleModel& p, double k,
                           int stencil_order) {
  const double u = p.hbar() * k / p.mass();
  const Derivative grad = derivative(amplitude, stencil_order);
  ForceField out{RealField(amplitude.grid), grad.boundary_nodes};
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    // ψ real: ψ*∇ψ + ψ∇ψ* = 2ψ∇ψ.
    out.force[i] = -u * u * 2.0 * amplitude[i] * grad.values[i];
  }
  return out;
}

EquilibriumReport equilibrium_check(const ComplexField& amplitude, int stencil_order) {
  RealField re(amplitude.grid), im(amplitude.grid);
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    if (!is_finite(amplitude[i])) throw ValidationError("amplitude must be finite");
    re[i] = amplitude[i].real();
    im[i] = amplitude[i].imag();
  }
  const Derivative dre = derivative(re, stencil_order);
  const Derivative dim = derivative(im, stencil_order);
  // Boundary nodes only have one-sided stencils; they are left out unless
  // the grid is too short to have an interior.
  const bool any_interior = 2 * dre.boundary_nodes < amplitude.size();
  double residual = 0.0;
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    if (any_interior && !dre.is_interior(i)) continue;
    const double term = 2.0 * (re[i] * dre.values[i] + im[i] * dim.values[i]);
    residual = std::max(residual, std::abs(term));
  }
  return {residual, residual <= kEquilibriumThreshold};
}

EquilibriumReport equilibrium_check(const RealField& amplitude, int stencil_order) {
  std::vector<cplx> values(amplitude.values.begin(), amplitude.values.end());
  return equilibrium_check(ComplexField(amplitude.grid, std::move(values)), stencil_order);
}

QuantumPotential quantum_potential(const RealField& R, int stencil_order) {
  for (double v : R.values) {
    if (!std::isfinite(v)) throw ValidationError("R must be finite");
  }
  const Derivative lap = second_derivative(R, stencil_order);
  QuantumPotential out{RealField(R.grid), std::vector<bool>(R.size(), false)};
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (R[i] <= 1e-12) {
      out.masked[i] = true;
      ++out.masked_count;
      continue;
    }
    out.q[i] = lap.values[i] / R[i];
  }
  return out;
}

}  // namespace qens
