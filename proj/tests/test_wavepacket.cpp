#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "oracles.hpp"
#include "qensemble/wavepacket.hpp"

using namespace qens;
using std::numbers::pi;

namespace {

const ParticleModel unit = ParticleModel::natural(1.0);

RealField gaussian_amplitude(const Grid1D& g, double b) {
  RealField a(g);
  for (std::size_t i = 0; i < g.size(); ++i) a[i] = std::exp(-0.5 * g.node(i) * g.node(i) / (b * b));
  return a;
}

}  // namespace

TEST_CASE("packet validation") {
  CHECK_THROWS_AS(validate(GaussianPacket{0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(validate(GaussianPacket{1.0, std::nan("")}), ValidationError);
  CHECK_THROWS_AS(validate(SingleModePacket{std::numeric_limits<double>::infinity()}), ValidationError);
  CHECK_NOTHROW(validate(GaussianPacket{0.3, -2.0}));
}

TEST_CASE("dispersion law") {
  const DispersionLaw law = DispersionLaw::of(ParticleModel(2.0, 0.5, 1.0));
  CHECK(law.omega(0.0) == 0.0);
  CHECK(law.omega(3.0) == law.omega(-3.0));
  CHECK(law.omega(3.0) == doctest::Approx(0.5 * 9.0 / (2.0 * 2.0)));
  CHECK(law.group_velocity(3.0) == doctest::Approx(0.5 * 3.0 / 2.0));
}

TEST_CASE("packet spectra") {
  const auto g = std::get<GaussianSpectrum>(packet_spectrum(GaussianPacket{1.0, 4.0}));
  CHECK(g(4.0) == 1.0);
  CHECK(g(5.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(g.support().lo == 4.0 - 8.0);
  const auto m = std::get<SingleMode>(packet_spectrum(SingleModePacket{2.5}));
  CHECK(m.k0 == 2.5);
  CHECK(m.weight == cplx(std::sqrt(2.0 * pi), 0.0));
}

TEST_CASE("Gaussian at t = 0 reproduces the initial density") {
  const double b = 1.5;
  const Grid1D grid(-6.0, 6.0, 241);
  const Propagation p = propagate(GaussianPacket{b, 2.0}, DispersionLaw::of(unit), 0.0, grid);
  CHECK(p.truncation_bound <= 1e-14);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.node(i);
    const double expected = std::exp(-x * x / (b * b)) / (b * b);
    CHECK(std::abs(std::norm(p.psi[i]) - expected) <= 1e-6 * expected);
  }
  CHECK_THROWS_AS(propagate(GaussianPacket{b, 2.0}, DispersionLaw::of(unit), -1.0, grid), ValidationError);
}

TEST_CASE("single mode never spreads") {
  const Grid1D grid(-50.0, 50.0, 1001);
  for (double t : {0.0, 0.3, 1.0, 5.0, 100.0}) {
    const Propagation p = propagate(SingleModePacket{5.0}, DispersionLaw::of(unit), t, grid);
    for (const cplx& v : p.psi.values) CHECK(std::abs(std::norm(v) - 1.0) <= 1e-15);
  }
}

TEST_CASE("Gaussian peak moves at the group velocity") {
  const Grid1D grid(-5.0, 20.0, 1001);
  for (double t : {0.5, 1.0, 2.0}) {
    const Propagation p = propagate(GaussianPacket{1.0, 5.0}, DispersionLaw::of(unit), t, grid);
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (std::norm(p.psi[i]) > std::norm(p.psi[best])) best = i;
    }
    CHECK(std::abs(grid.node(best) - 5.0 * t) <= grid.spacing());
  }
}

TEST_CASE("closed-form spreading densities") {
  const GaussianPacket g{1.3, 5.0};
  const ParticleModel p(1.7, 0.8, 1.0);
  for (double x : {-1.0, 0.0, 0.4, 2.0}) {
    const double initial = std::exp(-x * x / (g.b * g.b));
    CHECK(closed_form_density(g, p, x, 0.0, SpreadingForm::as_printed) == doctest::Approx(initial));
    CHECK(closed_form_density(g, p, x, 0.0, SpreadingForm::textbook) == doctest::Approx(initial));
  }
  const double t = 1.2;
  const double tau = p.hbar() * t / (p.mass() * g.b * g.b);
  const double centre = p.hbar() * g.k0 * t / p.mass();
  CHECK(closed_form_density(g, p, centre, t, SpreadingForm::as_printed) ==
        doctest::Approx(1.0 / (1.0 + tau * tau)).epsilon(1e-14));
  CHECK(closed_form_density(g, p, centre, t, SpreadingForm::textbook) ==
        doctest::Approx(1.0 / std::sqrt(1.0 + tau * tau)).epsilon(1e-14));
}

TEST_CASE("textbook form matches propagation; printed form does not") {
  const GaussianPacket g{1.0, 5.0};
  const double t = 1.0;
  const double w = std::sqrt(2.0);
  const Grid1D grid(5.0 - 4.0 * w, 5.0 + 4.0 * w, 201);
  const Propagation p = propagate(g, DispersionLaw::of(unit), t, grid);
  double textbook = 0.0, printed = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double num = std::norm(p.psi[i]);
    const double x = grid.node(i);
    const double a = closed_form_density(g, unit, x, t, SpreadingForm::textbook);
    const double b = closed_form_density(g, unit, x, t, SpreadingForm::as_printed);
    textbook = std::max(textbook, std::abs(num - a) / a);
    printed = std::max(printed, std::abs(num - b) / b);
  }
  CHECK(textbook <= 1e-4);
  CHECK(printed > 0.1);
}

TEST_CASE("norm, transport and width over time") {
  const Grid1D grid(-15.0, 30.0, 901);
  double norm0 = 0.0, width = 0.0;
  for (double t : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    const Propagation p = propagate(GaussianPacket{1.0, 5.0}, DispersionLaw::of(unit), t, grid);
    const Moments m = density_moments(ensemble_density(p.psi));
    if (t == 0.0) norm0 = m.norm;
    CHECK(std::abs(m.norm - norm0) <= 1e-6 * norm0);
    if (t > 0.0) CHECK(std::abs(m.mean / t - 5.0) <= 0.05);
    CHECK(m.stddev >= width);
    width = m.stddev;
  }
}

TEST_CASE("intrinsic potential") {
  const Grid1D grid(-4.0, 4.0, 81);
  for (double v : intrinsic_potential(RealField(grid), unit, 1.0).values) CHECK(v == 0.0);
  const RealField amp = gaussian_amplitude(grid, 1.0);
  const RealField phi = intrinsic_potential(amp, unit, 1.0);
  const RealField phi2 = intrinsic_potential(amp, unit, 2.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.node(i);
    CHECK(phi[i] == doctest::Approx(std::exp(-x * x)).epsilon(1e-15));
    CHECK(phi2[i] == doctest::Approx(4.0 * phi[i]).epsilon(1e-15));
  }
  RealField bad(grid);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(intrinsic_potential(bad, unit, 1.0), ValidationError);
}

TEST_CASE("intrinsic force of the Gaussian") {
  const Grid1D grid(-8.0, 8.0, 2001);  // node 1000 at 0, node 1125 at 1
  const ForceField f = intrinsic_force(gaussian_amplitude(grid, 1.0), unit, 1.0);
  CHECK(f.boundary_nodes == 3);
  CHECK(std::abs(f.force[1000]) <= 1e-14);
  CHECK(f.force[1125] == doctest::Approx(oracle::force_at_one).epsilon(1e-10));

  std::size_t peak = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (f.force[i] > f.force[peak]) peak = i;
  }
  CHECK(std::abs(grid.node(peak) - 1.0 / std::sqrt(2.0)) <= grid.spacing());
  CHECK(f.force[peak] == doctest::Approx(oracle::force_peak).epsilon(1e-4));

  // −∇φ by finite differences of the potential itself.
  const Derivative dphi = derivative(intrinsic_potential(gaussian_amplitude(grid, 1.0), unit, 1.0), 6);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (f.is_interior(i)) CHECK(std::abs(f.force[i] + dphi.values[i]) <= 1e-8);
  }
}

TEST_CASE("equilibrium condition") {
  const Grid1D grid(-5.0, 5.0, 501);
  const EquilibriumReport flat = equilibrium_check(RealField(grid, std::vector<double>(grid.size(), 2.5)));
  CHECK(flat.residual == 0.0);
  CHECK(flat.stable);
  const EquilibriumReport zero = equilibrium_check(RealField(grid));
  CHECK(zero.residual == 0.0);
  CHECK(zero.stable);
  const EquilibriumReport g = equilibrium_check(gaussian_amplitude(grid, 1.0));
  CHECK(g.residual > 0.1);
  CHECK_FALSE(g.stable);

  ComplexField wave(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) wave[i] = std::polar(1.0, 3.0 * grid.node(i));
  CHECK(equilibrium_check(wave).stable);
}

TEST_CASE("quantum potential") {
  const Grid1D grid(-3.0, 3.0, 601);  // node 300 at 0
  const QuantumPotential one = quantum_potential(RealField(grid, std::vector<double>(grid.size(), 1.0)));
  for (double v : one.q.values) CHECK(v == 0.0);
  CHECK(one.masked_count == 0);

  const QuantumPotential g = quantum_potential(gaussian_amplitude(grid, 1.0));
  CHECK(std::abs(g.q[300] + 1.0) <= 1e-3);

  const double k = 2.0;
  const Grid1D near(-0.5, 0.5, 101);  // node 50 at 0
  RealField c(near);
  for (std::size_t i = 0; i < near.size(); ++i) c[i] = std::cos(k * near.node(i));
  const QuantumPotential qc = quantum_potential(c);
  CHECK(std::abs(qc.q[50] + k * k) <= 1e-3);
  CHECK(qc.masked_count == 0);

  RealField holes(grid, std::vector<double>(grid.size(), 1.0));
  holes[100] = 0.0;
  holes[200] = -1.0;
  const QuantumPotential qh = quantum_potential(holes);
  CHECK(qh.masked_count == 2);
  CHECK(qh.masked[100]);
  CHECK(qh.q[200] == 0.0);
}

TEST_CASE("propagation serial and parallel agree bitwise") {
  const Grid1D grid(-5.0, 15.0, 301);
  const Propagation a = propagate(GaussianPacket{0.8, 4.0}, DispersionLaw::of(unit), 1.5, grid, {}, Exec::serial);
  const Propagation b = propagate(GaussianPacket{0.8, 4.0}, DispersionLaw::of(unit), 1.5, grid, {}, Exec::parallel);
  CHECK(a.psi.values == b.psi.values);
}
