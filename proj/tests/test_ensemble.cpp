#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "qensemble/ensemble.hpp"

using namespace qens;
using std::numbers::pi;

TEST_CASE("particle model energies") {
  const ParticleModel p(2.0, 0.5, 3.0);
  CHECK(p.omega() * p.hbar() == doctest::Approx(3.0));
  CHECK(p.mass() * p.velocity() * p.velocity() == doctest::Approx(3.0));
  CHECK(p.kinetic_energy() == doctest::Approx(0.5 * p.mass() * p.velocity() * p.velocity()));
  CHECK(p.kinetic_energy() + p.field_energy() == 3.0);
  CHECK_THROWS_AS(ParticleModel(0.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(ParticleModel(1.0, -1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(ParticleModel(1.0, 1.0, -1.0), ValidationError);
  CHECK_NOTHROW(ParticleModel::natural(0.0));
  const ParticleModel e = ParticleModel::electron_si(1.602176634e-19);
  CHECK(e.units() == UnitSystem::si);
  CHECK(e.mass() == si::electron_mass);
}

TEST_CASE("allowed k ranges") {
  const ParticleModel p = ParticleModel::natural(1.0);
  KRange r = allowed_k_range(p, 0.0);
  CHECK(r.lo == 0.0);
  CHECK(r.hi == 1.0);
  CHECK(r.regime == Regime::oscillatory);
  r = allowed_k_range(p, -3.0);
  CHECK(r.hi == 2.0);
  CHECK(r.regime == Regime::oscillatory);
  r = allowed_k_range(p, 5.0);
  CHECK(r.hi == 2.0);
  CHECK(r.regime == Regime::decaying);
  r = allowed_k_range(p, 1.0);
  CHECK(r.width() == 0.0);
  CHECK(r.regime == Regime::oscillatory);
  CHECK(allowed_k_range(p, 0.0, KineticConvention::twice_mass).hi == doctest::Approx(std::sqrt(2.0)));
  CHECK(allowed_k_range(p, 0.0, KineticConvention::mass).hi == 1.0);
}

TEST_CASE("k_hi strictly decreasing in V on the oscillatory branch") {
  const ParticleModel p(1.5, 1.0, 2.0);
  double prev = 1e300;
  for (double V = -10.0; V < 2.0; V += 0.125) {
    const double hi = allowed_k_range(p, V).hi;
    CHECK(hi < prev);
    prev = hi;
  }
}

TEST_CASE("kinetic convention parsing") {
  CHECK(parse_kinetic_convention("as_printed") == KineticConvention::as_printed);
  CHECK(parse_kinetic_convention("m") == KineticConvention::mass);
  CHECK(parse_kinetic_convention("2m") == KineticConvention::twice_mass);
  CHECK(to_string(KineticConvention::twice_mass) == "2m");
  CHECK_THROWS_AS(parse_kinetic_convention("3m"), ValidationError);
}

TEST_CASE("free ensemble wavefunction") {
  const Grid1D grid(0.0, 20.0, 81);
  const ComplexField empty = free_wavefunction(ParticleModel::natural(0.0), grid);
  for (const cplx& v : empty.values) CHECK(v == cplx(0.0, 0.0));

  const ComplexField psi = free_wavefunction(ParticleModel::natural(1.0), grid);
  CHECK(std::abs(psi[0].real() - oracle::psi0_unit_ball) <= 1e-9);
  for (const cplx& v : psi.values) CHECK(v.imag() == 0.0);

  const ComplexField same = potential_wavefunction(ParticleModel::natural(1.0), PotentialSpec::constant(0.0), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(same[i] - psi[i]) <= 1e-12);
}

TEST_CASE("potentials reshape the ensemble") {
  const ParticleModel p = ParticleModel::natural(1.0);
  const Grid1D grid(0.0, 6.0, 61);
  const ComplexField free = free_wavefunction(p, grid);
  const ComplexField deep = potential_wavefunction(p, PotentialSpec::constant(-3.0), grid);
  CHECK(std::abs(deep[0]) > std::abs(free[0]));
  CHECK(std::abs(deep[0].real() - 8.0 * oracle::psi0_unit_ball) <= 1e-9);

  const ComplexField barrier = potential_wavefunction(p, PotentialSpec::constant(5.0), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(barrier[i].real() > 0.0);
    if (i > 0) CHECK(barrier[i].real() < barrier[i - 1].real());
  }
  // ∫k² e^{−kr} dk over [0, 2] at r = 1: 2 − 10 e^{−2}.
  const double at_one = std::pow(2.0 * pi, -1.5) * 4.0 * pi * (2.0 - 10.0 * std::exp(-2.0));
  CHECK(std::abs(barrier[10].real() - at_one) <= 1e-9);
}

TEST_CASE("piecewise potential picks the local range") {
  const PotentialSpec V = PotentialSpec::piecewise({1.0}, {-3.0, 0.0});
  CHECK(V(0.5) == -3.0);
  CHECK(V(1.0) == 0.0);
  CHECK_THROWS_AS(PotentialSpec::piecewise({1.0}, {0.0}), ValidationError);
  const PotentialSpec well = PotentialSpec::square_well(4.0, 1.0);
  CHECK(well(0.5) == 0.0);
  CHECK(well(-1.5) == 4.0);

  const ParticleModel p = ParticleModel::natural(1.0);
  const Grid1D grid(0.0, 2.0, 5);
  const ComplexField psi = potential_wavefunction(p, V, grid);
  const ComplexField inside = potential_wavefunction(p, PotentialSpec::constant(-3.0), grid);
  const ComplexField outside = free_wavefunction(p, grid);
  CHECK(psi[0] == inside[0]);
  CHECK(psi[4] == outside[4]);
}

TEST_CASE("member amplitude is flat") {
  const ParticleModel p(4.0, 1.0, 1.0);
  const EnsembleAmplitude a = member_amplitude(p);
  CHECK(a.chi0() == 2.0);
  for (double k = 0.0; k <= a.range.hi; k += a.range.hi / 17.0) CHECK(a(k) == cplx(2.0, 0.0));
  CHECK(a(a.range.hi * 1.01) == cplx(0.0, 0.0));
  CHECK(member_amplitude(ParticleModel::natural(1.0)).chi0() == 1.0);
}

TEST_CASE("Parseval norm") {
  CHECK(std::abs(parseval_norm(ParticleModel::natural(1.0), 1.0) - 4.0 * pi / 3.0) <= 1e-9);
  CHECK(parseval_norm(ParticleModel::natural(1.0), 0.0) == 0.0);
  CHECK(std::abs(parseval_norm(ParticleModel(2.0, 1.0, 2.0), 2.0) - 64.0 * pi / 3.0) <= 1e-8);
  CHECK_THROWS_AS(parseval_norm(ParticleModel::natural(1.0), -1.0), ValidationError);
}

TEST_CASE("retarding filter") {
  const ParticleModel p = ParticleModel::natural(2.0);  // E_k = 1, k0 = √2
  const double k0 = std::sqrt(2.0);

  FilterResult f = apply_retarding_filter(p, 0.0);
  CHECK(f.after.lo == f.before.lo);
  CHECK(f.after.hi == f.before.hi);
  CHECK(f.before.hi == doctest::Approx(k0));

  f = apply_retarding_filter(p, 0.75, KineticConvention::as_printed, ThresholdForm::as_printed);
  CHECK(f.after.lo == doctest::Approx(k0 / 2.0).epsilon(1e-15));
  f = apply_retarding_filter(p, 0.25);
  CHECK(f.after.lo == doctest::Approx(k0 / 2.0).epsilon(1e-15));

  EnsembleAmplitude amp = member_amplitude(p);
  amp.range = f.before;
  CHECK(std::abs(surviving_fraction(f, amp) - 7.0 / 8.0) <= 1e-10);

  f = apply_retarding_filter(p, 1.5);
  CHECK(f.fully_blocked);
  CHECK(f.after.width() == 0.0);
  CHECK(surviving_fraction(f, amp) == 0.0);
  CHECK_THROWS_AS(apply_retarding_filter(p, -0.1), ValidationError);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    for (ThresholdForm form : {ThresholdForm::energy_threshold, ThresholdForm::as_printed}) {
      const FilterResult r = apply_retarding_filter(p, dist(rng), KineticConvention::as_printed, form);
      CHECK(r.before.contains(r.after));
    }
  }
}

TEST_CASE("ensemble density") {
  const Grid1D g(0.0, 1.0, 5);
  for (double v : ensemble_density(ComplexField(g)).values) CHECK(v == 0.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  ComplexField psi(g);
  for (auto& v : psi.values) v = {n(rng), n(rng)};
  const RealField rho = ensemble_density(psi);
  ComplexField rotated = psi;
  for (auto& v : rotated.values) v *= std::polar(1.0, 0.83);
  const RealField rho2 = ensemble_density(rotated);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(rho[i] >= 0.0);
    CHECK(std::abs(rho[i] - rho2[i]) <= 1e-14 * (1.0 + rho[i]));
  }

  ComplexField mode(g);
  for (std::size_t i = 0; i < g.size(); ++i) mode[i] = std::polar(1.0, 4.0 * g.node(i));
  for (double v : ensemble_density(mode).values) CHECK(std::abs(v - 1.0) <= 1e-15);
}

TEST_CASE("uncertainty product") {
  const Spectrum1D gauss{-3.0, 13.0, [](double k) { return cplx(std::exp(-0.5 * (k - 5.0) * (k - 5.0)), 0.0); }};
  CHECK(std::abs(uncertainty_product(gauss) - 0.5) <= 1e-3);

  const Spectrum1D wide{-6.0, 6.0, [](double k) { return cplx(std::exp(-0.5 * k * k / 4.0), 0.0); }};
  CHECK(std::abs(uncertainty_product(wide) - 0.5) <= 1e-3);

  const Spectrum1D flat{0.0, 1.0, [](double) { return cplx(1.0, 0.0); }};
  CHECK(uncertainty_product(flat) > 0.5);

  const Spectrum1D empty{0.0, 1.0, [](double) { return cplx(0.0, 0.0); }};
  CHECK_THROWS_AS(uncertainty_product(empty), ValidationError);
  const Spectrum1D inverted{1.0, 0.0, [](double) { return cplx(1.0, 0.0); }};
  CHECK_THROWS_AS(uncertainty_product(inverted), ValidationError);
}

TEST_CASE("serial and parallel ensemble kernels agree bitwise") {
  const ParticleModel p = ParticleModel::natural(1.0);
  const Grid1D grid(0.0, 15.0, 97);
  const PotentialSpec V = PotentialSpec::piecewise({3.0, 6.0}, {-3.0, 5.0, 0.5});
  const ComplexField a = potential_wavefunction(p, V, grid, {}, Exec::serial);
  const ComplexField b = potential_wavefunction(p, V, grid, {}, Exec::parallel);
  CHECK(a.values == b.values);
}
