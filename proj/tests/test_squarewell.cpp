#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "qensemble/squarewell.hpp"

using namespace qens;
using std::numbers::pi;

namespace {

WellConfig standard() { return WellConfig(4.0, 1.0, ParticleModel::natural(1.0)); }

}  // namespace

TEST_CASE("well configuration") {
  const WellConfig cfg = standard();
  CHECK(cfg.k_inner_max() == 1.0);
  CHECK(cfg.k_outer_max() == doctest::Approx(std::sqrt(3.0)));
  CHECK(cfg.k_total() == 2.0);
  CHECK_THROWS_AS(WellConfig(1.0, 1.0, ParticleModel::natural(1.0)), ValidationError);
  CHECK_THROWS_AS(WellConfig(4.0, 0.0, ParticleModel::natural(1.0)), ValidationError);
  CHECK_THROWS_AS(WellConfig(-4.0, 1.0, ParticleModel::natural(1.0)), ValidationError);
  // Deeper well at fixed E_T: more decaying members.
  CHECK(WellConfig(6.0, 1.0, ParticleModel::natural(1.0)).k_outer_max() > cfg.k_outer_max());
}

TEST_CASE("pairing") {
  const WellConfig wide(4.0, 1.0, ParticleModel::natural(3.0));
  CHECK(pair_member(wide, 0.0).k2 == 2.0);
  const WellMember sym = pair_member(wide, std::sqrt(2.0));
  CHECK(sym.k2 == doctest::Approx(sym.k1).epsilon(1e-15));
  CHECK(std::abs(pair_member(standard(), 1.0).k2 - std::sqrt(3.0)) <= 1e-12);
  CHECK_THROWS_AS(pair_member(standard(), 1.5), ValidationError);
  CHECK_THROWS_AS(pair_member(standard(), -0.1), ValidationError);

  const WellConfig resonant(10.0, 1.0, ParticleModel::natural(5.0));
  CHECK_THROWS_AS(pair_member(resonant, pi / 2.0), ResonantMemberError);
  CHECK_NOTHROW(pair_member(resonant, pi / 2.0 + 1e-3));
}

TEST_CASE("pair identity over sampled members") {
  const WellConfig cfg(9.0, 0.7, ParticleModel(1.3, 0.9, 4.0));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(0.0, cfg.k_inner_max());
  const double kt2 = cfg.k_total() * cfg.k_total();
  for (int i = 0; i < 1000; ++i) {
    const WellMember m = pair_member(cfg, dist(rng));
    CHECK(std::abs(m.k1 * m.k1 + m.k2 * m.k2 - kt2) <= 1e-12 * kt2);
    CHECK(m.chi0 >= 0.0);
  }
}

TEST_CASE("member amplitude") {
  const WellConfig cfg(1.0, 1.0, ParticleModel::natural(0.5));
  CHECK(member_amplitude_well(cfg, 0.0, 1.0) == doctest::Approx(oracle::chi0_unit).epsilon(1e-15));
  double prev = 1e300;
  for (double k2 : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double v = member_amplitude_well(cfg, 0.0, k2);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-3);
  CHECK(member_amplitude_well(cfg, 0.0, 0.0) == 0.0);
}

TEST_CASE("member wavefunction shape") {
  const WellConfig cfg = standard();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const WellMember m = pair_member(cfg, dist(rng));
    const EdgeValues e = member_edge_values(m, cfg);
    CHECK(e.inner == e.outer);
    CHECK(member_wavefunction(m, cfg, cfg.x0) == member_wavefunction(m, cfg, -cfg.x0));
    for (double x : {0.1, 0.9, 1.0, 1.7, 5.0}) {
      CHECK(member_wavefunction(m, cfg, x) == member_wavefunction(m, cfg, -x));
    }
    CHECK(std::abs(member_wavefunction(m, cfg, 60.0)) < 1e-30);
  }
}

TEST_CASE("normalization audit against quadrature oracle") {
  for (const auto& c : oracle::audit_cases) {
    const WellConfig cfg(c.V0, c.x0, ParticleModel(c.mass, 1.0, 2.0));
    const WellMember m = pair_member(cfg, c.k1);
    CHECK(m.k2 == doctest::Approx(c.k2).epsilon(1e-12));
    CHECK(m.chi0 == doctest::Approx(c.chi0).epsilon(1e-12));
    const NormalizationAudit a = normalization_audit(cfg, m);
    CHECK(a.integral == doctest::Approx(c.integral).epsilon(1e-10));
    CHECK(a.mass == c.mass);
    CHECK(a.relative_discrepancy == doctest::Approx((c.integral - c.mass) / c.mass).epsilon(1e-8));
  }
}

TEST_CASE("bound members carry exactly the member mass") {
  const WellConfig cfg(4.0, 1.0, ParticleModel::natural(2.0));
  const std::vector<double> roots = bound_state_members(cfg);
  REQUIRE(roots.size() == 1);
  CHECK(roots[0] == doctest::Approx(oracle::bound_k1_V4_x1).epsilon(1e-12));
  const WellMember m = pair_member(cfg, roots[0]);
  CHECK(m.k2 == doctest::Approx(m.k1 * std::tan(m.k1)).epsilon(1e-10));
  CHECK(std::abs(normalization_audit(cfg, m).relative_discrepancy) <= 1e-9);

  const WellConfig deep(30.0, 0.5, ParticleModel::natural(20.0));
  const std::vector<double> deep_roots = bound_state_members(deep);
  REQUIRE(deep_roots.size() == 1);
  CHECK(deep_roots[0] == doctest::Approx(oracle::bound_k1_V30_x05).epsilon(1e-12));

  // E_T too small to reach the ground-state k1.
  CHECK(bound_state_members(standard()).empty());
}

TEST_CASE("ensemble density") {
  const WellConfig cfg = standard();
  const Grid1D grid(-4.0, 4.0, 801);
  const WellDensity d = well_ensemble_density(cfg, grid);
  CHECK(std::abs(integrate_1d(d.rho) - 1.0) <= 1e-8);
  CHECK(d.raw_integral > 0.0);
  CHECK(d.excluded_nodes == 0);
  CHECK(d.excluded_inner == 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(d.rho[i] >= 0.0);
    CHECK(std::abs(d.rho[i] - d.rho[grid.size() - 1 - i]) <= 1e-10);
    if (grid.node(i) > cfg.x0 && i > 0 && grid.node(i - 1) > cfg.x0) CHECK(d.rho[i] < d.rho[i - 1]);
  }

  WellDensityOptions consistent;
  consistent.inner = InnerDecay::member_consistent;
  const WellDensity c = well_ensemble_density(cfg, grid, consistent);
  CHECK(std::abs(integrate_1d(c.rho) - 1.0) <= 1e-8);
  CHECK(c.rho[400] != d.rho[400]);
}

TEST_CASE("resonant members are excluded and measured") {
  const WellConfig cfg(10.0, 1.0, ParticleModel::natural(5.0));
  const WellDensity d = well_ensemble_density(cfg, Grid1D(-3.0, 3.0, 121));
  CHECK(d.excluded_inner == doctest::Approx(2.0 * std::asin(1e-6)).epsilon(1e-9));
  CHECK(std::isfinite(d.raw_integral));
}

TEST_CASE("well density serial and parallel agree bitwise") {
  const WellConfig cfg = standard();
  const Grid1D grid(-4.0, 4.0, 201);
  const WellDensity a = well_ensemble_density(cfg, grid, {}, Exec::serial);
  const WellDensity b = well_ensemble_density(cfg, grid, {}, Exec::parallel);
  CHECK(a.rho.values == b.rho.values);
}

TEST_CASE("wells with unresolvable resonance counts are rejected") {
  const WellConfig huge(4.0, 1e9, ParticleModel::natural(1.0));
  CHECK_THROWS_AS(well_ensemble_density(huge, Grid1D(-1.0, 1.0, 11)), ValidationError);
}
