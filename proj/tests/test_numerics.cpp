#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "qensemble/numerics.hpp"
#include "qensemble/parallel.hpp"

using namespace qens;
using std::numbers::pi;

namespace {

RealField sample(const Grid1D& g, double (*f)(double)) {
  RealField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g.node(i));
  return out;
}

}  // namespace

TEST_CASE("grid construction and validation") {
  const Grid1D g(0.0, 1.0, 11);
  CHECK(g.spacing() == doctest::Approx(0.1));
  CHECK(g.node(10) == 1.0);
  CHECK(g.nodes().size() == 11);
  CHECK(Grid1D::odd(0.0, 1.0, 10).size() == 11);
  CHECK(Grid1D::odd(0.0, 1.0, 11).size() == 11);
  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(Grid1D(1.0, 1.0, 5), ValidationError);
  CHECK_THROWS_AS(Grid1D(0.0, std::numeric_limits<double>::infinity(), 5), ValidationError);
  CHECK_THROWS_AS(KBall(-1.0, 5), ValidationError);
  CHECK_THROWS_AS(KBall(1.0, 1), ValidationError);
  CHECK_THROWS_AS(RealField(g, std::vector<double>(3)), ValidationError);
}

TEST_CASE("integrate_1d reference integrals") {
  CHECK(std::abs(integrate_1d(RealField(Grid1D(0.0, 1.0, 101), std::vector<double>(101, 1.0))) - 1.0) <=
        1e-12);
  CHECK(std::abs(integrate_1d(sample(Grid1D(0.0, pi, 1001), [](double x) { return std::sin(x); })) - 2.0) <=
        1e-9);
  CHECK(std::abs(integrate_1d(sample(Grid1D(-5.0, 5.0, 501),
                                     [](double x) { return x * std::exp(-x * x); }))) <= 1e-12);
}

TEST_CASE("even sample counts and the two-point rule") {
  CHECK(std::abs(integrate_1d(sample(Grid1D(0.0, pi, 1000), [](double x) { return std::sin(x); })) - 2.0) <=
        1e-9);
  // Simpson 3/8 tail is exact for cubics.
  CHECK(integrate_1d(sample(Grid1D(0.0, 1.0, 8), [](double x) { return x * x * x; })) ==
        doctest::Approx(0.25).epsilon(1e-14));
  CHECK(integrate_1d(sample(Grid1D(0.0, 2.0, 2), [](double x) { return x; })) == doctest::Approx(2.0));
}

TEST_CASE("quadrature rejects bad samples") {
  const Grid1D g(0.0, 1.0, 5);
  RealField f(g, {1.0, 2.0, std::nan(""), 1.0, 1.0});
  CHECK_THROWS_AS(integrate_1d(f), ValidationError);
  ComplexField c(g, std::vector<cplx>(5, cplx(std::numeric_limits<double>::infinity(), 0.0)));
  CHECK_THROWS_AS(integrate_1d(c), ValidationError);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(integrate_uniform(std::span<const double>(one), 0.1), ValidationError);
}

TEST_CASE("quadrature linearity and refinement") {
  const Grid1D g(0.0, 3.0, 301);
  const RealField f = sample(g, [](double x) { return std::cos(x) * std::exp(-x); });
  const RealField h = sample(g, [](double x) { return x * x; });
  RealField mix(g);
  for (std::size_t i = 0; i < g.size(); ++i) mix[i] = 2.5 * f[i] - 0.75 * h[i];
  CHECK(std::abs(integrate_1d(mix) - (2.5 * integrate_1d(f) - 0.75 * integrate_1d(h))) <= 1e-12);

  const auto coarse = integrate_1d(sample(Grid1D(0.0, 3.0, 101), [](double x) { return std::exp(x); }));
  const auto fine = integrate_1d(sample(Grid1D(0.0, 3.0, 201), [](double x) { return std::exp(x); }));
  const double exact = std::exp(3.0) - 1.0;
  CHECK(std::abs(fine - exact) < std::abs(coarse - exact));
  CHECK(std::abs(fine - coarse) <= 1e-7);
}

TEST_CASE("integrate_ball") {
  const auto one = [](double) { return cplx(1.0, 0.0); };
  CHECK(std::abs(integrate_ball(one, KBall(1.7, 101)).real() - 4.0 * pi / 3.0 * std::pow(1.7, 3)) <= 1e-9);
  CHECK(integrate_ball(one, KBall(0.0, 11)) == cplx(0.0, 0.0));
  CHECK(std::abs(integrate_ball([](double k) { return cplx(k, 0.0); }, KBall(1.0, 101)).real() - pi) <= 1e-9);

  const KBall ball(2.0, 51);
  std::vector<cplx> radial(51, cplx(3.0, 0.0));
  CHECK(std::abs(integrate_ball(std::span<const cplx>(radial), ball).real() - 3.0 * 4.0 * pi / 3.0 * 8.0) <=
        1e-9);
  std::vector<cplx> wrong(50);
  CHECK_THROWS_AS(integrate_ball(std::span<const cplx>(wrong), ball), ValidationError);
}

TEST_CASE("superpose") {
  const auto zero = [](double) { return cplx(0.0, 0.0); };
  for (double x : {0.0, 0.5, 3.0}) CHECK(superpose(zero, {0.0, 1.0}, x, 3) == cplx(0.0, 0.0));
  const auto one = [](double) { return cplx(1.0, 0.0); };
  CHECK(std::abs(superpose(one, {0.0, 1.0}, 0.0, 3).real() - oracle::psi0_unit_ball) <= 1e-9);
  CHECK_THROWS_AS(superpose(one, {0.0, 1.0}, 0.0, 2), ValidationError);

  const SingleMode mode{3.0, std::sqrt(2.0 * pi)};
  for (double x : {-4.0, 0.0, 0.3, 17.0}) CHECK(std::abs(std::abs(superpose(mode, x)) - 1.0) <= 1e-15);
}

TEST_CASE("3-D superposition matches the closed-form sinc integral") {
  // (2π)^{-3/2} 4π (sin kr − kr cos kr)/r³ for a flat amplitude on [0, k].
  const auto one = [](double) { return cplx(1.0, 0.0); };
  for (double r : {0.5, 2.0, 7.5}) {
    const double k = 1.3;
    const double exact =
        std::pow(2.0 * pi, -1.5) * 4.0 * pi * (std::sin(k * r) - k * r * std::cos(k * r)) / (r * r * r);
    CHECK(std::abs(superpose(one, {0.0, k}, r, 3).real() - exact) <= 1e-10);
  }
}

TEST_CASE("forward transform then superpose round-trips a Gaussian") {
  const Grid1D xg(-12.0, 12.0, 1201);
  ComplexField psi(xg);
  for (std::size_t i = 0; i < xg.size(); ++i) psi[i] = std::exp(-0.5 * xg.node(i) * xg.node(i));
  const Grid1D kg(-10.0, 10.0, 801);
  std::vector<cplx> spectrum(kg.size());
  for (std::size_t j = 0; j < kg.size(); ++j) spectrum[j] = forward_transform(psi, kg.node(j));
  CHECK(std::abs(spectrum[400] - cplx(1.0, 0.0)) <= 1e-10);
  for (double x : {-2.0, 0.0, 0.7, 3.0}) {
    std::vector<cplx> integrand(kg.size());
    for (std::size_t j = 0; j < kg.size(); ++j) integrand[j] = spectrum[j] * std::polar(1.0, kg.node(j) * x);
    const cplx back = integrate_uniform(std::span<const cplx>(integrand), kg.spacing()) / std::sqrt(2.0 * pi);
    CHECK(std::abs(back - std::exp(-0.5 * x * x)) <= 1e-6);
  }
}

TEST_CASE("finite differences") {
  const Grid1D g(-2.0, 2.0, 401);
  for (int order : {2, 4, 6}) {
    const Derivative d = derivative(RealField(g, std::vector<double>(g.size(), -7.25)), order);
    for (double v : d.values.values) CHECK(v == 0.0);
    CHECK(d.boundary_nodes == static_cast<std::size_t>(order / 2));
  }
  const Derivative d6 = derivative(sample(g, [](double x) { return std::sin(x); }), 6);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (d6.is_interior(i)) worst = std::max(worst, std::abs(d6.values[i] - std::cos(g.node(i))));
  }
  CHECK(worst <= 1e-11);
  CHECK_FALSE(d6.is_interior(0));
  CHECK(std::abs(d6.values[0] - std::cos(-2.0)) <= 1e-3);

  const Derivative dd = second_derivative(sample(g, [](double x) { return std::exp(x); }), 4);
  CHECK(std::abs(dd.values[200] - 1.0) <= 1e-9);
  CHECK_THROWS_AS(derivative(RealField(g), 3), ValidationError);
}

TEST_CASE("density moments of a Gaussian") {
  const Grid1D g(-20.0, 24.0, 2001);
  const RealField rho = sample(g, [](double x) { return std::exp(-(x - 2.0) * (x - 2.0) / 2.0 / 9.0); });
  const Moments m = density_moments(rho);
  CHECK(m.norm == doctest::Approx(std::sqrt(2.0 * pi) * 3.0).epsilon(1e-10));
  CHECK(m.mean == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(m.stddev == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("compensated summation") {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-17);
  s.add(-1.0);
  CHECK(s.value() == doctest::Approx(1e-14).epsilon(1e-6));
}

TEST_CASE("for_each_index visits every index under both policies") {
  for (Exec e : {Exec::serial, Exec::parallel}) {
    std::vector<int> hits(1000, 0);
    for_each_index(hits.size(), e, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
  CHECK_THROWS_AS(for_each_index(10, Exec::parallel,
                                 [](std::size_t i) {
                                   if (i == 7) throw NumericalError("boom");
                                 }),
                  NumericalError);
}
