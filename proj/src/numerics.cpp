#include "qensemble/numerics.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace qens {

namespace {

constexpr double kPi = std::numbers::pi;

// Accumulates weight·sample pairs with compensation on each component.
struct Accumulator {
  CompensatedSum re;
  CompensatedSum im;
  void add(double w, double v) { re.add(w * v); }
  void add(double w, cplx v) {
    re.add(w * v.real());
    im.add(w * v.imag());
  }
};

template <class T>
T finish(const Accumulator& acc) {
  if constexpr (std::is_same_v<T, double>) {
    return acc.re.value();
  } else {
    return cplx(acc.re.value(), acc.im.value());
  }
}

template <class T>
T simpson(std::span<const T> f, double h) {
  const std::size_t n = f.size();
  if (n < 2) throw ValidationError("quadrature needs at least 2 samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_finite(f[i])) {
      throw ValidationError("non-finite sample at node " + std::to_string(i));
    }
  }
  Accumulator acc;
  if (n == 2) {
    acc.add(0.5 * h, f[0]);
    acc.add(0.5 * h, f[1]);
    return finish<T>(acc);
  }
  // Simpson part covers nodes [0, m); m is odd.
  const std::size_t m = (n % 2 == 1) ? n : n - 3;
  if (m >= 3) {
    acc.add(h / 3.0, f[0]);
    acc.add(h / 3.0, f[m - 1]);
    for (std::size_t i = 1; i + 1 < m; ++i) {
      acc.add((i % 2 == 1 ? 4.0 : 2.0) * h / 3.0, f[i]);
    }
  }
  if (m != n) {
    const std::size_t s = n - 4;
    const double w = 3.0 * h / 8.0;
    acc.add(w, f[s]);
    acc.add(3.0 * w, f[s + 1]);
    acc.add(3.0 * w, f[s + 2]);
    acc.add(w, f[s + 3]);
  }
  return finish<T>(acc);
}

}  // namespace

Grid1D::Grid1D(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw ValidationError("grid bounds must be finite");
  }
  if (!(x_min < x_max)) throw ValidationError("grid requires x_min < x_max");
  if (n < 2) throw ValidationError("grid requires at least 2 nodes");
}

Grid1D Grid1D::odd(double x_min, double x_max, std::size_t n) {
  return Grid1D(x_min, x_max, n % 2 == 1 ? n : n + 1);
}

double Grid1D::node(std::size_t i) const {
  if (i + 1 == n_) return x_max_;
  return x_min_ + static_cast<double>(i) * spacing();
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = node(i);
  return out;
}

KBall::KBall(double k_max_, std::size_t n_k_) : k_max(k_max_), n_k(n_k_) {
  if (!(k_max >= 0.0) || !std::isfinite(k_max)) throw ValidationError("k_max must be >= 0");
  if (n_k < 2) throw ValidationError("ball needs at least 2 radial nodes");
}

double integrate_uniform(std::span<const double> samples, double h) { return simpson(samples, h); }
cplx integrate_uniform(std::span<const cplx> samples, double h) { return simpson(samples, h); }

cplx integrate_1d(const ComplexField& samples) {
  return integrate_uniform(std::span<const cplx>(samples.values), samples.grid.spacing());
}

double integrate_1d(const RealField& samples) {
  return integrate_uniform(std::span<const double>(samples.values), samples.grid.spacing());
}

cplx integrate_shell(const Amplitude& f, double k_lo, double k_hi, std::size_t n_k) {
  if (k_lo < 0.0 || k_hi < k_lo) throw ValidationError("shell requires 0 <= k_lo <= k_hi");
  const cplx radial = integrate_function([&](double k) { return f(k) * (k * k); }, k_lo, k_hi, n_k);
  return 4.0 * kPi * radial;
}

cplx integrate_ball(const Amplitude& f, const KBall& ball) {
  return integrate_shell(f, 0.0, ball.k_max, ball.n_k);
}

cplx integrate_ball(std::span<const cplx> radial_samples, const KBall& ball) {
  if (radial_samples.size() != ball.n_k) {
    throw ValidationError("radial samples do not match the ball's node count");
  }
  if (ball.k_max == 0.0) return {};
  const Grid1D grid(0.0, ball.k_max, ball.n_k);
  std::vector<cplx> weighted(ball.n_k);
  for (std::size_t i = 0; i < ball.n_k; ++i) {
    const double k = grid.node(i);
    weighted[i] = radial_samples[i] * (k * k);
  }
  return 4.0 * kPi * integrate_uniform(std::span<const cplx>(weighted), grid.spacing());
}

double sinc(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

std::size_t oscillatory_nodes(double span, double rate, const QuadratureOptions& opts) {
  const double wanted = std::ceil(std::abs(span) * std::abs(rate) / opts.phase_step) + 1.0;
  std::size_t n = std::max<std::size_t>(opts.min_nodes, static_cast<std::size_t>(wanted));
  return n % 2 == 1 ? n : n + 1;
}

cplx superpose(const Amplitude& amplitude, KInterval domain, double x, int dimension,
               const QuadratureOptions& opts) {
  if (dimension != 1 && dimension != 3) {
    throw ValidationError("superposition dimension must be 1 or 3, got " + std::to_string(dimension));
  }
  if (domain.hi < domain.lo) throw ValidationError("k-domain requires lo <= hi");
  if (domain.width() == 0.0) return {};
  const double rate = std::abs(x);
  const std::size_t n = oscillatory_nodes(domain.width(), rate, opts);
  if (dimension == 1) {
    const cplx sum = integrate_function(
        [&](double k) { return amplitude(k) * std::polar(1.0, k * x); }, domain.lo, domain.hi, n);
    return sum / std::sqrt(2.0 * kPi);
  }
  if (domain.lo < 0.0) throw ValidationError("3-D radial domain must have lo >= 0");
  const double r = std::abs(x);
  const cplx radial = integrate_function(
      [&](double k) { return amplitude(k) * (k * k * sinc(k * r)); }, domain.lo, domain.hi, n);
  return 4.0 * kPi * radial / std::pow(2.0 * kPi, 1.5);
}

cplx superpose(const SingleMode& mode, double x) {
  return mode.weight * std::polar(1.0, mode.k0 * x) / std::sqrt(2.0 * kPi);
}

cplx forward_transform(const ComplexField& psi, double k) {
  std::vector<cplx> integrand(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    integrand[i] = psi[i] * std::polar(1.0, -k * psi.grid.node(i));
  }
  return integrate_uniform(std::span<const cplx>(integrand), psi.grid.spacing()) /
         std::sqrt(2.0 * kPi);
}

namespace {

// Stencils are written in difference form so constant fields give exactly 0.
double central_first(std::span<const double> f, std::size_t i, int order, double h) {
  const double d1 = f[i + 1] - f[i - 1];
  if (order == 2) return d1 / (2.0 * h);
  const double d2 = f[i + 2] - f[i - 2];
  if (order == 4) return (8.0 * d1 - d2) / (12.0 * h);
  const double d3 = f[i + 3] - f[i - 3];
  return (45.0 * d1 - 9.0 * d2 + d3) / (60.0 * h);
}

double central_second(std::span<const double> f, std::size_t i, int order, double h) {
  const double s1 = (f[i + 1] - f[i]) + (f[i - 1] - f[i]);
  if (order == 2) return s1 / (h * h);
  const double s2 = (f[i + 2] - f[i]) + (f[i - 2] - f[i]);
  return (16.0 * s1 - s2) / (12.0 * h * h);
}

}  // namespace

Derivative derivative(const RealField& field, int order) {
  if (order != 2 && order != 4 && order != 6) {
    throw ValidationError("first-derivative order must be 2, 4 or 6");
  }
  const std::size_t n = field.size();
  if (n < 3) throw ValidationError("derivative needs at least 3 nodes");
  const double h = field.grid.spacing();
  std::span<const double> f(field.values);
  RealField out(field.grid);
  out[0] = (4.0 * (f[1] - f[0]) - (f[2] - f[0])) / (2.0 * h);
  out[n - 1] = -(4.0 * (f[n - 2] - f[n - 1]) - (f[n - 3] - f[n - 1])) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::size_t reach = std::min(i, n - 1 - i);
    const int local = std::min<int>(order, 2 * static_cast<int>(std::min<std::size_t>(reach, 3)));
    out[i] = central_first(f, i, local, h);
  }
  return {std::move(out), static_cast<std::size_t>(order / 2)};
}

Derivative second_derivative(const RealField& field, int order) {
  if (order != 2 && order != 4) throw ValidationError("second-derivative order must be 2 or 4");
  const std::size_t n = field.size();
  if (n < 4) throw ValidationError("second derivative needs at least 4 nodes");
  const double h = field.grid.spacing();
  std::span<const double> f(field.values);
  RealField out(field.grid);
  out[0] = (-5.0 * (f[1] - f[0]) + 4.0 * (f[2] - f[0]) - (f[3] - f[0])) / (h * h);
  out[n - 1] =
      (-5.0 * (f[n - 2] - f[n - 1]) + 4.0 * (f[n - 3] - f[n - 1]) - (f[n - 4] - f[n - 1])) / (h * h);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::size_t reach = std::min(i, n - 1 - i);
    const int local = (order == 4 && reach >= 2) ? 4 : 2;
    out[i] = central_second(f, i, local, h);
  }
  return {std::move(out), static_cast<std::size_t>(order / 2)};
}

Moments density_moments(const RealField& density) {
  const double norm = integrate_1d(density);
  if (!(norm > 0.0)) throw NumericalError("density has non-positive norm");
  RealField weighted(density.grid);
  for (std::size_t i = 0; i < density.size(); ++i) weighted[i] = density.grid.node(i) * density[i];
  const double mean = integrate_1d(weighted) / norm;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double d = density.grid.node(i) - mean;
    weighted[i] = d * d * density[i];
  }
  const double var = integrate_1d(weighted) / norm;
  return {norm, mean, std::sqrt(std::max(var, 0.0))};
}

}  // namespace qens
