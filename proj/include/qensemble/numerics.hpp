#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "qensemble/error.hpp"

namespace qens {

using cplx = std::complex<double>;

/// Uniform sampling of [x_min, x_max] with n nodes, both ends included.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n);

  /// Same interval with n rounded up to the next odd count (Simpson-ready).
  static Grid1D odd(double x_min, double x_max, std::size_t n);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  double spacing() const { return (x_max_ - x_min_) / static_cast<double>(n_ - 1); }
  double node(std::size_t i) const;
  std::vector<double> nodes() const;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
};

/// Integration domain 0 <= |k| <= k_max for isotropic 3-D k-integrals.
struct KBall {
  KBall(double k_max, std::size_t n_k);
  double k_max;
  std::size_t n_k;
};

/// [lo, hi] in k. In 3-D it is a radial shell, in 1-D a line segment.
struct KInterval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

template <class T>
struct SampledField {
  SampledField(Grid1D g, std::vector<T> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) {
      throw ValidationError("field has " + std::to_string(values.size()) + " values for " +
                            std::to_string(grid.size()) + " grid nodes");
    }
  }
  explicit SampledField(Grid1D g) : grid(g), values(g.size()) {}

  std::size_t size() const { return values.size(); }
  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }

  Grid1D grid;
  std::vector<T> values;
};

using ComplexField = SampledField<cplx>;
using RealField = SampledField<double>;

/// Neumaier-compensated accumulator; result independent of magnitude ordering
/// to within a few ulp.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

// Composite Simpson on uniform samples with spacing h. Odd counts use the
// classic 1-4-2-...-4-1 rule; even counts >= 4 finish the last three
// intervals with Simpson 3/8; two samples degrade to the trapezoid.
double integrate_uniform(std::span<const double> samples, double h);
cplx integrate_uniform(std::span<const cplx> samples, double h);

cplx integrate_1d(const ComplexField& samples);
double integrate_1d(const RealField& samples);

/// Samples f on an odd grid over [a, b] and integrates. a == b yields zero.
template <class F>
auto integrate_function(F&& f, double a, double b, std::size_t n) {
  using R = std::decay_t<std::invoke_result_t<F&, double>>;
  if (a == b) return R{};
  const Grid1D grid = Grid1D::odd(a, b, n);
  std::vector<R> samples(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) samples[i] = f(grid.node(i));
  return integrate_uniform(std::span<const R>(samples), grid.spacing());
}

using Amplitude = std::function<cplx(double)>;

/// 4π ∫_{k_lo}^{k_hi} f(k) k² dk.
cplx integrate_shell(const Amplitude& f, double k_lo, double k_hi, std::size_t n_k);
cplx integrate_ball(const Amplitude& f, const KBall& ball);
/// Radial samples taken at the n_k equispaced nodes of [0, k_max].
cplx integrate_ball(std::span<const cplx> radial_samples, const KBall& ball);

/// sin(x)/x, with the removable singularity filled in.
double sinc(double x);

/// A single retained plane wave weight·δ(k − k0), kept symbolic so it never
/// acquires a grid-dependent norm.
struct SingleMode {
  double k0 = 0.0;
  cplx weight{1.0, 0.0};
};

struct QuadratureOptions {
  /// Largest phase advance of e^{ikx} allowed between adjacent k nodes.
  double phase_step = 0.01;
  std::size_t min_nodes = 257;
};

/// Odd node count resolving a phase that grows at `rate` across `span`.
std::size_t oscillatory_nodes(double span, double rate, const QuadratureOptions& opts);

/// Fourier superposition with the symmetric convention:
///   dimension 1: (2π)^{-1/2} ∫_lo^hi dk a(k) e^{ikx}
///   dimension 3: (2π)^{-3/2} 4π ∫_lo^hi dk k² a(k) sinc(k|x|)   (isotropic a)
cplx superpose(const Amplitude& amplitude, KInterval domain, double x, int dimension,
               const QuadratureOptions& opts = {});
/// (2π)^{-1/2} · weight · e^{i k0 x}
cplx superpose(const SingleMode& mode, double x);

/// (2π)^{-1/2} ∫ dx ψ(x) e^{-ikx} over the field's grid.
cplx forward_transform(const ComplexField& psi, double k);

/// First or second derivative by central differences. Nodes closer than the
/// stencil half-width to either end fall back to lower-order stencils and,
/// at the very ends, one-sided second-order formulas; they are flagged as
/// boundary nodes.
struct Derivative {
  RealField values;
  std::size_t boundary_nodes = 0;
  bool is_interior(std::size_t i) const {
    return i >= boundary_nodes && i + boundary_nodes < values.size();
  }
};

Derivative derivative(const RealField& f, int order = 6);
Derivative second_derivative(const RealField& f, int order = 4);

struct Moments {
  double norm = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Zeroth, first and second central moments of a non-negative density.
Moments density_moments(const RealField& density);

}  // namespace qens
