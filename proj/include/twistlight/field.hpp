#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>

#include "twistlight/errors.hpp"
#include "twistlight/grid.hpp"
#include "twistlight/maps.hpp"

namespace twistlight {

/// Sampled complex scalar field on a grid whose centre is the optical axis.
template <typename Scalar = double>
class Field {
 public:
  using Real = Scalar;
  using Complex = std::complex<Scalar>;

  explicit Field(const GridSpec<Scalar>& grid)
      : grid_(grid), values_(ComplexArray<Scalar>::Zero(grid.ny, grid.nx)) {}

  Field(const GridSpec<Scalar>& grid, ComplexArray<Scalar> values)
      : grid_(grid), values_(std::move(values)) {
    detail::require_shape(values_, grid_, "field");
    if (!values_.allFinite()) throw std::invalid_argument("field has non-finite values");
  }

  const GridSpec<Scalar>& grid() const { return grid_; }
  const ComplexArray<Scalar>& values() const { return values_; }
  ComplexArray<Scalar>& values() { return values_; }

  Complex operator()(Index row, Index col) const { return values_(row, col); }
  Complex& operator()(Index row, Index col) { return values_(row, col); }

  template <typename Other>
  Field<Other> cast() const {
    return Field<Other>(grid_.template cast<Other>(),
                        values_.template cast<std::complex<Other>>());
  }

 private:
  GridSpec<Scalar> grid_;
  ComplexArray<Scalar> values_;
};

/// exp(i*phi), exact at integer multiples of pi/2 so that a pi level is a true sign flip.
template <typename Scalar>
std::complex<Scalar> unit_phasor(Scalar phi) {
  const Scalar q = phi / (kPi<Scalar> / 2);
  if (std::nearbyint(q) == q && std::abs(q) < Scalar(1 << 20)) {
    switch (((long long)q % 4 + 4) % 4) {
      case 0: return {1, 0};
      case 1: return {0, 1};
      case 2: return {-1, 0};
      default: return {0, -1};
    }
  }
  return {std::cos(phi), std::sin(phi)};
}

/// e0 * exp(-(x^2 + y^2) / w0^2).
template <typename Scalar>
Field<Scalar> gaussian_source(const GridSpec<Scalar>& grid, Scalar w0, Scalar e0 = Scalar(1)) {
  grid.validate();
  if (!(w0 > 0) || !std::isfinite(w0) || !std::isfinite(e0))
    throw std::invalid_argument("gaussian_source: w0 must be positive and finite");
  if (w0 < 4 * grid.max_pitch()) {
    std::ostringstream msg;
    msg << "gaussian_source: waist " << w0 << " m is resolved by fewer than 4 pixels (pitch "
        << grid.max_pitch() << " m)";
    throw SamplingError(msg.str());
  }
  Field<Scalar> out(grid);
  for (Index j = 0; j < grid.ny; ++j) {
    const Scalar y = grid.y(j);
    for (Index i = 0; i < grid.nx; ++i) {
      const Scalar x = grid.x(i);
      out(j, i) = e0 * std::exp(-(x * x + y * y) / (w0 * w0));
    }
  }
  return out;
}

/// Waist-plane LG_0^ell mode: (sqrt2 r/w0)^|ell| exp(-r^2/w0^2) exp(i ell theta),
/// scaled so the ring maximum equals e0.
template <typename Scalar>
Field<Scalar> laguerre_gauss_source(const GridSpec<Scalar>& grid, Scalar w0, int ell,
                                    Scalar e0 = Scalar(1)) {
  if (ell == 0) return gaussian_source(grid, w0, e0);
  Field<Scalar> out = gaussian_source(grid, w0, e0);  // validates w0
  const Scalar a = Scalar(std::abs(ell));
  const Scalar log_peak = a / 2 * (std::log(a) - 1);
  for (Index j = 0; j < grid.ny; ++j) {
    const Scalar y = grid.y(j);
    for (Index i = 0; i < grid.nx; ++i) {
      const Scalar x = grid.x(i);
      const Scalar rho2 = (x * x + y * y) / (w0 * w0);
      if (rho2 == 0) {
        out(j, i) = 0;
        continue;
      }
      const Scalar amp = std::exp(a / 2 * std::log(2 * rho2) - rho2 - log_peak);
      out(j, i) = e0 * amp * unit_phasor(Scalar(ell) * std::atan2(y, x));
    }
  }
  return out;
}

/// out = in * exp(i phase), times the amplitude window when one is given.
template <typename Scalar>
Field<Scalar> apply_mask(const Field<Scalar>& field, const PhaseProfile<Scalar>& phase,
                         const RealArray<Scalar>* window = nullptr) {
  if (!field.grid().same_shape(phase.grid))
    throw DimensionError("apply_mask: phase profile grid does not match the field");
  ComplexArray<Scalar> v = field.values();
  if (window) {
    detail::require_shape(*window, field.grid(), "amplitude window");
    if (!window->allFinite() || (*window < 0).any() || (*window > 1).any())
      throw std::invalid_argument("apply_mask: window values must lie in [0, 1]");
  }
  for (Index j = 0; j < v.rows(); ++j)
    for (Index i = 0; i < v.cols(); ++i) {
      v(j, i) *= unit_phasor(phase.radians(j, i));
      if (window) v(j, i) *= (*window)(j, i);
    }
  return Field<Scalar>(field.grid(), std::move(v));
}

template <typename Scalar>
Field<Scalar> apply_mask(const Field<Scalar>& field, const PhaseProfile<Scalar>& phase,
                         const RealArray<Scalar>& window) {
  return apply_mask(field, phase, &window);
}

/// Amplitude-only transmission (phase zero).
template <typename Scalar>
Field<Scalar> apply_window(const Field<Scalar>& field, const RealArray<Scalar>& window) {
  detail::require_shape(window, field.grid(), "amplitude window");
  if (!window.allFinite() || (window < 0).any() || (window > 1).any())
    throw std::invalid_argument("apply_window: window values must lie in [0, 1]");
  return Field<Scalar>(field.grid(), field.values() * window.template cast<std::complex<Scalar>>());
}

/// dx * dy * sum |E|^2, accumulated in double.
template <typename Scalar>
Scalar energy(const Field<Scalar>& field) {
  const double s = field.values().abs2().template cast<double>().sum();
  return Scalar(s * double(field.grid().dx) * double(field.grid().dy));
}

template <typename Scalar>
IntensityMap<Scalar> intensity(const Field<Scalar>& field, bool normalize = false) {
  RealArray<Scalar> v = field.values().abs2();
  if (normalize) {
    const Scalar peak = v.maxCoeff();
    if (!(peak > 0)) throw AnalysisError("intensity: cannot normalise an identically zero field");
    v /= peak;
  }
  return IntensityMap<Scalar>(field.grid(), std::move(v));
}

}  // namespace twistlight
