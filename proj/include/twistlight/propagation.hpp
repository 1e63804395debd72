#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>

#include "twistlight/errors.hpp"
#include "twistlight/fft.hpp"
#include "twistlight/field.hpp"

namespace twistlight {

enum class PropagationMethod { paraxial, exact };
enum class Axis { x, y };

struct PropagationPlan {
  double distance = 0;
  PropagationMethod method = PropagationMethod::paraxial;
  /// Unset: on when |z| exceeds n d^2 / lambda on either axis.
  std::optional<bool> band_limit;

  template <typename Scalar>
  bool band_limited(const GridSpec<Scalar>& g) const {
    if (band_limit) return *band_limit;
    const double lam = double(g.wavelength);
    const double zx = double(g.nx) * double(g.dx) * double(g.dx) / lam;
    const double zy = double(g.ny) * double(g.dy) * double(g.dy) / lam;
    return std::abs(distance) > std::min(zx, zy);
  }
};

enum class LensKind { spherical, cylindrical };

struct LensSpec {
  double focal_length = 0.1;
  LensKind kind = LensKind::spherical;
  Axis axis = Axis::x;  // cylindrical only

  void validate() const {
    if (!(focal_length != 0) || !std::isfinite(focal_length))
      throw std::invalid_argument("lens focal length must be finite and nonzero");
  }
};

namespace detail {

using PhasorVector = Eigen::Array<std::complex<double>, Eigen::Dynamic, 1>;

// Largest |f| the transfer function can carry without aliasing its own chirp.
inline double band_edge(PropagationMethod method, double window, double lambda, double z) {
  const double az = std::abs(z);
  if (method == PropagationMethod::paraxial) return window / (2 * lambda * az);
  return 1.0 / (lambda * std::sqrt(std::pow(2 * az / window, 2) + 1));
}

template <typename Scalar>
void multiply_separable(ComplexArray<Scalar>& a, const PhasorVector& along_x,
                        const PhasorVector& along_y) {
  for (Index j = 0; j < a.rows(); ++j) {
    const std::complex<double> py = along_y(j);
    for (Index i = 0; i < a.cols(); ++i)
      a(j, i) *= std::complex<Scalar>(py * along_x(i));
  }
}

}  // namespace detail

/// Angular-spectrum propagation over plan.distance.
///
/// Paraxial: H = exp(-i pi lambda z (fx^2 + fy^2)).
/// Exact: H = exp(i z sqrt(k^2 - kx^2 - ky^2)), evanescent components dropped.
template <typename Scalar>
Field<Scalar> propagate(const Field<Scalar>& field, const PropagationPlan& plan) {
  if (!std::isfinite(plan.distance)) throw std::invalid_argument("propagation distance must be finite");
  const GridSpec<Scalar>& g = field.grid();
  if (plan.distance == 0) return field;

  const double lam = double(g.wavelength), z = plan.distance;
  const auto fx = fft::frequencies<double>(g.nx, double(g.dx));
  const auto fy = fft::frequencies<double>(g.ny, double(g.dy));
  const bool limit = plan.band_limited(g);
  const double fx_edge = detail::band_edge(plan.method, double(g.window_x()), lam, z);
  const double fy_edge = detail::band_edge(plan.method, double(g.window_y()), lam, z);

  ComplexArray<Scalar> a = field.values();
  fft::forward(a);

  if (plan.method == PropagationMethod::paraxial) {
    detail::PhasorVector hx(g.nx), hy(g.ny);
    for (Index i = 0; i < g.nx; ++i)
      hx(i) = (limit && std::abs(fx(i)) > fx_edge)
                  ? 0.0
                  : unit_phasor(-kPi<double> * lam * z * fx(i) * fx(i));
    for (Index j = 0; j < g.ny; ++j)
      hy(j) = (limit && std::abs(fy(j)) > fy_edge)
                  ? 0.0
                  : unit_phasor(-kPi<double> * lam * z * fy(j) * fy(j));
    detail::multiply_separable(a, hx, hy);
  } else {
    const double k2 = std::pow(kTwoPi<double> / lam, 2);
    for (Index j = 0; j < g.ny; ++j) {
      const double ky = kTwoPi<double> * fy(j);
      const bool y_out = limit && std::abs(fy(j)) > fy_edge;
      for (Index i = 0; i < g.nx; ++i) {
        const double kx = kTwoPi<double> * fx(i);
        const double rad = k2 - kx * kx - ky * ky;
        if (rad < 0 || y_out || (limit && std::abs(fx(i)) > fx_edge)) {
          a(j, i) = 0;
          continue;
        }
        a(j, i) *= std::complex<Scalar>(unit_phasor(z * std::sqrt(rad)));
      }
    }
  }
  fft::inverse(a);
  return Field<Scalar>(g, std::move(a));
}

/// Thin-lens quadratic phase exp(-i pi (x^2 + y^2) / (lambda f)), or one axis for a
/// cylindrical lens. Throws SamplingError when the chirp aliases inside the grid.
template <typename Scalar>
Field<Scalar> apply_lens(const Field<Scalar>& field, const LensSpec& lens) {
  lens.validate();
  const GridSpec<Scalar>& g = field.grid();
  const double lam = double(g.wavelength), f = lens.focal_length;
  const bool on_x = lens.kind == LensKind::spherical || lens.axis == Axis::x;
  const bool on_y = lens.kind == LensKind::spherical || lens.axis == Axis::y;

  // |d phi/dx| dx < pi  <=>  |x| < lambda |f| / (2 dx)
  auto check = [&](bool active, Index n, double d, const char* name) {
    if (!active) return;
    const double safe = lam * std::abs(f) / (2 * d);
    const double edge = double(n / 2) * d;
    if (edge >= safe) {
      std::ostringstream msg;
      msg << "lens f = " << f << " m aliases along " << name << " beyond radius " << safe
          << " m (grid half-width " << edge << " m)";
      throw SamplingError(msg.str());
    }
  };
  check(on_x, g.nx, double(g.dx), "x");
  check(on_y, g.ny, double(g.dy), "y");

  detail::PhasorVector px = detail::PhasorVector::Ones(g.nx), py = detail::PhasorVector::Ones(g.ny);
  if (on_x)
    for (Index i = 0; i < g.nx; ++i) {
      const double x = double(g.x(i));
      px(i) = unit_phasor(-kPi<double> * x * x / (lam * f));
    }
  if (on_y)
    for (Index j = 0; j < g.ny; ++j) {
      const double y = double(g.y(j));
      py(j) = unit_phasor(-kPi<double> * y * y / (lam * f));
    }
  ComplexArray<Scalar> a = field.values();
  detail::multiply_separable(a, px, py);
  return Field<Scalar>(g, std::move(a));
}

/// Single cylindrical lens followed by free space to its focal plane.
template <typename Scalar>
Field<Scalar> mode_convert(const Field<Scalar>& field, double f_cyl, Axis axis = Axis::x,
                           PropagationMethod method = PropagationMethod::paraxial,
                           std::optional<bool> band_limit = std::nullopt) {
  if (!(f_cyl > 0)) throw std::invalid_argument("mode_convert needs a positive focal length");
  const Field<Scalar> lensed = apply_lens(field, LensSpec{f_cyl, LensKind::cylindrical, axis});
  return propagate(lensed, PropagationPlan{f_cyl, method, band_limit});
}

}  // namespace twistlight
