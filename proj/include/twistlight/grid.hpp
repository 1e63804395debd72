#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Core>

namespace twistlight {

using Index = Eigen::Index;

// Row-major so that row j / column i maps directly onto the raw export layout
// and onto FFTW's C ordering.
template <typename Scalar>
using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using ComplexArray =
    Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MaskArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;

template <typename Scalar>
inline constexpr Scalar kTwoPi = Scalar(2) * std::numbers::pi_v<Scalar>;

/// Transverse sampling of a monochromatic scalar field.
///
/// Pixel (i, j) sits at x = (i - nx/2) dx, y = (j - ny/2) dy, so the optical
/// axis falls exactly on sample (nx/2, ny/2). Arrays are indexed (row j, col i).
template <typename Scalar = double>
struct GridSpec {
  Index nx = 1024;
  Index ny = 1024;
  Scalar dx = Scalar(5e-6);
  Scalar dy = Scalar(5e-6);
  Scalar wavelength = Scalar(266e-9);

  GridSpec() = default;
  GridSpec(Index nx_, Index ny_, Scalar dx_, Scalar dy_, Scalar wavelength_)
      : nx(nx_), ny(ny_), dx(dx_), dy(dy_), wavelength(wavelength_) {
    validate();
  }

  static GridSpec square(Index n, Scalar pitch, Scalar wavelength_) {
    return GridSpec(n, n, pitch, pitch, wavelength_);
  }

  void validate() const {
    std::ostringstream why;
    if (nx < 16 || ny < 16 || nx % 2 != 0 || ny % 2 != 0) {
      why << "grid dimensions must be even and >= 16 (got " << nx << "x" << ny << ")";
    } else if (!(dx > 0) || !(dy > 0) || !std::isfinite(dx) || !std::isfinite(dy)) {
      why << "pixel pitch must be positive and finite";
    } else if (!(wavelength > 0) || !std::isfinite(wavelength)) {
      why << "wavelength must be positive and finite";
    } else {
      return;
    }
    throw std::invalid_argument(why.str());
  }

  Scalar window_x() const { return Scalar(nx) * dx; }
  Scalar window_y() const { return Scalar(ny) * dy; }
  Scalar x(Index i) const { return Scalar(i - nx / 2) * dx; }
  Scalar y(Index j) const { return Scalar(j - ny / 2) * dy; }
  Scalar pixel_area() const { return dx * dy; }
  Scalar max_pitch() const { return dx > dy ? dx : dy; }
  Scalar min_pitch() const { return dx < dy ? dx : dy; }

  bool same_shape(const GridSpec& other) const { return nx == other.nx && ny == other.ny; }

  bool operator==(const GridSpec&) const = default;

  template <typename Other>
  GridSpec<Other> cast() const {
    return GridSpec<Other>(nx, ny, Other(dx), Other(dy), Other(wavelength));
  }
};

/// Radius from the optical axis at every pixel.
template <typename Scalar>
RealArray<Scalar> radius_map(const GridSpec<Scalar>& grid) {
  RealArray<Scalar> r(grid.ny, grid.nx);
  for (Index j = 0; j < grid.ny; ++j) {
    const Scalar y = grid.y(j);
    for (Index i = 0; i < grid.nx; ++i) r(j, i) = std::hypot(grid.x(i), y);
  }
  return r;
}

/// Full-range azimuth atan2(y, x) in (-pi, pi]; the on-axis pixel gets 0.
template <typename Scalar>
RealArray<Scalar> azimuth_map(const GridSpec<Scalar>& grid) {
  RealArray<Scalar> a(grid.ny, grid.nx);
  for (Index j = 0; j < grid.ny; ++j) {
    const Scalar y = grid.y(j);
    for (Index i = 0; i < grid.nx; ++i) {
      const Scalar x = grid.x(i);
      a(j, i) = (x == 0 && y == 0) ? Scalar(0) : std::atan2(y, x);
    }
  }
  return a;
}

}  // namespace twistlight
