#pragma once

#include <sstream>

#include "twistlight/errors.hpp"
#include "twistlight/grid.hpp"

namespace twistlight {

namespace detail {

template <typename Array, typename Scalar>
void require_shape(const Array& a, const GridSpec<Scalar>& grid, const char* what) {
  if (a.rows() != grid.ny || a.cols() != grid.nx) {
    std::ostringstream msg;
    msg << what << " is " << a.cols() << "x" << a.rows() << " but the grid is " << grid.nx << "x"
        << grid.ny;
    throw DimensionError(msg.str());
  }
}

}  // namespace detail

/// Continuous phase in radians.
template <typename Scalar = double>
struct PhaseProfile {
  GridSpec<Scalar> grid;
  RealArray<Scalar> radians;

  PhaseProfile(const GridSpec<Scalar>& g, RealArray<Scalar> values)
      : grid(g), radians(std::move(values)) {
    detail::require_shape(radians, grid, "phase profile");
    if (!radians.allFinite()) throw std::invalid_argument("phase profile has non-finite values");
  }
};

/// Surface relief in meters.
template <typename Scalar = double>
struct HeightMap {
  GridSpec<Scalar> grid;
  RealArray<Scalar> meters;

  HeightMap(const GridSpec<Scalar>& g, RealArray<Scalar> values)
      : grid(g), meters(std::move(values)) {
    detail::require_shape(meters, grid, "height map");
    if (!meters.allFinite() || (meters < 0).any())
      throw std::invalid_argument("height map must be finite and non-negative");
  }
};

/// Two-level lithography mask, values exactly 0 or 1.
template <typename Scalar = double>
struct BinaryMask {
  GridSpec<Scalar> grid;
  MaskArray bits;

  BinaryMask(const GridSpec<Scalar>& g, MaskArray values) : grid(g), bits(std::move(values)) {
    detail::require_shape(bits, grid, "binary mask");
    if ((bits > 1).any()) throw std::invalid_argument("binary mask values must be 0 or 1");
  }

  double fill_factor() const {
    return double(bits.template cast<Index>().sum()) / double(bits.size());
  }
};

template <typename Scalar = double>
struct IntensityMap {
  GridSpec<Scalar> grid;
  RealArray<Scalar> values;

  IntensityMap(const GridSpec<Scalar>& g, RealArray<Scalar> v) : grid(g), values(std::move(v)) {
    detail::require_shape(values, grid, "intensity map");
    if (!values.allFinite() || (values < 0).any())
      throw std::invalid_argument("intensity must be finite and non-negative");
  }
};

}  // namespace twistlight
