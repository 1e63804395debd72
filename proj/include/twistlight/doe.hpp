#pragma once

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>

#include "twistlight/errors.hpp"
#include "twistlight/field.hpp"
#include "twistlight/grid.hpp"
#include "twistlight/maps.hpp"

namespace twistlight {

/// How a binarized fork pattern acts on light: open/opaque or 0/pi phase.
enum class GratingEncoding { amplitude, phase };

struct ForkGratingSpec {
  int m = 2;
  double period = 100e-6;  // x0
  double alpha = 1.0;
  double threshold = 0.5;
  GratingEncoding encoding = GratingEncoding::amplitude;

  template <typename Scalar>
  void validate(const GridSpec<Scalar>& grid) const {
    if (!(period > 0) || !std::isfinite(period))
      throw std::invalid_argument("fork grating period must be positive");
    if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("alpha must lie in (0, 1]");
    if (!(threshold >= 0 && threshold <= alpha))
      throw std::invalid_argument("threshold must lie in [0, alpha]");
    if (period < 4 * double(grid.dx)) {
      std::ostringstream msg;
      msg << "fork grating period " << period << " m has fewer than 4 samples at dx = " << grid.dx;
      throw SamplingError(msg.str());
    }
  }
};

/// Stepped: literal sector staircase. Ramped: continuous helix, sectors only
/// index the fabrication zones.
enum class SppProfile { stepped, ramped };

struct SppSpec {
  int ell = 64;
  int sectors = 64;
  double wavelength = 266e-9;
  double n_plate = 1.49;
  double n_medium = 1.0;
  double h0 = 0.0;
  double aperture_d = 25.6e-3;
  SppProfile profile = SppProfile::stepped;

  /// h_s = |ell| lambda / (n - n0), the height change over one turn.
  double total_height() const { return std::abs(ell) * wavelength / (n_plate - n_medium); }
  double step_height() const { return total_height() / sectors; }

  void validate() const {
    if (sectors < 1) throw std::invalid_argument("SPP needs at least one sector");
    if (!(n_plate > n_medium)) throw std::invalid_argument("SPP needs n_plate > n_medium");
    if (!(wavelength > 0)) throw std::invalid_argument("SPP wavelength must be positive");
    if (!(h0 >= 0)) throw std::invalid_argument("SPP base thickness must be >= 0");
    if (!(aperture_d > 0)) throw std::invalid_argument("SPP aperture must be positive");
  }
};

struct AxiconSpec {
  int m = 3;
  double k_r = kTwoPi<double> / 100e-6;
  double aperture_d = 6e-3;

  static AxiconSpec from_period(int m, double period, double aperture_d) {
    if (!(period > 0)) throw std::invalid_argument("axicon period must be positive");
    return AxiconSpec{m, kTwoPi<double> / period, aperture_d};
  }
  double period() const { return kTwoPi<double> / k_r; }

  template <typename Scalar>
  void validate(const GridSpec<Scalar>& grid) const {
    if (!(k_r > 0) || !std::isfinite(k_r)) throw std::invalid_argument("axicon k_r must be positive");
    if (!(aperture_d > 0)) throw std::invalid_argument("axicon aperture must be positive");
    if (period() < 4 * double(grid.max_pitch())) {
      std::ostringstream msg;
      msg << "axicon period " << period() << " m has fewer than 4 samples per period";
      throw SamplingError(msg.str());
    }
  }
};

struct ApodizationSpec {
  double r0 = 4.5e-3;
  double p_out = 8;
  double rc = 300e-6;
  double q_in = 2;

  void validate() const {
    if (!(rc > 0 && r0 > rc)) throw std::invalid_argument("apodization needs r0 > rc > 0");
    if (!(p_out >= 1 && q_in >= 1)) throw std::invalid_argument("apodization exponents must be >= 1");
  }
};

/// Phase together with the amplitude window it must be applied with.
template <typename Scalar>
struct Transmission {
  PhaseProfile<Scalar> phase;
  RealArray<Scalar> window;
};

/// 1 inside the circle of diameter d about the axis, 0 outside.
template <typename Scalar>
RealArray<Scalar> aperture_window(const GridSpec<Scalar>& grid, double diameter) {
  if (!(diameter > 0)) throw std::invalid_argument("aperture diameter must be positive");
  const Scalar radius = Scalar(diameter / 2);
  return (radius_map(grid) <= radius).template cast<Scalar>();
}

/// Phi = 2 pi x / x0 + m atan2(y, x).
template <typename Scalar>
PhaseProfile<Scalar> fork_phase(const GridSpec<Scalar>& grid, const ForkGratingSpec& spec) {
  spec.validate(grid);
  RealArray<Scalar> phi = Scalar(spec.m) * azimuth_map(grid);
  const Scalar kx = kTwoPi<Scalar> / Scalar(spec.period);
  for (Index i = 0; i < grid.nx; ++i) phi.col(i) += kx * grid.x(i);
  return PhaseProfile<Scalar>(grid, std::move(phi));
}

/// 1 where alpha (1 + cos phi) / 2 exceeds the threshold.
template <typename Scalar>
BinaryMask<Scalar> binarize(const PhaseProfile<Scalar>& phase, double alpha = 1.0,
                            double threshold = 0.5) {
  if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(threshold >= 0 && threshold <= alpha))
    throw std::invalid_argument("threshold must lie in [0, alpha]");
  const Scalar a = Scalar(alpha), t = Scalar(threshold);
  MaskArray bits = (Scalar(0.5) * a * (1 + phase.radians.cos()) > t).template cast<std::uint8_t>();
  return BinaryMask<Scalar>(phase.grid, std::move(bits));
}

/// Binarized fork grating as a transmission: open/opaque or 0/pi.
template <typename Scalar>
Transmission<Scalar> fork_transmission(const GridSpec<Scalar>& grid, const ForkGratingSpec& spec) {
  const BinaryMask<Scalar> mask = binarize(fork_phase(grid, spec), spec.alpha, spec.threshold);
  const RealArray<Scalar> b = mask.bits.template cast<Scalar>();
  if (spec.encoding == GratingEncoding::amplitude)
    return {PhaseProfile<Scalar>(grid, RealArray<Scalar>::Zero(grid.ny, grid.nx)), b};
  return {PhaseProfile<Scalar>(grid, kPi<Scalar> * b), RealArray<Scalar>::Ones(grid.ny, grid.nx)};
}

template <typename Scalar>
struct SppMaps {
  PhaseProfile<Scalar> phase;
  HeightMap<Scalar> height;
};

/// Spiral phase plate. Sector s = floor(theta S / 2 pi) with theta in [0, 2 pi)
/// counter-clockwise from +x. Negative ell reverses the staircase.
template <typename Scalar>
SppMaps<Scalar> spp_phase(const GridSpec<Scalar>& grid, const SppSpec& spec) {
  spec.validate();
  const double window = std::min(double(grid.window_x()), double(grid.window_y()));
  if (spec.aperture_d > window) {
    std::ostringstream msg;
    msg << "SPP aperture " << spec.aperture_d << " m exceeds the " << window << " m window";
    throw std::invalid_argument(msg.str());
  }
  const int S = spec.sectors;
  const double base_phase = kTwoPi<double> * spec.n_plate * spec.h0 / spec.wavelength;
  const double hs = spec.total_height();
  const double radius = spec.aperture_d / 2;

  RealArray<Scalar> phase(grid.ny, grid.nx), height(grid.ny, grid.nx);
  for (Index j = 0; j < grid.ny; ++j) {
    const double y = double(grid.y(j));
    for (Index i = 0; i < grid.nx; ++i) {
      const double x = double(grid.x(i));
      if (std::hypot(x, y) > radius) {
        phase(j, i) = 0;
        height(j, i) = Scalar(spec.h0);
        continue;
      }
      double theta = (x == 0 && y == 0) ? 0.0 : std::atan2(y, x);
      if (theta < 0) theta += kTwoPi<double>;
      if (theta >= kTwoPi<double>) theta = 0;
      int s = int(std::floor(theta * S / kTwoPi<double>));
      if (s >= S) s = S - 1;
      double turn;  // fraction of a revolution, in [0, 1)
      if (spec.profile == SppProfile::stepped)
        turn = double(s) / S;
      else
        turn = theta / kTwoPi<double>;
      const double phi = spec.ell * kTwoPi<double> * turn + base_phase;
      // Height follows the phase: a negative charge climbs the other way round.
      const double h = spec.ell >= 0 ? hs * turn
                                     : hs * (spec.profile == SppProfile::stepped
                                                 ? double(S - 1 - s) / S
                                                 : 1.0 - turn);
      phase(j, i) = Scalar(phi);
      height(j, i) = Scalar(h + spec.h0);
    }
  }
  return {PhaseProfile<Scalar>(grid, std::move(phase)), HeightMap<Scalar>(grid, std::move(height))};
}

/// Binary spiral axicon: 0 where sin(m phi - k_r r) >= 0, pi elsewhere; 0 outside the aperture.
template <typename Scalar>
PhaseProfile<Scalar> axicon_phase(const GridSpec<Scalar>& grid, const AxiconSpec& spec) {
  spec.validate(grid);
  const double radius = spec.aperture_d / 2;
  RealArray<Scalar> phase(grid.ny, grid.nx);
  for (Index j = 0; j < grid.ny; ++j) {
    const double y = double(grid.y(j));
    for (Index i = 0; i < grid.nx; ++i) {
      const double x = double(grid.x(i));
      const double r = std::hypot(x, y);
      const double phi = (x == 0 && y == 0) ? 0.0 : std::atan2(y, x);
      const bool upper = std::sin(spec.m * phi - spec.k_r * r) >= 0;
      phase(j, i) = (r > radius || upper) ? Scalar(0) : kPi<Scalar>;
    }
  }
  return PhaseProfile<Scalar>(grid, std::move(phase));
}

/// h = lambda / (2 (n - 1)): a pi step in air.
inline double binary_layer_thickness(double wavelength, double n) {
  if (!(n > 1)) throw std::invalid_argument("binary_layer_thickness needs n > 1");
  if (!(wavelength > 0)) throw std::invalid_argument("wavelength must be positive");
  return wavelength / (2 * (n - 1));
}

/// A(R) = exp(-(R/r0)^p) (1 - exp(-(R/rc)^q)).
template <typename Scalar>
RealArray<Scalar> apodization_window(const GridSpec<Scalar>& grid, const ApodizationSpec& spec) {
  spec.validate();
  const RealArray<Scalar> r = radius_map(grid);
  const RealArray<Scalar> outer = (-(r / Scalar(spec.r0)).pow(Scalar(spec.p_out))).exp();
  const RealArray<Scalar> inner = 1 - (-(r / Scalar(spec.rc)).pow(Scalar(spec.q_in))).exp();
  return outer * inner;
}

/// Diffraction order n of a charge-m fork carries ell = n m.
constexpr int predicted_charge(int order, int m) { return order * m; }

}  // namespace twistlight
