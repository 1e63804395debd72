#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

#include <Eigen/Eigenvalues>

#include "twistlight/errors.hpp"
#include "twistlight/fft.hpp"
#include "twistlight/field.hpp"
#include "twistlight/propagation.hpp"

namespace twistlight {

struct Point {
  double x = 0;
  double y = 0;
};

namespace detail {

/// Bilinear sample at a physical position; zero outside the grid.
template <typename Array, typename Scalar>
typename Array::Scalar bilinear(const Array& a, const GridSpec<Scalar>& g, double x, double y) {
  using V = typename Array::Scalar;
  const double fi = x / double(g.dx) + double(g.nx / 2);
  const double fj = y / double(g.dy) + double(g.ny / 2);
  const double i0f = std::floor(fi), j0f = std::floor(fj);
  const Index i0 = Index(i0f), j0 = Index(j0f);
  if (i0 < 0 || j0 < 0 || i0 + 1 >= g.nx || j0 + 1 >= g.ny) {
    if (i0 >= 0 && j0 >= 0 && i0 < g.nx && j0 < g.ny && fi == i0f && fj == j0f) return a(j0, i0);
    return V(0);
  }
  const auto tx = typename Array::RealScalar(fi - i0f);
  const auto ty = typename Array::RealScalar(fj - j0f);
  using R = typename Array::RealScalar;
  return (R(1) - ty) * ((R(1) - tx) * a(j0, i0) + tx * a(j0, i0 + 1)) +
         ty * ((R(1) - tx) * a(j0 + 1, i0) + tx * a(j0 + 1, i0 + 1));
}

/// Distance from a point to the nearest grid edge sample.
template <typename Scalar>
double inscribed_radius(const GridSpec<Scalar>& g, Point c) {
  const double x_lo = double(g.x(0)), x_hi = double(g.x(g.nx - 1));
  const double y_lo = double(g.y(0)), y_hi = double(g.y(g.ny - 1));
  if (c.x < x_lo || c.x > x_hi || c.y < y_lo || c.y > y_hi) {
    std::ostringstream msg;
    msg << "centre (" << c.x << ", " << c.y << ") m lies outside the grid";
    throw std::invalid_argument(msg.str());
  }
  return std::min({c.x - x_lo, x_hi - c.x, c.y - y_lo, y_hi - c.y});
}

// Vertex offset of the parabola through three equally spaced samples, in [-0.5, 0.5].
inline double parabolic_offset(double left, double mid, double right) {
  const double denom = left - 2 * mid + right;
  if (denom >= 0) return 0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

}  // namespace detail

template <typename Scalar>
Point intensity_centroid(const IntensityMap<Scalar>& map) {
  const GridSpec<Scalar>& g = map.grid;
  double s = 0, sx = 0, sy = 0;
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) {
      const double v = double(map.values(j, i));
      s += v;
      sx += v * double(g.x(i));
      sy += v * double(g.y(j));
    }
  if (!(s > 0)) throw AnalysisError("centroid of an all-zero intensity map");
  return {sx / s, sy / s};
}

// ---------------------------------------------------------------- radial profile

struct RadialProfile {
  std::vector<double> bin_centers;  // meters
  std::vector<double> values;
  std::vector<long> counts;  // pixels per bin; empty bins hold 0
  Point center;
  double bin_width = 0;

  std::size_t peak_bin() const {
    return std::size_t(std::max_element(values.begin(), values.end()) - values.begin());
  }

  /// Radius of the maximum, refined by a parabola through the neighbouring bins.
  double peak_radius() const {
    const std::size_t k = peak_bin();
    if (k == 0 || k + 1 >= values.size()) return bin_centers[k];
    return bin_centers[k] + bin_width * detail::parabolic_offset(values[k - 1], values[k], values[k + 1]);
  }

  /// Linear interpolation between bin centres; clamps at both ends.
  double value_at(double r) const {
    if (r <= bin_centers.front()) return values.front();
    if (r >= bin_centers.back()) return values.back();
    const double t = (r - bin_centers.front()) / bin_width;
    const std::size_t k = std::size_t(t);
    const double w = t - double(k);
    return (1 - w) * values[k] + w * values[k + 1];
  }
};

/// Bin k averages pixels with radius in [k dr, (k+1) dr), dr = r_max / n_bins, where
/// r_max is the largest circle about the centre that fits inside the grid.
template <typename Scalar>
RadialProfile radial_profile(const IntensityMap<Scalar>& map, std::optional<Point> center,
                             int n_bins) {
  if (n_bins < 8) throw std::invalid_argument("radial_profile needs at least 8 bins");
  const GridSpec<Scalar>& g = map.grid;
  const Point c = center ? *center : intensity_centroid(map);
  const double r_max = detail::inscribed_radius(g, c);
  if (!(r_max > 0)) throw std::invalid_argument("radial_profile: centre lies on the grid edge");

  RadialProfile p;
  p.center = c;
  p.bin_width = r_max / n_bins;
  std::vector<double> sums(std::size_t(n_bins), 0.0);
  p.counts.assign(std::size_t(n_bins), 0);
  for (Index j = 0; j < g.ny; ++j) {
    const double dy = double(g.y(j)) - c.y;
    for (Index i = 0; i < g.nx; ++i) {
      const double dx = double(g.x(i)) - c.x;
      const double r = std::sqrt(dx * dx + dy * dy);
      const long k = long(r / p.bin_width);
      if (k >= n_bins) continue;
      sums[std::size_t(k)] += double(map.values(j, i));
      ++p.counts[std::size_t(k)];
    }
  }
  p.bin_centers.resize(std::size_t(n_bins));
  p.values.resize(std::size_t(n_bins));
  for (int k = 0; k < n_bins; ++k) {
    p.bin_centers[std::size_t(k)] = (k + 0.5) * p.bin_width;
    const long n = p.counts[std::size_t(k)];
    p.values[std::size_t(k)] = n > 0 ? sums[std::size_t(k)] / double(n) : 0.0;
  }
  return p;
}

/// One bin per pixel pitch out to the inscribed radius.
template <typename Scalar>
RadialProfile radial_profile(const IntensityMap<Scalar>& map, std::optional<Point> center = {}) {
  const Point c = center ? *center : intensity_centroid(map);
  const double r_max = detail::inscribed_radius(map.grid, c);
  const int bins = std::max(8, int(r_max / double(map.grid.max_pitch())));
  return radial_profile(map, c, bins);
}

// ---------------------------------------------------------------- OAM spectrum

struct OamOptions {
  int samples = 720;  // azimuthal samples per ring, raised to 4 max|ell| when needed
  std::optional<Point> center;  // default: optical axis
};

struct OamSpectrum {
  int ell_min = 0;
  int ell_max = 0;
  std::vector<double> power;  // sums to 1 over [ell_min, ell_max]
  int dominant_ell = 0;
  double mean_ell = 0;
  double bandwidth = 0;  // standard deviation of ell
  double in_range_fraction = 0;  // in-range share of all resolved azimuthal power
  bool range_warning = false;  // strongest ell overall lies outside the range

  double at(int ell) const {
    if (ell < ell_min || ell > ell_max) return 0.0;
    return power[std::size_t(ell - ell_min)];
  }
};

namespace detail {

// Smallest |ell| wins ties, then the positive sign.
inline bool ell_beats(double p, int ell, double best_p, int best_ell) {
  if (p != best_p) return p > best_p;
  if (std::abs(ell) != std::abs(best_ell)) return std::abs(ell) < std::abs(best_ell);
  return ell > best_ell;
}

}  // namespace detail

/// P_ell = integral |c_ell(r)|^2 r dr with c_ell(r) the azimuthal Fourier coefficient
/// of the field on a ring of radius r, normalised over [ell_min, ell_max].
template <typename Scalar>
OamSpectrum oam_spectrum(const Field<Scalar>& field, int ell_min, int ell_max,
                         const OamOptions& opt = {}) {
  if (ell_max < ell_min) throw std::invalid_argument("oam_spectrum: ell_max < ell_min");
  const GridSpec<Scalar>& g = field.grid();
  const Point c = opt.center.value_or(Point{});
  const double r_max = detail::inscribed_radius(g, c);
  const double dr = double(g.min_pitch());
  const int max_abs = std::max(std::abs(ell_min), std::abs(ell_max));
  const Index n_theta = std::max<Index>(std::max(opt.samples, 16), 4 * Index(max_abs));
  const Index n_rings = Index(std::floor((r_max - double(g.max_pitch())) / dr)) + 1;
  if (n_rings < 2) throw std::invalid_argument("oam_spectrum: grid too small");

  ComplexArray<Scalar> rings(n_rings, n_theta);
  for (Index k = 0; k < n_rings; ++k) {
    const double r = double(k) * dr;
    for (Index t = 0; t < n_theta; ++t) {
      const double th = kTwoPi<double> * double(t) / double(n_theta);
      rings(k, t) = detail::bilinear(field.values(), g, c.x + r * std::cos(th), c.y + r * std::sin(th));
    }
  }
  fft::forward_rows(rings);

  // Trapezoid in r with weight r; the r = 0 ring carries zero weight.
  std::vector<double> all(std::size_t(n_theta), 0.0);
  for (Index k = 1; k < n_rings; ++k) {
    const double r = double(k) * dr;
    const double w = (k == n_rings - 1 ? 0.5 : 1.0) * r * dr;
    for (Index t = 0; t < n_theta; ++t)
      all[std::size_t(t)] += w * double(std::norm(rings(k, t))) / double(n_theta * n_theta);
  }
  auto bin_of = [&](int ell) { return std::size_t(((ell % n_theta) + n_theta) % n_theta); };

  OamSpectrum s;
  s.ell_min = ell_min;
  s.ell_max = ell_max;
  s.power.resize(std::size_t(ell_max - ell_min + 1));
  double in_range = 0;
  for (int ell = ell_min; ell <= ell_max; ++ell) {
    s.power[std::size_t(ell - ell_min)] = all[bin_of(ell)];
    in_range += all[bin_of(ell)];
  }
  double total = 0;
  for (double v : all) total += v;
  if (!(in_range > 0)) throw AnalysisError("oam_spectrum: no power in the requested range (zero field?)");
  for (double& v : s.power) v /= in_range;
  s.in_range_fraction = in_range / total;

  double best = -1;
  for (int ell = ell_min; ell <= ell_max; ++ell)
    if (detail::ell_beats(s.at(ell), ell, best, s.dominant_ell)) {
      best = s.at(ell);
      s.dominant_ell = ell;
    }
  double mean = 0, var = 0;
  for (int ell = ell_min; ell <= ell_max; ++ell) mean += ell * s.at(ell);
  for (int ell = ell_min; ell <= ell_max; ++ell) var += (ell - mean) * (ell - mean) * s.at(ell);
  s.mean_ell = mean;
  s.bandwidth = std::sqrt(var);

  // Strongest resolved index overall, mapped to (-N/2, N/2].
  double best_all = -1;
  int ell_all = 0;
  for (Index t = 0; t < n_theta; ++t) {
    const int ell = int(t <= n_theta / 2 ? t : t - n_theta);
    if (detail::ell_beats(all[std::size_t(t)], ell, best_all, ell_all)) {
      best_all = all[std::size_t(t)];
      ell_all = ell;
    }
  }
  s.range_warning = ell_all < ell_min || ell_all > ell_max;
  return s;
}

// ---------------------------------------------------------------- HG fringes

struct FringeReport {
  int count = 0;
  double correlation = 0;  // x-y correlation of the intensity distribution
  double tilt = 0;  // physical angle of the stripe-row axis, radians
  double eigen_ratio = 0;  // minor / major second-moment eigenvalue
  double contrast = 0;  // 1 - deepest inter-fringe dip / weakest counted peak
  std::vector<double> profile;  // projection along the stripe-row axis
};

/// Stripe analysis of a cylindrical-lens output. The pattern is located in
/// coordinates standardised by the per-axis second moments, where the converted
/// beam's stripe row lies on a diagonal; the projection along that diagonal
/// (integrated across it) is scanned for maxima above 10% of its peak that
/// dominate +-2 samples.
template <typename Scalar>
FringeReport hg_fringe_analysis(const IntensityMap<Scalar>& map) {
  const GridSpec<Scalar>& g = map.grid;
  const Point c = intensity_centroid(map);
  double s = 0, sxx = 0, syy = 0, sxy = 0;
  for (Index j = 0; j < g.ny; ++j) {
    const double y = double(g.y(j)) - c.y;
    for (Index i = 0; i < g.nx; ++i) {
      const double x = double(g.x(i)) - c.x;
      const double v = double(map.values(j, i));
      s += v;
      sxx += v * x * x;
      syy += v * y * y;
      sxy += v * x * y;
    }
  }
  sxx /= s;
  syy /= s;
  sxy /= s;
  const double sx = std::sqrt(sxx), sy = std::sqrt(syy);
  if (!(sx > 0 && sy > 0)) throw AnalysisError("hg_fringe_analysis: intensity has no spatial extent");

  FringeReport rep;
  rep.correlation = sxy / (sx * sy);
  Eigen::Matrix2d cov;
  cov << sxx, sxy, sxy, syy;
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cov).eigenvalues();
  rep.eigen_ratio = ev(0) / ev(1);

  const double sgn = rep.correlation < 0 ? -1.0 : 1.0;
  const double a = std::sqrt(0.5);
  const double mu = a, mv = a * sgn;  // stripe-row axis in (u, v)
  const double nu = -a * sgn, nv = a;  // across it
  rep.tilt = std::atan2(mv * sy, mu * sx);

  constexpr int kT = 401, kS = 161;
  constexpr double kSpan = 4.0;
  rep.profile.assign(kT, 0.0);
  for (int t = 0; t < kT; ++t) {
    const double tt = -kSpan + 2 * kSpan * t / (kT - 1);
    double acc = 0;
    for (int q = 0; q < kS; ++q) {
      const double ss = -kSpan + 2 * kSpan * q / (kS - 1);
      const double u = tt * mu + ss * nu, v = tt * mv + ss * nv;
      acc += double(detail::bilinear(map.values, g, c.x + sx * u, c.y + sy * v));
    }
    rep.profile[std::size_t(t)] = acc;
  }

  const double peak = *std::max_element(rep.profile.begin(), rep.profile.end());
  std::vector<int> maxima;
  for (int t = 0; t < kT; ++t) {
    const double v = rep.profile[std::size_t(t)];
    if (v < 0.1 * peak) continue;
    bool ok = true;
    for (int d = -2; d <= 2 && ok; ++d) {
      const int u = t + d;
      if (d == 0 || u < 0 || u >= kT) continue;
      const double w = rep.profile[std::size_t(u)];
      ok = d < 0 ? v > w : v >= w;
    }
    if (ok) maxima.push_back(t);
  }
  rep.count = int(maxima.size());
  if (maxima.size() >= 2) {
    double weakest = peak, dip = peak;
    for (int t : maxima) weakest = std::min(weakest, rep.profile[std::size_t(t)]);
    for (int t = maxima.front(); t <= maxima.back(); ++t) dip = std::min(dip, rep.profile[std::size_t(t)]);
    rep.contrast = 1 - dip / weakest;
  }
  if (rep.eigen_ratio > 0.9 && rep.contrast < 0.05)
    throw AnalysisError("hg_fringe_analysis: round pattern without fringes (not a converted vortex)");
  return rep;
}

template <typename Scalar>
int count_hg_fringes(const IntensityMap<Scalar>& map) {
  return hg_fringe_analysis(map).count;
}

// ---------------------------------------------------------------- ring lobes

struct LobeOptions {
  int samples = 720;
  double prominence = 0.3;  // fraction of the ring maximum
  std::optional<Point> center;  // default: intensity centroid
};

struct LobeReport {
  int n_lobes = 0;
  double ring_radius = 0;
  std::vector<double> lobe_angles;  // sorted, [0, 2 pi)
  double prominence_threshold = 0.3;
  double modulation = 0;  // (max - min) / max along the ring
  std::vector<double> ring;  // sampled intensity along the ring
};

namespace detail {

/// Topographic prominence of every local maximum of a periodic signal.
inline std::vector<std::pair<std::size_t, double>> circular_peaks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  const double lo = *std::min_element(v.begin(), v.end());
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = v[i];
    if (!(h > v[(i + n - 1) % n] && h >= v[(i + 1) % n])) continue;
    // Walk each way to the first strictly higher sample, tracking the minimum.
    double base_l = h, base_r = h;
    bool higher_l = false, higher_r = false;
    for (std::size_t s = 1; s < n; ++s) {
      const double w = v[(i + n - s) % n];
      if (w > h) {
        higher_l = true;
        break;
      }
      base_l = std::min(base_l, w);
    }
    for (std::size_t s = 1; s < n; ++s) {
      const double w = v[(i + s) % n];
      if (w > h) {
        higher_r = true;
        break;
      }
      base_r = std::min(base_r, w);
    }
    const double base = (higher_l || higher_r) ? std::max(higher_l ? base_l : lo, higher_r ? base_r : lo) : lo;
    out.emplace_back(i, h - base);
  }
  return out;
}

}  // namespace detail

/// Counts intensity maxima along the main ring (radius of the radial-profile peak).
template <typename Scalar>
LobeReport count_ring_lobes(const IntensityMap<Scalar>& map, const LobeOptions& opt = {}) {
  if (opt.samples < 16) throw std::invalid_argument("count_ring_lobes needs at least 16 samples");
  if (!(opt.prominence >= 0 && opt.prominence <= 1))
    throw std::invalid_argument("prominence threshold must lie in [0, 1]");
  const RadialProfile prof = radial_profile(map, opt.center);
  const std::size_t k = prof.peak_bin();
  const double peak = prof.values[k];
  if (!(peak > 0)) throw AnalysisError("count_ring_lobes: zero intensity");
  if (k == 0 || prof.values.front() > 0.5 * peak)
    throw AnalysisError("count_ring_lobes: no interior minimum, not a ring beam");

  LobeReport rep;
  rep.prominence_threshold = opt.prominence;
  rep.ring_radius = prof.peak_radius();
  rep.ring.resize(std::size_t(opt.samples));
  for (int t = 0; t < opt.samples; ++t) {
    const double th = kTwoPi<double> * t / opt.samples;
    rep.ring[std::size_t(t)] = double(detail::bilinear(
        map.values, map.grid, prof.center.x + rep.ring_radius * std::cos(th),
        prof.center.y + rep.ring_radius * std::sin(th)));
  }
  const double hi = *std::max_element(rep.ring.begin(), rep.ring.end());
  const double lo = *std::min_element(rep.ring.begin(), rep.ring.end());
  rep.modulation = hi > 0 ? (hi - lo) / hi : 0.0;
  for (auto [i, prom] : detail::circular_peaks(rep.ring))
    if (prom >= opt.prominence * hi && prom > 0)
      rep.lobe_angles.push_back(kTwoPi<double> * double(i) / opt.samples);
  rep.n_lobes = int(rep.lobe_angles.size());
  return rep;
}

// ---------------------------------------------------------------- diffraction orders

struct OrderWindow {
  int order = 0;
  Index center_col = 0;  // pixel column of the order centre
  Index center_row = 0;
  Index half_width = 0;  // pixels; window spans centre +- half_width
  double spacing_px = 0;  // order spacing lambda f / x0 in pixels
};

/// Window around order n at x = n lambda f / x0. Default half-width is just under
/// half the order spacing.
template <typename Scalar>
OrderWindow order_window(const GridSpec<Scalar>& g, int order, double grating_period,
                         double focal_length, std::optional<Index> half_width = {}) {
  if (!(grating_period > 0) || !(focal_length > 0))
    throw std::invalid_argument("order_window needs positive period and focal length");
  OrderWindow w;
  w.order = order;
  w.spacing_px = double(g.wavelength) * focal_length / grating_period / double(g.dx);
  w.half_width = half_width ? *half_width : Index(std::floor(0.5 * w.spacing_px - 0.5));
  if (w.half_width < 2) throw std::invalid_argument("order_window: window narrower than 5 pixels");
  if (2.0 * double(w.half_width) + 1.0 > w.spacing_px) {
    std::ostringstream msg;
    msg << "order windows collide: half-width " << w.half_width << " px vs order spacing "
        << w.spacing_px << " px";
    throw AnalysisError(msg.str());
  }
  w.center_col = g.nx / 2 + Index(std::lround(order * w.spacing_px));
  w.center_row = g.ny / 2;
  if (w.center_col - w.half_width < 0 || w.center_col + w.half_width >= g.nx ||
      w.half_width >= g.ny / 2) {
    std::ostringstream msg;
    msg << "order " << order << " window falls outside the grid";
    throw AnalysisError(msg.str());
  }
  return w;
}

/// Crops one diffraction order from a focal-plane field, re-centred and zero-padded
/// to the original size. The transform lens leaves a converging curvature
/// exp(+i pi r^2 / (lambda f)) on the focal plane; it is removed first so that an
/// off-axis order is not tilted.
template <typename Scalar>
Field<Scalar> extract_order(const Field<Scalar>& at_focus, int order, double grating_period,
                            double focal_length, std::optional<Index> half_width = {}) {
  const GridSpec<Scalar>& g = at_focus.grid();
  const OrderWindow w = order_window(g, order, grating_period, focal_length, half_width);
  const double lam = double(g.wavelength);
  Field<Scalar> out(g);
  for (Index dj = -w.half_width; dj <= w.half_width; ++dj)
    for (Index di = -w.half_width; di <= w.half_width; ++di) {
      const Index j = w.center_row + dj, i = w.center_col + di;
      const double x = double(g.x(i)), y = double(g.y(j));
      const auto flat = unit_phasor(-kPi<double> * (x * x + y * y) / (lam * focal_length));
      out(g.ny / 2 + dj, g.nx / 2 + di) = at_focus(j, i) * std::complex<Scalar>(flat);
    }
  return out;
}

// ---------------------------------------------------------------- efficiency

struct RegionAll {};

/// Axis-aligned rectangle |x - cx| <= hx, |y - cy| <= hy.
struct RegionWindow {
  double cx = 0, cy = 0, hx = 0, hy = 0;
};

/// r_in <= |r - c| < r_out.
struct RegionAnnulus {
  double cx = 0, cy = 0, r_in = 0, r_out = 0;
};

using Region = std::variant<RegionAll, RegionWindow, RegionAnnulus>;

template <typename Scalar>
RegionWindow order_region(const GridSpec<Scalar>& g, const OrderWindow& w) {
  return {double(g.x(w.center_col)), double(g.y(w.center_row)),
          (double(w.half_width) + 0.5) * double(g.dx), (double(w.half_width) + 0.5) * double(g.dy)};
}

template <typename Scalar>
bool in_region(const Region& region, double x, double y) {
  if (std::holds_alternative<RegionAll>(region)) return true;
  if (const auto* w = std::get_if<RegionWindow>(&region))
    return std::abs(x - w->cx) <= w->hx && std::abs(y - w->cy) <= w->hy;
  const auto& a = std::get<RegionAnnulus>(region);
  const double r = std::hypot(x - a.cx, y - a.cy);
  return r >= a.r_in && r < a.r_out;
}

template <typename Scalar>
Scalar energy_in(const Field<Scalar>& field, const Region& region) {
  const GridSpec<Scalar>& g = field.grid();
  if (std::holds_alternative<RegionAll>(region)) return energy(field);
  double acc = 0;
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i)
      if (in_region<Scalar>(region, double(g.x(i)), double(g.y(j))))
        acc += double(std::norm(field(j, i)));
  return Scalar(acc * double(g.dx) * double(g.dy));
}

/// energy(output inside region) / energy(input).
template <typename Scalar>
double conversion_efficiency(const Field<Scalar>& input, const Field<Scalar>& output,
                             const Region& region = RegionAll{}) {
  const double e_in = double(energy(input));
  if (!(e_in > 0)) throw AnalysisError("conversion_efficiency: input carries no energy");
  return double(energy_in(output, region)) / e_in;
}

/// Contiguous band of radial-profile bins around the peak that stay at or above
/// floor * peak.
template <typename Scalar>
RegionAnnulus main_ring_annulus(const IntensityMap<Scalar>& map, std::optional<Point> center = {},
                                double floor = 0.01) {
  const RadialProfile p = radial_profile(map, center);
  const std::size_t k = p.peak_bin();
  const double cut = floor * p.values[k];
  std::size_t lo = k, hi = k;
  while (lo > 0 && p.values[lo - 1] >= cut) --lo;
  while (hi + 1 < p.values.size() && p.values[hi + 1] >= cut) ++hi;
  return {p.center.x, p.center.y, double(lo) * p.bin_width, double(hi + 1) * p.bin_width};
}

}  // namespace twistlight
