#include <doctest.h>

#include <cmath>
#include <random>

#include "twistlight/analysis.hpp"
#include "twistlight/propagation.hpp"

using namespace twistlight;

namespace {
PropagationPlan plan(double z, PropagationMethod m = PropagationMethod::paraxial,
                     std::optional<bool> band = {}) {
  PropagationPlan p;
  p.distance = z;
  p.method = m;
  p.band_limit = band;
  return p;
}

double max_abs_diff(const Field<double>& a, const Field<double>& b) {
  return (a.values() - b.values()).abs().maxCoeff();
}

// Second-moment beam radius along x.
double second_moment_w(const Field<double>& f) {
  const auto& g = f.grid();
  double s = 0, sx2 = 0;
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) {
      const double I = std::norm(f(j, i));
      s += I;
      sx2 += I * g.x(i) * g.x(i);
    }
  return 2 * std::sqrt(sx2 / s);
}

Field<double> random_field(const GridSpec<double>& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  ComplexArray<double> v(g.ny, g.nx);
  for (Index k = 0; k < v.size(); ++k) v(k) = {n(rng), n(rng)};
  return Field<double>(g, v);
}
}  // namespace

TEST_CASE("zero distance returns the input") {
  const auto g = GridSpec<double>::square(128, 10e-6, 266e-9);
  const auto f = random_field(g, 1);
  for (auto m : {PropagationMethod::paraxial, PropagationMethod::exact})
    CHECK((propagate(f, plan(0, m)).values() == f.values()).all());
}

TEST_CASE("paraxial propagation is additive") {
  const auto g = GridSpec<double>::square(256, 10e-6, 266e-9);
  const auto f = laguerre_gauss_source(g, 250e-6, 2);
  const auto two = propagate(propagate(f, plan(0.03, PropagationMethod::paraxial, false)),
                             plan(0.05, PropagationMethod::paraxial, false));
  const auto one = propagate(f, plan(0.08, PropagationMethod::paraxial, false));
  CHECK(max_abs_diff(one, two) <= 1e-10 * one.values().abs().maxCoeff());
}

TEST_CASE("gaussian beam radius grows as w0 sqrt(1 + (z/zR)^2)") {
  const auto g = GridSpec<double>::square(512, 10e-6, 266e-9);
  const double w0 = 200e-6, zr = kPi<double> * w0 * w0 / g.wavelength;
  const auto f = gaussian_source(g, w0);
  CHECK(second_moment_w(f) == doctest::Approx(w0).epsilon(1e-3));
  for (double t : {0.5, 1.0, 2.0})
    for (auto m : {PropagationMethod::paraxial, PropagationMethod::exact}) {
      const double w = second_moment_w(propagate(f, plan(t * zr, m)));
      CHECK(w == doctest::Approx(w0 * std::sqrt(1 + t * t)).epsilon(0.01));
    }
}

TEST_CASE("paraxial propagation without band limit is unitary and reversible") {
  const auto g = GridSpec<double>::square(128, 10e-6, 266e-9);
  const auto f = random_field(g, 7);
  const auto out = propagate(f, plan(0.4, PropagationMethod::paraxial, false));
  CHECK(std::abs(energy(out) / energy(f) - 1) <= 1e-9);
  const auto back = propagate(out, plan(-0.4, PropagationMethod::paraxial, false));
  CHECK(max_abs_diff(back, f) <= 1e-9 * f.values().abs().maxCoeff());
}

TEST_CASE("exact propagation never adds energy") {
  const auto g = GridSpec<double>::square(128, 0.2e-6, 500e-9);  // pitch below lambda/2
  const auto f = random_field(g, 3);
  for (double z : {1e-6, 1e-5, 1e-4}) {
    const auto out = propagate(f, plan(z, PropagationMethod::exact));
    CHECK(energy(out) <= energy(f) * (1 + 1e-12));
  }
  // Evanescent content is dropped, so some energy must go.
  CHECK(energy(propagate(f, plan(1e-6, PropagationMethod::exact, false))) < 0.99 * energy(f));
}

TEST_CASE("band limit defaults by distance") {
  const auto g = GridSpec<double>::square(256, 10e-6, 266e-9);
  const double zc = 256 * 1e-10 / 266e-9;
  CHECK_FALSE(plan(0.9 * zc).band_limited(g));
  CHECK(plan(1.1 * zc).band_limited(g));
  CHECK_FALSE(plan(1.1 * zc, PropagationMethod::paraxial, false).band_limited(g));
  CHECK(plan(0.1 * zc, PropagationMethod::paraxial, true).band_limited(g));
}

TEST_CASE("a very weak lens changes nothing measurable") {
  const auto g = GridSpec<double>::square(256, 10e-6, 266e-9);
  const auto f = gaussian_source(g, 400e-6);
  const auto out = apply_lens(f, LensSpec{1e6});
  CHECK(max_abs_diff(out, f) <= 1e-4);
  CHECK(energy(out) == doctest::Approx(energy(f)).epsilon(1e-12));
}

TEST_CASE("a lens focuses a collimated gaussian at its focal length") {
  const auto g = GridSpec<double>::square(1024, 10e-6, 266e-9);
  const double f = 0.5;
  const auto lensed = apply_lens(gaussian_source(g, 1e-3), LensSpec{f});
  double best_z = 0, best_peak = 0;
  for (double z = 0.40; z <= 0.6001; z += 0.01) {
    const double peak = propagate(lensed, plan(z)).values().abs2().maxCoeff();
    if (peak > best_peak) {
      best_peak = peak;
      best_z = z;
    }
  }
  CHECK(std::abs(best_z - f) <= 0.1 * f);
}

TEST_CASE("cylindrical lens acts on one axis only") {
  const auto g = GridSpec<double>::square(256, 10e-6, 266e-9);
  const auto f = gaussian_source(g, 400e-6);
  const auto out = apply_lens(f, LensSpec{0.1, LensKind::cylindrical, Axis::x});
  // Column at x = 0 untouched, and every column is a constant phasor times the input.
  CHECK((out.values().col(g.nx / 2) == f.values().col(g.nx / 2)).all());
  double worst = 0;
  for (Index i = 0; i < g.nx; ++i) {
    const auto ratio = out(0, i) / f(0, i);
    for (Index j = 0; j < g.ny; ++j) worst = std::max(worst, std::abs(out(j, i) / f(j, i) - ratio));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("lens aliasing is a sampling error") {
  const auto g = GridSpec<double>::square(256, 10e-6, 266e-9);
  const auto f = gaussian_source(g, 400e-6);
  CHECK_THROWS_AS(apply_lens(f, LensSpec{1e-3}), SamplingError);
  CHECK_THROWS_AS(apply_lens(f, LensSpec{0.0}), std::invalid_argument);
}

TEST_CASE("mode conversion yields |ell| + 1 fringes with handed tilt") {
  const auto g = GridSpec<double>::square(1024, 2.5e-6, 266e-9);
  double tilt_sign[2] = {0, 0};
  for (int ell : {0, 1, 2, 4, -2}) {
    const auto out = mode_convert(laguerre_gauss_source(g, 300e-6, ell), 0.1);
    const auto rep = hg_fringe_analysis(intensity(out));
    CHECK(rep.count == std::abs(ell) + 1);
    if (ell == 2) tilt_sign[0] = rep.correlation;
    if (ell == -2) tilt_sign[1] = rep.correlation;
  }
  CHECK(tilt_sign[0] * tilt_sign[1] < 0);
}

TEST_CASE("free space and a spherical lens conserve OAM") {
  const auto g = GridSpec<double>::square(256, 10e-6, 266e-9);
  for (int ell : {1, 2, 4, 8}) {
    auto f = laguerre_gauss_source(g, 250e-6, ell);
    f = propagate(apply_lens(f, LensSpec{0.3}), plan(0.1));
    const auto s = oam_spectrum(f, -12, 12);
    CHECK(s.dominant_ell == ell);
    CHECK(s.at(ell) > 0.99);
  }
}

TEST_CASE("single precision propagation tracks double") {
  const auto g = GridSpec<double>::square(128, 10e-6, 266e-9);
  const auto f = laguerre_gauss_source(g, 200e-6, 1);
  const auto d = propagate(f, plan(0.05));
  const auto s = propagate(f.cast<float>(), plan(0.05)).cast<double>();
  CHECK(max_abs_diff(d, s) <= 1e-5 * d.values().abs().maxCoeff());
}
