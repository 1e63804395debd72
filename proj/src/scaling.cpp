#include "twistlight/scaling.hpp"

#include <map>

namespace twistlight {

Field<double> ring_scaling_field(int ell, const RingScalingConfig& cfg) {
  const GridSpec<double>& g = cfg.grid;
  Field<double> f(g);
  if (cfg.source == ScalingSource::laguerre_gauss) {
    f = laguerre_gauss_source(g, cfg.w0, ell);
  } else {
    SppSpec spp = cfg.spp;
    spp.ell = ell;
    RealArray<double> window = aperture_window(g, spp.aperture_d);
    if (cfg.apodization) window *= apodization_window(g, *cfg.apodization);
    f = apply_mask(gaussian_source(g, cfg.w0), spp_phase(g, spp).phase, window);
  }
  f = apply_lens(f, LensSpec{cfg.focal_length});
  PropagationPlan plan;
  plan.distance = cfg.distance;
  return propagate(f, plan);
}

std::vector<std::pair<int, double>> ring_radius_scaling(const std::vector<int>& charges,
                                                        const RingScalingConfig& cfg) {
  if (charges.size() < 2) throw std::invalid_argument("ring_radius_scaling needs at least two charges");
  std::map<int, double> done;  // repeated charges reuse the simulation
  std::vector<std::pair<int, double>> out;
  for (int ell : charges) {
    auto it = done.find(ell);
    if (it == done.end()) {
      const RadialProfile p = radial_profile(intensity(ring_scaling_field(ell, cfg)), Point{});
      it = done.emplace(ell, p.peak_radius()).first;
    }
    out.emplace_back(ell, it->second);
  }
  return out;
}

}  // namespace twistlight
