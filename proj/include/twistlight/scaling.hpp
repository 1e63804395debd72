#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "twistlight/analysis.hpp"
#include "twistlight/doe.hpp"

namespace twistlight {

enum class ScalingSource {
  laguerre_gauss,  // ideal LG_0^ell at its waist
  gaussian_spp,  // Gaussian through a spiral phase plate of charge ell
};

/// Source, optional SPP, then a transform lens and free space to the observation plane.
struct RingScalingConfig {
  GridSpec<double> grid = GridSpec<double>::square(2048, 5e-6, 266e-9);
  double w0 = 125e-6;
  ScalingSource source = ScalingSource::laguerre_gauss;
  SppSpec spp{};  // ell is overwritten per run
  std::optional<ApodizationSpec> apodization;
  double focal_length = 0.2;
  double distance = 0.2;  // lens to observation plane
};

/// Field at the observation plane for one charge.
Field<double> ring_scaling_field(int ell, const RingScalingConfig& cfg);

/// (ell, radius of the radial-profile maximum about the axis) per charge.
std::vector<std::pair<int, double>> ring_radius_scaling(const std::vector<int>& charges,
                                                        const RingScalingConfig& cfg);

}  // namespace twistlight
