// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dfd/image.hpp"

namespace dfd {

/// Thin-lens geometry plus the focus-distance schedule of a focal stack.
/// All lengths are in meters.
struct CameraIntrinsics {
  double focal_length = 0.05;  // f
  double f_number = 8.0;       // N = f / aperture diameter
  double pixel_pitch = 1e-5;   // p, CMOS pixel size
  std::vector<double> focus_distances;  // F per stack slot, strictly increasing
  double depth_min = 0.1;
  double depth_max = 10.0;
};

std::optional<std::string> validate(const CameraIntrinsics& cam);

/// Shipped presets: "nyuv2" and "defocusnet".
CameraIntrinsics camera_preset(const std::string& name);
std::vector<std::string> camera_preset_names();

/// Gaussian blur radius in pixels for a scene point at `depth_m` when the
/// lens focuses at schedule slot `focus_index`:
///   sigma = (1 / 2p) * |d - F| / d * f^2 / (N (F - f))
/// Zero exactly at d = F.
double coc_sigma(double depth_m, const CameraIntrinsics& cam, int focus_index);

/// Analytic d(sigma)/d(depth): sign(d - F) * F / d^2 * f^2 / (2 p N (F - f)).
/// Returns 0 at d = F (subgradient at the kink).
double dsigma_ddepth(double depth_m, const CameraIntrinsics& cam, int focus_index);

/// Element-wise coc_sigma over a depth map.
DefocusMap defocus_map(const DepthMap& depth, const CameraIntrinsics& cam,
                       int focus_index);

/// Tabulated (depth, sigma) pairs for plotting or CSV export.
std::vector<std::pair<double, double>> response_curve(
    const CameraIntrinsics& cam, int focus_index,
    const std::vector<double>& depth_samples);

/// Worst-case sigma separation across the focus schedule. For each depth on a
/// grid over [depth_min, depth_max], the gap is the largest pairwise
/// |sigma_i - sigma_j|; min_gap is the minimum of that over the grid. A small
/// min_gap means some depth produces near-identical blur in every slice and
/// the stack cannot disambiguate it.
struct DistinguishabilityReport {
  double min_gap = 0.0;
  double worst_depth = 0.0;
  double grid_resolution = 0.0;
  std::vector<std::pair<double, double>> gap_by_depth;  // (depth, gap)
};

DistinguishabilityReport distinguishability_report(const CameraIntrinsics& cam,
                                                   double grid_resolution = 0.01);

}  // namespace dfd
