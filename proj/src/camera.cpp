// SPDX-License-Identifier: Apache-2.0
#include "dfd/camera.hpp"

#include <cmath>
#include <stdexcept>

#include "dfd/error.hpp"

namespace dfd {

namespace {

double focus_at(const CameraIntrinsics& cam, int focus_index) {
  if (focus_index < 0 ||
      focus_index >= static_cast<int>(cam.focus_distances.size()))
    throw std::out_of_range("focus index " + std::to_string(focus_index) +
                            " out of range for schedule of size " +
                            std::to_string(cam.focus_distances.size()));
  return cam.focus_distances[static_cast<std::size_t>(focus_index)];
}

// f^2 / (2 p N (F - f)): the constant factor of the pixel-space CoC radius.
double sigma_scale(const CameraIntrinsics& cam, double focus) {
  return cam.focal_length * cam.focal_length /
         (2.0 * cam.pixel_pitch * cam.f_number * (focus - cam.focal_length));
}

void require_positive_depth(double depth_m) {
  if (!(depth_m > 0.0))
    throw DomainError("depth must be positive, got " + std::to_string(depth_m));
}

}  // namespace

std::optional<std::string> validate(const CameraIntrinsics& cam) {
  if (!(cam.focal_length > 0.0)) return "focal_length must be positive";
  if (!(cam.f_number > 0.0)) return "f_number must be positive";
  if (!(cam.pixel_pitch > 0.0)) return "pixel_pitch must be positive";
  if (cam.focus_distances.empty()) return "focus schedule is empty";
  for (std::size_t k = 0; k < cam.focus_distances.size(); ++k) {
    if (!(cam.focus_distances[k] > cam.focal_length))
      return "focus distance " + std::to_string(cam.focus_distances[k]) +
             " at slot " + std::to_string(k) + " must exceed the focal length";
    if (k > 0 && !(cam.focus_distances[k] > cam.focus_distances[k - 1]))
      return "focus distances not strictly increasing at slot " + std::to_string(k);
  }
  if (!(cam.depth_min > 0.0)) return "depth_min must be positive";
  if (!(cam.depth_max > cam.depth_min)) return "depth_max must exceed depth_min";
  return std::nullopt;
}

CameraIntrinsics camera_preset(const std::string& name) {
  if (name == "nyuv2") {
    CameraIntrinsics cam;
    cam.focal_length = 0.05;
    cam.f_number = 8.0;
    cam.pixel_pitch = 1e-5;
    cam.focus_distances = {1.0, 1.5, 2.5, 4.0, 6.0};
    cam.depth_min = 0.1;
    cam.depth_max = 10.0;
    return cam;
  }
  if (name == "defocusnet") {
    CameraIntrinsics cam;
    cam.focal_length = 0.0029;
    cam.f_number = 1.2;
    cam.pixel_pitch = 1.5e-6;  // phone-scale sensor; see README
    cam.focus_distances = {0.3, 0.45, 0.75, 1.2, 1.8};
    cam.depth_min = 0.1;
    cam.depth_max = 3.0;
    return cam;
  }
  throw ConfigError("unknown camera preset '" + name + "'");
}

std::vector<std::string> camera_preset_names() { return {"nyuv2", "defocusnet"}; }

double coc_sigma(double depth_m, const CameraIntrinsics& cam, int focus_index) {
  require_positive_depth(depth_m);
  const double focus = focus_at(cam, focus_index);
  return sigma_scale(cam, focus) * std::abs(depth_m - focus) / depth_m;
}

double dsigma_ddepth(double depth_m, const CameraIntrinsics& cam, int focus_index) {
  require_positive_depth(depth_m);
  const double focus = focus_at(cam, focus_index);
  if (depth_m == focus) return 0.0;  // subgradient at the kink
  const double sign = depth_m > focus ? 1.0 : -1.0;
  return sign * sigma_scale(cam, focus) * focus / (depth_m * depth_m);
}

DefocusMap defocus_map(const DepthMap& depth, const CameraIntrinsics& cam,
                       int focus_index) {
  const double focus = focus_at(cam, focus_index);
  const double scale = sigma_scale(cam, focus);
  DefocusMap out(depth.height, depth.width);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const double d = depth.at(y, x);
      require_positive_depth(d);
      out.at(y, x) = scale * std::abs(d - focus) / d;
    }
  }
  return out;
}

std::vector<std::pair<double, double>> response_curve(
    const CameraIntrinsics& cam, int focus_index,
    const std::vector<double>& depth_samples) {
  std::vector<std::pair<double, double>> curve;
  curve.reserve(depth_samples.size());
  for (double d : depth_samples) curve.emplace_back(d, coc_sigma(d, cam, focus_index));
  return curve;
}

DistinguishabilityReport distinguishability_report(const CameraIntrinsics& cam,
                                                   double grid_resolution) {
  if (cam.focus_distances.size() < 2)
    throw ConfigError(
        "distinguishability_report needs at least two focus distances");
  if (!(grid_resolution > 0.0))
    throw DomainError("grid resolution must be positive");

  DistinguishabilityReport report;
  report.grid_resolution = grid_resolution;
  const int steps =
      static_cast<int>(std::floor((cam.depth_max - cam.depth_min) / grid_resolution +
                                  0.5));
  report.gap_by_depth.reserve(static_cast<std::size_t>(steps) + 1);
  bool first = true;
  for (int i = 0; i <= steps; ++i) {
    const double d = std::min(cam.depth_min + i * grid_resolution, cam.depth_max);
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < cam.focus_distances.size(); ++k) {
      const double s = coc_sigma(d, cam, static_cast<int>(k));
      if (k == 0) {
        lo = hi = s;
      } else {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
    }
    const double gap = hi - lo;  // max over pairs |sigma_i - sigma_j|
    report.gap_by_depth.emplace_back(d, gap);
    if (first || gap < report.min_gap) {
      report.min_gap = gap;
      report.worst_depth = d;
      first = false;
    }
  }
  return report;
}

}  // namespace dfd
