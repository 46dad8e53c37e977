// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dfd/camera.hpp"
#include "dfd/image.hpp"
#include "dfd/losses.hpp"
#include "dfd/psf.hpp"

namespace dfd {

/// First-order optimizer settings (Adam-style moments, cosine-annealed
/// learning rate).
struct SolverConfig {
  double learning_rate = 5e-4;
  int iterations = 2000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool cosine_schedule = true;
  std::string init_strategy = "sharpness";
  double convergence_tol = 1e-7;  // relative loss change
  int convergence_window = 50;    // iterations the change is measured over
};

std::optional<std::string> validate(const SolverConfig& cfg);

/// Optimization state. Depth and AIF live as unconstrained parameters and are
/// decoded through smooth sigmoidal maps onto [depth_min, depth_max] and
/// [0, 1], so decoded fields stay in bounds at every iterate.
struct SolveState {
  int height = 0;
  int width = 0;
  int channels = 0;
  int stack_size = 0;
  std::vector<double> depth_param;
  std::vector<double> aif_param;
  std::vector<double> depth_m, depth_v;  // Adam moments
  std::vector<double> aif_m, aif_v;
  std::int64_t iteration = 0;
  std::vector<LossReport> history;
};

/// Sharpness-based starting point: per pixel, the focus distance of the slice
/// with the highest local Laplacian energy (7x7 neighborhood), nudged +2% off
/// the exact focus plane, plus that slice's pixel as the AIF estimate.
std::pair<DepthMap, Image> init_estimate(const FocalStack& stack,
                                         const CameraIntrinsics& cam);

SolveState init_state(const FocalStack& stack, const CameraIntrinsics& cam,
                      const SolverConfig& cfg);

DepthMap decode_depth(const SolveState& state, const CameraIntrinsics& cam);
Image decode_aif(const SolveState& state);

/// One full-batch gradient step; appends the loss evaluated at the current
/// iterate to the history.
void step(SolveState& state, const FocalStack& stack, const CameraIntrinsics& cam,
          const PsfConfig& psf_cfg, const SolverConfig& cfg, const LossWeights& w);

struct SolveResult {
  DepthMap depth;
  Image aif;
  std::vector<LossReport> history;
  std::vector<std::string> warnings;
};

SolveResult solve(const FocalStack& stack, const CameraIntrinsics& cam,
                  const SolverConfig& cfg, const LossWeights& w,
                  const PsfConfig& psf_cfg = {});

/// Adds clamped i.i.d. Gaussian noise (seeded) to every observed slice before
/// solving; noise_sigma 0 is identical to solve.
SolveResult solve_with_noise_protocol(const FocalStack& stack, double noise_sigma,
                                      std::uint64_t seed,
                                      const CameraIntrinsics& cam,
                                      const SolverConfig& cfg, const LossWeights& w,
                                      const PsfConfig& psf_cfg = {});

FocalStack add_gaussian_noise(const FocalStack& stack, double noise_sigma,
                              std::uint64_t seed);

/// Flat binary checkpoint of a SolveState: header (magic "DFDS", version,
/// H, W, K, C, iteration, history length) followed by 64-bit floats.
void save_checkpoint(const SolveState& state, const std::string& path);
SolveState load_checkpoint(const std::string& path);

}  // namespace dfd
