// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dfd/camera.hpp"
#include "dfd/image.hpp"
#include "dfd/psf.hpp"

namespace dfd {

/// Weights of the self-supervision objective
///   L = recon_scale * L_recon + L_blur(predicted AIF)
///     + coarse_blur_scale * L_blur(coarse AIF) + lambda_smooth * L_smooth.
struct LossWeights {
  double alpha = 0.85;              // SSIM/L1 mix in the reconstruction term
  double blur_beta = 0.01;          // scale of the blurriness penalty
  double edge_beta = 2.5;           // edge sensitivity of the smoothness term
  double lambda_smooth = 0.5;       // smoothness weight
  double recon_scale = 100.0;       // multiplier on the reconstruction term
  double coarse_blur_scale = 10.0;  // multiplier on the coarse-AIF blur term
};

std::optional<std::string> validate(const LossWeights& w);

/// Per-term loss values; total is their weighted sum.
struct LossReport {
  double total = 0.0;
  double recon = 0.0;
  double blur_predicted = 0.0;
  double blur_coarse = 0.0;
  double smooth = 0.0;
};

LossReport make_loss_report(double recon, double blur_predicted,
                            double blur_coarse, double smooth,
                            const LossWeights& w);

/// Mean windowed SSIM (11x11 Gaussian window, sigma 1.5, C1 = 0.01^2,
/// C2 = 0.03^2 on the [0,1] range) and its analytic gradient w.r.t. `a`.
struct SsimResult {
  double value = 0.0;
  Field grad_a;
};

SsimResult ssim(const Image& a, const Image& b);

/// (1/K) sum_k [ alpha (1 - SSIM)/2 + (1 - alpha) L1 ] over the stack, with
/// gradients w.r.t. each rendered slice.
struct ReconResult {
  double value = 0.0;
  std::vector<Field> grads;
};

ReconResult recon_loss(const FocalStack& rendered, const FocalStack& observed,
                       const LossWeights& w);

/// -beta * log(Var(laplacian) + eps), per channel then averaged; low variance
/// of the Laplacian response means a blurry image.
struct BlurResult {
  double value = 0.0;
  Field grad;
};

BlurResult blur_loss(const Image& img, const LossWeights& w);

/// Multi-focus fusion: per pixel, copy from the slice with the smallest
/// predicted sigma (ties toward the smaller index).
struct CoarseAif {
  Image image;
  std::vector<int> source_index;  // height*width, row-major
};

CoarseAif coarse_aif(const FocalStack& stack,
                     const std::vector<DefocusMap>& sigma_maps);

/// Edge-aware smoothness: mean of |dx D| exp(-beta |dx I|) + |dy D|
/// exp(-beta |dy I|), image gradients channel-averaged.
struct SmoothResult {
  double value = 0.0;
  Grid grad_depth;
};

SmoothResult smooth_loss(const DepthMap& depth, const Image& aif,
                         const LossWeights& w);

/// Full objective with gradients w.r.t. depth and AIF. The reconstruction
/// gradient flows through the PSF adjoints and the thin-lens derivative; the
/// coarse-AIF blur term is reported but sends no gradient through the argmin
/// selection.
struct TotalLoss {
  LossReport report;
  Grid grad_depth;
  Field grad_aif;
};

TotalLoss total_loss(const FocalStack& observed, const DepthMap& depth,
                     const Image& aif, const CameraIntrinsics& cam,
                     const PsfConfig& cfg, const LossWeights& w);

}  // namespace dfd
