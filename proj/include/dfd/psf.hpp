// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dfd/camera.hpp"
#include "dfd/image.hpp"

namespace dfd {

/// Spatially-varying Gaussian PSF convolution settings.
struct PsfConfig {
  int window = 7;                      // odd kernel width, >= 3
  double clear_sigma_threshold = 1.0;  // below this a pixel renders sharp
};

std::optional<std::string> validate(const PsfConfig& cfg);

/// window x window kernel weights, row-major. Identity kernel (1 at center)
/// when sigma < clear_sigma_threshold; otherwise a truncated Gaussian
/// renormalized to sum to 1 over the window.
std::vector<double> gaussian_kernel(double sigma, const PsfConfig& cfg = {});

/// d(kernel)/d(sigma) of the renormalized truncated Gaussian. Zero everywhere
/// in the clear-pixel regime.
std::vector<double> gaussian_kernel_dsigma(double sigma, const PsfConfig& cfg = {});

/// Forward render: each output pixel is the kernel-weighted window average of
/// the AIF, the kernel built from that pixel's sigma (gather formulation).
/// Replicate padding at the borders.
Image render_defocus(const Image& aif, const DefocusMap& sigma_map,
                     const PsfConfig& cfg = {});

/// One render per focus distance in the schedule: defocus_map then
/// render_defocus.
FocalStack render_stack(const Image& aif, const DepthMap& depth,
                        const CameraIntrinsics& cam, const PsfConfig& cfg = {});

/// Exact linear adjoint of render_defocus with respect to the AIF: scatters
/// grad_out back through the same per-pixel kernels.
Field adjoint_aif(const DefocusMap& sigma_map, const Field& grad_out,
                  const PsfConfig& cfg = {});

/// Per-pixel dL/d(sigma): contracts grad_out with the sigma-derivative of the
/// renormalized kernel and the AIF window. Zero where sigma is below the
/// clear threshold (dead zone of the hard identity rule).
Grid grad_sigma(const Image& aif, const DefocusMap& sigma_map,
                const Field& grad_out, const PsfConfig& cfg = {});

}  // namespace dfd
