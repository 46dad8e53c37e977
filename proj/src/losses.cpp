// SPDX-License-Identifier: Apache-2.0
#include "dfd/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dfd/error.hpp"

namespace dfd {

namespace {

constexpr int kSsimRadius = 5;  // 11x11 window
constexpr double kSsimWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr double kBlurEps = 1e-8;

int clampi(int v, int lo, int hi) { return std::max(lo, std::min(v, hi)); }

const std::array<double, 2 * kSsimRadius + 1>& ssim_window() {
  static const auto window = [] {
    std::array<double, 2 * kSsimRadius + 1> w{};
    double total = 0.0;
    for (int t = -kSsimRadius; t <= kSsimRadius; ++t) {
      const double v =
          std::exp(-static_cast<double>(t) * t /
                   (2.0 * kSsimWindowSigma * kSsimWindowSigma));
      w[static_cast<std::size_t>(t + kSsimRadius)] = v;
      total += v;
    }
    for (double& v : w) v /= total;
    return w;
  }();
  return window;
}

// Separable windowed mean with replicate padding: rows then columns.
Grid window_filter(const Grid& in) {
  const auto& w = ssim_window();
  Grid tmp(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int t = -kSsimRadius; t <= kSsimRadius; ++t)
        acc += w[static_cast<std::size_t>(t + kSsimRadius)] *
               in.at(y, clampi(x + t, 0, in.width - 1));
      tmp.at(y, x) = acc;
    }
  Grid out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int t = -kSsimRadius; t <= kSsimRadius; ++t)
        acc += w[static_cast<std::size_t>(t + kSsimRadius)] *
               tmp.at(clampi(y + t, 0, in.height - 1), x);
      out.at(y, x) = acc;
    }
  return out;
}

// Transpose of window_filter: column scatter first, then row scatter, each
// accumulating into the clamped source position.
Grid window_filter_adjoint(const Grid& in) {
  const auto& w = ssim_window();
  Grid tmp(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      const double g = in.at(y, x);
      for (int t = -kSsimRadius; t <= kSsimRadius; ++t)
        tmp.at(clampi(y + t, 0, in.height - 1), x) +=
            w[static_cast<std::size_t>(t + kSsimRadius)] * g;
    }
  Grid out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      const double g = tmp.at(y, x);
      for (int t = -kSsimRadius; t <= kSsimRadius; ++t)
        out.at(y, clampi(x + t, 0, in.width - 1)) +=
            w[static_cast<std::size_t>(t + kSsimRadius)] * g;
    }
  return out;
}

Grid multiply(const Grid& a, const Grid& b) {
  Grid out(a.height, a.width);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

void require_same_shape(const Field& a, const Field& b, const char* what) {
  if (a.height != b.height || a.width != b.width || a.channels != b.channels)
    throw ShapeError(std::string(what) + ": field shapes differ");
}

void check_finite(const double* data, std::size_t n, int width, int channels,
                  const char* term) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(data[i])) {
      const std::size_t pixel = i / static_cast<std::size_t>(channels);
      const int x = static_cast<int>(pixel % static_cast<std::size_t>(width));
      const int y = static_cast<int>(pixel / static_cast<std::size_t>(width));
      throw SolverFault(std::string("non-finite gradient from ") + term +
                        " at pixel (x=" + std::to_string(x) + ", y=" +
                        std::to_string(y) + ")");
    }
  }
}

}  // namespace

std::optional<std::string> validate(const LossWeights& w) {
  if (!(w.alpha >= 0.0 && w.alpha <= 1.0)) return "alpha must be in [0, 1]";
  if (!(w.blur_beta >= 0.0)) return "blur_beta must be non-negative";
  if (!(w.edge_beta >= 0.0)) return "edge_beta must be non-negative";
  if (!(w.lambda_smooth >= 0.0)) return "lambda_smooth must be non-negative";
  if (!(w.recon_scale >= 0.0)) return "recon_scale must be non-negative";
  if (!(w.coarse_blur_scale >= 0.0)) return "coarse_blur_scale must be non-negative";
  return std::nullopt;
}

LossReport make_loss_report(double recon, double blur_predicted,
                            double blur_coarse, double smooth,
                            const LossWeights& w) {
  LossReport report;
  report.recon = recon;
  report.blur_predicted = blur_predicted;
  report.blur_coarse = blur_coarse;
  report.smooth = smooth;
  report.total = w.recon_scale * recon + blur_predicted +
                 w.coarse_blur_scale * blur_coarse + w.lambda_smooth * smooth;
  return report;
}

SsimResult ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  const int h = a.height, w = a.width, ch = a.channels;
  const double inv_count = 1.0 / (static_cast<double>(h) * w * ch);

  SsimResult result;
  result.grad_a = Field(h, w, ch);
  double value_sum = 0.0;  // divided once at the end so ssim(a, a) is exactly 1
  for (int c = 0; c < ch; ++c) {
    const Grid pa = channel_plane(a, c);
    const Grid pb = channel_plane(b, c);
    const Grid mu_a = window_filter(pa);
    const Grid mu_b = window_filter(pb);
    const Grid m_aa = window_filter(multiply(pa, pa));
    const Grid m_bb = window_filter(multiply(pb, pb));
    const Grid m_ab = window_filter(multiply(pa, pb));

    Grid g1(h, w), g2(h, w), g3(h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double ma = mu_a.at(y, x);
        const double mb = mu_b.at(y, x);
        const double var_a = m_aa.at(y, x) - ma * ma;
        const double var_b = m_bb.at(y, x) - mb * mb;
        const double cov = m_ab.at(y, x) - ma * mb;
        const double a1 = 2.0 * ma * mb + kC1;
        const double a2 = 2.0 * cov + kC2;
        const double b1 = ma * ma + mb * mb + kC1;
        const double b2 = var_a + var_b + kC2;
        value_sum += a1 * a2 / (b1 * b2);
        g1.at(y, x) = 2.0 * (mb * a2 * b1 - ma * a1 * a2) / (b1 * b1 * b2);
        g2.at(y, x) = -a1 * a2 / (b1 * b2 * b2);
        g3.at(y, x) = 2.0 * a1 / (b1 * b2);
      }
    }
    const Grid t1 = window_filter_adjoint(g1);
    const Grid t2 = window_filter_adjoint(g2);
    const Grid t3 = window_filter_adjoint(multiply(g2, mu_a));
    const Grid t4 = window_filter_adjoint(g3);
    const Grid t5 = window_filter_adjoint(multiply(g3, mu_b));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        result.grad_a.at(y, x, c) =
            (t1.at(y, x) + 2.0 * pa.at(y, x) * t2.at(y, x) - 2.0 * t3.at(y, x) +
             pb.at(y, x) * t4.at(y, x) - t5.at(y, x)) *
            inv_count;
  }
  result.value = value_sum / (static_cast<double>(h) * w * ch);
  return result;
}

ReconResult recon_loss(const FocalStack& rendered, const FocalStack& observed,
                       const LossWeights& w) {
  if (rendered.slice_count() != observed.slice_count())
    throw ShapeError("recon_loss: stack sizes differ");
  if (rendered.focus_distances != observed.focus_distances)
    throw ShapeError("recon_loss: focus distances differ");
  const int k_count = rendered.slice_count();
  const double inv_k = 1.0 / k_count;
  ReconResult result;
  result.grads.reserve(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    const Image& ja = rendered.images[static_cast<std::size_t>(k)];
    const Image& jb = observed.images[static_cast<std::size_t>(k)];
    require_same_shape(ja, jb, "recon_loss");
    const double inv_count =
        1.0 / (static_cast<double>(ja.height) * ja.width * ja.channels);

    SsimResult s = ssim(ja, jb);
    double l1 = 0.0;
    Field grad(ja.height, ja.width, ja.channels);
    for (std::size_t i = 0; i < ja.data.size(); ++i) {
      const double diff = ja.data[i] - jb.data[i];
      l1 += std::abs(diff);
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      grad.data[i] = inv_k * (w.alpha * 0.5 * (-s.grad_a.data[i]) +
                              (1.0 - w.alpha) * sign * inv_count);
    }
    l1 *= inv_count;
    result.value += inv_k * (w.alpha * 0.5 * (1.0 - s.value) + (1.0 - w.alpha) * l1);
    result.grads.push_back(std::move(grad));
  }
  return result;
}

BlurResult blur_loss(const Image& img, const LossWeights& w) {
  if (img.height < 3 || img.width < 3)
    throw ShapeError("blur_loss: image must be at least 3x3");
  const int ch = img.channels;
  const double pixel_count = static_cast<double>(img.height) * img.width;
  BlurResult result;
  result.grad = Field(img.height, img.width, ch);
  for (int c = 0; c < ch; ++c) {
    const Grid lap = laplacian(channel_plane(img, c));
    double mean = 0.0, mean_sq = 0.0;
    for (double v : lap.data) {
      mean += v;
      mean_sq += v * v;
    }
    mean /= pixel_count;
    mean_sq /= pixel_count;
    const double variance = mean_sq - mean * mean;
    result.value += -w.blur_beta * std::log(variance + kBlurEps) / ch;

    // d(-beta log(V + eps))/dL_i = -2 beta (L_i - mean) / (M (V + eps))
    const double scale =
        -2.0 * w.blur_beta / (pixel_count * (variance + kBlurEps));
    Grid dlap(img.height, img.width);
    for (std::size_t i = 0; i < lap.data.size(); ++i)
      dlap.data[i] = scale * (lap.data[i] - mean);
    const Grid grad_plane = laplacian_adjoint(dlap);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        result.grad.at(y, x, c) = grad_plane.at(y, x) / ch;
  }
  return result;
}

CoarseAif coarse_aif(const FocalStack& stack,
                     const std::vector<DefocusMap>& sigma_maps) {
  if (sigma_maps.size() != stack.images.size())
    throw ShapeError("coarse_aif: sigma map count does not match stack size");
  const Image& first = stack.images.front();
  for (const DefocusMap& m : sigma_maps)
    if (m.height != first.height || m.width != first.width)
      throw ShapeError("coarse_aif: sigma map shape does not match stack");

  CoarseAif out;
  out.image = Image(first.height, first.width, first.channels);
  out.source_index.assign(static_cast<std::size_t>(first.height) * first.width, 0);
  for (int y = 0; y < first.height; ++y) {
    for (int x = 0; x < first.width; ++x) {
      int best = 0;
      double best_sigma = sigma_maps[0].at(y, x);
      for (int k = 1; k < stack.slice_count(); ++k) {
        const double s = sigma_maps[static_cast<std::size_t>(k)].at(y, x);
        if (s < best_sigma) {  // ties keep the smaller index
          best_sigma = s;
          best = k;
        }
      }
      out.source_index[static_cast<std::size_t>(y) * first.width + x] = best;
      for (int c = 0; c < first.channels; ++c)
        out.image.at(y, x, c) = stack.images[static_cast<std::size_t>(best)].at(y, x, c);
    }
  }
  return out;
}

SmoothResult smooth_loss(const DepthMap& depth, const Image& aif,
                         const LossWeights& w) {
  if (depth.height != aif.height || depth.width != aif.width)
    throw ShapeError("smooth_loss: depth and image shapes differ");
  const GradientPair gd = spatial_gradients(depth);
  const GradientPair gi = spatial_gradients(channel_mean(aif));
  const double inv_count = 1.0 / (static_cast<double>(depth.height) * depth.width);

  SmoothResult result;
  result.grad_depth = Grid(depth.height, depth.width);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      if (x + 1 < depth.width) {
        const double dd = gd.dx.at(y, x);
        const double weight = std::exp(-w.edge_beta * std::abs(gi.dx.at(y, x)));
        result.value += std::abs(dd) * weight * inv_count;
        const double sign = dd > 0.0 ? 1.0 : (dd < 0.0 ? -1.0 : 0.0);
        result.grad_depth.at(y, x + 1) += sign * weight * inv_count;
        result.grad_depth.at(y, x) -= sign * weight * inv_count;
      }
      if (y + 1 < depth.height) {
        const double dd = gd.dy.at(y, x);
        const double weight = std::exp(-w.edge_beta * std::abs(gi.dy.at(y, x)));
        result.value += std::abs(dd) * weight * inv_count;
        const double sign = dd > 0.0 ? 1.0 : (dd < 0.0 ? -1.0 : 0.0);
        result.grad_depth.at(y + 1, x) += sign * weight * inv_count;
        result.grad_depth.at(y, x) -= sign * weight * inv_count;
      }
    }
  }
  return result;
}

TotalLoss total_loss(const FocalStack& observed, const DepthMap& depth,
                     const Image& aif, const CameraIntrinsics& cam,
                     const PsfConfig& cfg, const LossWeights& w) {
  if (observed.slice_count() != static_cast<int>(cam.focus_distances.size()))
    throw ShapeError("total_loss: stack size does not match focus schedule");

  const int k_count = observed.slice_count();
  std::vector<DefocusMap> sigma_maps;
  sigma_maps.reserve(static_cast<std::size_t>(k_count));
  FocalStack rendered;
  rendered.focus_distances = cam.focus_distances;
  rendered.images.reserve(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    sigma_maps.push_back(defocus_map(depth, cam, k));
    rendered.images.push_back(render_defocus(aif, sigma_maps.back(), cfg));
  }

  const ReconResult rec = recon_loss(rendered, observed, w);
  const BlurResult blur_pred = blur_loss(aif, w);
  const CoarseAif fused = coarse_aif(observed, sigma_maps);
  const BlurResult blur_coarse = blur_loss(fused.image, w);
  const SmoothResult smooth = smooth_loss(depth, aif, w);

  TotalLoss out;
  out.report = make_loss_report(rec.value, blur_pred.value, blur_coarse.value,
                                smooth.value, w);
  if (!std::isfinite(out.report.total))
    throw SolverFault("non-finite loss value");

  out.grad_aif = Field(aif.height, aif.width, aif.channels);
  out.grad_depth = Grid(depth.height, depth.width);

  for (int k = 0; k < k_count; ++k) {
    const Field adj = adjoint_aif(sigma_maps[static_cast<std::size_t>(k)],
                                  rec.grads[static_cast<std::size_t>(k)], cfg);
    check_finite(adj.data.data(), adj.data.size(), adj.width, adj.channels,
                 "reconstruction (aif)");
    for (std::size_t i = 0; i < out.grad_aif.data.size(); ++i)
      out.grad_aif.data[i] += w.recon_scale * adj.data[i];

    const Grid gs = grad_sigma(aif, sigma_maps[static_cast<std::size_t>(k)],
                               rec.grads[static_cast<std::size_t>(k)], cfg);
    check_finite(gs.data.data(), gs.data.size(), gs.width, 1,
                 "reconstruction (sigma)");
    for (int y = 0; y < depth.height; ++y)
      for (int x = 0; x < depth.width; ++x)
        out.grad_depth.at(y, x) += w.recon_scale * gs.at(y, x) *
                                   dsigma_ddepth(depth.at(y, x), cam, k);
  }
  check_finite(blur_pred.grad.data.data(), blur_pred.grad.data.size(),
               blur_pred.grad.width, blur_pred.grad.channels, "blurriness");
  for (std::size_t i = 0; i < out.grad_aif.data.size(); ++i)
    out.grad_aif.data[i] += blur_pred.grad.data[i];

  check_finite(smooth.grad_depth.data.data(), smooth.grad_depth.data.size(),
               smooth.grad_depth.width, 1, "smoothness");
  for (std::size_t i = 0; i < out.grad_depth.data.size(); ++i)
    out.grad_depth.data[i] += w.lambda_smooth * smooth.grad_depth.data[i];

  // The coarse-AIF blur term selects source pixels through an argmin; the
  // selection is piecewise constant in depth, so it contributes no gradient.
  check_finite(out.grad_depth.data.data(), out.grad_depth.data.size(),
               out.grad_depth.width, 1, "total (depth)");
  return out;
}

}  // namespace dfd
