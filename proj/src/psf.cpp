// SPDX-License-Identifier: Apache-2.0
#include "dfd/psf.hpp"

#include <algorithm>
#include <cmath>

#include "dfd/error.hpp"

namespace dfd {

namespace {

int clampi(int v, int lo, int hi) { return std::max(lo, std::min(v, hi)); }

void require_valid(const PsfConfig& cfg) {
  if (auto bad = validate(cfg)) throw ConfigError(*bad);
}

void require_same_shape(int ah, int aw, int bh, int bw, const char* what) {
  if (ah != bh || aw != bw)
    throw ShapeError(std::string(what) + ": shapes differ (" + std::to_string(ah) +
                     "x" + std::to_string(aw) + " vs " + std::to_string(bh) + "x" +
                     std::to_string(bw) + ")");
}

// 1D Gaussian envelope e[t] = exp(-t^2 / (2 sigma^2)) for t in [-R, R] and
// its sum. The 2D kernel is the normalized outer product.
struct Envelope {
  std::vector<double> e;
  double sum = 0.0;          // S = sum_t e[t]
  double dsum_scaled = 0.0;  // S' = sum_t e[t] * t^2 / sigma^3

  Envelope(double sigma, int window) : e(static_cast<std::size_t>(window)) {
    const int radius = window / 2;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const double inv_s3 = 1.0 / (sigma * sigma * sigma);
    for (int t = -radius; t <= radius; ++t) {
      const double v = std::exp(-static_cast<double>(t) * t * inv2s2);
      e[static_cast<std::size_t>(t + radius)] = v;
      sum += v;
      dsum_scaled += v * static_cast<double>(t) * t * inv_s3;
    }
  }
};

}  // namespace

std::optional<std::string> validate(const PsfConfig& cfg) {
  if (cfg.window < 3 || cfg.window % 2 == 0)
    return "PSF window must be odd and >= 3, got " + std::to_string(cfg.window);
  if (!(cfg.clear_sigma_threshold >= 0.0))
    return "clear_sigma_threshold must be non-negative";
  return std::nullopt;
}

std::vector<double> gaussian_kernel(double sigma, const PsfConfig& cfg) {
  require_valid(cfg);
  if (!(sigma >= 0.0))
    throw DomainError("gaussian_kernel: sigma must be non-negative, got " +
                      std::to_string(sigma));
  const int w = cfg.window;
  std::vector<double> kernel(static_cast<std::size_t>(w) * w, 0.0);
  if (sigma < cfg.clear_sigma_threshold || sigma == 0.0) {
    kernel[static_cast<std::size_t>(w / 2) * w + w / 2] = 1.0;
    return kernel;
  }
  const Envelope env(sigma, w);
  double total = 0.0;
  for (int v = 0; v < w; ++v)
    for (int u = 0; u < w; ++u) {
      const double k = env.e[static_cast<std::size_t>(v)] *
                       env.e[static_cast<std::size_t>(u)];
      kernel[static_cast<std::size_t>(v) * w + u] = k;
      total += k;
    }
  for (double& k : kernel) k /= total;
  return kernel;
}

std::vector<double> gaussian_kernel_dsigma(double sigma, const PsfConfig& cfg) {
  require_valid(cfg);
  if (!(sigma >= 0.0))
    throw DomainError("gaussian_kernel_dsigma: sigma must be non-negative");
  const int w = cfg.window;
  std::vector<double> dk(static_cast<std::size_t>(w) * w, 0.0);
  if (sigma < cfg.clear_sigma_threshold || sigma == 0.0) return dk;  // dead zone

  // w(u,v) = e_u e_v / S^2 with de/dsigma = e * t^2 / sigma^3, so
  // dw/dsigma = w * ((u^2 + v^2) / sigma^3 - 2 S'/S).
  const Envelope env(sigma, w);
  const int radius = w / 2;
  const double inv_s3 = 1.0 / (sigma * sigma * sigma);
  const double q2 = 2.0 * env.dsum_scaled / env.sum;
  const double inv_sum2 = 1.0 / (env.sum * env.sum);
  for (int v = -radius; v <= radius; ++v)
    for (int u = -radius; u <= radius; ++u) {
      const double weight = env.e[static_cast<std::size_t>(v + radius)] *
                            env.e[static_cast<std::size_t>(u + radius)] * inv_sum2;
      const double r2 = static_cast<double>(u) * u + static_cast<double>(v) * v;
      dk[static_cast<std::size_t>(v + radius) * w + (u + radius)] =
          weight * (r2 * inv_s3 - q2);
    }
  return dk;
}

Image render_defocus(const Image& aif, const DefocusMap& sigma_map,
                     const PsfConfig& cfg) {
  require_valid(cfg);
  require_same_shape(aif.height, aif.width, sigma_map.height, sigma_map.width,
                     "render_defocus");
  const int h = aif.height, w = aif.width, ch = aif.channels;
  if (ch < 1 || ch > 3)
    throw ShapeError("render_defocus: image must have 1 to 3 channels");
  const int radius = cfg.window / 2;
  Image out(h, w, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sigma = sigma_map.at(y, x);
      if (!(sigma >= 0.0))
        throw DomainError("render_defocus: negative sigma at pixel (x=" +
                          std::to_string(x) + ", y=" + std::to_string(y) + ")");
      if (sigma < cfg.clear_sigma_threshold || sigma == 0.0) {
        for (int c = 0; c < ch; ++c) out.at(y, x, c) = aif.at(y, x, c);
        continue;
      }
      const Envelope env(sigma, cfg.window);
      double acc[3] = {0.0, 0.0, 0.0};
      double total = 0.0;
      for (int v = -radius; v <= radius; ++v) {
        const int yy = clampi(y + v, 0, h - 1);
        const double ev = env.e[static_cast<std::size_t>(v + radius)];
        for (int u = -radius; u <= radius; ++u) {
          const int xx = clampi(x + u, 0, w - 1);
          const double weight = ev * env.e[static_cast<std::size_t>(u + radius)];
          total += weight;
          for (int c = 0; c < ch; ++c) acc[c] += weight * aif.at(yy, xx, c);
        }
      }
      const double inv_total = 1.0 / total;
      for (int c = 0; c < ch; ++c) out.at(y, x, c) = acc[c] * inv_total;
    }
  }
  return out;
}

FocalStack render_stack(const Image& aif, const DepthMap& depth,
                        const CameraIntrinsics& cam, const PsfConfig& cfg) {
  require_same_shape(aif.height, aif.width, depth.height, depth.width,
                     "render_stack");
  FocalStack stack;
  stack.focus_distances = cam.focus_distances;
  stack.images.reserve(cam.focus_distances.size());
  for (int k = 0; k < static_cast<int>(cam.focus_distances.size()); ++k)
    stack.images.push_back(render_defocus(aif, defocus_map(depth, cam, k), cfg));
  return stack;
}

Field adjoint_aif(const DefocusMap& sigma_map, const Field& grad_out,
                  const PsfConfig& cfg) {
  require_valid(cfg);
  require_same_shape(grad_out.height, grad_out.width, sigma_map.height,
                     sigma_map.width, "adjoint_aif");
  const int h = grad_out.height, w = grad_out.width, ch = grad_out.channels;
  const int radius = cfg.window / 2;
  Field out(h, w, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sigma = sigma_map.at(y, x);
      if (sigma < cfg.clear_sigma_threshold || sigma == 0.0) {
        for (int c = 0; c < ch; ++c) out.at(y, x, c) += grad_out.at(y, x, c);
        continue;
      }
      const Envelope env(sigma, cfg.window);
      double total = 0.0;
      for (int v = -radius; v <= radius; ++v)
        for (int u = -radius; u <= radius; ++u)
          total += env.e[static_cast<std::size_t>(v + radius)] *
                   env.e[static_cast<std::size_t>(u + radius)];
      const double inv_total = 1.0 / total;
      for (int v = -radius; v <= radius; ++v) {
        const int yy = clampi(y + v, 0, h - 1);
        const double ev = env.e[static_cast<std::size_t>(v + radius)];
        for (int u = -radius; u <= radius; ++u) {
          const int xx = clampi(x + u, 0, w - 1);
          const double weight =
              ev * env.e[static_cast<std::size_t>(u + radius)] * inv_total;
          for (int c = 0; c < ch; ++c)
            out.at(yy, xx, c) += weight * grad_out.at(y, x, c);
        }
      }
    }
  }
  return out;
}

Grid grad_sigma(const Image& aif, const DefocusMap& sigma_map,
                const Field& grad_out, const PsfConfig& cfg) {
  require_valid(cfg);
  require_same_shape(aif.height, aif.width, sigma_map.height, sigma_map.width,
                     "grad_sigma");
  require_same_shape(grad_out.height, grad_out.width, aif.height, aif.width,
                     "grad_sigma");
  if (grad_out.channels != aif.channels)
    throw ShapeError("grad_sigma: channel counts differ");
  const int h = aif.height, w = aif.width, ch = aif.channels;
  const int radius = cfg.window / 2;
  Grid out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sigma = sigma_map.at(y, x);
      if (sigma < cfg.clear_sigma_threshold || sigma == 0.0) continue;  // dead zone
      const Envelope env(sigma, cfg.window);
      const double inv_s3 = 1.0 / (sigma * sigma * sigma);
      const double q2 = 2.0 * env.dsum_scaled / env.sum;
      double total = 0.0;
      for (int v = -radius; v <= radius; ++v)
        for (int u = -radius; u <= radius; ++u)
          total += env.e[static_cast<std::size_t>(v + radius)] *
                   env.e[static_cast<std::size_t>(u + radius)];
      const double inv_total = 1.0 / total;
      double acc = 0.0;
      for (int v = -radius; v <= radius; ++v) {
        const int yy = clampi(y + v, 0, h - 1);
        const double ev = env.e[static_cast<std::size_t>(v + radius)];
        for (int u = -radius; u <= radius; ++u) {
          const int xx = clampi(x + u, 0, w - 1);
          const double weight = ev * env.e[static_cast<std::size_t>(u + radius)] *
                                inv_total;
          const double r2 = static_cast<double>(u) * u + static_cast<double>(v) * v;
          const double dweight = weight * (r2 * inv_s3 - q2);
          for (int c = 0; c < ch; ++c)
            acc += dweight * grad_out.at(y, x, c) * aif.at(yy, xx, c);
        }
      }
      out.at(y, x) = acc;
    }
  }
  return out;
}

}  // namespace dfd
