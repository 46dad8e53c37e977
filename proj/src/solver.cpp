// SPDX-License-Identifier: Apache-2.0
#include "dfd/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "dfd/error.hpp"

namespace dfd {

namespace {

constexpr char kCheckpointMagic[4] = {'D', 'F', 'D', 'S'};
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr double kLogitMargin = 1e-6;
constexpr int kSharpnessRadius = 3;  // 7x7 neighborhood
constexpr double kSharpnessPresmoothSigma = 1.5;
constexpr double kOffFocusNudge = 1.02;
constexpr int kInitCandidateCount = 64;
constexpr double kInitOverrideMargin = 0.9;
// Blur differences are only informative while the blurrier kernel still fits
// the 7x7 window; past that the truncated kernel saturates toward a box.
constexpr double kInitPairSigmaCap = 4.5;
constexpr int kInitMatchRadius = 5;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double r) {
  r = std::clamp(r, kLogitMargin, 1.0 - kLogitMargin);
  return std::log(r / (1.0 - r));
}

double decode_depth_value(double z, const CameraIntrinsics& cam) {
  return cam.depth_min + (cam.depth_max - cam.depth_min) * sigmoid(z);
}

double depth_chain(double z, const CameraIntrinsics& cam) {
  const double s = sigmoid(z);
  return (cam.depth_max - cam.depth_min) * s * (1.0 - s);
}

void require_valid_inputs(const FocalStack& stack, const CameraIntrinsics& cam) {
  if (auto bad = validate(stack)) throw ConfigError("invalid focal stack: " + *bad);
  if (auto bad = validate(cam)) throw ConfigError("invalid camera: " + *bad);
  if (stack.slice_count() != static_cast<int>(cam.focus_distances.size()))
    throw ConfigError("stack size does not match the camera focus schedule");
}

std::vector<double> init_depth_candidates(const CameraIntrinsics& cam) {
  std::vector<double> candidates;
  candidates.reserve(kInitCandidateCount + cam.focus_distances.size());
  const double ratio = cam.depth_max / cam.depth_min;
  for (int i = 0; i < kInitCandidateCount; ++i)
    candidates.push_back(cam.depth_min *
                         std::pow(ratio, static_cast<double>(i) /
                                             (kInitCandidateCount - 1)));
  for (double focus : cam.focus_distances)
    candidates.push_back(
        std::clamp(focus * kOffFocusNudge, cam.depth_min, cam.depth_max));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  return candidates;
}

// Per-pixel squared difference between two slices, summed over channels and an
// 11x11 neighborhood (larger than the sharpness window to suppress noise in
// the candidate scores).
Grid window_mismatch(const Image& a, const Image& b) {
  Grid err(a.height, a.width);
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      double acc = 0.0;
      for (int c = 0; c < a.channels; ++c) {
        const double diff = a.at(y, x, c) - b.at(y, x, c);
        acc += diff * diff;
      }
      err.at(y, x) = acc;
    }
  return box_sum(err, kInitMatchRadius);
}

// 3x3 median, replicate padding; removes isolated init misassignments.
DepthMap median3(const DepthMap& in) {
  DepthMap out(in.height, in.width);
  std::array<double, 9> window;
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = std::clamp(y + dy, 0, in.height - 1);
        for (int dx = -1; dx <= 1; ++dx)
          window[static_cast<std::size_t>(n++)] =
              in.at(yy, std::clamp(x + dx, 0, in.width - 1));
      }
      std::nth_element(window.begin(), window.begin() + 4, window.end());
      out.at(y, x) = window[4];
    }
  return out;
}

// Robust per-pixel noise level of the stack via the median absolute Laplacian
// of the most featureless slice. For i.i.d. noise Var(laplacian) = 20 sigma^2
// and median|x| = 0.6745 sd, so sigma = median / (0.6745 sqrt(20)).
double estimate_noise_sigma(const FocalStack& stack) {
  double best = std::numeric_limits<double>::infinity();
  for (const Image& slice : stack.images) {
    std::vector<double> magnitudes;
    for (int c = 0; c < slice.channels; ++c) {
      const Grid lap = laplacian(channel_plane(slice, c));
      for (int y = 1; y + 1 < lap.height; ++y)
        for (int x = 1; x + 1 < lap.width; ++x)
          magnitudes.push_back(std::abs(lap.at(y, x)));
    }
    if (magnitudes.empty()) return 0.0;
    std::nth_element(magnitudes.begin(),
                     magnitudes.begin() + magnitudes.size() / 2,
                     magnitudes.end());
    const double median = magnitudes[magnitudes.size() / 2];
    best = std::min(best, median / (0.6745 * std::sqrt(20.0)));
  }
  return best;
}

// Sum of squared kernel weights: the factor by which uniform Gaussian blur
// attenuates i.i.d. noise variance. 1 for the identity kernel.
double kernel_energy(double sigma, const PsfConfig& cfg) {
  const std::vector<double> kernel = gaussian_kernel(sigma, cfg);
  double acc = 0.0;
  for (double w : kernel) acc += w * w;
  return acc;
}

// Blur-equalization score of one candidate depth: under that depth hypothesis
// the slice predicted sharpest, blurred up to another slice's predicted sigma,
// must reproduce that slice. Pairs whose blurrier side exceeds the window's
// honest range are skipped; with no usable pair the candidate is unscorable
// (empty grid returned). The score is the mean over the scored pairs.
Grid candidate_mismatch(const FocalStack& stack, const CameraIntrinsics& cam,
                        double candidate_depth, double noise_sigma) {
  const int k_count = stack.slice_count();
  const Image& first = stack.images.front();
  const PsfConfig equalize{7, 1e-9};

  std::vector<double> effective(static_cast<std::size_t>(k_count));
  int sharpest = 0;
  for (int k = 0; k < k_count; ++k) {
    const double sigma = coc_sigma(candidate_depth, cam, k);
    effective[static_cast<std::size_t>(k)] =
        sigma < PsfConfig{}.clear_sigma_threshold ? 0.0 : sigma;
    if (effective[static_cast<std::size_t>(k)] <
        effective[static_cast<std::size_t>(sharpest)])
      sharpest = k;
  }
  const Image& reference = stack.images[static_cast<std::size_t>(sharpest)];
  const double sigma_ref = effective[static_cast<std::size_t>(sharpest)];

  const int window_samples = (2 * kInitMatchRadius + 1) * (2 * kInitMatchRadius + 1) *
                             first.channels;
  Grid total(first.height, first.width);
  int pair_count = 0;
  for (int k = 0; k < k_count; ++k) {
    if (k == sharpest) continue;
    const double sigma_k = effective[static_cast<std::size_t>(k)];
    if (sigma_k > kInitPairSigmaCap) continue;
    const double delta =
        std::sqrt(std::max(sigma_k * sigma_k - sigma_ref * sigma_ref, 0.0));
    const bool identity = delta < 1e-6;
    const Grid err =
        identity
            ? window_mismatch(reference, stack.images[static_cast<std::size_t>(k)])
            : window_mismatch(
                  render_defocus(reference,
                                 DefocusMap(first.height, first.width, delta),
                                 equalize),
                  stack.images[static_cast<std::size_t>(k)]);
    // Equalization blur attenuates noise more for larger delta, which would
    // bias the argmin toward heavy-blur candidates; subtract each pair's
    // expected noise floor.
    const double noise_floor =
        window_samples * noise_sigma * noise_sigma *
        (1.0 + (identity ? 1.0 : kernel_energy(delta, equalize)));
    for (std::size_t i = 0; i < total.data.size(); ++i)
      total.data[i] += err.data[i] - noise_floor;
    ++pair_count;
  }
  if (pair_count == 0) return Grid();
  for (double& v : total.data) v /= pair_count;
  return total;
}

}  // namespace

std::optional<std::string> validate(const SolverConfig& cfg) {
  // Zero is allowed: it freezes the state while still recording loss history.
  if (!(cfg.learning_rate >= 0.0)) return "learning_rate must be non-negative";
  if (cfg.iterations < 1) return "iterations must be at least 1";
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0)) return "beta1 must be in [0, 1)";
  if (!(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) return "beta2 must be in [0, 1)";
  if (!(cfg.adam_epsilon > 0.0)) return "adam_epsilon must be positive";
  if (!(cfg.convergence_tol >= 0.0)) return "convergence_tol must be non-negative";
  if (cfg.convergence_window < 1) return "convergence_window must be at least 1";
  return std::nullopt;
}

std::pair<DepthMap, Image> init_estimate(const FocalStack& stack,
                                         const CameraIntrinsics& cam) {
  if (stack.slice_count() < 2)
    throw ConfigError("init_estimate needs a stack of at least 2 slices");
  const Image& first = stack.images.front();
  const int h = first.height, w = first.width;

  // Sharpness is measured on a band-limited copy of each slice. The 7x7
  // window saturates toward a box filter for large sigma, and a box passes
  // more high-frequency noise than a mid-sigma Gaussian, which would rank
  // heavily defocused slices as the sharpest on noisy textures.
  const PsfConfig band_limit{7, 0.0};
  const DefocusMap presmooth(h, w, kSharpnessPresmoothSigma);

  std::vector<Grid> sharpness;
  sharpness.reserve(stack.images.size());
  for (const Image& slice : stack.images) {
    Grid lap = laplacian(channel_mean(render_defocus(slice, presmooth, band_limit)));
    for (double& v : lap.data) v *= v;
    sharpness.push_back(box_sum(lap, kSharpnessRadius));
  }

  DepthMap depth(h, w);
  Image aif(h, w, first.channels);
  std::vector<int> sharpest_slice(static_cast<std::size_t>(h) * w, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int best = 0;
      double best_score = sharpness[0].at(y, x);
      for (int k = 1; k < stack.slice_count(); ++k) {
        const double s = sharpness[static_cast<std::size_t>(k)].at(y, x);
        if (s > best_score) {  // ties keep the smaller index
          best_score = s;
          best = k;
        }
      }
      sharpest_slice[static_cast<std::size_t>(y) * w + x] = best;
      const double focus = stack.focus_distances[static_cast<std::size_t>(best)];
      depth.at(y, x) =
          std::clamp(focus * kOffFocusNudge, cam.depth_min, cam.depth_max);
      for (int c = 0; c < first.channels; ++c)
        aif.at(y, x, c) = stack.images[static_cast<std::size_t>(best)].at(y, x, c);
    }
  }

  // Photometric refinement: the focus schedule is sparse, so between focus
  // planes every slice is blurred and the sharpest slice can sit far from
  // the true depth. Score a dense candidate grid by blur-equalization
  // consistency and move a pixel off its sharpness init when some candidate
  // explains the observed blur pattern decisively better than the init's own
  // candidate. Texture-free pixels keep the sharpness init.
  const double noise_sigma = estimate_noise_sigma(stack);
  const std::vector<double> candidates = init_depth_candidates(cam);
  std::vector<Grid> scores;
  std::vector<int> predicted_sharpest(candidates.size(), 0);
  scores.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    scores.push_back(candidate_mismatch(stack, cam, candidates[c], noise_sigma));
    for (int k = 1; k < stack.slice_count(); ++k)
      if (coc_sigma(candidates[c], cam, k) <
          coc_sigma(candidates[c], cam, predicted_sharpest[c]))
        predicted_sharpest[c] = k;
  }

  // Map each pixel's sharpness init onto its candidate-grid score.
  std::vector<int> base_candidate(cam.focus_distances.size(), -1);
  for (std::size_t k = 0; k < cam.focus_distances.size(); ++k) {
    const double nudged = std::clamp(cam.focus_distances[k] * kOffFocusNudge,
                                     cam.depth_min, cam.depth_max);
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (candidates[c] == nudged) base_candidate[k] = static_cast<int>(c);
  }

  Grid texture_gate(h, w);
  for (int k = 1; k < stack.slice_count(); ++k) {
    const Grid err = window_mismatch(first, stack.images[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < texture_gate.data.size(); ++i)
      texture_gate.data[i] += err.data[i];
  }

  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    if (!(texture_gate.data[i] > 0.0)) continue;  // blur-indistinguishable
    // Only consider depths whose predicted sharpest slice agrees with the
    // measured one; the refinement resolves position within that interval,
    // it does not re-litigate which slice is sharpest.
    double best_err = inf;
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (scores[c].data.empty()) continue;  // no usable slice pair
      if (predicted_sharpest[c] != sharpest_slice[i]) continue;
      if (scores[c].data[i] < best_err) {
        best_err = scores[c].data[i];
        best_c = c;
      }
    }
    if (best_err == inf) continue;
    const int base = base_candidate[static_cast<std::size_t>(sharpest_slice[i])];
    const double base_err = (base >= 0 && !scores[static_cast<std::size_t>(base)].data.empty())
                                ? scores[static_cast<std::size_t>(base)].data[i]
                                : inf;
    if (best_err < kInitOverrideMargin * base_err)
      depth.data[i] = candidates[best_c];
  }
  depth = median3(depth);

  return {std::move(depth), std::move(aif)};
}

SolveState init_state(const FocalStack& stack, const CameraIntrinsics& cam,
                      const SolverConfig& cfg) {
  if (auto bad = validate(cfg)) throw ConfigError(*bad);
  auto [depth, aif] = init_estimate(stack, cam);

  SolveState state;
  state.height = depth.height;
  state.width = depth.width;
  state.channels = aif.channels;
  state.stack_size = stack.slice_count();
  state.depth_param.resize(depth.data.size());
  state.aif_param.resize(aif.data.size());
  const double range = cam.depth_max - cam.depth_min;
  for (std::size_t i = 0; i < depth.data.size(); ++i)
    state.depth_param[i] = logit((depth.data[i] - cam.depth_min) / range);
  for (std::size_t i = 0; i < aif.data.size(); ++i)
    state.aif_param[i] = logit(aif.data[i]);
  state.depth_m.assign(depth.data.size(), 0.0);
  state.depth_v.assign(depth.data.size(), 0.0);
  state.aif_m.assign(aif.data.size(), 0.0);
  state.aif_v.assign(aif.data.size(), 0.0);
  return state;
}

DepthMap decode_depth(const SolveState& state, const CameraIntrinsics& cam) {
  DepthMap depth(state.height, state.width);
  for (std::size_t i = 0; i < depth.data.size(); ++i)
    depth.data[i] = decode_depth_value(state.depth_param[i], cam);
  return depth;
}

Image decode_aif(const SolveState& state) {
  Image aif(state.height, state.width, state.channels);
  for (std::size_t i = 0; i < aif.data.size(); ++i)
    aif.data[i] = sigmoid(state.aif_param[i]);
  return aif;
}

void step(SolveState& state, const FocalStack& stack, const CameraIntrinsics& cam,
          const PsfConfig& psf_cfg, const SolverConfig& cfg, const LossWeights& w) {
  const DepthMap depth = decode_depth(state, cam);
  const Image aif = decode_aif(state);
  TotalLoss loss = total_loss(stack, depth, aif, cam, psf_cfg, w);

  const double t = static_cast<double>(state.iteration);
  const double lr =
      cfg.cosine_schedule
          ? cfg.learning_rate * 0.5 *
                (1.0 + std::cos(std::numbers::pi * t / cfg.iterations))
          : cfg.learning_rate;
  const double bc1 = 1.0 - std::pow(cfg.beta1, t + 1.0);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t + 1.0);

  for (std::size_t i = 0; i < state.depth_param.size(); ++i) {
    const double g = loss.grad_depth.data[i] * depth_chain(state.depth_param[i], cam);
    if (!std::isfinite(g))
      throw SolverFault("non-finite depth gradient at pixel index " +
                        std::to_string(i));
    double& m = state.depth_m[i];
    double& v = state.depth_v[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    state.depth_param[i] -=
        lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_epsilon);
  }
  for (std::size_t i = 0; i < state.aif_param.size(); ++i) {
    const double s = sigmoid(state.aif_param[i]);
    const double g = loss.grad_aif.data[i] * s * (1.0 - s);
    if (!std::isfinite(g))
      throw SolverFault("non-finite AIF gradient at value index " +
                        std::to_string(i));
    double& m = state.aif_m[i];
    double& v = state.aif_v[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    state.aif_param[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_epsilon);
  }
  state.history.push_back(loss.report);
  ++state.iteration;
}

SolveResult solve(const FocalStack& stack, const CameraIntrinsics& cam,
                  const SolverConfig& cfg, const LossWeights& w,
                  const PsfConfig& psf_cfg) {
  require_valid_inputs(stack, cam);
  if (auto bad = validate(cfg)) throw ConfigError(*bad);
  if (auto bad = validate(w)) throw ConfigError(*bad);
  if (auto bad = validate(psf_cfg)) throw ConfigError(*bad);

  SolveResult result;
  if (cam.focus_distances.size() >= 2) {
    const DistinguishabilityReport report = distinguishability_report(cam);
    if (!(report.min_gap > 0.0))
      result.warnings.push_back(
          "camera configuration has indistinguishable defocus near depth " +
          std::to_string(report.worst_depth) + " m");
  }

  SolveState state = init_state(stack, cam, cfg);

  {
    const Grid lap = laplacian(channel_mean(decode_aif(state)));
    double mean = 0.0, mean_sq = 0.0;
    for (double v : lap.data) {
      mean += v;
      mean_sq += v * v;
    }
    mean /= static_cast<double>(lap.data.size());
    mean_sq /= static_cast<double>(lap.data.size());
    if (mean_sq - mean * mean < 1e-7)
      result.warnings.push_back(
          "texture-poor scene: depth is weakly constrained by data");
  }

  for (int it = 0; it < cfg.iterations; ++it) {
    step(state, stack, cam, psf_cfg, cfg, w);
    const int n = static_cast<int>(state.history.size());
    if (n > cfg.convergence_window) {
      const double now = state.history.back().total;
      const double before =
          state.history[static_cast<std::size_t>(n - 1 - cfg.convergence_window)]
              .total;
      if (std::abs(now - before) <=
          cfg.convergence_tol * std::max(std::abs(before), 1e-12))
        break;
    }
  }

  result.depth = decode_depth(state, cam);
  result.aif = decode_aif(state);
  result.history = std::move(state.history);
  return result;
}

FocalStack add_gaussian_noise(const FocalStack& stack, double noise_sigma,
                              std::uint64_t seed) {
  if (!(noise_sigma >= 0.0))
    throw DomainError("noise sigma must be non-negative");
  FocalStack noisy = stack;
  if (noise_sigma == 0.0) return noisy;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, noise_sigma);
  for (Image& slice : noisy.images)
    for (double& v : slice.data) v = std::clamp(v + dist(rng), 0.0, 1.0);
  return noisy;
}

SolveResult solve_with_noise_protocol(const FocalStack& stack, double noise_sigma,
                                      std::uint64_t seed,
                                      const CameraIntrinsics& cam,
                                      const SolverConfig& cfg, const LossWeights& w,
                                      const PsfConfig& psf_cfg) {
  if (noise_sigma == 0.0) return solve(stack, cam, cfg, w, psf_cfg);
  return solve(add_gaussian_noise(stack, noise_sigma, seed), cam, cfg, w, psf_cfg);
}

void save_checkpoint(const SolveState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint file for writing: " + path);

  auto put_u32 = [&](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  };
  auto put_u64 = [&](std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  };
  auto put_doubles = [&](const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  };

  out.write(kCheckpointMagic, 4);
  put_u32(kCheckpointVersion);
  put_u32(static_cast<std::uint32_t>(state.height));
  put_u32(static_cast<std::uint32_t>(state.width));
  put_u32(static_cast<std::uint32_t>(state.stack_size));
  put_u32(static_cast<std::uint32_t>(state.channels));
  put_u64(static_cast<std::uint64_t>(state.iteration));
  put_u64(static_cast<std::uint64_t>(state.history.size()));
  put_doubles(state.depth_param);
  put_doubles(state.aif_param);
  put_doubles(state.depth_m);
  put_doubles(state.depth_v);
  put_doubles(state.aif_m);
  put_doubles(state.aif_v);
  for (const LossReport& r : state.history) {
    const double record[5] = {r.total, r.recon, r.blur_predicted, r.blur_coarse,
                              r.smooth};
    out.write(reinterpret_cast<const char*>(record), sizeof record);
  }
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

SolveState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint file: " + path);

  auto get_u32 = [&] {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
  };
  auto get_u64 = [&] {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
  };
  auto get_doubles = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
  };

  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw IoError("not a solver checkpoint: " + path);
  const std::uint32_t version = get_u32();
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));

  SolveState state;
  state.height = static_cast<int>(get_u32());
  state.width = static_cast<int>(get_u32());
  state.stack_size = static_cast<int>(get_u32());
  state.channels = static_cast<int>(get_u32());
  state.iteration = static_cast<std::int64_t>(get_u64());
  const std::uint64_t history_len = get_u64();
  if (state.height <= 0 || state.width <= 0 || state.channels <= 0)
    throw IoError("corrupt checkpoint header: " + path);

  const std::size_t npix =
      static_cast<std::size_t>(state.height) * static_cast<std::size_t>(state.width);
  const std::size_t nval = npix * static_cast<std::size_t>(state.channels);
  get_doubles(state.depth_param, npix);
  get_doubles(state.aif_param, nval);
  get_doubles(state.depth_m, npix);
  get_doubles(state.depth_v, npix);
  get_doubles(state.aif_m, nval);
  get_doubles(state.aif_v, nval);
  state.history.resize(history_len);
  for (LossReport& r : state.history) {
    double record[5] = {};
    in.read(reinterpret_cast<char*>(record), sizeof record);
    r.total = record[0];
    r.recon = record[1];
    r.blur_predicted = record[2];
    r.blur_coarse = record[3];
    r.smooth = record[4];
  }
  if (!in) throw IoError("truncated checkpoint: " + path);
  return state;
}

}  // namespace dfd
