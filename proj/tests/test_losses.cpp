// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dfd/error.hpp"
#include "dfd/losses.hpp"
#include "support/test_helpers.hpp"

using namespace dfd;
using dfd_test::random_grid;
using dfd_test::random_image;
using dfd_test::rel_err;

namespace {

Image blur_uniform(const Image& img, double sigma) {
  return render_defocus(img, DefocusMap(img.height, img.width, sigma));
}

// Scene whose pixels are safe for depth finite differences: away from the
// |d - F| kinks, the sigma threshold, coarse-AIF selection ties, and depth
// gradient sign flips.
struct FdScene {
  CameraIntrinsics cam;
  DepthMap depth;
  Image aif;
  FocalStack observed;
  std::vector<std::pair<int, int>> probe_pixels;
};

FdScene make_fd_scene(std::uint64_t seed) {
  FdScene scene;
  scene.cam = camera_preset("nyuv2");
  scene.aif = dfd_test::textured_aif(12, 12, seed);
  scene.depth = DepthMap{random_grid(12, 12, 1.55, 3.45, seed + 1)};
  // True generator depth differs from the evaluation depth so reconstruction
  // gradients are non-trivial.
  const DepthMap generator{random_grid(12, 12, 1.6, 3.4, seed + 2)};
  scene.observed = render_stack(dfd_test::textured_aif(12, 12, seed + 3), generator,
                                scene.cam);

  const double h = 1e-3;
  for (int y = 2; y < 10 && scene.probe_pixels.size() < 10; ++y) {
    for (int x = 2; x < 10 && scene.probe_pixels.size() < 10; ++x) {
      const double d = scene.depth.at(y, x);
      bool ok = true;
      double best = 1e300, second = 1e300;
      double max_sigma = 0.0;
      for (int k = 0; k < 5; ++k) {
        const double focus = scene.cam.focus_distances[static_cast<std::size_t>(k)];
        if (std::abs(d - focus) < 5e-2) ok = false;  // thin-lens kink
        const double s = coc_sigma(d, scene.cam, k);
        if (std::abs(s - 1.0) < 0.08) ok = false;  // clear-pixel threshold
        max_sigma = std::max(max_sigma, s);
        if (s < best) {
          second = best;
          best = s;
        } else {
          second = std::min(second, s);
        }
      }
      if (max_sigma < 1.2) ok = false;
      if (second - best < 0.05) ok = false;  // coarse-AIF selection must not flip
      // Depth-gradient kinks of the smoothness term.
      for (const auto& [ny, nx] : {std::pair{y, x - 1}, std::pair{y, x + 1},
                                   std::pair{y - 1, x}, std::pair{y + 1, x}}) {
        if (std::abs(scene.depth.at(ny, nx) - d) < 20.0 * h) ok = false;
      }
      if (ok) scene.probe_pixels.emplace_back(y, x);
    }
  }
  return scene;
}

}  // namespace

TEST_SUITE_BEGIN("losses");

TEST_CASE("ssim") {
  SUBCASE("self-similarity is exactly one with finite gradient") {
    const Image a = random_image(10, 10, 3, 0.0, 1.0, 300);
    const SsimResult r = ssim(a, a);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
    for (double v : r.grad_a.data) CHECK(std::isfinite(v));
  }
  SUBCASE("constant zero vs constant one follows the closed form") {
    const double c1 = 0.01 * 0.01;
    const SsimResult r = ssim(Image(8, 8, 1, 0.0), Image(8, 8, 1, 1.0));
    CHECK(rel_err(r.value, c1 / (1.0 + c1)) < 1e-12);
  }
  SUBCASE("gradient matches central finite differences") {
    const Image a = random_image(8, 8, 1, 0.1, 0.9, 301);
    const Image b = random_image(8, 8, 1, 0.1, 0.9, 302);
    const SsimResult r = ssim(a, b);
    std::mt19937_64 rng(303);
    const double h = 1e-5;
    for (int probe = 0; probe < 10; ++probe) {
      const int px = static_cast<int>(rng() % 8);
      const int py = static_cast<int>(rng() % 8);
      Image plus = a, minus = a;
      plus.at(py, px, 0) += h;
      minus.at(py, px, 0) -= h;
      const double fd = (ssim(plus, b).value - ssim(minus, b).value) / (2.0 * h);
      CHECK(rel_err(r.grad_a.at(py, px, 0), fd) < 1e-4);
    }
  }
  SUBCASE("shape mismatch throws") {
    CHECK_THROWS_AS(ssim(Image(4, 4, 1), Image(4, 5, 1)), ShapeError);
  }
}

TEST_CASE("recon_loss") {
  const CameraIntrinsics cam = camera_preset("nyuv2");
  LossWeights w;

  auto make_stack = [&](std::uint64_t seed) {
    FocalStack stack;
    stack.focus_distances = cam.focus_distances;
    for (int k = 0; k < 5; ++k)
      stack.images.push_back(random_image(8, 8, 3, 0.05, 0.95, seed + static_cast<std::uint64_t>(k)));
    return stack;
  };

  SUBCASE("identical stacks give zero") {
    const FocalStack stack = make_stack(310);
    const ReconResult r = recon_loss(stack, stack, w);
    CHECK(r.value == 0.0);
  }
  SUBCASE("alpha zero reduces to mean L1") {
    w.alpha = 0.0;
    const FocalStack a = make_stack(311);
    const FocalStack b = make_stack(317);
    const ReconResult r = recon_loss(a, b, w);
    double expected = 0.0;
    for (int k = 0; k < 5; ++k) {
      double l1 = 0.0;
      for (std::size_t i = 0; i < a.images[0].data.size(); ++i)
        l1 += std::abs(a.images[static_cast<std::size_t>(k)].data[i] -
                       b.images[static_cast<std::size_t>(k)].data[i]);
      expected += l1 / (8.0 * 8.0 * 3.0) / 5.0;
    }
    CHECK(rel_err(r.value, expected) < 1e-12);
  }
  SUBCASE("value matches a straight-line recomputation of the mixed formula") {
    const FocalStack a = make_stack(312);
    const FocalStack b = make_stack(318);
    const ReconResult r = recon_loss(a, b, w);
    double expected = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double s =
          ssim(a.images[static_cast<std::size_t>(k)], b.images[static_cast<std::size_t>(k)]).value;
      double l1 = 0.0;
      for (std::size_t i = 0; i < a.images[0].data.size(); ++i)
        l1 += std::abs(a.images[static_cast<std::size_t>(k)].data[i] -
                       b.images[static_cast<std::size_t>(k)].data[i]);
      l1 /= 8.0 * 8.0 * 3.0;
      expected += (w.alpha * (1.0 - s) / 2.0 + (1.0 - w.alpha) * l1) / 5.0;
    }
    CHECK(rel_err(r.value, expected) < 1e-12);
  }
  SUBCASE("gradient matches finite differences") {
    const FocalStack a = make_stack(313);
    const FocalStack b = make_stack(319);
    const ReconResult r = recon_loss(a, b, w);
    std::mt19937_64 rng(314);
    const double h = 1e-6;
    for (int probe = 0; probe < 8; ++probe) {
      const int k = static_cast<int>(rng() % 5);
      const int px = static_cast<int>(rng() % 8);
      const int py = static_cast<int>(rng() % 8);
      const int c = static_cast<int>(rng() % 3);
      // Keep away from the L1 kink.
      if (std::abs(a.images[static_cast<std::size_t>(k)].at(py, px, c) -
                   b.images[static_cast<std::size_t>(k)].at(py, px, c)) < 10.0 * h)
        continue;
      FocalStack plus = a, minus = a;
      plus.images[static_cast<std::size_t>(k)].at(py, px, c) += h;
      minus.images[static_cast<std::size_t>(k)].at(py, px, c) -= h;
      const double fd =
          (recon_loss(plus, b, w).value - recon_loss(minus, b, w).value) / (2.0 * h);
      CHECK(rel_err(r.grads[static_cast<std::size_t>(k)].at(py, px, c), fd) < 1e-4);
    }
  }
  SUBCASE("stack mismatch throws") {
    FocalStack a = make_stack(315);
    FocalStack b = make_stack(316);
    b.focus_distances[2] = 2.6;
    CHECK_THROWS_AS(recon_loss(a, b, w), ShapeError);
  }
}

TEST_CASE("blur_loss") {
  LossWeights w;

  SUBCASE("blurring a sharp pattern increases the loss") {
    Image checker(16, 16, 1);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) checker.at(y, x, 0) = (x + y) % 2 ? 0.9 : 0.1;
    const double sharp = blur_loss(checker, w).value;
    const double blurred = blur_loss(blur_uniform(checker, 2.0), w).value;
    CHECK(sharp < blurred);
  }
  SUBCASE("constant image hits the epsilon floor") {
    const BlurResult r = blur_loss(Image(8, 8, 3, 0.5), w);
    CHECK(rel_err(r.value, -0.01 * std::log(1e-8)) < 1e-12);
  }
  SUBCASE("gradient matches finite differences") {
    const Image img = random_image(9, 9, 3, 0.1, 0.9, 320);
    const BlurResult r = blur_loss(img, w);
    std::mt19937_64 rng(321);
    const double h = 1e-6;
    for (int probe = 0; probe < 10; ++probe) {
      const int px = static_cast<int>(rng() % 9);
      const int py = static_cast<int>(rng() % 9);
      const int c = static_cast<int>(rng() % 3);
      Image plus = img, minus = img;
      plus.at(py, px, c) += h;
      minus.at(py, px, c) -= h;
      const double fd = (blur_loss(plus, w).value - blur_loss(minus, w).value) / (2.0 * h);
      CHECK(rel_err(r.grad.at(py, px, c), fd) < 1e-4);
    }
  }
  SUBCASE("degenerate shape throws") {
    CHECK_THROWS_AS(blur_loss(Image(2, 8, 1), w), ShapeError);
  }
}

TEST_CASE("coarse_aif") {
  const CameraIntrinsics cam = camera_preset("nyuv2");
  FocalStack stack;
  stack.focus_distances = cam.focus_distances;
  for (int k = 0; k < 5; ++k)
    stack.images.push_back(random_image(6, 6, 3, 0.0, 1.0, 330 + static_cast<std::uint64_t>(k)));

  SUBCASE("a zero-sigma slice is copied verbatim") {
    std::vector<DefocusMap> maps(5, DefocusMap(6, 6, 2.0));
    maps[3] = DefocusMap(6, 6, 0.0);
    const CoarseAif fused = coarse_aif(stack, maps);
    for (std::size_t i = 0; i < fused.image.data.size(); ++i)
      CHECK(fused.image.data[i] == stack.images[3].data[i]);
    for (int idx : fused.source_index) CHECK(idx == 3);
  }
  SUBCASE("selection follows the per-pixel argmin oracle") {
    std::vector<DefocusMap> maps;
    for (int k = 0; k < 5; ++k)
      maps.push_back(DefocusMap{random_grid(6, 6, 0.0, 4.0, 340 + static_cast<std::uint64_t>(k))});
    const CoarseAif fused = coarse_aif(stack, maps);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) {
        int expected = 0;
        for (int k = 1; k < 5; ++k)
          if (maps[static_cast<std::size_t>(k)].at(y, x) <
              maps[static_cast<std::size_t>(expected)].at(y, x))
            expected = k;
        CHECK(fused.source_index[static_cast<std::size_t>(y) * 6 + x] == expected);
        for (int c = 0; c < 3; ++c)
          CHECK(fused.image.at(y, x, c) ==
                stack.images[static_cast<std::size_t>(expected)].at(y, x, c));
      }
  }
  SUBCASE("identical maps pick slice zero everywhere (tie rule)") {
    std::vector<DefocusMap> maps(5, DefocusMap(6, 6, 1.7));
    const CoarseAif fused = coarse_aif(stack, maps);
    for (int idx : fused.source_index) CHECK(idx == 0);
  }
  SUBCASE("selection is invariant under a strictly monotone transform") {
    std::vector<DefocusMap> maps;
    for (int k = 0; k < 5; ++k)
      maps.push_back(DefocusMap{random_grid(6, 6, 0.0, 4.0, 350 + static_cast<std::uint64_t>(k))});
    std::vector<DefocusMap> warped = maps;
    for (DefocusMap& m : warped)
      for (double& v : m.data) v = std::exp(0.7 * v) + 2.0 * v;
    CHECK(coarse_aif(stack, maps).source_index ==
          coarse_aif(stack, warped).source_index);
  }
  SUBCASE("length mismatch throws") {
    std::vector<DefocusMap> maps(4, DefocusMap(6, 6, 1.0));
    CHECK_THROWS_AS(coarse_aif(stack, maps), ShapeError);
  }
}

TEST_CASE("smooth_loss") {
  LossWeights w;

  SUBCASE("constant depth costs nothing") {
    const SmoothResult r = smooth_loss(DepthMap(6, 6, 2.0),
                                       random_image(6, 6, 3, 0.0, 1.0, 360), w);
    CHECK(r.value == 0.0);
    for (double v : r.grad_depth.data) CHECK(v == 0.0);
  }
  SUBCASE("ramp against a constant image follows the closed form") {
    const int h = 5, width = 8;
    const double slope = 0.3;
    DepthMap depth(h, width);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < width; ++x) depth.at(y, x) = 1.0 + slope * x;
    const SmoothResult r = smooth_loss(depth, Image(h, width, 3, 0.5), w);
    CHECK(rel_err(r.value, slope * (width - 1) / static_cast<double>(width)) < 1e-12);
  }
  SUBCASE("an image edge under the depth edge lowers the cost") {
    DepthMap depth(6, 8, 1.5);
    for (int y = 0; y < 6; ++y)
      for (int x = 4; x < 8; ++x) depth.at(y, x) = 2.5;
    Image flat(6, 8, 1, 0.5);
    Image edged(6, 8, 1, 0.2);
    for (int y = 0; y < 6; ++y)
      for (int x = 4; x < 8; ++x) edged.at(y, x, 0) = 0.9;
    CHECK(smooth_loss(depth, edged, w).value < smooth_loss(depth, flat, w).value);
  }
  SUBCASE("invariant under adding a constant to the depth") {
    const DepthMap depth{random_grid(7, 7, 1.0, 3.0, 361)};
    DepthMap shifted = depth;
    for (double& v : shifted.data) v += 2.21;
    const Image aif = random_image(7, 7, 3, 0.0, 1.0, 362);
    CHECK(rel_err(smooth_loss(depth, aif, w).value,
                  smooth_loss(shifted, aif, w).value) < 1e-12);
  }
  SUBCASE("gradient matches finite differences away from kinks") {
    const DepthMap depth{random_grid(8, 8, 1.0, 3.0, 363)};
    const Image aif = random_image(8, 8, 3, 0.0, 1.0, 364);
    const SmoothResult r = smooth_loss(depth, aif, w);
    std::mt19937_64 rng(365);
    const double h = 1e-6;
    for (int probe = 0; probe < 10; ++probe) {
      const int px = 1 + static_cast<int>(rng() % 6);
      const int py = 1 + static_cast<int>(rng() % 6);
      DepthMap plus = depth, minus = depth;
      plus.at(py, px) += h;
      minus.at(py, px) -= h;
      const double fd =
          (smooth_loss(plus, aif, w).value - smooth_loss(minus, aif, w).value) /
          (2.0 * h);
      CHECK(rel_err(r.grad_depth.at(py, px), fd) < 1e-4);
    }
  }
}

TEST_CASE("total_loss") {
  const CameraIntrinsics cam = camera_preset("nyuv2");
  const PsfConfig cfg;
  LossWeights w;

  SUBCASE("at the generating fields the reconstruction term is zero") {
    const Image aif = dfd_test::textured_aif(12, 12, 370);
    const DepthMap depth{random_grid(12, 12, 1.6, 3.4, 371)};
    const FocalStack observed = render_stack(aif, depth, cam, cfg);
    const TotalLoss r = total_loss(observed, depth, aif, cam, cfg, w);
    CHECK(r.report.recon == 0.0);
    CHECK(r.report.total == doctest::Approx(r.report.blur_predicted +
                                            w.coarse_blur_scale * r.report.blur_coarse +
                                            w.lambda_smooth * r.report.smooth)
                                .epsilon(1e-12));
  }
  SUBCASE("report total is the weighted recombination of its terms") {
    const FdScene scene = make_fd_scene(372);
    const TotalLoss r =
        total_loss(scene.observed, scene.depth, scene.aif, cam, cfg, w);
    const double recombined = w.recon_scale * r.report.recon + r.report.blur_predicted +
                              w.coarse_blur_scale * r.report.blur_coarse +
                              w.lambda_smooth * r.report.smooth;
    CHECK(std::abs(r.report.total - recombined) < 1e-12);
  }
  SUBCASE("depth gradient matches finite differences at safe pixels") {
    const FdScene scene = make_fd_scene(373);
    REQUIRE(scene.probe_pixels.size() >= 10);
    const TotalLoss r =
        total_loss(scene.observed, scene.depth, scene.aif, cam, cfg, w);
    const double h = 1e-3;
    for (const auto& [py, px] : scene.probe_pixels) {
      DepthMap plus = scene.depth, minus = scene.depth;
      plus.at(py, px) += h;
      minus.at(py, px) -= h;
      const double fd =
          (total_loss(scene.observed, plus, scene.aif, cam, cfg, w).report.total -
           total_loss(scene.observed, minus, scene.aif, cam, cfg, w).report.total) /
          (2.0 * h);
      CHECK(rel_err(r.grad_depth.at(py, px), fd) < 1e-3);
    }
  }
  SUBCASE("AIF gradient matches finite differences of the terms that flow into it") {
    // The smoothness edge weights are treated as constants of the current AIF
    // (only depth receives a smoothness gradient), so the finite-difference
    // target is the reconstruction plus predicted-blur part of the total.
    const FdScene scene = make_fd_scene(374);
    const TotalLoss r =
        total_loss(scene.observed, scene.depth, scene.aif, cam, cfg, w);
    auto aif_terms = [&](const Image& aif) {
      const LossReport rep =
          total_loss(scene.observed, scene.depth, aif, cam, cfg, w).report;
      return w.recon_scale * rep.recon + rep.blur_predicted;
    };
    std::mt19937_64 rng(375);
    const double h = 1e-5;
    for (int probe = 0; probe < 10; ++probe) {
      const int px = 2 + static_cast<int>(rng() % 8);
      const int py = 2 + static_cast<int>(rng() % 8);
      const int c = static_cast<int>(rng() % 3);
      Image plus = scene.aif, minus = scene.aif;
      plus.at(py, px, c) += h;
      minus.at(py, px, c) -= h;
      const double fd = (aif_terms(plus) - aif_terms(minus)) / (2.0 * h);
      CHECK(rel_err(r.grad_aif.at(py, px, c), fd) < 1e-3);
    }
  }
  SUBCASE("reconstruction is locally minimal at the generator") {
    const Image aif = dfd_test::textured_aif(12, 12, 376);
    const DepthMap depth = dfd_test::two_plane_depth(12, 12, 1.6, 3.2);
    const FocalStack observed = render_stack(aif, depth, cam, cfg);
    LossWeights recon_only;
    recon_only.blur_beta = 0.0;
    recon_only.coarse_blur_scale = 0.0;
    recon_only.lambda_smooth = 0.0;
    const double at_truth =
        total_loss(observed, depth, aif, cam, cfg, recon_only).report.recon;
    std::mt19937_64 rng(377);
    for (int probe = 0; probe < 5; ++probe) {
      const int px = 1 + static_cast<int>(rng() % 10);
      const int py = 1 + static_cast<int>(rng() % 10);
      for (double delta : {-0.05, 0.05}) {
        DepthMap perturbed = depth;
        perturbed.at(py, px) += delta;
        const double moved =
            total_loss(observed, perturbed, aif, cam, cfg, recon_only).report.recon;
        CHECK(moved >= at_truth);
      }
    }
  }
  SUBCASE("non-finite inputs surface as solver faults") {
    const FdScene scene = make_fd_scene(378);
    Image poisoned = scene.aif;
    poisoned.at(3, 3, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(
        total_loss(scene.observed, scene.depth, poisoned, cam, cfg, w), SolverFault);
  }
}

TEST_SUITE_END();
