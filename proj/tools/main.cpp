// SPDX-License-Identifier: Apache-2.0
//
// dfd: render synthetic focal stacks from RGB-D pairs, solve stacks for depth
// and all-in-focus images, evaluate depth predictions, export CoC curves.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dfd/camera.hpp"
#include "dfd/config.hpp"
#include "dfd/error.hpp"
#include "dfd/image_io.hpp"
#include "dfd/manifest.hpp"
#include "dfd/metrics.hpp"
#include "dfd/psf.hpp"
#include "dfd/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitSolver = 4;

void emit_error(int code, const std::string& message) {
  json err;
  err["code"] = code;
  err["error"] = message;
  std::cerr << err.dump() << "\n";
}

// A preset name ("nyuv2", "defocusnet") or a path to a camera config file.
dfd::CameraIntrinsics resolve_camera(const std::string& spec,
                                     const fs::path& relative_to = {}) {
  for (const std::string& name : dfd::camera_preset_names())
    if (spec == name) return dfd::camera_preset(spec);
  fs::path candidate(spec);
  if (!fs::exists(candidate) && !relative_to.empty() &&
      fs::exists(relative_to / candidate))
    candidate = relative_to / candidate;
  if (!fs::exists(candidate))
    throw dfd::ConfigError("unknown camera preset or config file '" + spec + "'");
  return dfd::camera_from_config(dfd::KeyValueConfig::parse_file(candidate.string()));
}

void write_provenance(const fs::path& path, const std::string& preset,
                      const dfd::CameraIntrinsics& cam, std::uint64_t seed,
                      const json& extra) {
  json record;
  record["preset"] = preset;
  record["seed"] = seed;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                static_cast<unsigned long long>(dfd::fnv1a_hash(
                    dfd::camera_to_config(cam).serialize())));
  record["config_hash"] = hash_hex;
  for (const auto& [key, value] : extra.items()) record[key] = value;
  std::ofstream out(path);
  if (!out) throw dfd::IoError("cannot write provenance record: " + path.string());
  out << record.dump(2) << "\n";
}

struct RgbdPair {
  std::string scene_id;
  fs::path rgb;
  fs::path depth;
};

std::vector<RgbdPair> find_rgbd_pairs(const fs::path& input_dir) {
  if (!fs::is_directory(input_dir))
    throw dfd::IoError("input directory not found: " + input_dir.string());
  std::vector<RgbdPair> pairs;
  std::vector<fs::path> rgb_files;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > 8 && name.ends_with("_rgb.png"))
      rgb_files.push_back(entry.path());
  }
  std::sort(rgb_files.begin(), rgb_files.end());
  for (const fs::path& rgb : rgb_files) {
    std::string stem = rgb.filename().string();
    stem.resize(stem.size() - 8);  // drop "_rgb.png"
    RgbdPair pair{stem, rgb, {}};
    const fs::path pfm = input_dir / (stem + "_depth.pfm");
    const fs::path png = input_dir / (stem + "_depth.png");
    if (fs::exists(pfm))
      pair.depth = pfm;
    else if (fs::exists(png))
      pair.depth = png;
    else
      continue;  // unpaired, reported by the caller
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

dfd::DepthMap read_depth_any(const fs::path& path) {
  if (path.extension() == ".pfm") return dfd::read_depth_pfm(path.string());
  return dfd::read_depth_png16(path.string());
}

int run_render(const std::string& input_dir, const std::string& preset,
               const std::string& out_dir, double noise_sigma,
               std::uint64_t seed) {
  const dfd::CameraIntrinsics cam = resolve_camera(preset);
  const auto pairs = find_rgbd_pairs(input_dir);
  if (pairs.empty())
    throw dfd::ConfigError("no '<scene>_rgb.png' + '<scene>_depth.{pfm,png}' pairs in " +
                           input_dir);
  fs::create_directories(out_dir);

  int rendered = 0;
  std::vector<std::string> failures;
  for (const RgbdPair& pair : pairs) {
    try {
      const dfd::Image aif = dfd::read_image_png(pair.rgb.string());
      if (auto bad = dfd::validate(aif))
        throw dfd::DomainError(pair.rgb.string() + ": " + *bad);
      const dfd::DepthMap depth = read_depth_any(pair.depth);
      if (auto bad = dfd::validate(depth, cam.depth_min, cam.depth_max))
        throw dfd::DomainError(pair.depth.string() + ": " + *bad);
      if (depth.height != aif.height || depth.width != aif.width)
        throw dfd::ShapeError(pair.scene_id + ": RGB and depth dimensions differ");

      dfd::FocalStack stack = dfd::render_stack(aif, depth, cam);
      const std::uint64_t scene_seed = seed ^ dfd::fnv1a_hash(pair.scene_id);
      if (noise_sigma > 0.0)
        stack = dfd::add_gaussian_noise(stack, noise_sigma, scene_seed);

      const fs::path scene_dir = fs::path(out_dir) / pair.scene_id;
      fs::create_directories(scene_dir);

      dfd::StackManifest manifest;
      manifest.scene_id = pair.scene_id;
      manifest.preset = preset;
      manifest.truth_depth = "truth_depth.pfm";
      if (noise_sigma > 0.0) manifest.noise_sigma = noise_sigma;
      for (int k = 0; k < stack.slice_count(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "slice_%02d.png", k);
        dfd::write_image_png((scene_dir / name).string(),
                             stack.images[static_cast<std::size_t>(k)], 16);
        manifest.slices.emplace_back(name, stack.focus_distances[static_cast<std::size_t>(k)]);
      }
      dfd::write_depth_pfm((scene_dir / "truth_depth.pfm").string(), depth);
      dfd::save_manifest(manifest, (scene_dir / "manifest.txt").string());
      write_provenance(scene_dir / "provenance.json", preset, cam, seed,
                       json{{"noise_sigma", noise_sigma}, {"scene", pair.scene_id}});
      ++rendered;
    } catch (const dfd::Error& e) {
      failures.push_back(pair.scene_id + ": " + e.what());
    }
  }

  std::cout << "rendered " << rendered << "/" << pairs.size() << " scenes to "
            << out_dir << "\n";
  if (!failures.empty()) {
    std::cerr << failures.size() << " scene(s) failed:\n";
    for (const std::string& f : failures) std::cerr << "  " << f << "\n";
  }
  if (rendered == 0) throw dfd::IoError("every scene failed to render");
  return kExitOk;
}

int run_solve(const std::string& manifest_path, const std::string& camera_file,
              const std::string& solver_file, const std::string& weights_file,
              const std::string& out_dir) {
  const dfd::StackManifest manifest = dfd::load_manifest(manifest_path);
  const fs::path base_dir = fs::path(manifest_path).parent_path();

  const dfd::CameraIntrinsics cam =
      camera_file.empty() ? resolve_camera(manifest.preset, base_dir)
                          : resolve_camera(camera_file);
  dfd::SolverConfig solver_cfg;
  if (!solver_file.empty())
    solver_cfg = dfd::solver_from_config(dfd::KeyValueConfig::parse_file(solver_file));
  dfd::LossWeights weights;
  if (!weights_file.empty())
    weights = dfd::weights_from_config(dfd::KeyValueConfig::parse_file(weights_file));

  const dfd::FocalStack stack = dfd::load_stack(manifest, base_dir.string());
  const dfd::SolveResult result = dfd::solve(stack, cam, solver_cfg, weights);
  for (const std::string& warning : result.warnings)
    std::cerr << "warning: " << warning << "\n";

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  dfd::write_depth_pfm((out / "depth.pfm").string(), result.depth);
  dfd::write_depth_png16((out / "depth_mm.png").string(), result.depth);
  dfd::write_image_png((out / "aif.png").string(), result.aif, 16);

  {
    std::ofstream csv(out / "loss.csv");
    if (!csv) throw dfd::IoError("cannot write loss history CSV");
    csv << "iteration,total,recon,blur_pred,blur_coarse,smooth\n";
    for (std::size_t i = 0; i < result.history.size(); ++i) {
      const dfd::LossReport& r = result.history[i];
      csv << i << ',' << dfd::format_double(r.total) << ','
          << dfd::format_double(r.recon) << ',' << dfd::format_double(r.blur_predicted)
          << ',' << dfd::format_double(r.blur_coarse) << ','
          << dfd::format_double(r.smooth) << '\n';
    }
  }

  json extra;
  extra["scene"] = manifest.scene_id;
  extra["iterations_run"] = result.history.size();
  write_provenance(out / "provenance.json",
                   camera_file.empty() ? manifest.preset : camera_file, cam, 0,
                   extra);

  if (!manifest.truth_depth.empty()) {
    const dfd::DepthMap truth =
        read_depth_any(base_dir / manifest.truth_depth);
    const dfd::DepthMetrics metrics = dfd::evaluate(result.depth, truth);
    dfd::report_csv({{manifest.scene_id, metrics}}, (out / "metrics.csv").string());
    std::cout << "delta1=" << metrics.delta1 << " delta2=" << metrics.delta2
              << " delta3=" << metrics.delta3 << " rmse=" << metrics.rmse
              << " absrel=" << metrics.absrel << "\n";
  } else {
    std::cerr << "warning: manifest has no truth depth, metrics row omitted\n";
  }
  std::cout << "outputs written to " << out_dir << "\n";
  return kExitOk;
}

int run_eval(const std::string& pred_path, const std::string& truth_path,
             std::optional<double> cap, const std::string& mask_path,
             const std::string& csv_path) {
  const dfd::DepthMap pred = read_depth_any(pred_path);
  const dfd::DepthMap truth = read_depth_any(truth_path);
  std::optional<dfd::Grid> mask;
  if (!mask_path.empty()) {
    const dfd::Image mask_img = dfd::read_image_png(mask_path);
    dfd::Grid grid(mask_img.height, mask_img.width);
    for (int y = 0; y < mask_img.height; ++y)
      for (int x = 0; x < mask_img.width; ++x) {
        double any = 0.0;
        for (int c = 0; c < mask_img.channels; ++c) any += mask_img.at(y, x, c);
        grid.at(y, x) = any > 0.0 ? 1.0 : 0.0;
      }
    mask = std::move(grid);
  }
  const dfd::DepthMetrics metrics =
      dfd::evaluate(pred, truth, mask ? &*mask : nullptr, cap);
  std::cout << "delta1=" << metrics.delta1 << " delta2=" << metrics.delta2
            << " delta3=" << metrics.delta3 << " rmse=" << metrics.rmse
            << " absrel=" << metrics.absrel
            << " valid_pixels=" << metrics.valid_pixel_count << "\n";
  if (!csv_path.empty()) {
    const std::string scene_id = fs::path(pred_path).stem().string();
    dfd::report_csv({{scene_id, metrics}}, csv_path);
  }
  return kExitOk;
}

int run_curves(const std::string& preset, const std::string& out_path) {
  const dfd::CameraIntrinsics cam = resolve_camera(preset);
  constexpr double kResolution = 0.01;  // 1 cm grid
  std::ofstream out(out_path);
  if (!out) throw dfd::IoError("cannot open curve CSV for writing: " + out_path);
  out << "depth";
  for (std::size_t k = 0; k < cam.focus_distances.size(); ++k)
    out << ",sigma_F" << (k + 1);
  out << "\n";
  const int steps = static_cast<int>(
      std::floor((cam.depth_max - cam.depth_min) / kResolution + 0.5));
  for (int i = 0; i <= steps; ++i) {
    const double d = std::min(cam.depth_min + i * kResolution, cam.depth_max);
    out << dfd::format_double(d);
    for (int k = 0; k < static_cast<int>(cam.focus_distances.size()); ++k)
      out << ',' << dfd::format_double(dfd::coc_sigma(d, cam, k));
    out << "\n";
  }
  if (!out) throw dfd::IoError("failed writing curve CSV: " + out_path);
  std::cout << "wrote " << (steps + 1) << " rows to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depth and all-in-focus recovery from sparse focal stacks"};
  app.require_subcommand(1);

  auto* render = app.add_subcommand(
      "render", "render focal-stack datasets from RGB-D pairs");
  std::string render_input, render_preset = "nyuv2", render_out;
  double render_noise = 0.0;
  std::uint64_t render_seed = 0;
  render->add_option("--input", render_input, "directory of *_rgb.png / *_depth.{pfm,png} pairs")->required();
  render->add_option("--preset", render_preset, "camera preset name or config file");
  render->add_option("--out", render_out, "output dataset directory")->required();
  render->add_option("--noise-sigma", render_noise, "Gaussian noise level added to slices");
  render->add_option("--seed", render_seed, "noise RNG seed");

  auto* solve = app.add_subcommand("solve", "recover depth and AIF from a stack");
  std::string solve_manifest, solve_camera, solve_solver, solve_weights, solve_out;
  solve->add_option("--manifest", solve_manifest, "stack manifest file")->required();
  solve->add_option("--camera", solve_camera, "camera preset name or config file (overrides the manifest)");
  solve->add_option("--solver", solve_solver, "solver config file");
  solve->add_option("--weights", solve_weights, "loss weights config file");
  solve->add_option("--out", solve_out, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a predicted depth map");
  std::string eval_pred, eval_truth, eval_mask, eval_csv;
  double eval_cap = 0.0;
  bool eval_has_cap = false;
  eval->add_option("--pred", eval_pred, "predicted depth (.pfm or 16-bit mm .png)")->required();
  eval->add_option("--truth", eval_truth, "ground-truth depth")->required();
  eval->add_option("--cap", eval_cap, "only evaluate pixels with truth < cap (meters)")
      ->each([&](const std::string&) { eval_has_cap = true; });
  eval->add_option("--mask", eval_mask, "validity mask PNG (nonzero = valid)");
  eval->add_option("--csv", eval_csv, "write a metrics CSV row here");

  auto* curves = app.add_subcommand("curves", "export CoC response curves as CSV");
  std::string curves_preset = "nyuv2", curves_out;
  curves->add_option("--preset", curves_preset, "camera preset name or config file");
  curves->add_option("--out", curves_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    emit_error(kExitConfig, e.what());
    return kExitConfig;
  }

  try {
    if (render->parsed())
      return run_render(render_input, render_preset, render_out, render_noise,
                        render_seed);
    if (solve->parsed())
      return run_solve(solve_manifest, solve_camera, solve_solver, solve_weights,
                       solve_out);
    if (eval->parsed())
      return run_eval(eval_pred, eval_truth,
                      eval_has_cap ? std::optional<double>(eval_cap) : std::nullopt,
                      eval_mask, eval_csv);
    if (curves->parsed()) return run_curves(curves_preset, curves_out);
  } catch (const dfd::ConfigError& e) {
    emit_error(kExitConfig, e.what());
    return kExitConfig;
  } catch (const dfd::IoError& e) {
    emit_error(kExitIo, e.what());
    return kExitIo;
  } catch (const dfd::SolverFault& e) {
    emit_error(kExitSolver, e.what());
    return kExitSolver;
  } catch (const dfd::Error& e) {
    emit_error(kExitConfig, e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    emit_error(1, e.what());
    return 1;
  }
  return kExitOk;
}
