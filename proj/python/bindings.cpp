// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dfd/camera.hpp"
#include "dfd/config.hpp"
#include "dfd/error.hpp"
#include "dfd/image.hpp"
#include "dfd/image_io.hpp"
#include "dfd/losses.hpp"
#include "dfd/metrics.hpp"
#include "dfd/psf.hpp"
#include "dfd/solver.hpp"

namespace py = pybind11;
using array_f64 = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

dfd::Grid grid_from_array(const array_f64& arr) {
  if (arr.ndim() != 2) throw dfd::ShapeError("expected a 2-D array");
  dfd::Grid grid(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::copy(arr.data(), arr.data() + arr.size(), grid.data.begin());
  return grid;
}

template <typename FieldT>
FieldT field_from_array(const array_f64& arr) {
  if (arr.ndim() != 2 && arr.ndim() != 3)
    throw dfd::ShapeError("expected a 2-D or 3-D array");
  const int channels = arr.ndim() == 3 ? static_cast<int>(arr.shape(2)) : 1;
  FieldT field(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
               channels);
  std::copy(arr.data(), arr.data() + arr.size(), field.data.begin());
  return field;
}

py::array grid_to_array(const dfd::Grid& grid) {
  array_f64 arr({grid.height, grid.width});
  std::copy(grid.data.begin(), grid.data.end(), arr.mutable_data());
  return std::move(arr);
}

py::array field_to_array(const dfd::Field& field) {
  array_f64 arr({field.height, field.width, field.channels});
  std::copy(field.data.begin(), field.data.end(), arr.mutable_data());
  return std::move(arr);
}

dfd::FocalStack stack_from_python(const py::list& images,
                                  const std::vector<double>& focus_distances) {
  dfd::FocalStack stack;
  stack.focus_distances = focus_distances;
  for (const auto& item : images)
    stack.images.push_back(field_from_array<dfd::Image>(item.cast<array_f64>()));
  if (auto bad = dfd::validate(stack)) throw dfd::ConfigError(*bad);
  return stack;
}

py::list stack_to_python(const dfd::FocalStack& stack) {
  py::list images;
  for (const dfd::Image& img : stack.images) images.append(field_to_array(img));
  return images;
}

py::dict report_to_dict(const dfd::LossReport& r) {
  py::dict d;
  d["total"] = r.total;
  d["recon"] = r.recon;
  d["blur_predicted"] = r.blur_predicted;
  d["blur_coarse"] = r.blur_coarse;
  d["smooth"] = r.smooth;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dfd, m) {
  m.doc() = "depth and all-in-focus recovery from sparse focal stacks";

  py::register_exception<dfd::Error>(m, "DfdError");

  py::class_<dfd::CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double f, double n, double p, std::vector<double> focus,
                       double depth_min, double depth_max) {
             dfd::CameraIntrinsics cam;
             cam.focal_length = f;
             cam.f_number = n;
             cam.pixel_pitch = p;
             cam.focus_distances = std::move(focus);
             cam.depth_min = depth_min;
             cam.depth_max = depth_max;
             if (auto bad = dfd::validate(cam)) throw dfd::ConfigError(*bad);
             return cam;
           }),
           py::arg("focal_length"), py::arg("f_number"),
           py::arg("pixel_pitch") = 1e-5, py::arg("focus_distances"),
           py::arg("depth_min") = 0.1, py::arg("depth_max") = 10.0)
      .def_readwrite("focal_length", &dfd::CameraIntrinsics::focal_length)
      .def_readwrite("f_number", &dfd::CameraIntrinsics::f_number)
      .def_readwrite("pixel_pitch", &dfd::CameraIntrinsics::pixel_pitch)
      .def_readwrite("focus_distances", &dfd::CameraIntrinsics::focus_distances)
      .def_readwrite("depth_min", &dfd::CameraIntrinsics::depth_min)
      .def_readwrite("depth_max", &dfd::CameraIntrinsics::depth_max);

  py::class_<dfd::PsfConfig>(m, "PsfConfig")
      .def(py::init([](int window, double clear_sigma_threshold) {
             dfd::PsfConfig cfg{window, clear_sigma_threshold};
             if (auto bad = dfd::validate(cfg)) throw dfd::ConfigError(*bad);
             return cfg;
           }),
           py::arg("window") = 7, py::arg("clear_sigma_threshold") = 1.0)
      .def_readwrite("window", &dfd::PsfConfig::window)
      .def_readwrite("clear_sigma_threshold", &dfd::PsfConfig::clear_sigma_threshold);

  py::class_<dfd::LossWeights>(m, "LossWeights")
      .def(py::init([](double alpha, double blur_beta, double edge_beta,
                       double lambda_smooth, double recon_scale,
                       double coarse_blur_scale) {
             dfd::LossWeights w{alpha,         blur_beta,   edge_beta,
                                lambda_smooth, recon_scale, coarse_blur_scale};
             if (auto bad = dfd::validate(w)) throw dfd::ConfigError(*bad);
             return w;
           }),
           py::arg("alpha") = 0.85, py::arg("blur_beta") = 0.01,
           py::arg("edge_beta") = 2.5, py::arg("lambda_smooth") = 0.5,
           py::arg("recon_scale") = 100.0, py::arg("coarse_blur_scale") = 10.0)
      .def_readwrite("alpha", &dfd::LossWeights::alpha)
      .def_readwrite("blur_beta", &dfd::LossWeights::blur_beta)
      .def_readwrite("edge_beta", &dfd::LossWeights::edge_beta)
      .def_readwrite("lambda_smooth", &dfd::LossWeights::lambda_smooth)
      .def_readwrite("recon_scale", &dfd::LossWeights::recon_scale)
      .def_readwrite("coarse_blur_scale", &dfd::LossWeights::coarse_blur_scale);

  py::class_<dfd::SolverConfig>(m, "SolverConfig")
      .def(py::init([](double learning_rate, int iterations, double beta1,
                       double beta2, double adam_epsilon, bool cosine_schedule,
                       double convergence_tol, int convergence_window) {
             dfd::SolverConfig cfg;
             cfg.learning_rate = learning_rate;
             cfg.iterations = iterations;
             cfg.beta1 = beta1;
             cfg.beta2 = beta2;
             cfg.adam_epsilon = adam_epsilon;
             cfg.cosine_schedule = cosine_schedule;
             cfg.convergence_tol = convergence_tol;
             cfg.convergence_window = convergence_window;
             if (auto bad = dfd::validate(cfg)) throw dfd::ConfigError(*bad);
             return cfg;
           }),
           py::arg("learning_rate") = 5e-4, py::arg("iterations") = 2000,
           py::arg("beta1") = 0.9, py::arg("beta2") = 0.999,
           py::arg("adam_epsilon") = 1e-8, py::arg("cosine_schedule") = true,
           py::arg("convergence_tol") = 1e-7, py::arg("convergence_window") = 50)
      .def_readwrite("learning_rate", &dfd::SolverConfig::learning_rate)
      .def_readwrite("iterations", &dfd::SolverConfig::iterations)
      .def_readwrite("cosine_schedule", &dfd::SolverConfig::cosine_schedule)
      .def_readwrite("convergence_tol", &dfd::SolverConfig::convergence_tol)
      .def_readwrite("convergence_window", &dfd::SolverConfig::convergence_window);

  py::class_<dfd::DepthMetrics>(m, "DepthMetrics")
      .def_readonly("delta1", &dfd::DepthMetrics::delta1)
      .def_readonly("delta2", &dfd::DepthMetrics::delta2)
      .def_readonly("delta3", &dfd::DepthMetrics::delta3)
      .def_readonly("rmse", &dfd::DepthMetrics::rmse)
      .def_readonly("absrel", &dfd::DepthMetrics::absrel)
      .def_readonly("valid_pixel_count", &dfd::DepthMetrics::valid_pixel_count);

  m.def("camera_preset", &dfd::camera_preset, py::arg("name"));
  m.def("camera_preset_names", &dfd::camera_preset_names);

  m.def("coc_sigma", &dfd::coc_sigma, py::arg("depth"), py::arg("camera"),
        py::arg("focus_index"));
  m.def("dsigma_ddepth", &dfd::dsigma_ddepth, py::arg("depth"), py::arg("camera"),
        py::arg("focus_index"));
  m.def(
      "defocus_map",
      [](const array_f64& depth, const dfd::CameraIntrinsics& cam, int k) {
        return grid_to_array(
            dfd::defocus_map(dfd::DepthMap(grid_from_array(depth)), cam, k));
      },
      py::arg("depth"), py::arg("camera"), py::arg("focus_index"));
  m.def(
      "response_curve",
      [](const dfd::CameraIntrinsics& cam, int k, const std::vector<double>& samples) {
        const auto curve = dfd::response_curve(cam, k, samples);
        array_f64 out({static_cast<py::ssize_t>(curve.size()), py::ssize_t(2)});
        auto view = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < curve.size(); ++i) {
          view(static_cast<py::ssize_t>(i), 0) = curve[i].first;
          view(static_cast<py::ssize_t>(i), 1) = curve[i].second;
        }
        return out;
      },
      py::arg("camera"), py::arg("focus_index"), py::arg("depth_samples"));
  m.def(
      "distinguishability_report",
      [](const dfd::CameraIntrinsics& cam, double resolution) {
        const auto report = dfd::distinguishability_report(cam, resolution);
        py::dict d;
        d["min_gap"] = report.min_gap;
        d["worst_depth"] = report.worst_depth;
        d["grid_resolution"] = report.grid_resolution;
        return d;
      },
      py::arg("camera"), py::arg("grid_resolution") = 0.01);

  m.def(
      "gaussian_kernel",
      [](double sigma, const dfd::PsfConfig& cfg) {
        const auto k = dfd::gaussian_kernel(sigma, cfg);
        array_f64 out({cfg.window, cfg.window});
        std::copy(k.begin(), k.end(), out.mutable_data());
        return out;
      },
      py::arg("sigma"), py::arg("config") = dfd::PsfConfig{});
  m.def(
      "render_defocus",
      [](const array_f64& aif, const array_f64& sigma, const dfd::PsfConfig& cfg) {
        return field_to_array(dfd::render_defocus(
            field_from_array<dfd::Image>(aif),
            dfd::DefocusMap(grid_from_array(sigma)), cfg));
      },
      py::arg("aif"), py::arg("sigma_map"), py::arg("config") = dfd::PsfConfig{});
  m.def(
      "render_stack",
      [](const array_f64& aif, const array_f64& depth,
         const dfd::CameraIntrinsics& cam, const dfd::PsfConfig& cfg) {
        const dfd::FocalStack stack =
            dfd::render_stack(field_from_array<dfd::Image>(aif),
                              dfd::DepthMap(grid_from_array(depth)), cam, cfg);
        return py::make_tuple(stack_to_python(stack), stack.focus_distances);
      },
      py::arg("aif"), py::arg("depth"), py::arg("camera"),
      py::arg("config") = dfd::PsfConfig{});
  m.def(
      "adjoint_aif",
      [](const array_f64& sigma, const array_f64& grad_out, const dfd::PsfConfig& cfg) {
        return field_to_array(dfd::adjoint_aif(
            dfd::DefocusMap(grid_from_array(sigma)),
            field_from_array<dfd::Field>(grad_out), cfg));
      },
      py::arg("sigma_map"), py::arg("grad_out"), py::arg("config") = dfd::PsfConfig{});
  m.def(
      "grad_sigma",
      [](const array_f64& aif, const array_f64& sigma, const array_f64& grad_out,
         const dfd::PsfConfig& cfg) {
        return grid_to_array(dfd::grad_sigma(
            field_from_array<dfd::Image>(aif), dfd::DefocusMap(grid_from_array(sigma)),
            field_from_array<dfd::Field>(grad_out), cfg));
      },
      py::arg("aif"), py::arg("sigma_map"), py::arg("grad_out"),
      py::arg("config") = dfd::PsfConfig{});

  m.def(
      "ssim",
      [](const array_f64& a, const array_f64& b) {
        const dfd::SsimResult r = dfd::ssim(field_from_array<dfd::Image>(a),
                                            field_from_array<dfd::Image>(b));
        return py::make_tuple(r.value, field_to_array(r.grad_a));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "blur_loss",
      [](const array_f64& img, const dfd::LossWeights& w) {
        const dfd::BlurResult r = dfd::blur_loss(field_from_array<dfd::Image>(img), w);
        return py::make_tuple(r.value, field_to_array(r.grad));
      },
      py::arg("image"), py::arg("weights") = dfd::LossWeights{});
  m.def(
      "smooth_loss",
      [](const array_f64& depth, const array_f64& aif, const dfd::LossWeights& w) {
        const dfd::SmoothResult r = dfd::smooth_loss(
            dfd::DepthMap(grid_from_array(depth)), field_from_array<dfd::Image>(aif), w);
        return py::make_tuple(r.value, grid_to_array(r.grad_depth));
      },
      py::arg("depth"), py::arg("aif"), py::arg("weights") = dfd::LossWeights{});
  m.def(
      "coarse_aif",
      [](const py::list& images, const std::vector<double>& focus_distances,
         const py::list& sigma_maps) {
        const dfd::FocalStack stack = stack_from_python(images, focus_distances);
        std::vector<dfd::DefocusMap> maps;
        for (const auto& item : sigma_maps)
          maps.push_back(dfd::DefocusMap(grid_from_array(item.cast<array_f64>())));
        const dfd::CoarseAif fused = dfd::coarse_aif(stack, maps);
        py::array indices = py::array_t<int>(
            {fused.image.height, fused.image.width});
        std::copy(fused.source_index.begin(), fused.source_index.end(),
                  static_cast<int*>(indices.request().ptr));
        return py::make_tuple(field_to_array(fused.image), indices);
      },
      py::arg("images"), py::arg("focus_distances"), py::arg("sigma_maps"));
  m.def(
      "total_loss",
      [](const py::list& images, const std::vector<double>& focus_distances,
         const array_f64& depth, const array_f64& aif,
         const dfd::CameraIntrinsics& cam, const dfd::PsfConfig& cfg,
         const dfd::LossWeights& w) {
        const dfd::TotalLoss r = dfd::total_loss(
            stack_from_python(images, focus_distances),
            dfd::DepthMap(grid_from_array(depth)), field_from_array<dfd::Image>(aif),
            cam, cfg, w);
        py::dict d;
        d["report"] = report_to_dict(r.report);
        d["grad_depth"] = grid_to_array(r.grad_depth);
        d["grad_aif"] = field_to_array(r.grad_aif);
        return d;
      },
      py::arg("images"), py::arg("focus_distances"), py::arg("depth"),
      py::arg("aif"), py::arg("camera"), py::arg("config") = dfd::PsfConfig{},
      py::arg("weights") = dfd::LossWeights{});

  m.def(
      "init_estimate",
      [](const py::list& images, const std::vector<double>& focus_distances,
         const dfd::CameraIntrinsics& cam) {
        const auto [depth, aif] =
            dfd::init_estimate(stack_from_python(images, focus_distances), cam);
        return py::make_tuple(grid_to_array(depth), field_to_array(aif));
      },
      py::arg("images"), py::arg("focus_distances"), py::arg("camera"));
  m.def(
      "solve",
      [](const py::list& images, const std::vector<double>& focus_distances,
         const dfd::CameraIntrinsics& cam, const dfd::SolverConfig& cfg,
         const dfd::LossWeights& w, const dfd::PsfConfig& psf_cfg) {
        const dfd::SolveResult r =
            dfd::solve(stack_from_python(images, focus_distances), cam, cfg, w,
                       psf_cfg);
        py::list history;
        for (const dfd::LossReport& rep : r.history)
          history.append(report_to_dict(rep));
        py::dict out;
        out["depth"] = grid_to_array(r.depth);
        out["aif"] = field_to_array(r.aif);
        out["history"] = history;
        out["warnings"] = r.warnings;
        return out;
      },
      py::arg("images"), py::arg("focus_distances"), py::arg("camera"),
      py::arg("solver") = dfd::SolverConfig{}, py::arg("weights") = dfd::LossWeights{},
      py::arg("psf") = dfd::PsfConfig{});
  m.def(
      "solve_with_noise_protocol",
      [](const py::list& images, const std::vector<double>& focus_distances,
         double noise_sigma, std::uint64_t seed, const dfd::CameraIntrinsics& cam,
         const dfd::SolverConfig& cfg, const dfd::LossWeights& w,
         const dfd::PsfConfig& psf_cfg) {
        const dfd::SolveResult r = dfd::solve_with_noise_protocol(
            stack_from_python(images, focus_distances), noise_sigma, seed, cam, cfg,
            w, psf_cfg);
        py::dict out;
        out["depth"] = grid_to_array(r.depth);
        out["aif"] = field_to_array(r.aif);
        out["warnings"] = r.warnings;
        return out;
      },
      py::arg("images"), py::arg("focus_distances"), py::arg("noise_sigma"),
      py::arg("seed"), py::arg("camera"), py::arg("solver") = dfd::SolverConfig{},
      py::arg("weights") = dfd::LossWeights{}, py::arg("psf") = dfd::PsfConfig{});

  m.def(
      "evaluate",
      [](const array_f64& pred, const array_f64& truth,
         std::optional<array_f64> mask, std::optional<double> cap) {
        std::optional<dfd::Grid> mask_grid;
        if (mask) mask_grid = grid_from_array(*mask);
        return dfd::evaluate(dfd::DepthMap(grid_from_array(pred)),
                             dfd::DepthMap(grid_from_array(truth)),
                             mask_grid ? &*mask_grid : nullptr, cap);
      },
      py::arg("pred"), py::arg("truth"), py::arg("mask") = std::nullopt,
      py::arg("cap") = std::nullopt);

  m.def("read_image_png",
        [](const std::string& path) { return field_to_array(dfd::read_image_png(path)); },
        py::arg("path"));
  m.def(
      "write_image_png",
      [](const std::string& path, const array_f64& img, int bit_depth) {
        dfd::write_image_png(path, field_from_array<dfd::Image>(img), bit_depth);
      },
      py::arg("path"), py::arg("image"), py::arg("bit_depth") = 8);
  m.def("read_depth_pfm",
        [](const std::string& path) { return grid_to_array(dfd::read_depth_pfm(path)); },
        py::arg("path"));
  m.def(
      "write_depth_pfm",
      [](const std::string& path, const array_f64& depth) {
        dfd::write_depth_pfm(path, dfd::DepthMap(grid_from_array(depth)));
      },
      py::arg("path"), py::arg("depth"));
  m.def("read_depth_png16",
        [](const std::string& path) { return grid_to_array(dfd::read_depth_png16(path)); },
        py::arg("path"));
  m.def(
      "write_depth_png16",
      [](const std::string& path, const array_f64& depth) {
        dfd::write_depth_png16(path, dfd::DepthMap(grid_from_array(depth)));
      },
      py::arg("path"), py::arg("depth"));
}
