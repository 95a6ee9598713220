// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
//
// Python module. Structured inputs and outputs cross the boundary as JSON text; arrays as numpy.
#include "masklift/engine.hpp"
#include "masklift/evaluate.hpp"
#include "masklift/io.hpp"
#include "masklift/prompter.hpp"
#include "masklift/scene.hpp"
#include "masklift/segmenter.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace masklift;
using nlohmann::json;

namespace {

using BitArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using FloatArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

json parse(const std::string& text) { return text.empty() ? json::object() : json::parse(text); }

py::array_t<std::uint8_t> to_numpy(const Bitmap2D& m) {
    py::array_t<std::uint8_t> out({m.height, m.width});
    std::memcpy(out.mutable_data(), m.bits.data(), m.bits.size());
    return out;
}

Bitmap2D to_bitmap(const BitArray& a) {
    if (a.ndim() != 2)
        throw InvalidArgument("masks must be 2-D arrays (height, width)");
    Bitmap2D m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    const std::uint8_t* p = a.data();
    for (std::size_t i = 0; i < m.bits.size(); ++i)
        m.bits[i] = p[i] != 0 ? 1 : 0;
    return m;
}

py::array_t<double> image_array(int w, int h, const std::vector<double>& v) {
    py::array_t<double> out({h, w});
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
    return out;
}

// Grids are exposed with shape (nz, ny, nx), matching the x-fastest storage order.
py::array_t<double> to_numpy(const MaskGrid& m) {
    const GridDims d = m.grid().dims();
    py::array_t<double> out({d.nz, d.ny, d.nx});
    std::memcpy(out.mutable_data(), m.values().data(), m.size() * sizeof(double));
    return out;
}

MaskGrid to_mask_grid(const FloatArray& a, const Scene& scene) {
    const GridDims d = scene.field().dims();
    if (a.ndim() != 3 || a.shape(0) != d.nz || a.shape(1) != d.ny || a.shape(2) != d.nx)
        throw InvalidArgument("mask grid must have shape (nz, ny, nx) of the scene");
    MaskGrid m(ScalarGrid(d, scene.field().bbox(), 0.0));
    std::memcpy(m.values().data(), a.data(), m.size() * sizeof(double));
    return m;
}

py::list prompts_to_list(const PromptSet& ps) {
    py::list out;
    for (const auto& p : ps.points)
        out.append(py::make_tuple(p.x, p.y, p.positive() ? 1 : 0));
    return out;
}

std::unique_ptr<Segmenter> make_segmenter(const Scene& scene, const std::string& kind, const std::string& noise,
                                          const std::string& replay_dir, const std::string& remote_url,
                                          int timeout_ms) {
    if (kind == "oracle")
        return std::make_unique<OracleSegmenter>(scene, oracle_noise_from_json(parse(noise)));
    if (kind == "replay")
        return std::make_unique<ReplaySegmenter>(replay_dir);
    if (kind == "remote")
        return std::make_unique<RemoteSegmenter>(remote_url, std::chrono::milliseconds(timeout_ms));
    throw InvalidArgument("unknown segmenter '" + kind + "'");
}

py::dict segment(const Scene& scene, const std::string& prompts, const std::optional<BitArray>& ref_mask,
                 const std::string& config, const std::string& segmenter, const std::string& noise,
                 const std::string& replay_dir, const std::string& remote_url, int timeout_ms) {
    EngineConfig cfg = engine_config_from_json(parse(config));
    if (cfg.view_order.empty())
        for (std::size_t v = 0; v < scene.view_count(); ++v)
            cfg.view_order.push_back(static_cast<int>(v));
    Initialization init = ref_mask ? Initialization::from_mask(to_bitmap(*ref_mask))
                                   : Initialization::from_prompts(prompts.empty() ? PromptSet{}
                                                                                  : prompt_set_from_json(parse(prompts)));
    if (!ref_mask && std::get<PromptSet>(init.value).empty())
        throw InvalidArgument("segment needs prompts or a reference mask");
    auto seg = make_segmenter(scene, segmenter, noise, replay_dir, remote_url, timeout_ms);
    RunResult r;
    {
        py::gil_scoped_release release;
        SampleCache cache(scene.field(), scene.cameras(), cfg.n_samples);
        r = cfg.two_pass ? run_two_pass(cache, init, cfg, *seg) : run(cache, init, cfg, *seg);
    }
    py::dict out;
    out["mask"] = to_numpy(r.mask);
    out["record"] = to_json(r.record, true).dump();
    out["config"] = to_json(cfg).dump();
    out["reference_mask"] = to_numpy(r.reference_mask);
    out["counter"] = r.counter ? py::object(to_numpy(*r.counter)) : py::none();
    out["disagreement"] = r.disagreement ? py::object(to_numpy(*r.disagreement)) : py::none();
    return out;
}

} // namespace

PYBIND11_MODULE(_masklift, m) {
    m.doc() = "Multi-view mask lifting over a fixed density field";

    py::register_exception<SegmenterError>(m, "SegmenterError", PyExc_RuntimeError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

    m.attr("DEFAULT_SAMPLES") = kDefaultSamples;
    m.attr("COVERAGE_FLOOR") = kCoverageFloor;

    py::class_<Scene>(m, "Scene")
        .def_property_readonly("view_count", &Scene::view_count)
        .def_property_readonly("object_ids", &Scene::object_ids)
        .def_property_readonly("dims",
                               [](const Scene& s) {
                                   const GridDims d = s.field().dims();
                                   return py::make_tuple(d.nz, d.ny, d.nx);
                               })
        .def_property_readonly("image_size",
                               [](const Scene& s) {
                                   const Camera& c = s.camera(0);
                                   return py::make_tuple(c.height, c.width);
                               })
        .def("camera_json", [](const Scene& s, std::size_t v) { return to_json(s.camera(v)).dump(); }, py::arg("view"))
        .def("gt_visibility", [](const Scene& s, std::size_t v, int id) { return to_numpy(s.gt_visibility(v, id)); },
             py::arg("view"), py::arg("object_id"))
        .def("gt_occupancy",
             [](const Scene& s, int id) {
                 const auto occ = s.gt_occupancy(id);
                 return py::array_t<std::size_t>(static_cast<py::ssize_t>(occ.size()), occ.data());
             },
             py::arg("object_id"))
        .def("save", [](const Scene& s, const std::string& dir) { save_scene(dir, s); }, py::arg("directory"));

    m.def("build_scene", [](const std::string& spec) { return build_scene(scene_spec_from_json(parse(spec))); },
          py::arg("spec_json"), "Voxelize a scene spec given as JSON text");
    m.def("synth",
          [](const std::string& spec_json, const std::string& dir) {
              const SceneSpec spec = scene_spec_from_json(parse(spec_json));
              const Scene s = build_scene(spec);
              save_scene(dir, s, &spec);
              return s;
          },
          py::arg("spec_json"), py::arg("directory"), "Build a scene and write its directory");
    m.def("load_scene", [](const std::string& dir) { return load_scene(dir); }, py::arg("directory"));

    m.def("segment", &segment, py::arg("scene"), py::arg("prompts_json") = "", py::arg("ref_mask") = py::none(),
          py::arg("config_json") = "", py::arg("segmenter") = "oracle", py::arg("noise_json") = "",
          py::arg("replay_dir") = "", py::arg("remote_url") = "", py::arg("timeout_ms") = 30000,
          "Run the lifting loop. Returns mask, record, config, reference_mask, counter and disagreement");

    m.def("baseline",
          [](const Scene& s, int view, const BitArray& ref, const std::string& config) {
              const EngineConfig cfg = engine_config_from_json(parse(config));
              return to_numpy(single_view_baseline(s.field(), s.camera(static_cast<std::size_t>(view)), to_bitmap(ref), cfg));
          },
          py::arg("scene"), py::arg("view"), py::arg("ref_mask"), py::arg("config_json") = "");

    m.def("evaluate",
          [](const Scene& s, const FloatArray& mask, const std::vector<int>& held_out, int object_id, int n_samples) {
              return to_json(evaluate(s, to_mask_grid(mask, s), held_out, object_id, nullptr, n_samples)).dump();
          },
          py::arg("scene"), py::arg("mask"), py::arg("held_out"), py::arg("object_id"),
          py::arg("n_samples") = kDefaultSamples, "Held-out 2D IoU / accuracy and 3D IoU as JSON text");

    m.def("render",
          [](const Scene& s, int view, const std::optional<FloatArray>& mask, int n_samples) {
              const MaskGrid grid = mask ? to_mask_grid(*mask, s) : MaskGrid::zeros_like(s.field());
              const RenderedView r = render_view(s.field(), grid, s.camera(static_cast<std::size_t>(view)), n_samples);
              py::array_t<double> color({r.color.height, r.color.width, 3});
              double* p = color.mutable_data();
              for (const Vec3& c : r.color.pixels)
                  for (int k = 0; k < 3; ++k)
                      *p++ = c[k];
              py::dict out;
              out["color"] = color;
              out["scores"] = image_array(r.scores.width, r.scores.height, r.scores.scores);
              out["depth"] = image_array(r.scores.width, r.scores.height, r.scores.depth);
              out["coverage"] = image_array(r.scores.width, r.scores.height, r.scores.coverage);
              out["mask"] = to_numpy(r.scores.binarize());
              return out;
          },
          py::arg("scene"), py::arg("view"), py::arg("mask") = py::none(), py::arg("n_samples") = kDefaultSamples);

    m.def("select_prompts",
          [](const Scene& s, int view, const FloatArray& mask, int n_p, bool decay, int n_samples) {
              const ViewSamples vs = trace_view(s.field(), s.camera(static_cast<std::size_t>(view)), n_samples);
              const ScoreMap2D scores = render_scores(vs, to_mask_grid(mask, s));
              PromptOptions opt;
              opt.n_p = n_p;
              opt.decay = decay;
              return prompts_to_list(select_prompts(scores, s.camera(static_cast<std::size_t>(view)), opt));
          },
          py::arg("scene"), py::arg("view"), py::arg("mask"), py::arg("n_p") = 3, py::arg("decay") = true,
          py::arg("n_samples") = kDefaultSamples, "Self-prompts (x, y, label) from a rendered mask grid");

    m.def("scribbles_to_prompts",
          [](const BitArray& pos, const BitArray& neg, double pos_frac, double neg_frac, std::uint64_t seed) {
              return prompts_to_list(scribbles_to_prompts(to_bitmap(pos), to_bitmap(neg), {pos_frac, neg_frac, seed}));
          },
          py::arg("positive"), py::arg("negative"), py::arg("pos_frac") = 0.02, py::arg("neg_frac") = 0.005,
          py::arg("seed") = 0);

    m.def("skeletonize", [](const BitArray& mask) { return to_numpy(skeletonize(to_bitmap(mask))); }, py::arg("mask"));

    m.def("iou", [](const BitArray& a, const BitArray& b) { return iou(to_bitmap(a), to_bitmap(b)); });
    m.def("projection_loss",
          [](const BitArray& m_sam, const FloatArray& scores, double lambda) {
              const Bitmap2D b = to_bitmap(m_sam);
              if (scores.ndim() != 2 || scores.shape(0) != b.height || scores.shape(1) != b.width)
                  throw InvalidArgument("scores must match the mask shape");
              ScoreMap2D s(b.width, b.height);
              std::memcpy(s.scores.data(), scores.data(), s.scores.size() * sizeof(double));
              return projection_loss(b, s, lambda);
          },
          py::arg("m_sam"), py::arg("scores"), py::arg("lambda_") = 0.15);
}
