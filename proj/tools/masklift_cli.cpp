// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
//
// masklift command line: synth, segment, eval, render, baseline.

#include "masklift/engine.hpp"
#include "masklift/evaluate.hpp"
#include "masklift/io.hpp"
#include "masklift/prompter.hpp"
#include "masklift/scene.hpp"
#include "masklift/segmenter.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

using namespace masklift;
using nlohmann::json;

namespace {

std::vector<int> parse_views(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
        if (item.empty() || item == "…" || item == "...")
            continue;
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size())
            throw InvalidArgument("bad view index '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::string view_name(int view, const char* ext) {
    char name[32];
    std::snprintf(name, sizeof name, "view_%04d.%s", view, ext);
    return name;
}

// Keeps the last mask the wrapped backend returned for every view, for later replay.
class RecordingSegmenter : public Segmenter {
  public:
    explicit RecordingSegmenter(Segmenter& inner) : inner_(inner) {}
    Bitmap2D segment(const SegmenterQuery& query) override {
        Bitmap2D m = inner_.segment(query);
        masks_[query.view] = m;
        return m;
    }
    bool needs_image() const override { return inner_.needs_image(); }
    const std::map<int, Bitmap2D>& masks() const { return masks_; }

  private:
    Segmenter& inner_;
    std::map<int, Bitmap2D> masks_;
};

struct RunConfig {
    EngineConfig engine;
    OracleNoise noise;
    ScribbleOptions scribble;
    int remote_timeout_ms = 30000;
};

RunConfig load_run_config(const std::string& path) {
    RunConfig rc;
    if (path.empty())
        return rc;
    const json j = read_json(path);
    rc.engine = engine_config_from_json(j);
    if (j.contains("oracle"))
        rc.noise = oracle_noise_from_json(j.at("oracle"));
    if (j.contains("scribble")) {
        const json& s = j.at("scribble");
        rc.scribble.pos_frac = s.value("pos_frac", rc.scribble.pos_frac);
        rc.scribble.neg_frac = s.value("neg_frac", rc.scribble.neg_frac);
        rc.scribble.seed = s.value("seed", rc.scribble.seed);
    }
    rc.remote_timeout_ms = j.value("remote_timeout_ms", rc.remote_timeout_ms);
    return rc;
}

// Puts `ref` first in the view order, keeping the remaining order.
void move_to_front(std::vector<int>& order, int ref) {
    order.erase(std::remove(order.begin(), order.end(), ref), order.end());
    order.insert(order.begin(), ref);
}

int cmd_synth(const std::string& spec_path, const std::string& out, const std::optional<std::uint64_t>& seed) {
    SceneSpec spec = scene_spec_from_json(read_json(spec_path));
    if (seed)
        spec.seed = *seed;
    const Scene scene = build_scene(spec);
    save_scene(out, scene, &spec);
    std::printf("wrote scene with %zu views and objects [", scene.view_count());
    for (std::size_t i = 0; i < scene.object_ids().size(); ++i)
        std::printf("%s%d", i ? ", " : "", scene.object_ids()[i]);
    std::printf("] to %s\n", out.c_str());
    return 0;
}

struct SegmentArgs {
    std::string scene, out, segmenter = "oracle", remote_url, replay_dir, prompts, ref_mask, scribble_pos,
        scribble_neg, config, views;
    std::optional<int> ref_view;
    bool two_pass = false;
};

int cmd_segment(const SegmentArgs& a) {
    const Scene scene = load_scene(a.scene);
    RunConfig rc = load_run_config(a.config);
    EngineConfig& cfg = rc.engine;
    if (!a.views.empty())
        cfg.view_order = parse_views(a.views);
    if (cfg.view_order.empty())
        for (std::size_t v = 0; v < scene.view_count(); ++v)
            cfg.view_order.push_back(static_cast<int>(v));
    cfg.two_pass = cfg.two_pass || a.two_pass;

    const int modes = !a.prompts.empty() + !a.ref_mask.empty() + (!a.scribble_pos.empty() || !a.scribble_neg.empty());
    if (modes != 1)
        throw InvalidArgument("give exactly one of --prompts, --ref-mask or --scribble-pos/--scribble-neg");

    std::optional<Initialization> init;
    json init_json;
    if (!a.prompts.empty()) {
        const json j = read_json(a.prompts);
        if (j.is_object() && j.contains("view"))
            move_to_front(cfg.view_order, j["view"].get<int>());
        else if (a.ref_view)
            move_to_front(cfg.view_order, *a.ref_view);
        const PromptSet ps = prompt_set_from_json(j);
        init = Initialization::from_prompts(ps);
        init_json = {{"kind", "prompts"}, {"prompts", to_json(ps)}};
    } else if (!a.ref_mask.empty()) {
        if (!a.ref_view)
            throw InvalidArgument("--ref-mask needs --ref-view");
        move_to_front(cfg.view_order, *a.ref_view);
        init = Initialization::from_mask(read_pgm(a.ref_mask));
        init_json = {{"kind", "reference_mask"}, {"path", a.ref_mask}};
    } else {
        if (a.scribble_pos.empty())
            throw InvalidArgument("--scribble-neg needs --scribble-pos");
        if (a.ref_view)
            move_to_front(cfg.view_order, *a.ref_view);
        const Bitmap2D pos = read_pgm(a.scribble_pos);
        const Bitmap2D neg = a.scribble_neg.empty() ? Bitmap2D(pos.width, pos.height) : read_pgm(a.scribble_neg);
        const PromptSet ps = scribbles_to_prompts(pos, neg, rc.scribble);
        init = Initialization::from_prompts(ps);
        init_json = {{"kind", "scribbles"}, {"prompts", to_json(ps)}};
    }
    cfg.validate(scene.view_count());

    std::unique_ptr<Segmenter> backend;
    if (a.segmenter == "oracle") {
        backend = std::make_unique<OracleSegmenter>(scene, rc.noise);
    } else if (a.segmenter == "replay") {
        if (a.replay_dir.empty())
            throw InvalidArgument("--segmenter replay needs --replay-dir");
        backend = std::make_unique<ReplaySegmenter>(a.replay_dir);
    } else if (a.segmenter == "remote") {
        if (a.remote_url.empty())
            throw InvalidArgument("--segmenter remote needs --remote-url");
        backend = std::make_unique<RemoteSegmenter>(a.remote_url, std::chrono::milliseconds(rc.remote_timeout_ms));
    } else {
        throw InvalidArgument("unknown segmenter '" + a.segmenter + "'");
    }
    RecordingSegmenter recorder(*backend);

    SampleCache cache(scene.field(), scene.cameras(), cfg.n_samples);
    const RunResult r = cfg.two_pass ? run_two_pass(cache, *init, cfg, recorder) : run(cache, *init, cfg, recorder);

    const fs::path out(a.out);
    fs::create_directories(out);
    save_mask_grid(out / "mask.f32", r.mask);
    if (r.counter)
        save_mask_grid(out / "mask_counter.f32", *r.counter);
    write_json(out / "record.json", to_json(r.record));
    json resolved = to_json(cfg);
    resolved["segmenter"] = a.segmenter;
    if (a.segmenter == "oracle")
        resolved["oracle"] = to_json(rc.noise);
    if (a.segmenter == "remote") {
        resolved["remote_url"] = a.remote_url;
        resolved["remote_timeout_ms"] = rc.remote_timeout_ms;
    }
    if (a.segmenter == "replay")
        resolved["replay_dir"] = a.replay_dir;
    resolved["scribble"] = {{"pos_frac", rc.scribble.pos_frac}, {"neg_frac", rc.scribble.neg_frac},
                            {"seed", rc.scribble.seed}};
    resolved["initialization"] = init_json;
    write_json(out / "config.json", resolved);
    write_pgm(out / "reference_mask.pgm", r.reference_mask);
    if (r.disagreement)
        write_pgm(out / "disagreement.pgm", *r.disagreement);
    for (const auto& [view, mask] : recorder.masks())
        write_pgm(ReplaySegmenter::mask_path(out / "segmenter", view), mask);
    for (std::size_t v = 0; v < scene.view_count(); ++v)
        write_pgm(out / "render" / view_name(static_cast<int>(v), "pgm"), render_scores(cache.view(v), r.mask).binarize());

    std::size_t accepted = 0, rejected = 0;
    for (const auto& rec : r.record.views) {
        if (rec.outcome == ViewOutcome::accepted)
            ++accepted;
        else if (rec.outcome != ViewOutcome::initialized)
            ++rejected;
    }
    std::printf("%zu views accepted, %zu rejected, %.2f s; outputs in %s\n", accepted, rejected, r.record.seconds,
                out.c_str());
    return 0;
}

int load_samples(const fs::path& run_dir) {
    const fs::path cfg = run_dir / "config.json";
    if (!fs::exists(cfg))
        return kDefaultSamples;
    return read_json(cfg).value("n_samples", kDefaultSamples);
}

int cmd_eval(const std::string& run_dir, const std::string& scene_dir, int object, const std::string& held_out,
             const std::string& out, bool timing) {
    const Scene scene = load_scene(scene_dir);
    const MaskGrid mask = load_mask_grid(fs::path(run_dir) / "mask.f32", scene.field().dims(), scene.field().bbox());
    std::optional<RunRecord> record;
    if (fs::exists(fs::path(run_dir) / "record.json"))
        record = run_record_from_json(read_json(fs::path(run_dir) / "record.json"));
    const std::vector<int> views = parse_views(held_out);
    SampleCache cache(scene.field(), scene.cameras(), load_samples(run_dir));
    const Report rep = evaluate(cache, scene, mask, views, object, record ? &*record : nullptr);
    write_json(out, to_json(rep, timing));
    std::printf("object %d: mIoU %.4f, mAcc %.4f, 3D IoU %.4f over %zu held-out views\n", object, rep.mean_iou,
                rep.mean_accuracy, rep.iou_3d, rep.views.size());
    return 0;
}

int cmd_render(const std::string& scene_dir, int view, const std::string& what, const std::string& run_dir,
               const std::string& out) {
    const Scene scene = load_scene(scene_dir);
    if (view < 0 || static_cast<std::size_t>(view) >= scene.view_count())
        throw InvalidArgument("view " + std::to_string(view) + " out of range");
    const int n = run_dir.empty() ? kDefaultSamples : load_samples(run_dir);
    const ViewSamples vs = trace_view(scene.field(), scene.camera(static_cast<std::size_t>(view)), n);
    const auto need_mask = [&] {
        if (run_dir.empty())
            throw InvalidArgument("--what " + what + " needs --run");
        return load_mask_grid(fs::path(run_dir) / "mask.f32", scene.field().dims(), scene.field().bbox());
    };
    if (what == "color") {
        write_ppm(out, render_rgb(vs, scene.field()));
    } else if (what == "mask") {
        write_pgm(out, render_scores(vs, need_mask()).binarize());
    } else if (what == "score" || what == "depth") {
        FloatImage img{vs.width, vs.height, {}};
        if (what == "score") {
            const ScoreMap2D sm = render_scores(vs, need_mask());
            for (double s : sm.scores)
                img.values.push_back(static_cast<float>(s));
        } else {
            for (double d : vs.depth)
                img.values.push_back(static_cast<float>(d));
        }
        write_pfm(out, img);
    } else {
        throw InvalidArgument("unknown render target '" + what + "'");
    }
    return 0;
}

int cmd_baseline(const std::string& scene_dir, int view, const std::string& ref_mask, std::optional<int> object,
                 const std::string& config, const std::string& out) {
    const Scene scene = load_scene(scene_dir);
    RunConfig rc = load_run_config(config);
    if (view < 0 || static_cast<std::size_t>(view) >= scene.view_count())
        throw InvalidArgument("view " + std::to_string(view) + " out of range");
    Bitmap2D gt;
    if (!ref_mask.empty())
        gt = read_pgm(ref_mask);
    else if (object)
        gt = scene.gt_visibility(static_cast<std::size_t>(view), *object);
    else
        throw InvalidArgument("baseline needs --ref-mask or --object");
    const MaskGrid m = single_view_baseline(scene.field(), scene.camera(static_cast<std::size_t>(view)), gt, rc.engine);
    fs::create_directories(out);
    save_mask_grid(fs::path(out) / "mask.f32", m);
    write_pgm(fs::path(out) / "reference_mask.pgm", gt);
    json resolved = to_json(rc.engine);
    resolved["baseline_view"] = view;
    write_json(fs::path(out) / "config.json", resolved);
    std::printf("single-view baseline from view %d written to %s\n", view, out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"masklift: lift 2D promptable segmentation masks into a 3D voxel mask"};
    app.require_subcommand(1);

    std::string spec_path, out;
    std::optional<std::uint64_t> seed;
    auto* synth = app.add_subcommand("synth", "Build a procedural scene directory from a scene spec");
    synth->add_option("--spec", spec_path, "Scene spec JSON")->required()->check(CLI::ExistingFile);
    synth->add_option("--out", out, "Output scene directory")->required();
    synth->add_option("--seed", seed, "Override the spec seed");

    SegmentArgs sa;
    auto* segment = app.add_subcommand("segment", "Run the mask lifting loop on a scene");
    segment->add_option("--scene", sa.scene, "Scene directory")->required();
    segment->add_option("--out", sa.out, "Output run directory")->required();
    segment->add_option("--segmenter", sa.segmenter, "Segmenter backend")
        ->check(CLI::IsMember({"oracle", "replay", "remote"}));
    segment->add_option("--remote-url", sa.remote_url, "Base URL of a remote segmentation service");
    segment->add_option("--replay-dir", sa.replay_dir, "Directory of recorded view_NNNN.pgm masks");
    segment->add_option("--prompts", sa.prompts, "Prompt JSON for the reference view");
    segment->add_option("--ref-mask", sa.ref_mask, "Reference-view mask (PGM)");
    segment->add_option("--ref-view", sa.ref_view, "Reference view index");
    segment->add_option("--scribble-pos", sa.scribble_pos, "Positive scribble mask (PGM)");
    segment->add_option("--scribble-neg", sa.scribble_neg, "Negative scribble mask (PGM)");
    segment->add_option("--config", sa.config, "Engine config JSON");
    segment->add_option("--views", sa.views, "Comma-separated view order; the first is the reference view");
    segment->add_flag("--two-pass", sa.two_pass, "Enable two-pass refinement");

    std::string run_dir, scene_dir, held_out;
    int object = 0;
    bool timing = false;
    auto* eval = app.add_subcommand("eval", "Evaluate a run on held-out views");
    eval->add_option("--run", run_dir, "Run directory")->required();
    eval->add_option("--scene", scene_dir, "Scene directory")->required();
    eval->add_option("--object", object, "Target object id")->required();
    eval->add_option("--held-out", held_out, "Comma-separated held-out views")->required();
    eval->add_option("--out", out, "Report JSON")->required();
    eval->add_flag("--timing", timing, "Include wall-clock seconds in the report");

    int view = 0;
    std::string what;
    auto* render = app.add_subcommand("render", "Render color, mask, score or depth for one view");
    render->add_option("--scene", scene_dir, "Scene directory")->required();
    render->add_option("--view", view, "View index")->required();
    render->add_option("--what", what, "What to render")->required()->check(CLI::IsMember({"color", "mask", "score", "depth"}));
    render->add_option("--run", run_dir, "Run directory (for mask and score)");
    render->add_option("--out", out, "Output image")->required();

    std::string ref_mask, config;
    std::optional<int> base_object;
    auto* baseline = app.add_subcommand("baseline", "Single-view baseline: inverse-render one reference mask");
    baseline->add_option("--scene", scene_dir, "Scene directory")->required();
    baseline->add_option("--view", view, "Reference view")->required();
    baseline->add_option("--ref-mask", ref_mask, "Reference mask (PGM)");
    baseline->add_option("--object", base_object, "Use the ground-truth mask of this object instead");
    baseline->add_option("--config", config, "Engine config JSON");
    baseline->add_option("--out", out, "Output run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(spec_path, out, seed);
        if (segment->parsed())
            return cmd_segment(sa);
        if (eval->parsed())
            return cmd_eval(run_dir, scene_dir, object, held_out, out, timing);
        if (render->parsed())
            return cmd_render(scene_dir, view, what, run_dir, out);
        if (baseline->parsed())
            return cmd_baseline(scene_dir, view, ref_mask, base_object, config, out);
    } catch (const std::exception& e) {
        std::cerr << "masklift: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
