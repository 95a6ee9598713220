// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number of failed criteria.

#include "masklift/engine.hpp"
#include "masklift/evaluate.hpp"
#include "masklift/inverse.hpp"
#include "masklift/io.hpp"
#include "masklift/prompter.hpp"
#include "masklift/random.hpp"
#include "masklift/renderer.hpp"
#include "masklift/scene.hpp"
#include "masklift/segmenter.hpp"

#include "../support/fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

using namespace masklift;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Camera random_camera(Rng& rng, int w, int h) {
    const double az = rng.uniform(0.0, 6.283185307179586), el = rng.uniform(-0.6, 0.6);
    const double r = rng.uniform(2.5, 3.5);
    const Vec3 eye(r * std::cos(el) * std::cos(az), r * std::cos(el) * std::sin(az), r * std::sin(el));
    const double f = 0.5 * w / std::tan(0.35);
    const Vec3 target(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0.0);
    const Camera c = Camera::look_at(eye, target, Vec3::UnitZ(), f, f, 0.5 * w, 0.5 * h, w, h, r - 1.8, r + 1.8);
    return c;
}

DensityField random_field(Rng& rng, int n, double sigma_max) {
    const GridDims dims{n, n, n};
    const BoundingBox bbox{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
    ScalarGrid sigma(dims, bbox, 0.0);
    ColorGrid color(dims, bbox, Vec3::Zero());
    LabelGrid label(dims, bbox, 0);
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        sigma[i] = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, sigma_max);
        color[i] = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    }
    return DensityField(std::move(sigma), std::move(color), std::move(label));
}

// 1. Analytic gradient against central differences of loss(render(V)).
Outcome gradient_correctness() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(2024);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const DensityField field = random_field(rng, 8, 6.0);
        const Camera cam = random_camera(rng, 6, 6);
        const double lambda = inst % 2 == 0 ? 0.0 : 0.15;
        MaskGrid mask = MaskGrid::zeros_like(field);
        for (double& v : mask.values())
            v = rng.uniform(-1.0, 1.0);
        Bitmap2D m_sam(6, 6);
        for (auto& b : m_sam.bits)
            b = rng.uniform() < 0.5 ? 1 : 0;
        const int n = 16;
        const auto loss = [&](const MaskGrid& m) {
            double total = 0.0;
            for (int y = 0; y < 6; ++y)
                for (int x = 0; x < 6; ++x) {
                    const double s = render_mask(m, field, ray_for_pixel(cam, x, y), n);
                    total += m_sam(x, y) ? -s : lambda * s;
                }
            return total / 36.0;
        };
        const std::vector<double> g = grid_gradient(m_sam, cam, field, mask, lambda, n);
        const double h = 1e-3;
        double num = 0.0, den = 0.0;
        for (std::size_t v = 0; v < mask.size(); ++v) {
            const double keep = mask.values()[v];
            mask.values()[v] = keep + h;
            const double up = loss(mask);
            mask.values()[v] = keep - h;
            const double down = loss(mask);
            mask.values()[v] = keep;
            const double fd = (up - down) / (2.0 * h);
            num += (fd - g[v]) * (fd - g[v]);
            den += fd * fd;
        }
        const double rel = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
        worst = std::max(worst, rel);
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-4 && secs < 10.0, fmt("worst relative error %.3e over 20 instances, %.2f s", worst, secs)};
}

// 2. Weight identities on random rays; an opaque wall saturates coverage.
Outcome weight_identities() {
    Rng rng(77);
    const DensityField field = random_field(rng, 16, 30.0);
    double worst = 0.0;
    bool nonneg = true;
    for (int k = 0; k < 1000; ++k) {
        const Camera cam = random_camera(rng, 32, 32);
        const Ray ray = ray_for_pixel(cam, rng.uniform(0.0, 32.0), rng.uniform(0.0, 32.0));
        const RaySamples s = compute_weights(field, ray, 1 + static_cast<int>(rng.below(256)));
        double sum = 0.0, trans = 1.0;
        for (std::size_t i = 0; i < s.weights.size(); ++i) {
            nonneg = nonneg && s.weights[i] >= 0.0;
            sum += s.weights[i];
            trans *= 1.0 - s.alpha[i];
        }
        worst = std::max(worst, std::abs(sum - (1.0 - trans)));
    }
    // Opaque wall: a slab of sigma 400 filling x in [-0.3, 0.3].
    const GridDims dims{32, 32, 32};
    const BoundingBox bbox{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
    ScalarGrid sigma(dims, bbox, 0.0);
    for (std::size_t i = 0; i < sigma.size(); ++i)
        if (std::abs(sigma.vertex_position(i).x()) <= 0.3)
            sigma[i] = 400.0;
    const DensityField wall(std::move(sigma), ColorGrid(dims, bbox, Vec3::Zero()), LabelGrid(dims, bbox, 0));
    Ray ray;
    ray.origin = Vec3(-3.0, 0.1, 0.05);
    ray.direction = Vec3::UnitX();
    ray.t_near = 1.0;
    ray.t_far = 5.0;
    const double coverage = compute_weights(wall, ray, kDefaultSamples).coverage();
    return {worst <= 1e-12 && nonneg && coverage >= 0.99,
            fmt("max |sum w - (1 - prod(1 - a))| = %.2e, all w >= 0: %s, wall coverage %.6f", worst,
                nonneg ? "yes" : "no", coverage)};
}

struct FixtureRun {
    Report report;
    RunResult result;
};

FixtureRun run_target(SampleCache& cache, const Scene& scene, const fixtures::Split& split, int id,
                      const EngineConfig& base, OracleNoise noise, bool gt_init) {
    EngineConfig cfg = base;
    if (cfg.view_order.empty())
        cfg.view_order = split.train;
    OracleSegmenter seg(scene, noise);
    const Bitmap2D ref = scene.gt_visibility(static_cast<std::size_t>(cfg.view_order.front()), id);
    const Initialization init =
        gt_init ? Initialization::from_mask(ref) : Initialization::from_prompts(fixtures::click(ref));
    RunResult r = cfg.two_pass ? run_two_pass(cache, init, cfg, seg) : run(cache, init, cfg, seg);
    Report rep = evaluate(cache, scene, r.mask, split.held_out, id, &r.record);
    return {std::move(rep), std::move(r)};
}

struct Fixture {
    SceneSpec spec;
    Scene scene;
    fixtures::Split split;
    std::unique_ptr<SampleCache> cache;
    std::vector<int> targets;

    explicit Fixture(SceneSpec s, std::vector<int> t)
        : spec(std::move(s)), scene(build_scene(spec)), split(fixtures::split_views(static_cast<int>(scene.view_count()))),
          cache(std::make_unique<SampleCache>(scene.field(), scene.cameras(), kDefaultSamples)), targets(std::move(t)) {}

    double mean_miou(const EngineConfig& cfg, OracleNoise noise, bool gt_init) {
        double sum = 0.0;
        for (int id : targets)
            sum += run_target(*cache, scene, split, id, cfg, noise, gt_init).report.mean_iou;
        return sum / static_cast<double>(targets.size());
    }
};

Fixture& main_fixture() {
    static Fixture f(fixtures::three_objects(), {1, 2, 3});
    return f;
}

Fixture& facing_fixture() {
    static Fixture f(fixtures::forward_facing(), {1});
    return f;
}

// 3. End-to-end recovery with the noiseless oracle, prompted from a single click on view 0.
Outcome oracle_recovery() {
    const auto t0 = std::chrono::steady_clock::now();
    const SceneSpec spec = fixtures::three_objects();
    const Scene scene = build_scene(spec);
    const auto split = fixtures::split_views(static_cast<int>(scene.view_count()));
    SampleCache cache(scene.field(), scene.cameras(), kDefaultSamples);
    bool ok = true;
    std::string detail;
    for (int id : {1, 2, 3}) {
        const Report r = run_target(cache, scene, split, id, {}, {}, false).report;
        ok = ok && r.mean_iou >= 0.95 && r.iou_3d >= 0.90;
        detail += fmt("object %d: 2D mIoU %.4f, 3D IoU %.4f; ", id, r.mean_iou, r.iou_3d);
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 180.0;
    return {ok, detail + fmt("%zu training views, %.1f s", split.train.size(), secs)};
}

// 4. More views never hurt (within 0.01).
Outcome view_count_trend() {
    Fixture& f = main_fixture();
    double m[3];
    const double fractions[3] = {0.1, 0.5, 1.0};
    for (int k = 0; k < 3; ++k) {
        EngineConfig cfg;
        const auto keep = static_cast<std::size_t>(std::lround(fractions[k] * static_cast<double>(f.split.train.size())));
        cfg.view_order = subsample_views(f.split.train, keep);
        m[k] = f.mean_miou(cfg, {}, false);
    }
    const bool ok = m[1] >= m[0] - 0.01 && m[2] >= m[1] - 0.01;
    return {ok, fmt("mIoU at 10%%/50%%/100%% of views: %.4f / %.4f / %.4f", m[0], m[1], m[2])};
}

// 5. IoU gating against a segmenter that fails 20% of the time.
Outcome rejection_efficacy() {
    Fixture& f = main_fixture();
    int wins = 0;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        OracleNoise noise;
        noise.failure_rate = 0.2;
        noise.seed = seed;
        EngineConfig gated, open;
        gated.tau = 0.5;
        open.tau = 0.0;
        const double a = f.mean_miou(gated, noise, true), b = f.mean_miou(open, noise, true);
        wins += a > b ? 1 : 0;
        detail += fmt("%.3f/%.3f ", a, b);
    }
    return {wins >= 9, fmt("tau=0.5 beats tau=0 on %d/10 seeds (", wins) + detail + ")"};
}

// 6. The negative term under +3 px mask bleed.
Outcome negative_term() {
    bool ok = true;
    std::string detail;
    for (Fixture* f : {&main_fixture(), &facing_fixture()}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            OracleNoise noise;
            noise.dilate_erode = 3;
            noise.flip_rate = 0.002;
            noise.seed = seed;
            EngineConfig with, without;
            without.loss.lambda = 0.0;
            const double a = f->mean_miou(with, noise, false), b = f->mean_miou(without, noise, false);
            ok = ok && a >= b;
            detail += fmt("%.3f vs %.3f; ", a, b);
        }
    }
    return {ok, "lambda=0.15 vs lambda=0 mIoU: " + detail};
}

// 7. Two-pass refinement.
Outcome two_pass() {
    Fixture& leak = facing_fixture();
    OracleNoise bleed;
    bleed.dilate_erode = 3;
    double p1 = 0.0, p2 = 0.0;
    for (int id : leak.targets) {
        EngineConfig one, two;
        two.two_pass = true;
        p1 += run_target(*leak.cache, leak.scene, leak.split, id, one, bleed, false).report.mean_iou;
        p2 += run_target(*leak.cache, leak.scene, leak.split, id, two, bleed, false).report.mean_iou;
    }
    p1 /= static_cast<double>(leak.targets.size());
    p2 /= static_cast<double>(leak.targets.size());

    Fixture& clean = main_fixture();
    bool identical = true;
    std::size_t disagreement = 0;
    for (int id : clean.targets) {
        EngineConfig one, two;
        two.two_pass = true;
        const auto a = run_target(*clean.cache, clean.scene, clean.split, id, one, {}, false);
        const auto b = run_target(*clean.cache, clean.scene, clean.split, id, two, {}, false);
        identical = identical && a.result.mask == b.result.mask;
        if (b.result.disagreement)
            disagreement += b.result.disagreement->count();
    }
    return {p2 >= p1 && identical,
            fmt("bleed fixture pass-1 %.4f, pass-2 %.4f; noiseless V bit-identical: %s (disagreement pixels %zu)", p1,
                p2, identical ? "yes" : "no", disagreement)};
}

// 8. Prompt selection properties on random score maps.
Outcome prompter_compliance() {
    Rng rng(8);
    int failures = 0;
    for (int k = 0; k < 200; ++k) {
        const int w = 16 + static_cast<int>(rng.below(32)), h = 16 + static_cast<int>(rng.below(32));
        const Camera cam = random_camera(rng, w, h);
        ScoreMap2D sm(w, h);
        const int blobs = 1 + static_cast<int>(rng.below(4));
        std::vector<std::array<double, 4>> b(blobs);
        for (auto& q : b)
            q = {rng.uniform(0.0, w), rng.uniform(0.0, h), rng.uniform(2.0, 8.0), rng.uniform(0.2, 1.0)};
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                double s = rng.uniform(-0.3, 0.1);
                for (const auto& q : b)
                    s += q[3] * std::exp(-((x - q[0]) * (x - q[0]) + (y - q[1]) * (y - q[1])) / (2.0 * q[2] * q[2]));
                sm.scores[i] = s;
                const bool bg = rng.uniform() < 0.05;
                sm.coverage[i] = bg ? 0.0 : 1.0;
                sm.depth[i] = bg ? cam.t_far : rng.uniform(cam.t_near + 0.5, cam.t_far - 0.5);
            }
        const int n_p = 1 + static_cast<int>(rng.below(5));
        const PromptSet ps = select_prompts(sm, cam, {n_p, true, DistanceNormalization::surviving_candidates});
        const int side = exclusion_side(sm);

        // Argmax over eligible pixels, lowest index on ties.
        std::size_t arg = sm.size();
        for (std::size_t i = 0; i < sm.size(); ++i)
            if (sm.scores[i] > 0.0 && !sm.background(i) && (arg == sm.size() || sm.scores[i] > sm.scores[arg]))
                arg = i;
        bool ok = static_cast<int>(ps.size()) <= n_p;
        if (arg == sm.size())
            ok = ok && ps.empty();
        else
            ok = ok && !ps.empty() && static_cast<std::size_t>(ps.points[0].y) * w + ps.points[0].x == arg;
        const int sep = (side + 1) / 2;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const auto& p = ps.points[i];
            ok = ok && sm.scores[static_cast<std::size_t>(p.y) * w + p.x] > 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                const auto& q = ps.points[j];
                ok = ok && std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)) >= sep;
            }
        }

        // Greedy NMS with the same square and tie rule.
        std::vector<std::uint8_t> alive(sm.size());
        for (std::size_t i = 0; i < sm.size(); ++i)
            alive[i] = sm.scores[i] > 0.0 && !sm.background(i);
        std::vector<std::size_t> nms;
        const int lo = -(side / 2), hi = (side + 1) / 2 - 1;
        while (static_cast<int>(nms.size()) < n_p) {
            std::size_t best = sm.size();
            for (std::size_t i = 0; i < sm.size(); ++i)
                if (alive[i] && (best == sm.size() || sm.scores[i] > sm.scores[best]))
                    best = i;
            if (best == sm.size())
                break;
            nms.push_back(best);
            const int bx = static_cast<int>(best % w), by = static_cast<int>(best / w);
            for (int y = by + lo; y <= by + hi; ++y)
                for (int x = bx + lo; x <= bx + hi; ++x)
                    if (x >= 0 && y >= 0 && x < w && y < h)
                        alive[static_cast<std::size_t>(y) * w + x] = 0;
        }
        const PromptSet plain = select_prompts(sm, cam, {n_p, false, DistanceNormalization::surviving_candidates});
        ok = ok && plain.size() == nms.size();
        for (std::size_t i = 0; ok && i < nms.size(); ++i)
            ok = static_cast<std::size_t>(plain.points[i].y) * w + plain.points[i].x == nms[i];
        failures += ok ? 0 : 1;
    }
    return {failures == 0, fmt("%d of 200 random score maps violated a property", failures)};
}

// 9. Scribble sampling counts.
Outcome scribble_sampling() {
    Bitmap2D pos(120, 90), neg(120, 90);
    // Thick strokes: a diagonal band and an arc for positives, a frame-like stroke for negatives.
    for (int y = 0; y < 90; ++y)
        for (int x = 0; x < 120; ++x) {
            const double d = std::abs((x - 10) * 0.6 - (y - 5)) / std::sqrt(1.36);
            const double r = std::hypot(x - 70.0, y - 45.0);
            pos.set(x, y, (d < 2.5 && x > 10 && x < 100) || (r > 20.0 && r < 24.0 && y < 45));
            neg.set(x, y, (y >= 80 && y <= 84 && x >= 5 && x <= 115) || (x >= 110 && x <= 114 && y >= 10 && y <= 84));
        }
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const PromptSet ps = scribbles_to_prompts(pos, neg, {0.02, 0.005, seed});
        const Bitmap2D sp = skeletonize(pos), sn = skeletonize(neg);
        const auto want_p = static_cast<std::size_t>(std::ceil(0.02 * static_cast<double>(sp.count()) - 1e-9));
        const auto want_n = static_cast<std::size_t>(std::ceil(0.005 * static_cast<double>(sn.count()) - 1e-9));
        ok = ok && ps.count(PromptLabel::positive) == want_p && ps.count(PromptLabel::negative) == want_n;
        for (const auto& p : ps.points)
            ok = ok && (p.positive() ? sp(p.x, p.y) : sn(p.x, p.y));
        detail = fmt("skeletons %zu/%zu px -> %zu positive (want %zu), %zu negative (want %zu)", sp.count(), sn.count(),
                     ps.count(PromptLabel::positive), want_p, ps.count(PromptLabel::negative), want_n);
    }
    return {ok, detail};
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::vector<fs::path> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file())
            fa.push_back(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file())
            fb.push_back(fs::relative(e.path(), b));
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb)
        return false;
    for (const auto& f : fa)
        if (read_file(a / f) != read_file(b / f))
            return false;
    return true;
}

// 10. Determinism and bit-exact formats.
Outcome determinism_and_formats() {
    const fs::path root = fs::temp_directory_path() / "masklift_acceptance";
    fs::remove_all(root);
    SceneSpec spec = fixtures::three_objects(12);
    spec.image_width = spec.image_height = 48;
    std::string runs[2], reports[2], masks[2];
    for (int k = 0; k < 2; ++k) {
        const Scene scene = build_scene(spec);
        save_scene(root / ("scene" + std::to_string(k)), scene, &spec);
        EngineConfig cfg;
        cfg.view_order = {0, 2, 4, 6, 8, 10};
        OracleNoise noise;
        noise.flip_rate = 0.01;
        noise.failure_rate = 0.3;
        noise.seed = 5;
        OracleSegmenter seg(scene, noise);
        const RunResult r = run(scene.field(), scene.cameras(),
                                Initialization::from_prompts(fixtures::click(scene.gt_visibility(0, 1))), cfg, seg);
        masks[k] = encode_mask_grid(r.mask);
        runs[k] = to_json(r.record).dump();
        const std::vector<int> held{1, 5, 9};
        reports[k] = to_json(evaluate(scene, r.mask, held, 1, &r.record)).dump();
    }
    const bool deterministic =
        same_tree(root / "scene0", root / "scene1") && masks[0] == masks[1] && runs[0] == runs[1] && reports[0] == reports[1];

    // write -> read -> write for every format.
    bool round = true;
    const Scene loaded = load_scene(root / "scene0");
    save_scene(root / "scene2", loaded, &spec);
    round = round && same_tree(root / "scene0", root / "scene2");
    const Bitmap2D gt = loaded.gt_visibility(0, 1);
    round = round && encode_pgm(decode_pgm(encode_pgm(gt))) == encode_pgm(gt);
    const ViewSamples vs = trace_view(loaded.field(), loaded.camera(0), kDefaultSamples);
    const RgbImage rgb = render_rgb(vs, loaded.field());
    round = round && encode_ppm(decode_ppm(encode_ppm(rgb))) == encode_ppm(rgb);
    FloatImage depth{vs.width, vs.height, {}};
    for (double d : vs.depth)
        depth.values.push_back(static_cast<float>(d));
    round = round && encode_pfm(decode_pfm(encode_pfm(depth))) == encode_pfm(depth);
    const MaskGrid m = decode_mask_grid(masks[0], loaded.field().dims(), loaded.field().bbox());
    round = round && encode_mask_grid(m) == masks[0];
    round = round && to_json(scene_spec_from_json(to_json(spec))).dump() == to_json(spec).dump();
    fs::remove_all(root);
    return {deterministic && round, fmt("repeat runs byte-identical: %s; format round trips exact: %s",
                                        deterministic ? "yes" : "no", round ? "yes" : "no")};
}

// 11. The full loop beats inverse rendering of the reference view alone.
Outcome baseline_gap() {
    bool ok = true;
    std::string detail;
    for (Fixture* f : {&main_fixture(), &facing_fixture()}) {
        for (int id : f->targets) {
            const auto full = run_target(*f->cache, f->scene, f->split, id, {}, {}, true).report;
            const int ref = f->split.train.front();
            const MaskGrid base = single_view_baseline(*f->cache, ref, f->scene.gt_visibility(ref, id), {});
            const Report b = evaluate(*f->cache, f->scene, base, f->split.held_out, id);
            ok = ok && full.mean_iou > b.mean_iou;
            detail += fmt("%.3f > %.3f; ", full.mean_iou, b.mean_iou);
        }
    }
    return {ok, "full vs single-view mIoU: " + detail};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> all = {
        {"gradient matches finite differences", gradient_correctness},
        {"rendering weight identities", weight_identities},
        {"oracle end-to-end recovery", oracle_recovery},
        {"view-count trend", view_count_trend},
        {"IoU-aware rejection efficacy", rejection_efficacy},
        {"negative refinement term", negative_term},
        {"two-pass refinement", two_pass},
        {"prompter compliance", prompter_compliance},
        {"scribble sampling", scribble_sampling},
        {"determinism and formats", determinism_and_formats},
        {"single-view baseline gap", baseline_gap},
    };
    // Optional arguments select criteria by number.
    std::vector<std::size_t> selected;
    for (int a = 1; a < argc; ++a)
        selected.push_back(std::stoul(argv[a]) - 1);
    if (selected.empty())
        for (std::size_t i = 0; i < all.size(); ++i)
            selected.push_back(i);
    int failed = 0;
    for (std::size_t i : selected) {
        if (i >= all.size())
            continue;
        Outcome o;
        try {
            o = all[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %2zu %s: %s | %s\n", i + 1, o.pass ? "PASS" : "FAIL", all[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, selected.size());
    return failed;
}
