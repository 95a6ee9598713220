// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#include "masklift/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace masklift {

void EngineConfig::validate(std::size_t camera_count) const {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw InvalidArgument("tau must lie in [0, 1]");
    if (n_p < 1)
        throw InvalidArgument("n_p must be >= 1");
    if (n_samples < 1)
        throw InvalidArgument("n_samples must be >= 1");
    if (epochs < 1)
        throw InvalidArgument("epochs must be >= 1");
    if (exchange_negatives < 0)
        throw InvalidArgument("exchange_negatives must be >= 0");
    loss.validate();
    if (view_order.empty())
        throw InvalidArgument("view_order must not be empty");
    for (int v : view_order)
        if (v < 0 || static_cast<std::size_t>(v) >= camera_count)
            throw InvalidArgument("view_order index " + std::to_string(v) + " out of range");
}

std::vector<int> subsample_views(std::span<const int> views, std::size_t keep) {
    std::vector<int> sorted(views.begin(), views.end());
    std::sort(sorted.begin(), sorted.end());
    keep = std::min(keep, sorted.size());
    std::vector<int> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i)
        out.push_back(sorted[i * sorted.size() / keep]);
    return out;
}

const char* to_string(ViewOutcome outcome) {
    switch (outcome) {
    case ViewOutcome::initialized:
        return "initialized";
    case ViewOutcome::accepted:
        return "accepted";
    case ViewOutcome::rejected_no_prompts:
        return "rejected_no_prompts";
    case ViewOutcome::rejected_segmenter_error:
        return "rejected_segmenter_error";
    case ViewOutcome::rejected_low_iou:
        return "rejected_low_iou";
    }
    return "unknown";
}

std::size_t RunRecord::count(ViewOutcome outcome, int pass, GridRole grid) const {
    return static_cast<std::size_t>(std::count_if(views.begin(), views.end(), [&](const ViewRecord& r) {
        return r.outcome == outcome && r.pass == pass && r.grid == grid;
    }));
}

double iou(const Bitmap2D& a, const Bitmap2D& b) {
    require_same_dims(a, b, "iou");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        const bool x = a.bits[i] != 0, y = b.bits[i] != 0;
        inter += (x && y) ? 1 : 0;
        uni += (x || y) ? 1 : 0;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

class Loop {
  public:
    Loop(SampleCache& cache, const EngineConfig& cfg, Segmenter& segmenter)
        : cache_(cache), cfg_(cfg), segmenter_(segmenter) {}

    // Calls the segmenter for `view`; returns nullopt (and fills `record`) on backend failure.
    std::optional<Bitmap2D> query(int view, const PromptSet& prompts, ViewRecord& record) {
        SegmenterQuery q;
        q.view = view;
        q.width = cache_.camera(view).width;
        q.height = cache_.camera(view).height;
        q.prompts = prompts;
        if (segmenter_.needs_image())
            q.image = render_rgb(cache_.view(view), cache_.field());
        try {
            q.validate();
            Bitmap2D mask = segmenter_.segment(q);
            if (mask.width != q.width || mask.height != q.height)
                throw DimensionMismatch("segmenter returned a mask of the wrong size");
            return mask;
        } catch (const std::exception& e) {
            record.outcome = ViewOutcome::rejected_segmenter_error;
            record.error = e.what();
            return std::nullopt;
        }
    }

    // One gated self-prompted update of `grid` on `view`. `prompts` were selected from `grid`'s render.
    ViewRecord step(MaskGrid& grid, int view, const ScoreMap2D& rendered, PromptSet prompts,
                    const PromptSet& negatives, int pass, GridRole role) {
        ViewRecord rec;
        rec.view = view;
        rec.pass = pass;
        rec.grid = role;
        if (prompts.empty()) {
            rec.outcome = ViewOutcome::rejected_no_prompts;
            return rec;
        }
        prompts.points.insert(prompts.points.end(), negatives.points.begin(), negatives.points.end());
        rec.prompts = prompts;
        const auto mask = query(view, prompts, rec);
        if (!mask)
            return rec;
        rec.iou = iou(rendered.binarize(), *mask);
        if (*rec.iou < cfg_.tau) {
            rec.outcome = ViewOutcome::rejected_low_iou;
            return rec;
        }
        rec.loss = inverse_render_view(grid, *mask, cache_.view(view), cfg_.loss);
        rec.outcome = ViewOutcome::accepted;
        return rec;
    }

    ViewRecord self_prompted_step(MaskGrid& grid, int view, int pass) {
        const ScoreMap2D rendered = render_scores(cache_.view(view), grid);
        PromptSet prompts = select_prompts(rendered, cache_.camera(view), cfg_.prompt_options());
        return step(grid, view, rendered, std::move(prompts), {}, pass, GridRole::main);
    }

    // Inverse-renders the reference view; resolves prompt initialization through the segmenter.
    ViewRecord initialize(MaskGrid& grid, const Initialization& init, Bitmap2D& reference_mask) {
        const int ref = cfg_.view_order.front();
        const Camera& cam = cache_.camera(ref);
        ViewRecord rec;
        rec.view = ref;
        rec.outcome = ViewOutcome::initialized;
        if (const auto* mask = std::get_if<Bitmap2D>(&init.value)) {
            if (mask->width != cam.width || mask->height != cam.height)
                throw InvalidArgument("reference mask does not match the reference camera");
            reference_mask = *mask;
        } else {
            const PromptSet& prompts = std::get<PromptSet>(init.value);
            rec.prompts = prompts;
            auto queried = query(ref, prompts, rec);
            if (!queried) {
                reference_mask = Bitmap2D(cam.width, cam.height);
                return rec;
            }
            reference_mask = std::move(*queried);
        }
        rec.loss = inverse_render_view(grid, reference_mask, cache_.view(ref), cfg_.loss);
        return rec;
    }

    SampleCache& cache() { return cache_; }

  private:
    SampleCache& cache_;
    const EngineConfig& cfg_;
    Segmenter& segmenter_;
};

void check_cache(const SampleCache& cache, const EngineConfig& cfg) {
    cfg.validate(cache.size());
    if (cache.n_samples() != cfg.n_samples)
        throw InvalidArgument("sample cache was traced with a different n_samples than the config");
}

PromptSet as_negatives(const PromptSet& prompts, int count) {
    PromptSet out;
    for (const auto& p : prompts.points) {
        if (static_cast<int>(out.size()) >= count)
            break;
        PromptPoint n = p;
        n.label = PromptLabel::negative;
        out.points.push_back(n);
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

RunResult run(SampleCache& cache, const Initialization& init, const EngineConfig& cfg, Segmenter& segmenter) {
    check_cache(cache, cfg);
    const auto start = std::chrono::steady_clock::now();
    Loop loop(cache, cfg, segmenter);
    RunResult result;
    result.mask = MaskGrid::zeros_like(cache.field());
    result.record.views.push_back(loop.initialize(result.mask, init, result.reference_mask));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
        for (std::size_t i = 1; i < cfg.view_order.size(); ++i)
            result.record.views.push_back(loop.self_prompted_step(result.mask, cfg.view_order[i], 1));
    result.record.seconds = seconds_since(start);
    return result;
}

RunResult run(const DensityField& field, std::span<const Camera> cameras, const Initialization& init,
              const EngineConfig& cfg, Segmenter& segmenter) {
    SampleCache cache(field, std::vector<Camera>(cameras.begin(), cameras.end()), cfg.n_samples);
    return run(cache, init, cfg, segmenter);
}

MaskGrid single_view_baseline(SampleCache& cache, int view, const Bitmap2D& gt_mask, const EngineConfig& cfg) {
    if (view < 0 || static_cast<std::size_t>(view) >= cache.size())
        throw InvalidArgument("baseline view out of range");
    cfg.loss.validate();
    const Camera& cam = cache.camera(view);
    if (gt_mask.width != cam.width || gt_mask.height != cam.height)
        throw InvalidArgument("reference mask does not match the reference camera");
    MaskGrid mask = MaskGrid::zeros_like(cache.field());
    inverse_render_view(mask, gt_mask, cache.view(view), cfg.loss);
    return mask;
}

MaskGrid single_view_baseline(const DensityField& field, const Camera& camera, const Bitmap2D& gt_mask,
                              const EngineConfig& cfg) {
    SampleCache cache(field, {camera}, cfg.n_samples);
    return single_view_baseline(cache, 0, gt_mask, cfg);
}

RunResult run_two_pass(SampleCache& cache, const Initialization& init, const EngineConfig& cfg,
                       Segmenter& segmenter) {
    RunResult first = run(cache, init, cfg, segmenter);
    const auto start = std::chrono::steady_clock::now();
    const int ref = cfg.view_order.front();

    const Bitmap2D rendered_ref = render_scores(cache.view(ref), first.mask).binarize();
    Bitmap2D disagreement(rendered_ref.width, rendered_ref.height);
    for (std::size_t i = 0; i < disagreement.bits.size(); ++i)
        disagreement.bits[i] = (rendered_ref.bits[i] && !first.reference_mask.bits[i]) ? 1 : 0;
    first.disagreement = disagreement;
    if (disagreement.empty_mask())
        return first;

    Loop loop(cache, cfg, segmenter);
    RunResult out;
    out.record = std::move(first.record);
    out.reference_mask = first.reference_mask;
    out.disagreement = disagreement;
    out.mask = MaskGrid::zeros_like(cache.field());
    MaskGrid counter = MaskGrid::zeros_like(cache.field());

    ViewRecord init_main;
    init_main.view = ref;
    init_main.pass = 2;
    init_main.loss = inverse_render_view(out.mask, out.reference_mask, cache.view(ref), cfg.loss);
    out.record.views.push_back(init_main);
    ViewRecord init_counter = init_main;
    init_counter.grid = GridRole::counter;
    init_counter.loss = inverse_render_view(counter, disagreement, cache.view(ref), cfg.loss);
    out.record.views.push_back(init_counter);

    const PromptOptions options = cfg.prompt_options();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
        for (std::size_t i = 1; i < cfg.view_order.size(); ++i) {
            const int view = cfg.view_order[i];
            const Camera& cam = cache.camera(view);
            const ScoreMap2D main_scores = render_scores(cache.view(view), out.mask);
            const ScoreMap2D counter_scores = render_scores(cache.view(view), counter);
            PromptSet main_prompts = select_prompts(main_scores, cam, options);
            PromptSet counter_prompts = select_prompts(counter_scores, cam, options);
            const PromptSet main_neg = as_negatives(counter_prompts, cfg.exchange_negatives);
            const PromptSet counter_neg = as_negatives(main_prompts, cfg.exchange_negatives);
            out.record.views.push_back(
                loop.step(out.mask, view, main_scores, std::move(main_prompts), main_neg, 2, GridRole::main));
            out.record.views.push_back(loop.step(counter, view, counter_scores, std::move(counter_prompts),
                                                 counter_neg, 2, GridRole::counter));
        }
    out.counter = std::move(counter);
    out.record.seconds += seconds_since(start);
    return out;
}

} // namespace masklift
