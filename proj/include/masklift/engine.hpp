// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "masklift/image.hpp"
#include "masklift/inverse.hpp"
#include "masklift/prompter.hpp"
#include "masklift/renderer.hpp"
#include "masklift/segmenter.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace masklift {

struct EngineConfig {
    double tau = 0.5;
    int n_p = 3;
    LossConfig loss;
    int n_samples = kDefaultSamples;
    std::vector<int> view_order; // first entry is the prompted reference view
    bool decay_enabled = true;
    DistanceNormalization normalization = DistanceNormalization::surviving_candidates;
    int epochs = 1;              // sweeps over view_order[1..]
    bool two_pass = false;
    int exchange_negatives = 1;  // top prompts of the opposing grid appended as negatives in pass 2

    void validate(std::size_t camera_count) const;
    PromptOptions prompt_options() const { return {n_p, decay_enabled, normalization}; }
};

/// `keep` views uniformly sampled from the sorted list, always including the smallest index.
std::vector<int> subsample_views(std::span<const int> views, std::size_t keep);

enum class GridRole { main, counter };

enum class ViewOutcome {
    initialized, // reference view, no gating
    accepted,
    rejected_no_prompts,
    rejected_segmenter_error,
    rejected_low_iou,
};

const char* to_string(ViewOutcome outcome);

struct ViewRecord {
    int view = 0;
    int pass = 1;
    GridRole grid = GridRole::main;
    ViewOutcome outcome = ViewOutcome::initialized;
    std::optional<double> iou; // gate statistic, absent when no mask was compared
    PromptSet prompts;
    std::optional<double> loss; // loss before the update, accepted views only
    std::string error;

    bool updated() const { return outcome == ViewOutcome::initialized || outcome == ViewOutcome::accepted; }
};

struct RunRecord {
    std::vector<ViewRecord> views;
    double seconds = 0.0;

    std::size_t count(ViewOutcome outcome, int pass = 1, GridRole grid = GridRole::main) const;
};

/// Either user prompts on the reference view or a reference-view mask (label propagation protocol).
struct Initialization {
    std::variant<PromptSet, Bitmap2D> value;

    static Initialization from_prompts(PromptSet p) { return {std::move(p)}; }
    static Initialization from_mask(Bitmap2D m) { return {std::move(m)}; }
    bool is_mask() const { return std::holds_alternative<Bitmap2D>(value); }
};

struct RunResult {
    MaskGrid mask;                    // V
    std::optional<MaskGrid> counter;  // V' after a two-pass run that found disagreement
    RunRecord record;
    Bitmap2D reference_mask;          // mask used to initialize V on the reference view
    std::optional<Bitmap2D> disagreement;
};

double iou(const Bitmap2D& a, const Bitmap2D& b);

/// Alternates rendering, self-prompting, segmentation, IoU gating and mask inverse rendering over
/// cfg.view_order. `cache` must be built over `cameras` with cfg.n_samples samples.
RunResult run(SampleCache& cache, const Initialization& init, const EngineConfig& cfg, Segmenter& segmenter);
RunResult run(const DensityField& field, std::span<const Camera> cameras, const Initialization& init,
              const EngineConfig& cfg, Segmenter& segmenter);

/// Inverse-renders `gt_mask` on one view and stops there.
MaskGrid single_view_baseline(SampleCache& cache, int view, const Bitmap2D& gt_mask, const EngineConfig& cfg);
MaskGrid single_view_baseline(const DensityField& field, const Camera& camera, const Bitmap2D& gt_mask,
                              const EngineConfig& cfg);

/// Runs pass 1, then re-segments with a counter grid V' seeded by the reference-view pixels that V marks
/// as foreground but the reference mask does not. Prompts of each grid are handed to the other grid's
/// queries as negatives. Returns the pass-1 result untouched when there is no disagreement.
RunResult run_two_pass(SampleCache& cache, const Initialization& init, const EngineConfig& cfg,
                       Segmenter& segmenter);

} // namespace masklift
