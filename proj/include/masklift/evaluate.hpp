// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "masklift/engine.hpp"
#include "masklift/inverse.hpp"
#include "masklift/renderer.hpp"
#include "masklift/scene.hpp"

#include "json.hpp"

#include <span>
#include <vector>

namespace masklift {

struct ViewMetrics {
    int view = 0;
    double iou = 0.0;
    double accuracy = 0.0;
    bool trained = false; // the view also appeared in the training order
};

struct Report {
    int object_id = 0;
    std::vector<ViewMetrics> views;
    double mean_iou = 0.0;
    double mean_accuracy = 0.0;
    double iou_3d = 0.0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double seconds = 0.0;
};

/// Pixel accuracy: fraction of pixels where the two masks agree.
double pixel_accuracy(const Bitmap2D& a, const Bitmap2D& b);
/// |{V > 0} ∩ occ| / |{V > 0} ∪ occ| over the vertex lattice; 1 when both are empty.
double voxel_iou(const MaskGrid& mask, std::span<const std::size_t> occupancy);

/// Renders `mask` on each held-out view, binarizes at > 0 and compares with the object's visibility mask.
/// `record` (optional) supplies acceptance counts, timing and the training views used for flagging.
Report evaluate(SampleCache& cache, const Scene& scene, const MaskGrid& mask, std::span<const int> held_out,
                int object_id, const RunRecord* record = nullptr);
Report evaluate(const Scene& scene, const MaskGrid& mask, std::span<const int> held_out, int object_id,
                const RunRecord* record = nullptr, int n_samples = kDefaultSamples);

nlohmann::json to_json(const Report& report, bool include_timing = false);

} // namespace masklift
