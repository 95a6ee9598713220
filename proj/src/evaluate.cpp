// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#include "masklift/evaluate.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace masklift {

double pixel_accuracy(const Bitmap2D& a, const Bitmap2D& b) {
    require_same_dims(a, b, "pixel_accuracy");
    if (a.bits.empty())
        return 1.0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i)
        same += ((a.bits[i] != 0) == (b.bits[i] != 0)) ? 1 : 0;
    return static_cast<double>(same) / static_cast<double>(a.bits.size());
}

double voxel_iou(const MaskGrid& mask, std::span<const std::size_t> occupancy) {
    std::vector<std::uint8_t> occ(mask.size(), 0);
    for (std::size_t v : occupancy) {
        if (v >= occ.size())
            throw InvalidArgument("occupancy index out of range");
        occ[v] = 1;
    }
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        const bool f = mask.foreground(i), o = occ[i] != 0;
        inter += (f && o) ? 1 : 0;
        uni += (f || o) ? 1 : 0;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Report evaluate(SampleCache& cache, const Scene& scene, const MaskGrid& mask, std::span<const int> held_out,
                int object_id, const RunRecord* record) {
    if (!scene.has_object(object_id))
        throw InvalidArgument("object id " + std::to_string(object_id) + " is not in the scene");
    if (mask.size() != scene.field().sigma().size())
        throw InvalidArgument("mask grid does not match the scene");
    if (cache.size() != scene.view_count())
        throw InvalidArgument("sample cache does not cover the scene cameras");
    if (held_out.empty())
        throw InvalidArgument("evaluation needs at least one held-out view");

    std::set<int> trained;
    if (record != nullptr)
        for (const auto& r : record->views)
            trained.insert(r.view);

    Report rep;
    rep.object_id = object_id;
    for (int v : held_out) {
        if (v < 0 || static_cast<std::size_t>(v) >= scene.view_count())
            throw InvalidArgument("held-out view " + std::to_string(v) + " out of range");
        const Bitmap2D pred = render_scores(cache.view(static_cast<std::size_t>(v)), mask).binarize();
        const Bitmap2D gt = scene.gt_visibility(static_cast<std::size_t>(v), object_id);
        rep.views.push_back({v, iou(pred, gt), pixel_accuracy(pred, gt), trained.count(v) > 0});
    }
    for (const auto& m : rep.views) {
        rep.mean_iou += m.iou;
        rep.mean_accuracy += m.accuracy;
    }
    rep.mean_iou /= static_cast<double>(rep.views.size());
    rep.mean_accuracy /= static_cast<double>(rep.views.size());
    rep.iou_3d = voxel_iou(mask, scene.gt_occupancy(object_id));
    if (record != nullptr) {
        for (const auto& r : record->views) {
            if (r.outcome == ViewOutcome::accepted)
                ++rep.accepted;
            else if (r.outcome != ViewOutcome::initialized)
                ++rep.rejected;
        }
        rep.seconds = record->seconds;
    }
    return rep;
}

Report evaluate(const Scene& scene, const MaskGrid& mask, std::span<const int> held_out, int object_id,
                const RunRecord* record, int n_samples) {
    SampleCache cache(scene.field(), scene.cameras(), n_samples);
    return evaluate(cache, scene, mask, held_out, object_id, record);
}

nlohmann::json to_json(const Report& report, bool include_timing) {
    nlohmann::json views = nlohmann::json::array();
    for (const auto& v : report.views)
        views.push_back({{"view", v.view}, {"iou", v.iou}, {"accuracy", v.accuracy}, {"trained", v.trained}});
    nlohmann::json j = {{"object_id", report.object_id},
                        {"views", views},
                        {"mean_iou", report.mean_iou},
                        {"mean_accuracy", report.mean_accuracy},
                        {"iou_3d", report.iou_3d},
                        {"accepted", report.accepted},
                        {"rejected", report.rejected}};
    if (include_timing)
        j["seconds"] = report.seconds;
    return j;
}

} // namespace masklift
