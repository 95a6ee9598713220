// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "masklift/evaluate.hpp"

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace masklift;

namespace {

constexpr int kSamples = 64;

const Scene& small_scene() {
    static const Scene scene = [] {
        SceneSpec spec;
        spec.dims = {20, 20, 20};
        Primitive a;
        a.center = {-0.4, 0.0, 0.0};
        a.radius = 0.35;
        a.object_id = 1;
        Primitive b;
        b.shape = ShapeKind::box;
        b.center = {0.45, 0.1, 0.0};
        b.half_extents = {0.25, 0.25, 0.25};
        b.object_id = 2;
        spec.primitives = {fixtures::opaque(a), fixtures::opaque(b)};
        OrbitTrajectory orbit;
        orbit.n_views = 6;
        spec.trajectory = orbit;
        spec.image_width = spec.image_height = 24;
        spec.gt_samples = kSamples;
        return build_scene(spec);
    }();
    return scene;
}

const std::vector<int> kHeldOut = {1, 3, 5};

} // namespace

TEST_CASE("pixel accuracy and voxel iou on small cases") {
    Bitmap2D a(4, 1), b(4, 1);
    a.bits = {1, 1, 0, 0};
    b.bits = {1, 0, 0, 1};
    CHECK(pixel_accuracy(a, b) == 0.5);
    CHECK(pixel_accuracy(a, a) == 1.0);
    CHECK_THROWS_AS(pixel_accuracy(a, Bitmap2D(2, 2)), InvalidArgument);

    MaskGrid m(ScalarGrid({2, 2, 2}, oracle::unit_box(), 0.0));
    const std::vector<std::size_t> none;
    CHECK(voxel_iou(m, none) == 1.0);
    m.values()[0] = 1.0;
    m.values()[1] = 1.0;
    const std::vector<std::size_t> occ = {1, 2};
    CHECK(voxel_iou(m, occ) == doctest::Approx(1.0 / 3.0));
    const std::vector<std::size_t> bad = {8};
    CHECK_THROWS_AS(voxel_iou(m, bad), InvalidArgument);
}

TEST_CASE("a grid matching the labeled occupancy has 3D IoU 1") {
    const Scene& s = small_scene();
    for (int id : s.object_ids()) {
        MaskGrid m = MaskGrid::zeros_like(s.field());
        for (std::size_t v : s.gt_occupancy(id))
            m.values()[v] = 1.0;
        const Report r = evaluate(s, m, kHeldOut, id, nullptr, kSamples);
        CHECK(r.iou_3d == 1.0);
        CHECK(r.mean_iou > 0.7); // coarse 20^3 grid, 24 px images
    }
}

TEST_CASE("an all-zero grid scores zero and background-fraction accuracy") {
    const Scene& s = small_scene();
    const MaskGrid zero = MaskGrid::zeros_like(s.field());
    const Report r = evaluate(s, zero, kHeldOut, 1, nullptr, kSamples);
    CHECK(r.iou_3d == 0.0);
    REQUIRE(r.views.size() == kHeldOut.size());
    for (const ViewMetrics& m : r.views) {
        const Bitmap2D gt = s.gt_visibility(static_cast<std::size_t>(m.view), 1);
        REQUIRE(gt.count() > 0);
        CHECK(m.iou == 0.0);
        CHECK(m.accuracy == doctest::Approx(1.0 - static_cast<double>(gt.count()) / gt.size()));
    }
}

TEST_CASE("metrics of a random grid match a scalar oracle") {
    const Scene& s = small_scene();
    Rng rng(71);
    MaskGrid m = MaskGrid::zeros_like(s.field());
    for (double& v : m.values())
        v = rng.uniform(-1.0, 1.0);
    const Report r = evaluate(s, m, kHeldOut, 2, nullptr, kSamples);
    double sum_iou = 0.0, sum_acc = 0.0;
    for (std::size_t k = 0; k < kHeldOut.size(); ++k) {
        const Camera& c = s.camera(static_cast<std::size_t>(kHeldOut[k]));
        const Bitmap2D gt = s.gt_visibility(static_cast<std::size_t>(kHeldOut[k]), 2);
        std::size_t inter = 0, uni = 0, same = 0;
        for (int y = 0; y < c.height; ++y)
            for (int x = 0; x < c.width; ++x) {
                const Ray ray = ray_for_pixel(c, x, y);
                double coverage = 0.0;
                for (double w : oracle::weights(s.field(), ray, kSamples).weights)
                    coverage += w;
                const bool pred = coverage >= kCoverageFloor &&
                                  oracle::render_mask(m.grid(), s.field(), ray, kSamples) > 0.0;
                inter += (pred && gt(x, y)) ? 1 : 0;
                uni += (pred || gt(x, y)) ? 1 : 0;
                same += (pred == gt(x, y)) ? 1 : 0;
            }
        const double want_iou = uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
        const double want_acc = static_cast<double>(same) / gt.size();
        CHECK(r.views[k].view == kHeldOut[k]);
        CHECK(r.views[k].iou == doctest::Approx(want_iou).epsilon(1e-12));
        CHECK(r.views[k].accuracy == doctest::Approx(want_acc).epsilon(1e-12));
        sum_iou += r.views[k].iou;
        sum_acc += r.views[k].accuracy;
    }
    CHECK(r.mean_iou == doctest::Approx(sum_iou / kHeldOut.size()).epsilon(1e-15));
    CHECK(r.mean_accuracy == doctest::Approx(sum_acc / kHeldOut.size()).epsilon(1e-15));
}

TEST_CASE("run records supply counts and training flags") {
    const Scene& s = small_scene();
    RunRecord rec;
    rec.views.push_back({});
    rec.views.back().view = 0;
    rec.views.back().outcome = ViewOutcome::initialized;
    rec.views.push_back({});
    rec.views.back().view = 1;
    rec.views.back().outcome = ViewOutcome::accepted;
    rec.views.push_back({});
    rec.views.back().view = 2;
    rec.views.back().outcome = ViewOutcome::rejected_low_iou;
    const Report r = evaluate(s, MaskGrid::zeros_like(s.field()), kHeldOut, 1, &rec, kSamples);
    CHECK(r.accepted == 1);
    CHECK(r.rejected == 1);
    CHECK(r.views[0].trained);
    CHECK_FALSE(r.views[1].trained);
    const auto j = to_json(r);
    CHECK_FALSE(j.contains("seconds"));
    CHECK(to_json(r, true).contains("seconds"));
}

TEST_CASE("invalid evaluation requests throw") {
    const Scene& s = small_scene();
    const MaskGrid zero = MaskGrid::zeros_like(s.field());
    CHECK_THROWS_AS(evaluate(s, zero, kHeldOut, 9, nullptr, kSamples), InvalidArgument);
    CHECK_THROWS_AS(evaluate(s, zero, std::vector<int>{}, 1, nullptr, kSamples), InvalidArgument);
    CHECK_THROWS_AS(evaluate(s, zero, std::vector<int>{17}, 1, nullptr, kSamples), InvalidArgument);
    const MaskGrid other(ScalarGrid({4, 4, 4}, oracle::unit_box(), 0.0));
    CHECK_THROWS_AS(evaluate(s, other, kHeldOut, 1, nullptr, kSamples), InvalidArgument);
}
