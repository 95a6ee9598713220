// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "masklift/engine.hpp"
#include "masklift/evaluate.hpp"
#include "masklift/scene.hpp"

#include <vector>

namespace masklift::fixtures {

// Opaque, sharp-edged primitives: sharp boundaries keep the rendered silhouette close to the labeled one.
inline Primitive opaque(Primitive p) {
    p.sigma_inside = 200.0;
    p.falloff_voxels = 0.0;
    return p;
}

/// Three disjoint primitives (sphere, yawed box, torus) in a 64^3 grid, 48-view orbit, 128x128 images.
inline SceneSpec three_objects(int n_views = 48) {
    SceneSpec spec;
    Primitive sphere;
    sphere.shape = ShapeKind::sphere;
    sphere.center = {-0.5, 0.2, 0.0};
    sphere.radius = 0.38;
    sphere.color = {0.85, 0.25, 0.2};
    sphere.object_id = 1;
    Primitive box;
    box.shape = ShapeKind::box;
    box.center = {0.5, 0.3, 0.0};
    box.half_extents = {0.28, 0.28, 0.28};
    box.yaw_deg = 30.0;
    box.color = {0.2, 0.8, 0.3};
    box.object_id = 2;
    Primitive torus;
    torus.shape = ShapeKind::torus;
    torus.center = {0.0, -0.5, 0.0};
    torus.major_radius = 0.32;
    torus.minor_radius = 0.14;
    torus.color = {0.25, 0.35, 0.9};
    torus.object_id = 3;
    spec.primitives = {opaque(sphere), opaque(box), opaque(torus)};
    OrbitTrajectory orbit;
    orbit.n_views = n_views;
    spec.trajectory = orbit;
    spec.image_width = spec.image_height = 128;
    return spec;
}

/// Sphere in front of a large backdrop box, seen by a jittered forward-facing rig.
inline SceneSpec forward_facing(int n_views = 24) {
    SceneSpec spec;
    Primitive target;
    target.center = {0.0, 0.0, -0.1};
    target.radius = 0.4;
    target.color = {0.9, 0.6, 0.1};
    target.object_id = 1;
    Primitive backdrop;
    backdrop.shape = ShapeKind::box;
    backdrop.center = {0.0, 0.0, 0.7};
    backdrop.half_extents = {0.95, 0.95, 0.15};
    backdrop.color = {0.4, 0.4, 0.45};
    backdrop.object_id = 2;
    spec.primitives = {opaque(backdrop), opaque(target)};
    ForwardFacingTrajectory rig;
    rig.n_views = n_views;
    rig.jitter = 0.4;
    spec.trajectory = rig;
    spec.image_width = spec.image_height = 96;
    spec.seed = 7;
    return spec;
}

/// Every sixth view is held out for evaluation, the rest train.
struct Split {
    std::vector<int> train, held_out;
};

inline Split split_views(int n_views) {
    Split s;
    for (int v = 0; v < n_views; ++v)
        (v % 6 == 3 ? s.held_out : s.train).push_back(v);
    return s;
}

/// A user click: the mask pixel closest to the mask centroid.
inline PromptSet click(const Bitmap2D& mask) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    PromptSet out;
    if (n == 0)
        return out;
    sx /= static_cast<double>(n);
    sy /= static_cast<double>(n);
    PromptPoint best;
    double best_d = 1e300;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask(x, y)) {
                const double d = (x - sx) * (x - sx) + (y - sy) * (y - sy);
                if (d < best_d) {
                    best_d = d;
                    best.x = x;
                    best.y = y;
                }
            }
    out.points.push_back(best);
    return out;
}

} // namespace masklift::fixtures
