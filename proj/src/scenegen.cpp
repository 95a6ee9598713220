// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#include "masklift/scene.hpp"

#include "masklift/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace masklift {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double quantize(double v) { return static_cast<double>(static_cast<float>(v)); }

Vec3 box_local(const Primitive& prim, const Vec3& p) {
    const Vec3 d = p - prim.center;
    if (prim.yaw_deg == 0.0)
        return d;
    const double c = std::cos(prim.yaw_deg * kDegToRad), s = std::sin(prim.yaw_deg * kDegToRad);
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

// Segment-vs-oriented-box test for the analytic occlusion estimate.
bool segment_hits_box(const Primitive& box, const Vec3& a, const Vec3& b) {
    const Vec3 la = box_local(box, a), lb = box_local(box, b);
    const Vec3 dir = lb - la;
    double t0 = 0.0, t1 = 1.0;
    for (int k = 0; k < 3; ++k) {
        const double lo = -box.half_extents[k], hi = box.half_extents[k];
        if (std::abs(dir[k]) < 1e-15) {
            if (la[k] < lo || la[k] > hi)
                return false;
            continue;
        }
        double ta = (lo - la[k]) / dir[k], tb = (hi - la[k]) / dir[k];
        if (ta > tb)
            std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1)
            return false;
    }
    return true;
}

} // namespace

void Primitive::validate() const {
    if (!center.allFinite())
        throw InvalidArgument("primitive center must be finite");
    switch (shape) {
    case ShapeKind::sphere:
        if (!(radius > 0.0))
            throw InvalidArgument("sphere radius must be positive");
        break;
    case ShapeKind::box:
        if (!(half_extents.array() > 0.0).all())
            throw InvalidArgument("box half extents must be positive");
        break;
    case ShapeKind::torus:
        if (!(major_radius > 0.0) || !(minor_radius > 0.0))
            throw InvalidArgument("torus radii must be positive");
        if (!(axis.norm() > 0.0))
            throw InvalidArgument("torus axis must be nonzero");
        break;
    }
    if (!(sigma_inside > 0.0) || !std::isfinite(sigma_inside))
        throw InvalidArgument("primitive sigma_inside must be positive");
    if (!(falloff_voxels >= 0.0))
        throw InvalidArgument("primitive falloff_voxels must be >= 0");
    if (object_id <= 0 || object_id > std::numeric_limits<std::uint16_t>::max())
        throw InvalidArgument("primitive object_id must lie in [1, 65535]");
    if (!((color.array() >= 0.0).all() && (color.array() <= 1.0).all()))
        throw InvalidArgument("primitive color must lie in [0, 1]");
}

double Primitive::signed_distance(const Vec3& p) const {
    switch (shape) {
    case ShapeKind::sphere:
        return (p - center).norm() - radius;
    case ShapeKind::box: {
        const Vec3 q = box_local(*this, p).cwiseAbs() - half_extents;
        return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
    }
    case ShapeKind::torus: {
        const Vec3 a = axis.normalized();
        const Vec3 d = p - center;
        const double h = d.dot(a);
        const double radial = (d - h * a).norm();
        return std::hypot(radial - major_radius, h) - minor_radius;
    }
    }
    return std::numeric_limits<double>::infinity();
}

double Primitive::bounding_radius() const {
    switch (shape) {
    case ShapeKind::sphere:
        return radius;
    case ShapeKind::box:
        return half_extents.norm();
    case ShapeKind::torus:
        return major_radius + minor_radius;
    }
    return 0.0;
}

void SceneSpec::validate() const {
    if (dims.nx < 2 || dims.ny < 2 || dims.nz < 2)
        throw InvalidArgument("scene dims must be >= 2 along every axis");
    bbox.validate();
    for (const auto& p : primitives)
        p.validate();
    if (image_width <= 0 || image_height <= 0)
        throw InvalidArgument("image size must be positive");
    if (!(fov_deg > 0.0 && fov_deg < 180.0))
        throw InvalidArgument("fov_deg must lie in (0, 180)");
    const int n_views = std::visit([](const auto& t) { return t.n_views; }, trajectory);
    if (n_views < 1)
        throw InvalidArgument("trajectory must have at least one view");
    if (gt_samples < 1)
        throw InvalidArgument("gt_samples must be >= 1");
}

DensityField voxelize(const SceneSpec& spec) {
    spec.validate();
    ScalarGrid sigma(spec.dims, spec.bbox, 0.0);
    ColorGrid color(spec.dims, spec.bbox, Vec3::Zero());
    LabelGrid label(spec.dims, spec.bbox, 0);
    const double voxel = sigma.spacing().minCoeff();
    for (std::size_t v = 0; v < sigma.size(); ++v) {
        const Vec3 p = sigma.vertex_position(v);
        // Vertices just outside a surface carry the nearest primitive's color, so that samples interpolated
        // across the boundary do not blend toward black.
        double nearest = 2.0 * voxel;
        for (const auto& prim : spec.primitives) {
            const double sd = prim.signed_distance(p);
            if (sd >= 0.0 && sd < nearest) {
                nearest = sd;
                color[v] = Vec3(quantize(prim.color.x()), quantize(prim.color.y()), quantize(prim.color.z()));
            }
        }
        for (const auto& prim : spec.primitives) {
            const double sd = prim.signed_distance(p);
            if (!(sd < 0.0))
                continue;
            // Density ramps up linearly from the surface over falloff_voxels, so sigma > 0 exactly where
            // the vertex lies inside the shape.
            const double ramp = prim.falloff_voxels > 0.0 ? std::min(1.0, -sd / (prim.falloff_voxels * voxel)) : 1.0;
            sigma[v] = quantize(prim.sigma_inside * ramp);
            color[v] = Vec3(quantize(prim.color.x()), quantize(prim.color.y()), quantize(prim.color.z()));
            label[v] = static_cast<std::uint16_t>(prim.object_id);
        }
    }
    return DensityField(std::move(sigma), std::move(color), std::move(label));
}

std::vector<Camera> make_cameras(const SceneSpec& spec) {
    spec.validate();
    const int w = spec.image_width, h = spec.image_height;
    const double fx = spec.fx.value_or(0.5 * w / std::tan(0.5 * spec.fov_deg * kDegToRad));
    const double fy = spec.fy.value_or(fx);
    const double cx = spec.cx.value_or(0.5 * w), cy = spec.cy.value_or(0.5 * h);
    const double half_diag = 0.5 * spec.bbox.extent().norm();

    std::vector<Camera> cams;
    if (const auto* orbit = std::get_if<OrbitTrajectory>(&spec.trajectory)) {
        const double el = orbit->elevation_deg * kDegToRad;
        const double dist = (orbit->center - spec.bbox.center()).norm();
        const double t_near = spec.t_near.value_or(std::max(0.05, orbit->radius - half_diag - dist));
        const double t_far = spec.t_far.value_or(orbit->radius + half_diag + dist);
        for (int i = 0; i < orbit->n_views; ++i) {
            const double az = 2.0 * std::numbers::pi * i / orbit->n_views + orbit->azimuth_offset_deg * kDegToRad;
            const Vec3 eye =
                orbit->center + orbit->radius * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
            cams.push_back(Camera::look_at(eye, orbit->center, Vec3::UnitZ(), fx, fy, cx, cy, w, h, t_near, t_far));
        }
    } else {
        const auto& ff = std::get<ForwardFacingTrajectory>(spec.trajectory);
        Rng rng(mix_seed(spec.seed, 0xF0F0));
        const double dist = (ff.base_position - spec.bbox.center()).norm();
        const double t_near = spec.t_near.value_or(std::max(0.05, dist - half_diag - 2.0 * ff.jitter));
        const double t_far = spec.t_far.value_or(dist + half_diag + 2.0 * ff.jitter);
        for (int i = 0; i < ff.n_views; ++i) {
            Vec3 eye = ff.base_position;
            if (i > 0) // the first (reference) camera sits exactly at the base pose
                for (int k = 0; k < 3; ++k)
                    eye[k] += rng.uniform(-ff.jitter, ff.jitter);
            // Looking along +z with image rows running along +y.
            cams.push_back(Camera::look_at(eye, eye + Vec3::UnitZ(), -Vec3::UnitY(), fx, fy, cx, cy, w, h, t_near, t_far));
        }
    }
    for (const auto& c : cams)
        c.validate();
    return cams;
}

std::uint16_t visible_label(const DensityField& field, const Ray& ray, int n_samples) {
    const RaySamples samples = compute_weights(field, ray, n_samples);
    double coverage = 0.0, best = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < samples.weights.size(); ++i) {
        coverage += samples.weights[i];
        if (samples.weights[i] > best) {
            best = samples.weights[i];
            best_i = i;
        }
    }
    if (coverage < kCoverageFloor || best <= 0.0)
        return 0;
    // The sample belongs to the object whose vertices contribute most of its interpolated density.
    CellCoord cell;
    if (!field.sigma().locate(ray.at(samples.t[best_i]), cell))
        return 0;
    const auto w = corner_weights(cell);
    const auto off = field.sigma().corner_offsets();
    std::array<std::uint16_t, 8> ids{};
    std::array<double, 8> mass{};
    int n = 0;
    for (int k = 0; k < 8; ++k) {
        const std::size_t v = cell.base + off[k];
        const std::uint16_t id = field.label()[v];
        const double m = w[k] * field.sigma()[v];
        if (id == 0 || m <= 0.0)
            continue;
        int j = 0;
        while (j < n && ids[j] != id)
            ++j;
        if (j == n)
            ids[n++] = id;
        mass[j] += m;
    }
    std::uint16_t label = 0;
    double top = 0.0;
    for (int j = 0; j < n; ++j)
        if (mass[j] > top || (mass[j] == top && ids[j] < label)) {
            top = mass[j];
            label = ids[j];
        }
    return label;
}

LabelImage visibility_labels(const DensityField& field, const Camera& camera, int n_samples) {
    LabelImage out{camera.width, camera.height, std::vector<std::uint16_t>(camera.pixel_count(), 0)};
    for (int row = 0; row < camera.height; ++row)
        for (int col = 0; col < camera.width; ++col)
            out.labels[static_cast<std::size_t>(row) * camera.width + col] =
                visible_label(field, ray_for_pixel(camera, col, row), n_samples);
    return out;
}

Scene::Scene(DensityField field, std::vector<Camera> cameras, int gt_samples)
    : field_(std::move(field)), cameras_(std::move(cameras)), gt_samples_(gt_samples) {
    if (gt_samples_ < 1)
        throw InvalidArgument("gt_samples must be >= 1");
    std::set<int> ids;
    for (std::uint16_t l : field_.label().values())
        if (l != 0)
            ids.insert(l);
    object_ids_.assign(ids.begin(), ids.end());
    labels_.reserve(cameras_.size());
    for (const auto& cam : cameras_) {
        cam.validate();
        labels_.push_back(visibility_labels(field_, cam, gt_samples_));
    }
}

bool Scene::has_object(int id) const { return std::binary_search(object_ids_.begin(), object_ids_.end(), id); }

Bitmap2D Scene::gt_visibility(std::size_t view, int object_id) const {
    const LabelImage& li = labels_.at(view);
    Bitmap2D out(li.width, li.height);
    for (std::size_t i = 0; i < li.labels.size(); ++i)
        out.bits[i] = li.labels[i] == object_id ? 1 : 0;
    return out;
}

std::vector<std::size_t> Scene::gt_occupancy(int object_id) const {
    std::vector<std::size_t> out;
    const auto labels = field_.label().values();
    for (std::size_t v = 0; v < labels.size(); ++v)
        if (labels[v] == object_id)
            out.push_back(v);
    return out;
}

Scene build_scene(const SceneSpec& spec) { return Scene(voxelize(spec), make_cameras(spec), spec.gt_samples); }

OcclusionScene occlusion_scenario(const SceneSpec& spec, const BlockerParams& params) {
    spec.validate();
    if (!(params.fraction >= 0.0 && params.fraction <= 1.0))
        throw InvalidArgument("blocker fraction must lie in [0, 1]");
    if (!(params.thickness > 0.0) || !(params.gap >= 0.0))
        throw InvalidArgument("blocker thickness must be positive and gap non-negative");

    const Primitive* target = nullptr;
    int max_id = 0;
    for (const auto& p : spec.primitives) {
        max_id = std::max(max_id, p.object_id);
        if (p.object_id == params.target_id)
            target = &p;
    }
    if (target == nullptr)
        throw InvalidArgument("occlusion target id not present in the scene spec");

    OcclusionScene out;
    out.spec = spec;
    out.info.blocker_id = params.blocker_id > 0 ? params.blocker_id : max_id + 1;
    const auto cameras = make_cameras(spec);

    std::vector<Primitive> blockers;
    const double inner = target->bounding_radius() + params.gap;
    if (params.fraction >= 1.0) {
        Primitive box;
        box.shape = ShapeKind::box;
        box.center = target->center;
        box.half_extents = Vec3::Constant(inner + params.thickness);
        blockers.push_back(box);
    } else if (params.fraction > 0.0) {
        // Ring of yawed wall pieces centred on the azimuth opposite the first camera.
        const Vec3 to_cam0 = cameras.front().position() - target->center;
        const double phi0 = std::atan2(to_cam0.y(), to_cam0.x()) + std::numbers::pi;
        const double arc = params.fraction * 2.0 * std::numbers::pi;
        const int pieces = std::max(1, static_cast<int>(std::ceil(arc / (15.0 * kDegToRad))));
        const double step = arc / pieces;
        const double mid = inner + 0.5 * params.thickness;
        const double height = spec.bbox.extent().z();
        for (int i = 0; i < pieces; ++i) {
            const double phi = phi0 - 0.5 * arc + (i + 0.5) * step;
            Primitive wall;
            wall.shape = ShapeKind::box;
            wall.center = target->center + mid * Vec3(std::cos(phi), std::sin(phi), 0.0);
            // Tangential half width covers the piece's arc at the outer radius so neighbours overlap.
            wall.half_extents = Vec3(0.5 * params.thickness, (inner + params.thickness) * std::tan(0.5 * step), height);
            wall.yaw_deg = phi / kDegToRad;
            blockers.push_back(wall);
        }
    }
    for (auto& b : blockers) {
        b.object_id = out.info.blocker_id;
        b.sigma_inside = params.sigma_inside;
        b.falloff_voxels = 0.0;
        b.color = Vec3(0.35, 0.35, 0.35);
    }
    // Blockers go first so the target keeps its voxels wherever they overlap.
    out.spec.primitives.insert(out.spec.primitives.begin(), blockers.begin(), blockers.end());

    const Scene base = build_scene(spec);
    out.scene = build_scene(out.spec);
    std::size_t blocked = 0;
    for (std::size_t v = 0; v < cameras.size(); ++v) {
        bool hit = false;
        for (const auto& b : blockers)
            hit = hit || segment_hits_box(b, cameras[v].position(), target->center);
        out.info.blocked.push_back(hit);
        blocked += hit ? 1 : 0;
        out.info.visible_pixels.push_back(out.scene.gt_visibility(v, params.target_id).count());
        out.info.base_pixels.push_back(base.gt_visibility(v, params.target_id).count());
    }
    out.info.achieved_fraction = cameras.empty() ? 0.0 : static_cast<double>(blocked) / cameras.size();
    return out;
}

} // namespace masklift
