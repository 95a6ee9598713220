// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "masklift/geometry.hpp"
#include "masklift/image.hpp"
#include "masklift/renderer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace masklift {

enum class ShapeKind { sphere, box, torus };

struct Primitive {
    ShapeKind shape = ShapeKind::sphere;
    Vec3 center = Vec3::Zero();
    double radius = 0.25;                  // sphere
    Vec3 half_extents = Vec3::Constant(0.25); // box
    double yaw_deg = 0.0;                  // box rotation about +z
    double major_radius = 0.3;             // torus
    double minor_radius = 0.1;             // torus
    Vec3 axis = Vec3::UnitZ();             // torus symmetry axis
    double sigma_inside = 40.0;
    Vec3 color = Vec3(0.8, 0.8, 0.8);
    int object_id = 1;
    double falloff_voxels = 1.5;

    void validate() const;
    /// Euclidean signed distance: negative inside, positive outside.
    double signed_distance(const Vec3& p) const;
    /// Radius of a sphere around `center` that contains the shape.
    double bounding_radius() const;
};

struct OrbitTrajectory {
    Vec3 center = Vec3::Zero();
    double radius = 3.0;
    double elevation_deg = 25.0;
    int n_views = 40;
    double azimuth_offset_deg = 0.0;
};

struct ForwardFacingTrajectory {
    Vec3 base_position = Vec3(0.0, 0.0, -3.0);
    double jitter = 0.15; // max per-axis offset of the camera center, world units
    int n_views = 12;
};

using Trajectory = std::variant<OrbitTrajectory, ForwardFacingTrajectory>;

struct SceneSpec {
    GridDims dims{64, 64, 64};
    BoundingBox bbox{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
    std::vector<Primitive> primitives; // later entries win overlaps
    Trajectory trajectory = OrbitTrajectory{};
    int image_width = 96, image_height = 96;
    double fov_deg = 40.0;            // used when fx is not given
    std::optional<double> fx, fy, cx, cy;
    std::optional<double> t_near, t_far;
    std::uint64_t seed = 0;
    int gt_samples = kDefaultSamples; // samples per ray for ground-truth visibility

    void validate() const;
};

/// Per-pixel object id of the visible surface (0 = background).
struct LabelImage {
    int width = 0, height = 0;
    std::vector<std::uint16_t> labels;
};

/// Ground-truth visible object of one ray. Takes the sample with the largest rendering weight and returns the
/// object whose labeled vertices supply most of that sample's interpolated density (ties to the smaller
/// id), or 0 when the ray's coverage is below kCoverageFloor.
std::uint16_t visible_label(const DensityField& field, const Ray& ray, int n_samples);
LabelImage visibility_labels(const DensityField& field, const Camera& camera, int n_samples);

class Scene {
  public:
    Scene() = default;
    Scene(DensityField field, std::vector<Camera> cameras, int gt_samples = kDefaultSamples);

    const DensityField& field() const { return field_; }
    const std::vector<Camera>& cameras() const { return cameras_; }
    const Camera& camera(std::size_t i) const { return cameras_.at(i); }
    std::size_t view_count() const { return cameras_.size(); }
    int gt_samples() const { return gt_samples_; }

    /// Object ids present in the label grid, ascending.
    const std::vector<int>& object_ids() const { return object_ids_; }
    bool has_object(int id) const;

    const LabelImage& label_image(std::size_t view) const { return labels_.at(view); }
    Bitmap2D gt_visibility(std::size_t view, int object_id) const;
    /// Vertices labeled with `object_id`, ascending.
    std::vector<std::size_t> gt_occupancy(int object_id) const;

  private:
    DensityField field_;
    std::vector<Camera> cameras_;
    int gt_samples_ = kDefaultSamples;
    std::vector<LabelImage> labels_;
    std::vector<int> object_ids_;
};

/// Voxelizes the primitives and generates the camera trajectory.
DensityField voxelize(const SceneSpec& spec);
std::vector<Camera> make_cameras(const SceneSpec& spec);
Scene build_scene(const SceneSpec& spec);

struct BlockerParams {
    int target_id = 1;
    double fraction = 0.5;     // share of the orbit (by azimuth) hidden behind the blocker
    double thickness = 0.08;   // wall thickness, world units
    double gap = 0.08;         // clearance between target and blocker
    double sigma_inside = 400.0;
    int blocker_id = 0;        // 0 picks max(existing ids) + 1
};

struct OcclusionInfo {
    std::vector<bool> blocked;                // per camera: centre-of-target sight line hits the blocker
    std::vector<std::size_t> visible_pixels;  // per camera: target pixels visible with the blocker
    std::vector<std::size_t> base_pixels;     // per camera: target pixels visible without it
    double achieved_fraction = 0.0;
    int blocker_id = 0;
};

struct OcclusionScene {
    Scene scene;
    SceneSpec spec;
    OcclusionInfo info;
};

/// Adds an opaque blocker around or beside the target. fraction 0 leaves the scene unchanged, fraction 1
/// encloses the target in a solid box (the target keeps its own voxels), anything in between builds a
/// curved wall of yawed boxes around the target covering that share of azimuths, centred opposite the
/// first camera. All wall pieces share one object id.
OcclusionScene occlusion_scenario(const SceneSpec& spec, const BlockerParams& params);

} // namespace masklift
