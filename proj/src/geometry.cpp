// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#include "masklift/geometry.hpp"

#include <Eigen/Geometry>

namespace masklift {

void BoundingBox::validate() const {
    if (!min_corner.allFinite() || !max_corner.allFinite())
        throw InvalidArgument("bounding box corners must be finite");
    if (!(max_corner.array() > min_corner.array()).all())
        throw InvalidArgument("bounding box max_corner must exceed min_corner componentwise");
}

double trilerp_sample(const ScalarGrid& grid, const Vec3& point) {
    CellCoord c;
    if (!grid.locate(point, c))
        return 0.0;
    return grid.interpolate(c);
}

Vec3 trilerp_sample(const ColorGrid& grid, const Vec3& point) {
    CellCoord c;
    if (!grid.locate(point, c))
        return Vec3::Zero();
    return grid.interpolate(c);
}

std::vector<VertexWeight> trilerp_weights(const ScalarGrid& grid, const Vec3& point) {
    std::vector<VertexWeight> out;
    CellCoord c;
    if (!grid.locate(point, c))
        return out;
    const auto offsets = grid.corner_offsets();
    const auto weights = corner_weights(c);
    out.reserve(8);
    for (int k = 0; k < 8; ++k)
        if (weights[k] > 0.0)
            out.push_back({c.base + offsets[k], weights[k]});
    return out;
}

void Camera::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
        throw InvalidArgument("camera focal lengths must be positive");
    if (width <= 0 || height <= 0)
        throw InvalidArgument("camera image size must be positive");
    if (!(t_near > 0.0) || !(t_far > t_near))
        throw InvalidArgument("camera bounds must satisfy 0 < t_near < t_far");
    const Mat3& r = pose.rotation;
    if (!r.allFinite() || !pose.translation.allFinite())
        throw InvalidArgument("camera pose must be finite");
    if (!(r.transpose() * r).isApprox(Mat3::Identity(), 1e-9) || r.determinant() < 0.0)
        throw InvalidArgument("camera rotation must be orthonormal and proper");
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy, double cx,
                       double cy, int width, int height, double t_near, double t_far) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-12)
        right = forward.unitOrthogonal();
    right.normalize();
    const Vec3 down = forward.cross(right);
    Camera cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = cx;
    cam.cy = cy;
    cam.pose.rotation.col(0) = right;
    cam.pose.rotation.col(1) = down;
    cam.pose.rotation.col(2) = forward;
    cam.pose.translation = eye;
    cam.width = width;
    cam.height = height;
    cam.t_near = t_near;
    cam.t_far = t_far;
    return cam;
}

Ray ray_for_pixel(const Camera& camera, double x, double y) {
    const Vec3 local((x - camera.cx) / camera.fx, (y - camera.cy) / camera.fy, 1.0);
    Ray ray;
    ray.origin = camera.pose.translation;
    ray.direction = (camera.pose.rotation * local).normalized();
    ray.t_near = camera.t_near;
    ray.t_far = camera.t_far;
    return ray;
}

Vec3 backproject(const Camera& camera, double x, double y, double depth) {
    if (!(depth > 0.0) || !std::isfinite(depth))
        throw InvalidArgument("backproject: depth must be positive and finite");
    const Vec3 local(depth * (x - camera.cx) / camera.fx, depth * (y - camera.cy) / camera.fy, depth);
    return camera.pose.apply(local);
}

Projection project(const Camera& camera, const Vec3& world) {
    const Vec3 local = camera.pose.apply_inverse(world);
    return {camera.fx * local.x() / local.z() + camera.cx, camera.fy * local.y() / local.z() + camera.cy, local.z()};
}

} // namespace masklift
