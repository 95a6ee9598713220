// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace masklift {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Raised when an input violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct BoundingBox {
    Vec3 min_corner = Vec3::Zero();
    Vec3 max_corner = Vec3::Ones();

    void validate() const;
    bool contains(const Vec3& p) const {
        return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
    }
    Vec3 extent() const { return max_corner - min_corner; }
    Vec3 center() const { return 0.5 * (min_corner + max_corner); }
};

struct GridDims {
    int nx = 0, ny = 0, nz = 0;

    std::size_t count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
    /// Linear vertex index, x fastest: ix + L*(iy + W*iz).
    std::size_t index(int ix, int iy, int iz) const {
        return static_cast<std::size_t>(ix) +
               static_cast<std::size_t>(nx) * (static_cast<std::size_t>(iy) + static_cast<std::size_t>(ny) * iz);
    }
    std::array<int, 3> unravel(std::size_t idx) const {
        const int ix = static_cast<int>(idx % nx);
        idx /= nx;
        const int iy = static_cast<int>(idx % ny);
        return {ix, iy, static_cast<int>(idx / ny)};
    }
    friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// Location of a point inside the vertex lattice: the lower corner vertex of its cell plus
/// fractional offsets in [0,1] along each axis.
struct CellCoord {
    std::size_t base = 0;
    double fx = 0.0, fy = 0.0, fz = 0.0;
};

template <class T>
T zero_value() {
    if constexpr (std::is_arithmetic_v<T>)
        return T{0};
    else
        return T::Zero();
}

/// Vertex-centered grid over a bounding box. bbox.min maps to index 0 and bbox.max to dim-1.
template <class T>
class Grid {
  public:
    Grid() = default;
    Grid(GridDims dims, BoundingBox bbox, T fill = zero_value<T>())
        : dims_(dims), bbox_(std::move(bbox)), values_(dims.count(), fill) {
        if (dims.nx < 2 || dims.ny < 2 || dims.nz < 2)
            throw InvalidArgument("grid dims must be >= 2 along every axis");
        bbox_.validate();
        const Vec3 e = bbox_.extent();
        scale_ = Vec3((dims.nx - 1) / e.x(), (dims.ny - 1) / e.y(), (dims.nz - 1) / e.z());
    }

    const GridDims& dims() const { return dims_; }
    const BoundingBox& bbox() const { return bbox_; }
    std::size_t size() const { return values_.size(); }

    std::span<T> values() { return values_; }
    std::span<const T> values() const { return values_; }
    std::vector<T>& storage() { return values_; }
    const std::vector<T>& storage() const { return values_; }

    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }
    T& at(int ix, int iy, int iz) { return values_[dims_.index(ix, iy, iz)]; }
    const T& at(int ix, int iy, int iz) const { return values_[dims_.index(ix, iy, iz)]; }

    /// Continuous lattice coordinates of a world point.
    Vec3 to_lattice(const Vec3& p) const { return ((p - bbox_.min_corner).array() * scale_.array()).matrix(); }
    Vec3 vertex_position(int ix, int iy, int iz) const {
        return bbox_.min_corner + Vec3(ix / scale_.x(), iy / scale_.y(), iz / scale_.z());
    }
    Vec3 vertex_position(std::size_t idx) const {
        const auto [ix, iy, iz] = dims_.unravel(idx);
        return vertex_position(ix, iy, iz);
    }
    /// Voxel edge lengths in world units.
    Vec3 spacing() const { return scale_.cwiseInverse(); }

    /// Returns false for points outside the bbox.
    bool locate(const Vec3& p, CellCoord& out) const {
        const Vec3 g = to_lattice(p);
        const int lim[3] = {dims_.nx - 1, dims_.ny - 1, dims_.nz - 1};
        int base[3];
        double frac[3];
        for (int a = 0; a < 3; ++a) {
            const double c = g[a];
            if (!(c >= 0.0) || c > lim[a])
                return false;
            int i = static_cast<int>(c);
            if (i >= lim[a])
                i = lim[a] - 1;
            base[a] = i;
            frac[a] = c - i;
        }
        out.base = dims_.index(base[0], base[1], base[2]);
        out.fx = frac[0];
        out.fy = frac[1];
        out.fz = frac[2];
        return true;
    }

    /// Offsets of the 8 cell corners relative to CellCoord::base, in (dx,dy,dz) bit order.
    std::array<std::size_t, 8> corner_offsets() const {
        const std::size_t sx = 1, sy = static_cast<std::size_t>(dims_.nx), sz = sy * dims_.ny;
        return {0, sx, sy, sx + sy, sz, sz + sx, sz + sy, sz + sx + sy};
    }

    T interpolate(const CellCoord& c) const {
        const std::size_t sy = static_cast<std::size_t>(dims_.nx), sz = sy * dims_.ny;
        const T* v = values_.data() + c.base;
        const double gx = 1.0 - c.fx, gy = 1.0 - c.fy, gz = 1.0 - c.fz;
        const T c00 = v[0] * gx + v[1] * c.fx;
        const T c10 = v[sy] * gx + v[sy + 1] * c.fx;
        const T c01 = v[sz] * gx + v[sz + 1] * c.fx;
        const T c11 = v[sz + sy] * gx + v[sz + sy + 1] * c.fx;
        return (c00 * gy + c10 * c.fy) * gz + (c01 * gy + c11 * c.fy) * c.fz;
    }

  private:
    GridDims dims_{};
    BoundingBox bbox_{};
    Vec3 scale_ = Vec3::Ones();
    std::vector<T> values_;
};

using ScalarGrid = Grid<double>;
using ColorGrid = Grid<Vec3>;
using LabelGrid = Grid<std::uint16_t>;

/// Trilinear interpolation of vertex values; 0 outside the bbox.
double trilerp_sample(const ScalarGrid& grid, const Vec3& point);
Vec3 trilerp_sample(const ColorGrid& grid, const Vec3& point);

struct VertexWeight {
    std::size_t vertex;
    double weight;
};

/// Nonzero interpolation weights of the (at most 8) vertices enclosing `point`. Empty outside the bbox.
std::vector<VertexWeight> trilerp_weights(const ScalarGrid& grid, const Vec3& point);

/// Corner weights of a located cell, in corner_offsets() order (zeros included).
inline std::array<double, 8> corner_weights(const CellCoord& c) {
    const double gx = 1.0 - c.fx, gy = 1.0 - c.fy, gz = 1.0 - c.fz;
    return {gx * gy * gz,   c.fx * gy * gz,   gx * c.fy * gz,   c.fx * c.fy * gz,
            gx * gy * c.fz, c.fx * gy * c.fz, gx * c.fy * c.fz, c.fx * c.fy * c.fz};
}

struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Vec3 apply_inverse(const Vec3& p) const { return rotation.transpose() * (p - translation); }
};

/// Pinhole camera. Camera frame: +x right, +y down, +z along the viewing axis. Pixel (col, row) has its
/// center at (col + 0.5, row + 0.5); images are row-major with the origin at the top-left.
struct Camera {
    double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
    RigidTransform pose; // camera-to-world
    int width = 1, height = 1;
    double t_near = 0.1, t_far = 10.0;

    void validate() const;
    Vec3 position() const { return pose.translation; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }

    /// Camera looking from `eye` at `target`; `up` is the world up direction.
    static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy, double cx,
                          double cy, int width, int height, double t_near, double t_far);
};

struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();
    double t_near = 0.0, t_far = 1.0;

    Vec3 at(double t) const { return origin + t * direction; }
};

inline std::pair<double, double> pixel_center(int col, int row) { return {col + 0.5, row + 0.5}; }

Ray ray_for_pixel(const Camera& camera, double x, double y);
inline Ray ray_for_pixel(const Camera& camera, int col, int row) {
    const auto [x, y] = pixel_center(col, row);
    return ray_for_pixel(camera, x, y);
}

/// Lifts a pixel with camera-frame z-depth to world space: pose * (depth * K^-1 * (x, y, 1)).
Vec3 backproject(const Camera& camera, double x, double y, double depth);

struct Projection {
    double x = 0.0, y = 0.0, depth = 0.0;
};

/// Forward pinhole projection of a world point; depth is the camera-frame z.
Projection project(const Camera& camera, const Vec3& world);

} // namespace masklift
