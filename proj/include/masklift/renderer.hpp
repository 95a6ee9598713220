// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "masklift/geometry.hpp"
#include "masklift/image.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace masklift {

/// Rays whose accumulated weight falls below this are treated as hitting empty space.
inline constexpr double kCoverageFloor = 0.05;
inline constexpr int kDefaultSamples = 192;

/// Explicit voxel radiance field: density, view-independent color and ground-truth object labels.
class DensityField {
  public:
    DensityField() = default;
    DensityField(ScalarGrid sigma, ColorGrid color, LabelGrid label);

    const ScalarGrid& sigma() const { return sigma_; }
    const ColorGrid& color() const { return color_; }
    const LabelGrid& label() const { return label_; }
    const GridDims& dims() const { return sigma_.dims(); }
    const BoundingBox& bbox() const { return sigma_.bbox(); }

    /// True when every corner of the cell starting at `base` has zero density.
    bool cell_empty(std::size_t base) const { return empty_cell_[base] != 0; }
    /// Density at a point, 0 outside the bbox. Writes the located cell when the point is inside.
    double density(const Vec3& p, CellCoord& cell, bool& inside) const;

  private:
    ScalarGrid sigma_;
    ColorGrid color_;
    LabelGrid label_;
    std::vector<std::uint8_t> empty_cell_;
};

struct RaySamples {
    std::vector<double> t;
    double delta = 0.0;
    std::vector<double> alpha;
    std::vector<double> weights;

    double coverage() const;
};

/// Midpoint-quadrature volume rendering weights: w_i = T_i * (1 - exp(-sigma_i * delta)).
RaySamples compute_weights(const DensityField& field, const Ray& ray, int n_samples);

struct ColorSample {
    Vec3 rgb = Vec3::Zero();
    double coverage = 0.0;
};
ColorSample render_color(const DensityField& field, const Ray& ray, int n_samples);

struct DepthSample {
    double depth = 0.0;
    double coverage = 0.0;
    bool background = true;
};
/// Coverage-normalized expected termination distance along the (unit-direction) ray.
DepthSample render_depth(const DensityField& field, const Ray& ray, int n_samples);

/// Rendered mask scores M(p) with per-pixel depth and coverage.
struct ScoreMap2D {
    int width = 0, height = 0;
    std::vector<double> scores;
    std::vector<double> depth;
    std::vector<double> coverage;

    ScoreMap2D() = default;
    ScoreMap2D(int w, int h);
    std::size_t size() const { return scores.size(); }
    bool background(std::size_t i) const { return coverage[i] < kCoverageFloor; }
    /// Foreground pixels are those with score > 0 that are not flagged as background.
    Bitmap2D binarize() const;
};

class MaskGrid;

/// M(r) = sum_i w_i * V(r(t_i)); weights come from the density field only.
double render_mask(const MaskGrid& mask, const DensityField& field, const Ray& ray, int n_samples);

/// Samples of one camera with nonzero rendering weight, grouped per pixel. The density field is fixed
/// during segmentation, so a traced view can be reused for every render and gradient of that camera.
struct ViewSamples {
    int width = 0, height = 0;
    std::vector<std::uint32_t> offsets; // pixel p owns [offsets[p], offsets[p+1])
    std::vector<CellCoord> cells;
    std::vector<double> t;
    std::vector<double> weights;
    std::vector<double> depth;    // per pixel, ray distance
    std::vector<double> coverage; // per pixel

    std::size_t pixel_count() const { return depth.size(); }
};

ViewSamples trace_view(const DensityField& field, const Camera& camera, int n_samples);

/// Scores, depth and coverage of a traced view under the given mask grid.
ScoreMap2D render_scores(const ViewSamples& view, const MaskGrid& mask);
RgbImage render_rgb(const ViewSamples& view, const DensityField& field);

struct RenderedView {
    RgbImage color;
    ScoreMap2D scores;
};
RenderedView render_view(const DensityField& field, const MaskGrid& mask, const Camera& camera, int n_samples);

/// Lazily traced views of a fixed set of cameras.
class SampleCache {
  public:
    SampleCache(const DensityField& field, std::vector<Camera> cameras, int n_samples);

    const ViewSamples& view(std::size_t index);
    const Camera& camera(std::size_t index) const { return cameras_.at(index); }
    std::size_t size() const { return cameras_.size(); }
    int n_samples() const { return n_samples_; }
    const DensityField& field() const { return *field_; }

  private:
    const DensityField* field_;
    std::vector<Camera> cameras_;
    int n_samples_;
    std::vector<std::unique_ptr<ViewSamples>> views_;
};

} // namespace masklift
