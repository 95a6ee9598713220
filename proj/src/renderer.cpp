// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#include "masklift/renderer.hpp"

#include "masklift/inverse.hpp"

#include <cmath>

namespace masklift {

namespace {

void require_samples(int n_samples) {
    if (n_samples < 1)
        throw InvalidArgument("n_samples must be >= 1");
}

void require_matching_grid(const MaskGrid& mask, const DensityField& field) {
    const auto& g = mask.grid();
    if (!(g.dims() == field.dims()) || g.bbox().min_corner != field.bbox().min_corner ||
        g.bbox().max_corner != field.bbox().max_corner)
        throw InvalidArgument("mask grid must share dims and bbox with the density field");
}

// Walks the midpoint samples of a ray and invokes `visit(t, weight, cell)` for every sample with
// nonzero weight. Returns the accumulated coverage.
template <class Visit>
double march(const DensityField& field, const Ray& ray, int n_samples, Visit&& visit) {
    const double delta = (ray.t_far - ray.t_near) / n_samples;
    double transmittance = 1.0;
    double coverage = 0.0;
    CellCoord cell;
    for (int i = 0; i < n_samples; ++i) {
        const double t = ray.t_near + (i + 0.5) * delta;
        bool inside = false;
        const double sigma = field.density(ray.at(t), cell, inside);
        if (sigma <= 0.0)
            continue;
        const double alpha = -std::expm1(-sigma * delta);
        const double w = transmittance * alpha;
        transmittance *= 1.0 - alpha;
        if (w > 0.0) {
            coverage += w;
            visit(t, w, cell);
        }
        if (transmittance == 0.0)
            break;
    }
    return coverage;
}

} // namespace

DensityField::DensityField(ScalarGrid sigma, ColorGrid color, LabelGrid label)
    : sigma_(std::move(sigma)), color_(std::move(color)), label_(std::move(label)) {
    const auto same = [&](const auto& g) {
        return g.dims() == sigma_.dims() && g.bbox().min_corner == sigma_.bbox().min_corner &&
               g.bbox().max_corner == sigma_.bbox().max_corner;
    };
    if (!same(color_) || !same(label_))
        throw InvalidArgument("density field grids must share dims and bbox");
    for (double s : sigma_.values())
        if (!(s >= 0.0) || !std::isfinite(s))
            throw InvalidArgument("density values must be finite and non-negative");

    const GridDims& d = sigma_.dims();
    empty_cell_.assign(d.count(), 1);
    const auto offsets = sigma_.corner_offsets();
    for (int iz = 0; iz + 1 < d.nz; ++iz)
        for (int iy = 0; iy + 1 < d.ny; ++iy)
            for (int ix = 0; ix + 1 < d.nx; ++ix) {
                const std::size_t base = d.index(ix, iy, iz);
                for (std::size_t off : offsets)
                    if (sigma_[base + off] > 0.0) {
                        empty_cell_[base] = 0;
                        break;
                    }
            }
}

double DensityField::density(const Vec3& p, CellCoord& cell, bool& inside) const {
    inside = sigma_.locate(p, cell);
    if (!inside || empty_cell_[cell.base])
        return 0.0;
    return sigma_.interpolate(cell);
}

double RaySamples::coverage() const {
    double s = 0.0;
    for (double w : weights)
        s += w;
    return s;
}

RaySamples compute_weights(const DensityField& field, const Ray& ray, int n_samples) {
    require_samples(n_samples);
    RaySamples out;
    out.delta = (ray.t_far - ray.t_near) / n_samples;
    out.t.resize(n_samples);
    out.alpha.resize(n_samples);
    out.weights.resize(n_samples);
    double transmittance = 1.0;
    CellCoord cell;
    for (int i = 0; i < n_samples; ++i) {
        const double t = ray.t_near + (i + 0.5) * out.delta;
        bool inside = false;
        const double sigma = field.density(ray.at(t), cell, inside);
        const double alpha = sigma > 0.0 ? -std::expm1(-sigma * out.delta) : 0.0;
        out.t[i] = t;
        out.alpha[i] = alpha;
        out.weights[i] = transmittance * alpha;
        transmittance *= 1.0 - alpha;
    }
    return out;
}

ColorSample render_color(const DensityField& field, const Ray& ray, int n_samples) {
    require_samples(n_samples);
    ColorSample out;
    out.coverage = march(field, ray, n_samples, [&](double, double w, const CellCoord& cell) {
        out.rgb += w * field.color().interpolate(cell);
    });
    return out;
}

DepthSample render_depth(const DensityField& field, const Ray& ray, int n_samples) {
    require_samples(n_samples);
    double weighted_t = 0.0;
    DepthSample out;
    out.coverage = march(field, ray, n_samples, [&](double t, double w, const CellCoord&) { weighted_t += w * t; });
    out.background = out.coverage < kCoverageFloor;
    out.depth = out.background ? ray.t_far : weighted_t / std::max(out.coverage, 1e-8);
    return out;
}

double render_mask(const MaskGrid& mask, const DensityField& field, const Ray& ray, int n_samples) {
    require_samples(n_samples);
    require_matching_grid(mask, field);
    double score = 0.0;
    march(field, ray, n_samples,
          [&](double, double w, const CellCoord& cell) { score += w * mask.grid().interpolate(cell); });
    return score;
}

ScoreMap2D::ScoreMap2D(int w, int h)
    : width(w), height(h), scores(static_cast<std::size_t>(w) * h, 0.0),
      depth(static_cast<std::size_t>(w) * h, 0.0), coverage(static_cast<std::size_t>(w) * h, 0.0) {}

Bitmap2D ScoreMap2D::binarize() const {
    Bitmap2D out(width, height);
    for (std::size_t i = 0; i < scores.size(); ++i)
        out.bits[i] = (scores[i] > 0.0 && !background(i)) ? 1 : 0;
    return out;
}

ViewSamples trace_view(const DensityField& field, const Camera& camera, int n_samples) {
    require_samples(n_samples);
    camera.validate();
    ViewSamples view;
    view.width = camera.width;
    view.height = camera.height;
    const std::size_t n_pix = camera.pixel_count();
    view.offsets.reserve(n_pix + 1);
    view.depth.resize(n_pix);
    view.coverage.resize(n_pix);
    view.offsets.push_back(0);
    for (int row = 0; row < camera.height; ++row)
        for (int col = 0; col < camera.width; ++col) {
            const Ray ray = ray_for_pixel(camera, col, row);
            double weighted_t = 0.0;
            const double coverage = march(field, ray, n_samples, [&](double t, double w, const CellCoord& cell) {
                view.cells.push_back(cell);
                view.t.push_back(t);
                view.weights.push_back(w);
                weighted_t += w * t;
            });
            const std::size_t p = static_cast<std::size_t>(row) * camera.width + col;
            view.coverage[p] = coverage;
            view.depth[p] = coverage < kCoverageFloor ? ray.t_far : weighted_t / std::max(coverage, 1e-8);
            view.offsets.push_back(static_cast<std::uint32_t>(view.weights.size()));
        }
    return view;
}

ScoreMap2D render_scores(const ViewSamples& view, const MaskGrid& mask) {
    ScoreMap2D out(view.width, view.height);
    const ScalarGrid& grid = mask.grid();
    for (std::size_t p = 0; p < view.pixel_count(); ++p) {
        double score = 0.0;
        for (std::uint32_t s = view.offsets[p]; s < view.offsets[p + 1]; ++s)
            score += view.weights[s] * grid.interpolate(view.cells[s]);
        out.scores[p] = score;
    }
    out.depth = view.depth;
    out.coverage = view.coverage;
    return out;
}

RgbImage render_rgb(const ViewSamples& view, const DensityField& field) {
    RgbImage out(view.width, view.height);
    for (std::size_t p = 0; p < view.pixel_count(); ++p) {
        Vec3 rgb = Vec3::Zero();
        for (std::uint32_t s = view.offsets[p]; s < view.offsets[p + 1]; ++s)
            rgb += view.weights[s] * field.color().interpolate(view.cells[s]);
        out.pixels[p] = rgb;
    }
    return out;
}

RenderedView render_view(const DensityField& field, const MaskGrid& mask, const Camera& camera, int n_samples) {
    require_matching_grid(mask, field);
    const ViewSamples view = trace_view(field, camera, n_samples);
    return {render_rgb(view, field), render_scores(view, mask)};
}

SampleCache::SampleCache(const DensityField& field, std::vector<Camera> cameras, int n_samples)
    : field_(&field), cameras_(std::move(cameras)), n_samples_(n_samples), views_(cameras_.size()) {
    require_samples(n_samples);
}

const ViewSamples& SampleCache::view(std::size_t index) {
    auto& slot = views_.at(index);
    if (!slot)
        slot = std::make_unique<ViewSamples>(trace_view(*field_, cameras_[index], n_samples_));
    return *slot;
}

} // namespace masklift
