// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#include "masklift/inverse.hpp"

#include <cmath>
#include <stdexcept>

namespace masklift {

MaskGrid::MaskGrid(ScalarGrid grid) : grid_(std::move(grid)) {
    for (double v : grid_.values())
        if (!std::isfinite(v))
            throw InvalidArgument("mask grid values must be finite");
}

MaskGrid MaskGrid::zeros_like(const DensityField& field) {
    return MaskGrid(ScalarGrid(field.dims(), field.bbox(), 0.0));
}

void LossConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InvalidArgument("lambda must be >= 0");
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw InvalidArgument("eta must be > 0");
    if (steps_per_view < 1)
        throw InvalidArgument("steps_per_view must be >= 1");
}

namespace {

void require_dims(const Bitmap2D& m_sam, int width, int height) {
    if (m_sam.width != width || m_sam.height != height)
        throw InvalidArgument("segmenter mask and rendered mask dimensions differ");
}

// Derivative of the per-pixel loss term with respect to the rendered score.
double pixel_slope(bool foreground, double lambda) { return foreground ? -1.0 : lambda; }

} // namespace

double projection_loss(const Bitmap2D& m_sam, const ScoreMap2D& rendered, double lambda) {
    require_dims(m_sam, rendered.width, rendered.height);
    if (rendered.size() == 0)
        return 0.0;
    double total = 0.0;
    for (std::size_t p = 0; p < rendered.size(); ++p)
        total += pixel_slope(m_sam.bits[p] != 0, lambda) * rendered.scores[p];
    return total / static_cast<double>(rendered.size());
}

std::vector<double> grid_gradient(const Bitmap2D& m_sam, const ViewSamples& view, const MaskGrid& mask,
                                  double lambda) {
    require_dims(m_sam, view.width, view.height);
    std::vector<double> grad(mask.size(), 0.0);
    const std::size_t n_pix = view.pixel_count();
    if (n_pix == 0)
        return grad;
    const double inv_count = 1.0 / static_cast<double>(n_pix);
    const auto offsets = mask.grid().corner_offsets();
    for (std::size_t p = 0; p < n_pix; ++p) {
        const double g = pixel_slope(m_sam.bits[p] != 0, lambda) * inv_count;
        if (g == 0.0)
            continue;
        for (std::uint32_t s = view.offsets[p]; s < view.offsets[p + 1]; ++s) {
            const CellCoord& cell = view.cells[s];
            const double gw = g * view.weights[s];
            const auto beta = corner_weights(cell);
            for (int k = 0; k < 8; ++k)
                grad[cell.base + offsets[k]] += gw * beta[k];
        }
    }
    return grad;
}

std::vector<double> grid_gradient(const Bitmap2D& m_sam, const Camera& camera, const DensityField& field,
                                  const MaskGrid& mask, double lambda, int n_samples) {
    return grid_gradient(m_sam, trace_view(field, camera, n_samples), mask, lambda);
}

void update_mask_grid(MaskGrid& mask, std::span<const double> gradient, double eta) {
    if (gradient.size() != mask.size())
        throw InvalidArgument("gradient size does not match the mask grid");
    for (double g : gradient)
        if (!std::isfinite(g))
            throw InvalidArgument("gradient contains non-finite values");
    auto values = mask.values();
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] -= eta * gradient[i];
}

double inverse_render_view(MaskGrid& mask, const Bitmap2D& m_sam, const ViewSamples& view, const LossConfig& loss) {
    loss.validate();
    const double before = projection_loss(m_sam, render_scores(view, mask), loss.lambda);
    // The loss is linear in V, so the gradient of a fixed view does not change between steps.
    const std::vector<double> grad = grid_gradient(m_sam, view, mask, loss.lambda);
    for (int step = 0; step < loss.steps_per_view; ++step)
        update_mask_grid(mask, grad, loss.eta);
    return before;
}

} // namespace masklift
