// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "masklift/geometry.hpp"
#include "masklift/image.hpp"
#include "masklift/renderer.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace masklift {

/// The 3D soft mask V. Zero means "no evidence"; foreground is the strict test V > 0.
class MaskGrid {
  public:
    MaskGrid() = default;
    explicit MaskGrid(ScalarGrid grid);
    static MaskGrid zeros_like(const DensityField& field);

    const ScalarGrid& grid() const { return grid_; }
    ScalarGrid& grid() { return grid_; }
    std::span<const double> values() const { return grid_.values(); }
    std::span<double> values() { return grid_.values(); }
    std::size_t size() const { return grid_.size(); }
    bool foreground(std::size_t vertex) const { return grid_[vertex] > 0.0; }
    void reset() { std::fill(grid_.storage().begin(), grid_.storage().end(), 0.0); }

    friend bool operator==(const MaskGrid& a, const MaskGrid& b) { return a.grid_.storage() == b.grid_.storage(); }

  private:
    ScalarGrid grid_;
};

struct LossConfig {
    double lambda = 0.15;
    double eta = 10.0;
    int steps_per_view = 1;

    void validate() const;
};

/// Mean over pixels of -M_sam * M + lambda * (1 - M_sam) * M.
double projection_loss(const Bitmap2D& m_sam, const ScoreMap2D& rendered, double lambda);

/// dL/dV for one view, computed by scattering each pixel's loss derivative through its sample weights
/// and trilinear stencils. Accumulation runs in pixel order, so the result is reproducible bit for bit.
std::vector<double> grid_gradient(const Bitmap2D& m_sam, const ViewSamples& view, const MaskGrid& mask,
                                  double lambda);
std::vector<double> grid_gradient(const Bitmap2D& m_sam, const Camera& camera, const DensityField& field,
                                  const MaskGrid& mask, double lambda, int n_samples);

/// V <- V - eta * grad. Throws on non-finite gradients.
void update_mask_grid(MaskGrid& mask, std::span<const double> gradient, double eta);

/// Runs loss.steps_per_view descent steps of one view against m_sam. Returns the loss before the first step.
double inverse_render_view(MaskGrid& mask, const Bitmap2D& m_sam, const ViewSamples& view, const LossConfig& loss);

} // namespace masklift
