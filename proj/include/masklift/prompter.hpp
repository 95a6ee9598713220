// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "masklift/geometry.hpp"
#include "masklift/image.hpp"
#include "masklift/renderer.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace masklift {

enum class PromptLabel : int { negative = 0, positive = 1 };

struct PromptPoint {
    int x = 0, y = 0; // pixel column and row
    PromptLabel label = PromptLabel::positive;
    std::optional<Vec3> world; // 3D lift of the pixel center, when depth is known
    double score = 0.0;        // rendered score at selection time

    bool positive() const { return label == PromptLabel::positive; }
};

struct PromptSet {
    std::vector<PromptPoint> points;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
    std::size_t count(PromptLabel label) const;
    const PromptPoint* first_positive() const;
};

/// Population over which each prompt's world distances are min-max normalized.
enum class DistanceNormalization {
    surviving_candidates, // per selected prompt, over the candidates still eligible
    image,                // per selected prompt, over every foreground-depth pixel of the view
};

struct PromptOptions {
    int n_p = 3;
    bool decay = true;
    DistanceNormalization normalization = DistanceNormalization::surviving_candidates;
};

/// Side of the square masked out around every selected prompt: round(sqrt(A / pi)) where A is the
/// number of pixels with positive score. 0 when nothing scores positive.
int exclusion_side(const ScoreMap2D& scores);

/// Inclusive pixel offsets [lo, hi] covered by an exclusion square of side `side` centered on a prompt.
inline std::pair<int, int> exclusion_span(int side) { return {-(side / 2), (side + 1) / 2 - 1}; }

/// Cross-view self-prompting. Picks the argmax of the rendered scores, then repeatedly masks out a square
/// around each chosen prompt and takes the best remaining pixel under the distance-decayed score
///   M~(p) = M(p) - min_q M(q) * d(G(p), G(q)),
/// stopping at n_p prompts or when the best decayed score is negative. All returned prompts are positive.
/// Pixels flagged as background by the renderer are never selected.
PromptSet select_prompts(const ScoreMap2D& scores, const Camera& camera, const PromptOptions& options);

/// World point of a pixel center given the rendered ray distance (converted to camera z-depth).
Vec3 lift_pixel(const Camera& camera, int col, int row, double ray_distance);

/// Zhang-Suen thinning to unit-width curves.
Bitmap2D skeletonize(const Bitmap2D& mask);

struct ScribbleOptions {
    double pos_frac = 0.02;
    double neg_frac = 0.005;
    std::uint64_t seed = 0;
};

/// Number of points drawn from a skeleton of `pixels` pixels: ceil(frac * pixels), capped at pixels.
std::size_t scribble_sample_count(double frac, std::size_t pixels);

/// Samples positive prompts from the skeleton of `pos` and negative prompts from the skeleton of `neg`.
PromptSet scribbles_to_prompts(const Bitmap2D& pos, const Bitmap2D& neg, const ScribbleOptions& options = {});

} // namespace masklift
