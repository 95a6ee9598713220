// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#include "masklift/prompter.hpp"

#include "masklift/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace masklift {

std::size_t PromptSet::count(PromptLabel label) const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [&](const PromptPoint& p) { return p.label == label; }));
}

const PromptPoint* PromptSet::first_positive() const {
    for (const auto& p : points)
        if (p.positive())
            return &p;
    return nullptr;
}

int exclusion_side(const ScoreMap2D& scores) {
    const auto area = std::count_if(scores.scores.begin(), scores.scores.end(), [](double s) { return s > 0.0; });
    if (area == 0)
        return 0;
    return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(area) / std::numbers::pi))));
}

Vec3 lift_pixel(const Camera& camera, int col, int row, double ray_distance) {
    const auto [x, y] = pixel_center(col, row);
    const Vec3 local((x - camera.cx) / camera.fx, (y - camera.cy) / camera.fy, 1.0);
    return backproject(camera, x, y, ray_distance / local.norm());
}

PromptSet select_prompts(const ScoreMap2D& scores, const Camera& camera, const PromptOptions& options) {
    if (options.n_p < 1)
        throw InvalidArgument("n_p must be >= 1");
    if (scores.width != camera.width || scores.height != camera.height)
        throw InvalidArgument("score map does not match the camera image size");

    PromptSet out;
    const int side = exclusion_side(scores);
    if (side == 0)
        return out;

    const int w = scores.width, h = scores.height;
    const std::size_t n = scores.size();
    // eligible: positive score, meaningful depth, not yet masked out.
    std::vector<std::uint8_t> eligible(n, 0);
    std::vector<std::uint8_t> has_depth(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
        has_depth[p] = scores.background(p) ? 0 : 1;
        eligible[p] = (has_depth[p] && scores.scores[p] > 0.0) ? 1 : 0;
    }

    std::vector<Vec3> world;
    if (options.decay) {
        world.resize(n, Vec3::Zero());
        for (std::size_t p = 0; p < n; ++p)
            if (has_depth[p])
                world[p] = lift_pixel(camera, static_cast<int>(p % w), static_cast<int>(p / w), scores.depth[p]);
    }

    const auto [lo, hi] = exclusion_span(side);
    const auto mask_out = [&](int px, int py) {
        for (int y = std::max(0, py + lo); y <= std::min(h - 1, py + hi); ++y)
            for (int x = std::max(0, px + lo); x <= std::min(w - 1, px + hi); ++x)
                eligible[static_cast<std::size_t>(y) * w + x] = 0;
    };

    std::vector<double> decay(n, 0.0);
    std::vector<double> dist(n, 0.0);
    std::vector<std::size_t> chosen;

    while (static_cast<int>(chosen.size()) < options.n_p) {
        if (options.decay && !chosen.empty()) {
            std::fill(decay.begin(), decay.end(), std::numeric_limits<double>::infinity());
            for (std::size_t q : chosen) {
                double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
                for (std::size_t p = 0; p < n; ++p) {
                    const bool in_population =
                        options.normalization == DistanceNormalization::image ? has_depth[p] != 0 : eligible[p] != 0;
                    if (!in_population && !eligible[p])
                        continue;
                    dist[p] = (world[p] - world[q]).norm();
                    if (in_population) {
                        dmin = std::min(dmin, dist[p]);
                        dmax = std::max(dmax, dist[p]);
                    }
                }
                const double range = dmax - dmin;
                for (std::size_t p = 0; p < n; ++p) {
                    if (!eligible[p])
                        continue;
                    const double d = range > 0.0 ? std::clamp((dist[p] - dmin) / range, 0.0, 1.0) : 0.0;
                    decay[p] = std::min(decay[p], scores.scores[q] * d);
                }
            }
        }

        std::size_t best = n;
        double best_value = -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < n; ++p) {
            if (!eligible[p])
                continue;
            const double value = scores.scores[p] - ((options.decay && !chosen.empty()) ? decay[p] : 0.0);
            if (value > best_value) {
                best_value = value;
                best = p;
            }
        }
        if (best == n || best_value < 0.0)
            break;

        chosen.push_back(best);
        const int bx = static_cast<int>(best % w), by = static_cast<int>(best / w);
        PromptPoint prompt;
        prompt.x = bx;
        prompt.y = by;
        prompt.label = PromptLabel::positive;
        prompt.world = lift_pixel(camera, bx, by, scores.depth[best]);
        prompt.score = scores.scores[best];
        out.points.push_back(prompt);
        mask_out(bx, by);
    }
    return out;
}

Bitmap2D skeletonize(const Bitmap2D& mask) {
    Bitmap2D img = mask;
    for (auto& b : img.bits)
        b = b ? 1 : 0;
    const int w = img.width, h = img.height;
    const auto at = [&](int x, int y) -> int { return img.inside(x, y) ? img.bits[y * w + x] : 0; };

    std::vector<std::size_t> to_clear;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            to_clear.clear();
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (!at(x, y))
                        continue;
                    // Neighbours clockwise from north: P2..P9.
                    const int p[8] = {at(x, y - 1),     at(x + 1, y - 1), at(x + 1, y), at(x + 1, y + 1),
                                      at(x, y + 1),     at(x - 1, y + 1), at(x - 1, y), at(x - 1, y - 1)};
                    int neighbours = 0, transitions = 0;
                    for (int k = 0; k < 8; ++k) {
                        neighbours += p[k];
                        transitions += (p[k] == 0 && p[(k + 1) % 8] == 1) ? 1 : 0;
                    }
                    if (neighbours < 2 || neighbours > 6 || transitions != 1)
                        continue;
                    const bool ok = pass == 0 ? (p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0)
                                              : (p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0);
                    if (ok)
                        to_clear.push_back(static_cast<std::size_t>(y) * w + x);
                }
            for (std::size_t i : to_clear)
                img.bits[i] = 0;
            changed = changed || !to_clear.empty();
        }
    }
    return img;
}

std::size_t scribble_sample_count(double frac, std::size_t pixels) {
    if (!(frac > 0.0) || frac > 1.0)
        throw InvalidArgument("scribble sampling fraction must lie in (0, 1]");
    // Guard against products like 0.02 * 150 landing a hair above an integer.
    const double exact = frac * static_cast<double>(pixels);
    auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
    return std::min(k, pixels);
}

namespace {

void sample_skeleton(const Bitmap2D& scribble, double frac, PromptLabel label, Rng& rng, PromptSet& out) {
    Bitmap2D skeleton = skeletonize(scribble);
    // Thinning can erase tiny blobs (e.g. 2x2 squares) entirely; keep their pixels in that case.
    if (skeleton.empty_mask())
        skeleton = scribble;
    std::vector<std::size_t> pixels;
    for (std::size_t i = 0; i < skeleton.size(); ++i)
        if (skeleton.bits[i])
            pixels.push_back(i);
    if (pixels.empty())
        return;
    const std::size_t k = scribble_sample_count(frac, pixels.size());
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pixels.size() - i));
        std::swap(pixels[i], pixels[j]);
    }
    std::sort(pixels.begin(), pixels.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t i = 0; i < k; ++i) {
        PromptPoint p;
        p.x = static_cast<int>(pixels[i] % skeleton.width);
        p.y = static_cast<int>(pixels[i] / skeleton.width);
        p.label = label;
        out.points.push_back(p);
    }
}

} // namespace

PromptSet scribbles_to_prompts(const Bitmap2D& pos, const Bitmap2D& neg, const ScribbleOptions& options) {
    if (pos.empty_mask())
        throw InvalidArgument("positive scribble is empty; a target is required");
    if (!neg.bits.empty())
        require_same_dims(pos, neg, "scribbles_to_prompts");
    // Validate both fractions up front, even if a scribble turns out empty.
    scribble_sample_count(options.pos_frac, 0);
    scribble_sample_count(options.neg_frac, 0);
    Rng rng(options.seed);
    PromptSet out;
    sample_skeleton(pos, options.pos_frac, PromptLabel::positive, rng, out);
    if (!neg.bits.empty())
        sample_skeleton(neg, options.neg_frac, PromptLabel::negative, rng, out);
    return out;
}

} // namespace masklift
