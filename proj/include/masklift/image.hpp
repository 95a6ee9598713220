// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "masklift/geometry.hpp"

#include <cstdint>
#include <vector>

namespace masklift {

/// Binary mask, one byte per pixel (0 or 1), row-major.
struct Bitmap2D {
    int width = 0, height = 0;
    std::vector<std::uint8_t> bits;

    Bitmap2D() = default;
    Bitmap2D(int w, int h, bool fill = false) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t size() const { return bits.size(); }
    bool operator()(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    std::size_t count() const;
    bool empty_mask() const { return count() == 0; }
    friend bool operator==(const Bitmap2D&, const Bitmap2D&) = default;
};

/// Linear RGB image with channels in [0, 1].
struct RgbImage {
    int width = 0, height = 0;
    std::vector<Vec3> pixels;

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, Vec3::Zero()) {}
    bool empty() const { return pixels.empty(); }
};

void require_same_dims(const Bitmap2D& a, const Bitmap2D& b, const char* what);

} // namespace masklift
