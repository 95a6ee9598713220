// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#include "masklift/image.hpp"

#include <algorithm>
#include <string>

namespace masklift {

std::size_t Bitmap2D::count() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

void require_same_dims(const Bitmap2D& a, const Bitmap2D& b, const char* what) {
    if (a.width != b.width || a.height != b.height)
        throw InvalidArgument(std::string(what) + ": mask dimensions differ");
}

} // namespace masklift
