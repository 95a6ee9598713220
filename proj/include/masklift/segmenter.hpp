// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "masklift/image.hpp"
#include "masklift/prompter.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace masklift {

class Scene;

struct PixelBox {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct SegmenterQuery {
    int view = -1; // camera index, used by backends that look masks up per view
    int width = 0, height = 0;
    RgbImage image; // may be empty for backends that do not look at pixels
    PromptSet prompts;
    std::optional<PixelBox> box;

    /// Requires at least one positive prompt or a box, and every prompt inside the image.
    void validate() const;
};

class SegmenterError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class SegmenterTimeout : public SegmenterError {
  public:
    using SegmenterError::SegmenterError;
};
class MalformedResponse : public SegmenterError {
  public:
    using SegmenterError::SegmenterError;
};
class DimensionMismatch : public SegmenterError {
  public:
    using SegmenterError::SegmenterError;
};
class MissingMask : public SegmenterError {
  public:
    using SegmenterError::SegmenterError;
};
class TransportError : public SegmenterError {
  public:
    using SegmenterError::SegmenterError;
};

/// A promptable 2D segmenter: (image, prompts) -> binary mask.
class Segmenter {
  public:
    virtual ~Segmenter() = default;
    virtual Bitmap2D segment(const SegmenterQuery& query) = 0;
    /// Whether queries must carry the rendered color image.
    virtual bool needs_image() const { return false; }
};

struct OracleNoise {
    int dilate_erode = 0; // > 0 dilates, < 0 erodes, by this many pixels (square structuring element)
    double flip_rate = 0.0;
    double failure_rate = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Dilation (radius > 0) or erosion (radius < 0) with a (2|r|+1)^2 square.
Bitmap2D morph_square(const Bitmap2D& mask, int radius);

/// Ground-truth stand-in for a learned segmenter. Returns the visibility mask of the object under the first
/// positive prompt, then corrupts it: dilate/erode, random pixel flips, and with probability failure_rate a
/// half-plane mask unrelated to the object. Noise for the k-th query of a view is drawn from a stream
/// seeded by (seed, view, k), so runs are reproducible regardless of which other views were queried.
class OracleSegmenter : public Segmenter {
  public:
    OracleSegmenter(const Scene& scene, OracleNoise noise = {});
    Bitmap2D segment(const SegmenterQuery& query) override;

    /// Noise-free lookup: GT mask of the prompted object, or empty on background / contradictory prompts.
    Bitmap2D lookup(const SegmenterQuery& query) const;

  private:
    const Scene* scene_;
    OracleNoise noise_;
    std::map<int, std::uint64_t> calls_per_view_;
};

/// Serves masks recorded earlier, one PGM per view.
class ReplaySegmenter : public Segmenter {
  public:
    explicit ReplaySegmenter(std::filesystem::path directory);
    Bitmap2D segment(const SegmenterQuery& query) override;
    static std::filesystem::path mask_path(const std::filesystem::path& directory, int view);

  private:
    std::filesystem::path directory_;
};

/// Run-length encoding "value:count,value:count,..." over row-major pixels.
std::string encode_rle(const Bitmap2D& mask);
Bitmap2D decode_rle(const std::string& rle, int width, int height);

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

/// JSON request body for POST /segment.
nlohmann::json make_remote_request(const SegmenterQuery& query);
/// Decodes and dimension-checks a response body; throws MalformedResponse / DimensionMismatch.
Bitmap2D parse_remote_response(const std::string& body, int width, int height);

/// HTTP client for an external segmentation service.
class RemoteSegmenter : public Segmenter {
  public:
    explicit RemoteSegmenter(std::string base_url, std::chrono::milliseconds timeout = std::chrono::seconds(30));
    Bitmap2D segment(const SegmenterQuery& query) override;
    bool needs_image() const override { return true; }

  private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

} // namespace masklift
