// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "masklift/engine.hpp"
#include "masklift/image.hpp"
#include "masklift/inverse.hpp"
#include "masklift/scene.hpp"
#include "masklift/segmenter.hpp"

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace masklift {

namespace fs = std::filesystem;

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& bytes);

// Binary PGM (P5), 255 = foreground. Any nonzero sample reads back as foreground.
std::string encode_pgm(const Bitmap2D& mask);
Bitmap2D decode_pgm(const std::string& bytes);
void write_pgm(const fs::path& path, const Bitmap2D& mask);
Bitmap2D read_pgm(const fs::path& path);

// Binary PPM (P6), channels quantized with round(clamp(v, 0, 1) * 255).
std::string encode_ppm(const RgbImage& image);
RgbImage decode_ppm(const std::string& bytes);
void write_ppm(const fs::path& path, const RgbImage& image);

/// Single-channel little-endian PFM ("Pf", scale -1). Rows are stored bottom-to-top as the format prescribes.
struct FloatImage {
    int width = 0, height = 0;
    std::vector<float> values; // row-major, top row first
};
std::string encode_pfm(const FloatImage& image);
FloatImage decode_pfm(const std::string& bytes);
void write_pfm(const fs::path& path, const FloatImage& image);
FloatImage read_pfm(const fs::path& path);

// Raw little-endian arrays in the x-fastest vertex order.
std::string encode_f32(std::span<const double> values);
std::vector<double> decode_f32(const std::string& bytes);
std::string encode_u16(std::span<const std::uint16_t> values);
std::vector<std::uint16_t> decode_u16(const std::string& bytes);

/// float32 image of a mask grid. Nonzero values too small for float32 are stored as the smallest
/// subnormal of the same sign, so the foreground test V > 0 survives the round trip.
std::string encode_mask_grid(const MaskGrid& mask);
MaskGrid decode_mask_grid(const std::string& bytes, const GridDims& dims, const BoundingBox& bbox);
void save_mask_grid(const fs::path& path, const MaskGrid& mask);
MaskGrid load_mask_grid(const fs::path& path, const GridDims& dims, const BoundingBox& bbox);

// Scene directory: meta.json, sigma.f32, color.f32, label.u16 (+ spec.json when built from a spec).
void save_scene(const fs::path& dir, const Scene& scene, const SceneSpec* spec = nullptr);
Scene load_scene(const fs::path& dir);

// JSON conversions.
nlohmann::json to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Camera& camera);
Camera camera_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PromptSet& prompts);
PromptSet prompt_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EngineConfig& cfg);
/// Fields missing from `j` keep the values already in `base`.
EngineConfig engine_config_from_json(const nlohmann::json& j, EngineConfig base = {});
nlohmann::json to_json(const OracleNoise& noise);
OracleNoise oracle_noise_from_json(const nlohmann::json& j, OracleNoise base = {});
/// Run records omit wall-clock time unless asked, so that repeated runs serialize identically.
nlohmann::json to_json(const RunRecord& record, bool include_timing = false);
RunRecord run_record_from_json(const nlohmann::json& j);

nlohmann::json read_json(const fs::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const fs::path& path, const nlohmann::json& j);

} // namespace masklift
