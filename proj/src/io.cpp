// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#include "masklift/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace masklift {

using nlohmann::json;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw FormatError("short write to " + path.string());
}

namespace {

// Netpbm header: magic, then `count` whitespace-separated integers, '#' comments allowed, one whitespace
// byte before the raster. Returns the raster offset.
std::size_t parse_netpbm_header(const std::string& bytes, const char* magic, int* fields, int count) {
    if (bytes.size() < 2 || bytes.compare(0, 2, magic) != 0)
        throw FormatError(std::string("expected ") + magic + " header");
    std::size_t pos = 2;
    for (int k = 0; k < count; ++k) {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos])))
            ++pos;
        if (start == pos)
            throw FormatError("malformed netpbm header");
        fields[k] = std::stoi(bytes.substr(start, pos - start));
    }
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw FormatError("malformed netpbm header");
    return pos + 1;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k)
        out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + k])) << (8 * k);
    return v;
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }
float get_f32(const std::string& in, std::size_t pos) { return std::bit_cast<float>(get_u32(in, pos)); }

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw FormatError("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const char* shape_name(ShapeKind k) {
    switch (k) {
    case ShapeKind::sphere:
        return "sphere";
    case ShapeKind::box:
        return "box";
    case ShapeKind::torus:
        return "torus";
    }
    return "sphere";
}

ShapeKind shape_from(const std::string& s) {
    if (s == "sphere")
        return ShapeKind::sphere;
    if (s == "box")
        return ShapeKind::box;
    if (s == "torus")
        return ShapeKind::torus;
    throw FormatError("unknown primitive shape '" + s + "'");
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

} // namespace

std::string encode_pgm(const Bitmap2D& mask) {
    std::string out = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
    out.reserve(out.size() + mask.bits.size());
    for (std::uint8_t b : mask.bits)
        out.push_back(static_cast<char>(b ? 255 : 0));
    return out;
}

Bitmap2D decode_pgm(const std::string& bytes) {
    int f[3];
    const std::size_t off = parse_netpbm_header(bytes, "P5", f, 3);
    if (f[0] <= 0 || f[1] <= 0 || f[2] <= 0 || f[2] > 255)
        throw FormatError("unsupported PGM dimensions or maxval");
    Bitmap2D out(f[0], f[1]);
    if (bytes.size() - off < out.bits.size())
        throw FormatError("truncated PGM raster");
    for (std::size_t i = 0; i < out.bits.size(); ++i)
        out.bits[i] = bytes[off + i] != 0 ? 1 : 0;
    return out;
}

void write_pgm(const fs::path& path, const Bitmap2D& mask) { write_file(path, encode_pgm(mask)); }
Bitmap2D read_pgm(const fs::path& path) { return decode_pgm(read_file(path)); }

std::string encode_ppm(const RgbImage& image) {
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.reserve(out.size() + 3 * image.pixels.size());
    for (const Vec3& p : image.pixels)
        for (int c = 0; c < 3; ++c)
            out.push_back(static_cast<char>(std::lround(std::clamp(p[c], 0.0, 1.0) * 255.0)));
    return out;
}

RgbImage decode_ppm(const std::string& bytes) {
    int f[3];
    const std::size_t off = parse_netpbm_header(bytes, "P6", f, 3);
    if (f[0] <= 0 || f[1] <= 0 || f[2] != 255)
        throw FormatError("unsupported PPM dimensions or maxval");
    RgbImage out(f[0], f[1]);
    if (bytes.size() - off < 3 * out.pixels.size())
        throw FormatError("truncated PPM raster");
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        for (int c = 0; c < 3; ++c)
            out.pixels[i][c] = static_cast<unsigned char>(bytes[off + 3 * i + c]) / 255.0;
    return out;
}

void write_ppm(const fs::path& path, const RgbImage& image) { write_file(path, encode_ppm(image)); }

std::string encode_pfm(const FloatImage& image) {
    std::string out = "Pf\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n-1.0\n";
    for (int row = image.height - 1; row >= 0; --row)
        for (int col = 0; col < image.width; ++col)
            put_f32(out, image.values[static_cast<std::size_t>(row) * image.width + col]);
    return out;
}

FloatImage decode_pfm(const std::string& bytes) {
    if (bytes.size() < 3 || bytes.compare(0, 3, "Pf\n") != 0)
        throw FormatError("expected single-channel PFM");
    std::istringstream header(bytes.substr(3, 64));
    FloatImage out;
    double scale = 0.0;
    if (!(header >> out.width >> out.height >> scale) || out.width <= 0 || out.height <= 0)
        throw FormatError("malformed PFM header");
    if (scale >= 0.0)
        throw FormatError("big-endian PFM is not supported");
    // Header ends after the third newline.
    std::size_t off = 0;
    for (int nl = 0; nl < 3; ++nl) {
        off = bytes.find('\n', off);
        if (off == std::string::npos)
            throw FormatError("malformed PFM header");
        ++off;
    }
    const std::size_t n = static_cast<std::size_t>(out.width) * out.height;
    if (bytes.size() - off < 4 * n)
        throw FormatError("truncated PFM raster");
    out.values.resize(n);
    std::size_t pos = off;
    for (int row = out.height - 1; row >= 0; --row)
        for (int col = 0; col < out.width; ++col, pos += 4)
            out.values[static_cast<std::size_t>(row) * out.width + col] = get_f32(bytes, pos);
    return out;
}

void write_pfm(const fs::path& path, const FloatImage& image) { write_file(path, encode_pfm(image)); }
FloatImage read_pfm(const fs::path& path) { return decode_pfm(read_file(path)); }

std::string encode_f32(std::span<const double> values) {
    std::string out;
    out.reserve(4 * values.size());
    for (double v : values)
        put_f32(out, static_cast<float>(v));
    return out;
}

std::vector<double> decode_f32(const std::string& bytes) {
    if (bytes.size() % 4 != 0)
        throw FormatError("f32 array length is not a multiple of 4");
    std::vector<double> out(bytes.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = get_f32(bytes, 4 * i);
    return out;
}

std::string encode_u16(std::span<const std::uint16_t> values) {
    std::string out;
    out.reserve(2 * values.size());
    for (std::uint16_t v : values) {
        out.push_back(static_cast<char>(v & 0xFF));
        out.push_back(static_cast<char>(v >> 8));
    }
    return out;
}

std::vector<std::uint16_t> decode_u16(const std::string& bytes) {
    if (bytes.size() % 2 != 0)
        throw FormatError("u16 array length is not a multiple of 2");
    std::vector<std::uint16_t> out(bytes.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[2 * i]) |
                                            (static_cast<unsigned char>(bytes[2 * i + 1]) << 8));
    return out;
}

std::string encode_mask_grid(const MaskGrid& mask) {
    constexpr float tiny = std::numeric_limits<float>::denorm_min();
    std::string out;
    out.reserve(4 * mask.size());
    for (double v : mask.values()) {
        float f = static_cast<float>(v);
        if (f == 0.0f && v != 0.0)
            f = v > 0.0 ? tiny : -tiny;
        put_f32(out, f);
    }
    return out;
}

MaskGrid decode_mask_grid(const std::string& bytes, const GridDims& dims, const BoundingBox& bbox) {
    std::vector<double> values = decode_f32(bytes);
    if (values.size() != dims.count())
        throw FormatError("mask grid size does not match the scene dims");
    ScalarGrid grid(dims, bbox, 0.0);
    grid.storage() = std::move(values);
    return MaskGrid(std::move(grid));
}

void save_mask_grid(const fs::path& path, const MaskGrid& mask) { write_file(path, encode_mask_grid(mask)); }

MaskGrid load_mask_grid(const fs::path& path, const GridDims& dims, const BoundingBox& bbox) {
    return decode_mask_grid(read_file(path), dims, bbox);
}

json to_json(const Camera& c) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r)
        rows.push_back(json::array({c.pose.rotation(r, 0), c.pose.rotation(r, 1), c.pose.rotation(r, 2),
                                    c.pose.translation[r]}));
    return {{"fx", c.fx},         {"fy", c.fy},         {"cx", c.cx},         {"cy", c.cy},
            {"width", c.width},   {"height", c.height}, {"t_near", c.t_near}, {"t_far", c.t_far},
            {"c2w", rows}};
}

Camera camera_from_json(const json& j) {
    Camera c;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.t_near = j.at("t_near").get<double>();
    c.t_far = j.at("t_far").get<double>();
    const json& rows = j.at("c2w");
    if (!rows.is_array() || rows.size() != 3)
        throw FormatError("camera c2w must have 3 rows");
    for (int r = 0; r < 3; ++r) {
        if (!rows[r].is_array() || rows[r].size() != 4)
            throw FormatError("camera c2w rows must have 4 entries");
        for (int k = 0; k < 3; ++k)
            c.pose.rotation(r, k) = rows[r][k].get<double>();
        c.pose.translation[r] = rows[r][3].get<double>();
    }
    c.validate();
    return c;
}

void save_scene(const fs::path& dir, const Scene& scene, const SceneSpec* spec) {
    fs::create_directories(dir);
    const DensityField& f = scene.field();
    const GridDims& d = f.dims();
    json meta;
    meta["format"] = "masklift-scene";
    meta["version"] = 1;
    meta["dims"] = {d.nx, d.ny, d.nz};
    meta["bbox"] = {{"min", vec_json(f.bbox().min_corner)}, {"max", vec_json(f.bbox().max_corner)}};
    meta["gt_samples"] = scene.gt_samples();
    meta["objects"] = scene.object_ids();
    json cams = json::array();
    for (const auto& c : scene.cameras())
        cams.push_back(to_json(c));
    meta["cameras"] = cams;
    write_json(dir / "meta.json", meta);

    write_file(dir / "sigma.f32", encode_f32(f.sigma().values()));
    std::vector<double> rgb;
    rgb.reserve(3 * f.color().size());
    for (const Vec3& c : f.color().values())
        rgb.insert(rgb.end(), {c.x(), c.y(), c.z()});
    write_file(dir / "color.f32", encode_f32(rgb));
    write_file(dir / "label.u16", encode_u16(f.label().values()));
    if (spec != nullptr)
        write_json(dir / "spec.json", to_json(*spec));
}

Scene load_scene(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw FormatError("scene directory " + dir.string() + " does not exist");
    const json meta = read_json(dir / "meta.json");
    if (meta.value("format", "") != "masklift-scene")
        throw FormatError("meta.json is not a masklift scene");
    const auto dims_v = meta.at("dims").get<std::vector<int>>();
    if (dims_v.size() != 3)
        throw FormatError("meta.json dims must have 3 entries");
    const GridDims dims{dims_v[0], dims_v[1], dims_v[2]};
    const BoundingBox bbox{vec_from(meta.at("bbox").at("min")), vec_from(meta.at("bbox").at("max"))};

    ScalarGrid sigma(dims, bbox, 0.0);
    auto sv = decode_f32(read_file(dir / "sigma.f32"));
    if (sv.size() != dims.count())
        throw FormatError("sigma.f32 size does not match dims");
    sigma.storage() = std::move(sv);

    ColorGrid color(dims, bbox, Vec3::Zero());
    const auto cv = decode_f32(read_file(dir / "color.f32"));
    if (cv.size() != 3 * dims.count())
        throw FormatError("color.f32 size does not match dims");
    for (std::size_t i = 0; i < dims.count(); ++i)
        color[i] = Vec3(cv[3 * i], cv[3 * i + 1], cv[3 * i + 2]);

    LabelGrid label(dims, bbox, 0);
    auto lv = decode_u16(read_file(dir / "label.u16"));
    if (lv.size() != dims.count())
        throw FormatError("label.u16 size does not match dims");
    label.storage() = std::move(lv);

    std::vector<Camera> cameras;
    for (const auto& c : meta.at("cameras"))
        cameras.push_back(camera_from_json(c));
    return Scene(DensityField(std::move(sigma), std::move(color), std::move(label)), std::move(cameras),
                 meta.value("gt_samples", kDefaultSamples));
}

json to_json(const SceneSpec& spec) {
    json prims = json::array();
    for (const auto& p : spec.primitives) {
        json jp = {{"shape", shape_name(p.shape)},
                   {"center", vec_json(p.center)},
                   {"sigma_inside", p.sigma_inside},
                   {"color", vec_json(p.color)},
                   {"object_id", p.object_id},
                   {"falloff_voxels", p.falloff_voxels}};
        switch (p.shape) {
        case ShapeKind::sphere:
            jp["radius"] = p.radius;
            break;
        case ShapeKind::box:
            jp["half_extents"] = vec_json(p.half_extents);
            jp["yaw_deg"] = p.yaw_deg;
            break;
        case ShapeKind::torus:
            jp["major_radius"] = p.major_radius;
            jp["minor_radius"] = p.minor_radius;
            jp["axis"] = vec_json(p.axis);
            break;
        }
        prims.push_back(jp);
    }
    json traj;
    if (const auto* o = std::get_if<OrbitTrajectory>(&spec.trajectory)) {
        traj = {{"type", "orbit"},         {"center", vec_json(o->center)}, {"radius", o->radius},
                {"elevation_deg", o->elevation_deg}, {"n_views", o->n_views},
                {"azimuth_offset_deg", o->azimuth_offset_deg}};
    } else {
        const auto& f = std::get<ForwardFacingTrajectory>(spec.trajectory);
        traj = {{"type", "forward_facing"},
                {"base_position", vec_json(f.base_position)},
                {"jitter", f.jitter},
                {"n_views", f.n_views}};
    }
    json j = {{"dims", {spec.dims.nx, spec.dims.ny, spec.dims.nz}},
              {"bbox", {{"min", vec_json(spec.bbox.min_corner)}, {"max", vec_json(spec.bbox.max_corner)}}},
              {"primitives", prims},
              {"trajectory", traj},
              {"image", {{"width", spec.image_width}, {"height", spec.image_height}}},
              {"fov_deg", spec.fov_deg},
              {"seed", spec.seed},
              {"gt_samples", spec.gt_samples}};
    const auto put_opt = [&](const char* key, const std::optional<double>& v) {
        if (v)
            j[key] = *v;
    };
    put_opt("fx", spec.fx);
    put_opt("fy", spec.fy);
    put_opt("cx", spec.cx);
    put_opt("cy", spec.cy);
    put_opt("t_near", spec.t_near);
    put_opt("t_far", spec.t_far);
    return j;
}

SceneSpec scene_spec_from_json(const json& j) {
    SceneSpec spec;
    try {
        if (j.contains("dims")) {
            const auto d = j.at("dims").get<std::vector<int>>();
            if (d.size() != 3)
                throw FormatError("dims must have 3 entries");
            spec.dims = {d[0], d[1], d[2]};
        }
        if (j.contains("bbox"))
            spec.bbox = {vec_from(j.at("bbox").at("min")), vec_from(j.at("bbox").at("max"))};
        for (const auto& jp : j.value("primitives", json::array())) {
            Primitive p;
            p.shape = shape_from(jp.at("shape").get<std::string>());
            p.center = vec_from(jp.at("center"));
            read_opt(jp, "radius", p.radius);
            if (jp.contains("half_extents"))
                p.half_extents = vec_from(jp.at("half_extents"));
            read_opt(jp, "yaw_deg", p.yaw_deg);
            read_opt(jp, "major_radius", p.major_radius);
            read_opt(jp, "minor_radius", p.minor_radius);
            if (jp.contains("axis"))
                p.axis = vec_from(jp.at("axis"));
            read_opt(jp, "sigma_inside", p.sigma_inside);
            if (jp.contains("color"))
                p.color = vec_from(jp.at("color"));
            p.object_id = jp.at("object_id").get<int>();
            read_opt(jp, "falloff_voxels", p.falloff_voxels);
            spec.primitives.push_back(p);
        }
        if (j.contains("trajectory")) {
            const json& t = j.at("trajectory");
            const std::string type = t.value("type", "orbit");
            if (type == "orbit") {
                OrbitTrajectory o;
                if (t.contains("center"))
                    o.center = vec_from(t.at("center"));
                read_opt(t, "radius", o.radius);
                read_opt(t, "elevation_deg", o.elevation_deg);
                read_opt(t, "n_views", o.n_views);
                read_opt(t, "azimuth_offset_deg", o.azimuth_offset_deg);
                spec.trajectory = o;
            } else if (type == "forward_facing") {
                ForwardFacingTrajectory f;
                if (t.contains("base_position"))
                    f.base_position = vec_from(t.at("base_position"));
                read_opt(t, "jitter", f.jitter);
                read_opt(t, "n_views", f.n_views);
                spec.trajectory = f;
            } else {
                throw FormatError("unknown trajectory type '" + type + "'");
            }
        }
        if (j.contains("image") && j.at("image").is_array()) {
            spec.image_width = j.at("image").at(0).get<int>();
            spec.image_height = j.at("image").at(1).get<int>();
        } else if (j.contains("image")) {
            read_opt(j.at("image"), "width", spec.image_width);
            read_opt(j.at("image"), "height", spec.image_height);
        }
        read_opt(j, "fov_deg", spec.fov_deg);
        read_opt(j, "seed", spec.seed);
        read_opt(j, "gt_samples", spec.gt_samples);
        const auto get_opt = [&](const char* key, std::optional<double>& out) {
            if (j.contains(key))
                out = j.at(key).get<double>();
        };
        get_opt("fx", spec.fx);
        get_opt("fy", spec.fy);
        get_opt("cx", spec.cx);
        get_opt("cy", spec.cy);
        get_opt("t_near", spec.t_near);
        get_opt("t_far", spec.t_far);
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid scene spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

json to_json(const PromptSet& prompts) {
    json pts = json::array();
    for (const auto& p : prompts.points) {
        json jp = {{"x", p.x}, {"y", p.y}, {"label", static_cast<int>(p.label)}, {"score", p.score}};
        if (p.world)
            jp["world"] = vec_json(*p.world);
        pts.push_back(jp);
    }
    return {{"points", pts}};
}

PromptSet prompt_set_from_json(const json& j) {
    PromptSet out;
    try {
        const json& pts = j.is_array() ? j : j.at("points");
        for (const auto& jp : pts) {
            PromptPoint p;
            p.x = jp.at("x").get<int>();
            p.y = jp.at("y").get<int>();
            const int label = jp.value("label", 1);
            if (label != 0 && label != 1)
                throw FormatError("prompt label must be 0 (negative) or 1 (positive)");
            p.label = static_cast<PromptLabel>(label);
            p.score = jp.value("score", 0.0);
            if (jp.contains("world"))
                p.world = vec_from(jp.at("world"));
            out.points.push_back(p);
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid prompt set: ") + e.what());
    }
    return out;
}

json to_json(const EngineConfig& cfg) {
    return {{"tau", cfg.tau},
            {"n_p", cfg.n_p},
            {"lambda", cfg.loss.lambda},
            {"eta", cfg.loss.eta},
            {"steps_per_view", cfg.loss.steps_per_view},
            {"n_samples", cfg.n_samples},
            {"view_order", cfg.view_order},
            {"decay_enabled", cfg.decay_enabled},
            {"normalization",
             cfg.normalization == DistanceNormalization::image ? "image" : "surviving_candidates"},
            {"epochs", cfg.epochs},
            {"two_pass", cfg.two_pass},
            {"exchange_negatives", cfg.exchange_negatives}};
}

EngineConfig engine_config_from_json(const json& j, EngineConfig cfg) {
    try {
        read_opt(j, "tau", cfg.tau);
        read_opt(j, "n_p", cfg.n_p);
        read_opt(j, "lambda", cfg.loss.lambda);
        read_opt(j, "eta", cfg.loss.eta);
        read_opt(j, "steps_per_view", cfg.loss.steps_per_view);
        read_opt(j, "n_samples", cfg.n_samples);
        read_opt(j, "view_order", cfg.view_order);
        read_opt(j, "decay_enabled", cfg.decay_enabled);
        if (j.contains("normalization")) {
            const auto n = j.at("normalization").get<std::string>();
            if (n == "image")
                cfg.normalization = DistanceNormalization::image;
            else if (n == "surviving_candidates")
                cfg.normalization = DistanceNormalization::surviving_candidates;
            else
                throw FormatError("unknown normalization '" + n + "'");
        }
        read_opt(j, "epochs", cfg.epochs);
        read_opt(j, "two_pass", cfg.two_pass);
        read_opt(j, "exchange_negatives", cfg.exchange_negatives);
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid engine config: ") + e.what());
    }
    return cfg;
}

json to_json(const OracleNoise& n) {
    return {{"dilate_erode", n.dilate_erode},
            {"flip_rate", n.flip_rate},
            {"failure_rate", n.failure_rate},
            {"seed", n.seed}};
}

OracleNoise oracle_noise_from_json(const json& j, OracleNoise n) {
    try {
        read_opt(j, "dilate_erode", n.dilate_erode);
        read_opt(j, "flip_rate", n.flip_rate);
        read_opt(j, "failure_rate", n.failure_rate);
        read_opt(j, "seed", n.seed);
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid oracle noise: ") + e.what());
    }
    n.validate();
    return n;
}

json to_json(const RunRecord& record, bool include_timing) {
    json views = json::array();
    std::size_t accepted = 0, rejected = 0;
    for (const auto& r : record.views) {
        json jv = {{"view", r.view},
                   {"pass", r.pass},
                   {"grid", r.grid == GridRole::main ? "main" : "counter"},
                   {"outcome", to_string(r.outcome)},
                   {"iou", r.iou ? json(*r.iou) : json(nullptr)},
                   {"loss", r.loss ? json(*r.loss) : json(nullptr)},
                   {"prompts", to_json(r.prompts).at("points")}};
        if (!r.error.empty())
            jv["error"] = r.error;
        views.push_back(jv);
        if (r.outcome == ViewOutcome::accepted)
            ++accepted;
        else if (r.outcome != ViewOutcome::initialized)
            ++rejected;
    }
    json j = {{"views", views}, {"accepted", accepted}, {"rejected", rejected}};
    if (include_timing)
        j["seconds"] = record.seconds;
    return j;
}

RunRecord run_record_from_json(const json& j) {
    RunRecord out;
    try {
        for (const auto& jv : j.at("views")) {
            ViewRecord r;
            r.view = jv.at("view").get<int>();
            r.pass = jv.value("pass", 1);
            r.grid = jv.value("grid", "main") == "counter" ? GridRole::counter : GridRole::main;
            const auto outcome = jv.at("outcome").get<std::string>();
            bool known = false;
            for (auto o : {ViewOutcome::initialized, ViewOutcome::accepted, ViewOutcome::rejected_no_prompts,
                           ViewOutcome::rejected_segmenter_error, ViewOutcome::rejected_low_iou})
                if (outcome == to_string(o)) {
                    r.outcome = o;
                    known = true;
                }
            if (!known)
                throw FormatError("unknown view outcome '" + outcome + "'");
            if (jv.contains("iou") && !jv["iou"].is_null())
                r.iou = jv["iou"].get<double>();
            if (jv.contains("loss") && !jv["loss"].is_null())
                r.loss = jv["loss"].get<double>();
            if (jv.contains("prompts"))
                r.prompts = prompt_set_from_json(jv["prompts"]);
            r.error = jv.value("error", "");
            out.views.push_back(std::move(r));
        }
        out.seconds = j.value("seconds", 0.0);
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid run record: ") + e.what());
    }
    return out;
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

} // namespace masklift
