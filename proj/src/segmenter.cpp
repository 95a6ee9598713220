// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0
#include "masklift/segmenter.hpp"

#include "masklift/io.hpp"
#include "masklift/random.hpp"
#include "masklift/scene.hpp"

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "httplib.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace masklift {

void SegmenterQuery::validate() const {
    if (width <= 0 || height <= 0)
        throw InvalidArgument("segmenter query needs a positive image size");
    if (!image.empty() && (image.width != width || image.height != height))
        throw InvalidArgument("segmenter query image does not match its size");
    if (prompts.first_positive() == nullptr && !box)
        throw InvalidArgument("segmenter query needs a positive prompt or a box");
    for (const auto& p : prompts.points)
        if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height)
            throw InvalidArgument("prompt (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                  ") lies outside the image");
    if (box && (box->x0 < 0 || box->y0 < 0 || box->x1 >= width || box->y1 >= height || box->x0 > box->x1 ||
                box->y0 > box->y1))
        throw InvalidArgument("segmenter query box is invalid");
}

void OracleNoise::validate() const {
    if (!(flip_rate >= 0.0 && flip_rate < 1.0))
        throw InvalidArgument("flip_rate must lie in [0, 1)");
    if (!(failure_rate >= 0.0 && failure_rate <= 1.0))
        throw InvalidArgument("failure_rate must lie in [0, 1]");
}

Bitmap2D morph_square(const Bitmap2D& mask, int radius) {
    if (radius == 0)
        return mask;
    const int r = std::abs(radius);
    const bool dilate = radius > 0;
    // Separable: a square element is a horizontal pass followed by a vertical one.
    const auto pass = [&](const Bitmap2D& in, int dx, int dy) {
        Bitmap2D out(in.width, in.height);
        for (int y = 0; y < in.height; ++y)
            for (int x = 0; x < in.width; ++x) {
                bool v = !dilate;
                for (int k = -r; k <= r; ++k) {
                    const int xx = x + k * dx, yy = y + k * dy;
                    // Outside the image counts as background, so erosion eats in from the border.
                    const bool s = in.inside(xx, yy) && in(xx, yy);
                    if (dilate ? s : !s) {
                        v = dilate;
                        break;
                    }
                }
                out.set(x, y, v);
            }
        return out;
    };
    return pass(pass(mask, 1, 0), 0, 1);
}

OracleSegmenter::OracleSegmenter(const Scene& scene, OracleNoise noise) : scene_(&scene), noise_(noise) {
    noise_.validate();
}

Bitmap2D OracleSegmenter::lookup(const SegmenterQuery& query) const {
    if (query.view < 0 || static_cast<std::size_t>(query.view) >= scene_->view_count())
        throw InvalidArgument("oracle query view " + std::to_string(query.view) + " is not a scene camera");
    const LabelImage& labels = scene_->label_image(static_cast<std::size_t>(query.view));
    if (labels.width != query.width || labels.height != query.height)
        throw DimensionMismatch("oracle query size differs from the scene camera");
    Bitmap2D empty(query.width, query.height);
    const PromptPoint* first = query.prompts.first_positive();
    if (first == nullptr)
        return empty;
    const auto at = [&](int x, int y) { return labels.labels[static_cast<std::size_t>(y) * labels.width + x]; };
    const int id = at(first->x, first->y);
    if (id == 0)
        return empty;
    for (const auto& p : query.prompts.points)
        if (!p.positive() && at(p.x, p.y) == id)
            return empty;
    return scene_->gt_visibility(static_cast<std::size_t>(query.view), id);
}

Bitmap2D OracleSegmenter::segment(const SegmenterQuery& query) {
    query.validate();
    const std::uint64_t call = calls_per_view_[query.view]++;
    Bitmap2D mask = lookup(query);
    const std::uint64_t stream = mix_seed(mix_seed(noise_.seed, static_cast<std::uint64_t>(query.view)), call);

    mask = morph_square(mask, noise_.dilate_erode);

    if (noise_.flip_rate > 0.0) {
        Rng flips(mix_seed(stream, 1));
        for (auto& b : mask.bits)
            if (flips.uniform() < noise_.flip_rate)
                b = b ? 0 : 1;
    }

    if (noise_.failure_rate > 0.0) {
        Rng failure(mix_seed(stream, 2));
        if (failure.uniform() < noise_.failure_rate) {
            const double theta = failure.uniform(0.0, 2.0 * std::numbers::pi);
            const double cx = failure.uniform(0.0, query.width), cy = failure.uniform(0.0, query.height);
            const double nx = std::cos(theta), ny = std::sin(theta);
            for (int y = 0; y < mask.height; ++y)
                for (int x = 0; x < mask.width; ++x)
                    mask.set(x, y, (x + 0.5 - cx) * nx + (y + 0.5 - cy) * ny < 0.0);
        }
    }
    return mask;
}

ReplaySegmenter::ReplaySegmenter(std::filesystem::path directory) : directory_(std::move(directory)) {
    if (!std::filesystem::is_directory(directory_))
        throw InvalidArgument("replay directory " + directory_.string() + " does not exist");
}

std::filesystem::path ReplaySegmenter::mask_path(const std::filesystem::path& directory, int view) {
    char name[32];
    std::snprintf(name, sizeof name, "view_%04d.pgm", view);
    return directory / name;
}

Bitmap2D ReplaySegmenter::segment(const SegmenterQuery& query) {
    const auto path = mask_path(directory_, query.view);
    if (!std::filesystem::exists(path))
        throw MissingMask("no recorded mask for view " + std::to_string(query.view) + " at " + path.string());
    Bitmap2D mask;
    try {
        mask = read_pgm(path);
    } catch (const FormatError& e) {
        throw MalformedResponse(e.what());
    }
    if (mask.width != query.width || mask.height != query.height)
        throw DimensionMismatch("recorded mask for view " + std::to_string(query.view) + " has the wrong size");
    return mask;
}

std::string encode_rle(const Bitmap2D& mask) {
    std::string out;
    std::size_t i = 0;
    while (i < mask.bits.size()) {
        const std::uint8_t v = mask.bits[i] ? 1 : 0;
        std::size_t j = i;
        while (j < mask.bits.size() && (mask.bits[j] ? 1 : 0) == v)
            ++j;
        if (!out.empty())
            out += ',';
        out += std::to_string(v) + ':' + std::to_string(j - i);
        i = j;
    }
    return out;
}

Bitmap2D decode_rle(const std::string& rle, int width, int height) {
    if (width <= 0 || height <= 0)
        throw MalformedResponse("RLE needs a positive image size");
    Bitmap2D out(width, height);
    const std::size_t total = out.bits.size();
    std::size_t pos = 0, filled = 0;
    while (pos < rle.size()) {
        std::size_t end = rle.find(',', pos);
        if (end == std::string::npos)
            end = rle.size();
        const std::string_view pair(rle.data() + pos, end - pos);
        const auto colon = pair.find(':');
        if (colon == std::string_view::npos)
            throw MalformedResponse("RLE pair without ':'");
        int value = -1;
        std::size_t count = 0;
        const auto r1 = std::from_chars(pair.data(), pair.data() + colon, value);
        const auto r2 = std::from_chars(pair.data() + colon + 1, pair.data() + pair.size(), count);
        if (r1.ec != std::errc() || r1.ptr != pair.data() + colon || r2.ec != std::errc() ||
            r2.ptr != pair.data() + pair.size())
            throw MalformedResponse("RLE pair is not 'value:count'");
        if (value != 0 && value != 1)
            throw MalformedResponse("RLE values must be 0 or 1");
        if (count > total - filled)
            throw DimensionMismatch("RLE counts exceed width*height");
        std::fill_n(out.bits.begin() + static_cast<std::ptrdiff_t>(filled), count, static_cast<std::uint8_t>(value));
        filled += count;
        pos = end + 1;
    }
    if (filled != total)
        throw DimensionMismatch("RLE counts do not sum to width*height");
    return out;
}

std::string base64_encode(const std::string& bytes) {
    using namespace boost::archive::iterators;
    using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
    std::string out(It(bytes.begin()), It(bytes.end()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

std::string base64_decode(const std::string& text) {
    using namespace boost::archive::iterators;
    using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
    if (text.size() % 4 != 0)
        throw MalformedResponse("base64 length is not a multiple of 4");
    std::size_t pad = 0;
    while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=')
        ++pad;
    std::string body = text.substr(0, text.size() - pad);
    body.append(pad, 'A');
    try {
        std::string out(It(body.begin()), It(body.end()));
        out.resize(out.size() - pad);
        return out;
    } catch (const std::exception&) {
        throw MalformedResponse("invalid base64 text");
    }
}

nlohmann::json make_remote_request(const SegmenterQuery& query) {
    nlohmann::json prompts = nlohmann::json::array();
    for (const auto& p : query.prompts.points)
        prompts.push_back({{"x", p.x}, {"y", p.y}, {"label", p.positive() ? 1 : 0}});
    RgbImage image = query.image;
    if (image.empty())
        image = RgbImage(query.width, query.height);
    nlohmann::json body = {{"width", query.width},
                           {"height", query.height},
                           {"image", base64_encode(encode_ppm(image))},
                           {"prompts", prompts}};
    if (query.box)
        body["box"] = {query.box->x0, query.box->y0, query.box->x1, query.box->y1};
    return body;
}

Bitmap2D parse_remote_response(const std::string& body, int width, int height) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedResponse(std::string("response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("width") || !j.contains("height") || !j.contains("rle") ||
        !j["width"].is_number_integer() || !j["height"].is_number_integer() || !j["rle"].is_string())
        throw MalformedResponse("response must carry integer width, height and a string rle");
    const int w = j["width"].get<int>(), h = j["height"].get<int>();
    if (w != width || h != height)
        throw DimensionMismatch("response is " + std::to_string(w) + "x" + std::to_string(h) + ", expected " +
                                std::to_string(width) + "x" + std::to_string(height));
    return decode_rle(j["rle"].get<std::string>(), w, h);
}

RemoteSegmenter::RemoteSegmenter(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    if (base_url_.empty())
        throw InvalidArgument("remote segmenter needs a URL");
    if (timeout_.count() <= 0)
        throw InvalidArgument("remote segmenter timeout must be positive");
}

Bitmap2D RemoteSegmenter::segment(const SegmenterQuery& query) {
    query.validate();
    httplib::Client client(base_url_);
    if (!client.is_valid())
        throw TransportError("invalid segmenter URL '" + base_url_ + "'");
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post("/segment", make_remote_request(query).dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                               (err == httplib::Error::Read && std::chrono::steady_clock::now() - start >= timeout_);
        if (timed_out)
            throw SegmenterTimeout("segmenter did not answer within " + std::to_string(timeout_.count()) + " ms");
        throw TransportError("segmenter request failed: " + httplib::to_string(err));
    }
    if (res->status != 200)
        throw TransportError("segmenter answered HTTP " + std::to_string(res->status));
    return parse_remote_response(res->body, query.width, query.height);
}

} // namespace masklift
