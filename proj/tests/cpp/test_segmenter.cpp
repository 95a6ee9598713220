// Copyright 2026 The masklift Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "masklift/io.hpp"
#include "masklift/scene.hpp"
#include "masklift/segmenter.hpp"

#include "../support/oracles.hpp"

#include "httplib.h"

#include <filesystem>
#include <thread>

using namespace masklift;
namespace fs = std::filesystem;

namespace {

const Scene& small_scene() {
    static const Scene scene = [] {
        SceneSpec spec;
        spec.dims = {32, 32, 32};
        Primitive a;
        a.center = Vec3(-0.45, 0.0, 0.0);
        a.radius = 0.35;
        a.object_id = 1;
        Primitive b;
        b.shape = ShapeKind::box;
        b.center = Vec3(0.45, 0.0, 0.0);
        b.half_extents = Vec3::Constant(0.3);
        b.object_id = 2;
        spec.primitives = {a, b};
        OrbitTrajectory orbit;
        orbit.n_views = 3;
        orbit.azimuth_offset_deg = 90.0; // view 0 looks along -y with both objects side by side
        spec.trajectory = orbit;
        spec.image_width = spec.image_height = 100;
        return build_scene(spec);
    }();
    return scene;
}

// First pixel labeled `id` in view `view`.
PromptPoint pixel_of(const Scene& s, int view, int id) {
    const LabelImage& l = s.label_image(static_cast<std::size_t>(view));
    for (std::size_t i = 0; i < l.labels.size(); ++i)
        if (l.labels[i] == id)
            return {static_cast<int>(i % l.width), static_cast<int>(i / l.width)};
    FAIL("object not visible");
    return {};
}

SegmenterQuery query_for(int view, std::vector<PromptPoint> points) {
    SegmenterQuery q;
    q.view = view;
    q.width = q.height = 100;
    q.prompts.points = std::move(points);
    return q;
}

std::size_t hamming(const Bitmap2D& a, const Bitmap2D& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        n += a.bits[i] != b.bits[i] ? 1 : 0;
    return n;
}

fs::path fresh_dir(const char* name) {
    const fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

// Serves one canned response body and status on POST /segment.
class StubServer {
  public:
    StubServer(std::string body, int status = 200, int delay_ms = 0) {
        server_.Post("/segment", [=, this](const httplib::Request& req, httplib::Response& res) {
            last_request_ = req.body;
            if (delay_ms > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            res.status = status;
            res.set_content(body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    const std::string& last_request() const { return last_request_; }

  private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::string last_request_;
};

} // namespace

TEST_CASE("noiseless oracle returns the exact visibility mask") {
    const Scene& s = small_scene();
    OracleSegmenter seg(s);
    for (int id : {1, 2}) {
        const Bitmap2D m = seg.segment(query_for(0, {pixel_of(s, 0, id)}));
        CHECK(m == s.gt_visibility(0, id));
        CHECK(m.count() > 100);
    }
}

TEST_CASE("oracle returns an empty mask on background or contradictory prompts") {
    const Scene& s = small_scene();
    OracleSegmenter seg(s);
    CHECK(seg.segment(query_for(0, {PromptPoint{0, 0}})).empty_mask());
    PromptPoint neg = pixel_of(s, 0, 1);
    neg.label = PromptLabel::negative;
    CHECK(seg.segment(query_for(0, {pixel_of(s, 0, 1), neg})).empty_mask());
    PromptPoint other = pixel_of(s, 0, 2);
    other.label = PromptLabel::negative;
    CHECK(seg.segment(query_for(0, {pixel_of(s, 0, 1), other})) == s.gt_visibility(0, 1));
}

TEST_CASE("flip noise matches its binomial expectation") {
    const Scene& s = small_scene();
    OracleNoise noise;
    noise.flip_rate = 0.01;
    noise.seed = 5;
    OracleSegmenter seg(s, noise);
    const Bitmap2D m = seg.segment(query_for(0, {pixel_of(s, 0, 1)}));
    const std::size_t d = hamming(m, s.gt_visibility(0, 1));
    CHECK(d >= 60);
    CHECK(d <= 140);
}

TEST_CASE("dilation and erosion use a square element") {
    Bitmap2D m(9, 9);
    m.set(4, 4, true);
    const Bitmap2D d = morph_square(m, 2);
    CHECK(d.count() == 25);
    CHECK(d(2, 2));
    CHECK(d(6, 6));
    CHECK_FALSE(d(1, 4));
    CHECK(morph_square(d, -2) == m);
    CHECK(morph_square(Bitmap2D(5, 5, true), -1).count() == 9);
    CHECK(morph_square(m, 0) == m);
}

TEST_CASE("oracle noise is reproducible per view and call") {
    const Scene& s = small_scene();
    OracleNoise noise;
    noise.flip_rate = 0.05;
    noise.dilate_erode = 1;
    noise.seed = 9;
    OracleSegmenter a(s, noise), b(s, noise);
    const auto q1 = query_for(1, {pixel_of(s, 1, 1)});
    b.segment(query_for(0, {pixel_of(s, 0, 1)})); // unrelated view first
    CHECK(a.segment(q1) == b.segment(q1));
    CHECK_FALSE(a.segment(q1) == b.segment(query_for(2, {pixel_of(s, 2, 1)})));
}

TEST_CASE("failure rate 1 replaces every mask with a half plane") {
    const Scene& s = small_scene();
    OracleNoise noise;
    noise.failure_rate = 1.0;
    OracleSegmenter seg(s, noise);
    const Bitmap2D gt = s.gt_visibility(0, 1);
    const Bitmap2D m = seg.segment(query_for(0, {pixel_of(s, 0, 1)}));
    CHECK_FALSE(m == gt);
    CHECK(m.count() > 0);
    CHECK(m.count() < m.size());
}

TEST_CASE("oracle noise validation") {
    OracleNoise n;
    n.flip_rate = 1.0;
    CHECK_THROWS_AS(n.validate(), InvalidArgument);
    n = {};
    n.failure_rate = 1.5;
    CHECK_THROWS_AS(n.validate(), InvalidArgument);
}

TEST_CASE("query validation") {
    SegmenterQuery q = query_for(0, {});
    CHECK_THROWS_AS(q.validate(), InvalidArgument);
    q.box = PixelBox{1, 1, 5, 5};
    CHECK_NOTHROW(q.validate());
    q.box = PixelBox{5, 1, 1, 5};
    CHECK_THROWS_AS(q.validate(), InvalidArgument);
    q = query_for(0, {PromptPoint{100, 3}});
    CHECK_THROWS_AS(q.validate(), InvalidArgument);
}

TEST_CASE("RLE") {
    const Bitmap2D m = decode_rle("0:3,1:1", 2, 2);
    CHECK(m.bits == std::vector<std::uint8_t>{0, 0, 0, 1});
    CHECK(encode_rle(m) == "0:3,1:1");
    CHECK(decode_rle("0:6", 3, 2).empty_mask());
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        const Bitmap2D r = oracle::random_bitmap(rng, 13, 7, 0.3);
        CHECK(decode_rle(encode_rle(r), 13, 7) == r);
    }
    CHECK_THROWS_AS(decode_rle("0:3", 2, 2), DimensionMismatch);
    CHECK_THROWS_AS(decode_rle("0:5", 2, 2), DimensionMismatch);
    CHECK_THROWS_AS(decode_rle("2:4", 2, 2), MalformedResponse);
    CHECK_THROWS_AS(decode_rle("0-4", 2, 2), MalformedResponse);
    CHECK_THROWS_AS(decode_rle("0:x", 2, 2), MalformedResponse);
}

TEST_CASE("base64") {
    CHECK(base64_encode("") == "");
    CHECK(base64_encode("f") == "Zg==");
    CHECK(base64_encode("fo") == "Zm8=");
    CHECK(base64_encode("foo") == "Zm9v");
    CHECK(base64_encode("foobar") == "Zm9vYmFy");
    for (const std::string s : {"", "f", "fo", "foo", "foob", "fooba", "foobar"})
        CHECK(base64_decode(base64_encode(s)) == s);
    std::string bytes;
    for (int i = 0; i < 256; ++i)
        bytes.push_back(static_cast<char>(i));
    CHECK(base64_decode(base64_encode(bytes)) == bytes);
    CHECK_THROWS_AS(base64_decode("abc"), MalformedResponse);
}

TEST_CASE("remote request layout") {
    SegmenterQuery q = query_for(0, {PromptPoint{3, 4}});
    q.width = 4;
    q.height = 5;
    PromptPoint n{1, 1};
    n.label = PromptLabel::negative;
    q.prompts.points.push_back(n);
    q.box = PixelBox{0, 0, 2, 3};
    const auto j = make_remote_request(q);
    CHECK(j["width"] == 4);
    CHECK(j["height"] == 5);
    CHECK(j["prompts"].size() == 2);
    CHECK(j["prompts"][0]["label"] == 1);
    CHECK(j["prompts"][1]["label"] == 0);
    CHECK(j["box"] == nlohmann::json::array({0, 0, 2, 3}));
    const RgbImage img = decode_ppm(base64_decode(j["image"].get<std::string>()));
    CHECK(img.width == 4);
    CHECK(img.height == 5);
}

TEST_CASE("remote response parsing") {
    CHECK(parse_remote_response(R"({"width":2,"height":2,"rle":"0:3,1:1"})", 2, 2).count() == 1);
    CHECK_THROWS_AS(parse_remote_response("not json", 2, 2), MalformedResponse);
    CHECK_THROWS_AS(parse_remote_response(R"({"width":2,"height":2})", 2, 2), MalformedResponse);
    CHECK_THROWS_AS(parse_remote_response(R"({"width":3,"height":2,"rle":"0:6"})", 2, 2), DimensionMismatch);
}

TEST_CASE("remote segmenter against a loopback stub") {
    Rng rng(12);
    const Bitmap2D fixture = oracle::random_bitmap(rng, 100, 100, 0.4);
    const auto q = query_for(0, {PromptPoint{5, 6}});
    SUBCASE("decoded mask equals the fixture") {
        const nlohmann::json body = {{"width", 100}, {"height", 100}, {"rle", encode_rle(fixture)}};
        StubServer server(body.dump());
        RemoteSegmenter seg(server.url(), std::chrono::seconds(5));
        CHECK(seg.needs_image());
        CHECK(seg.segment(q) == fixture);
        const auto sent = nlohmann::json::parse(server.last_request());
        CHECK(sent["prompts"][0]["x"] == 5);
    }
    SUBCASE("error variants") {
        StubServer malformed("{\"oops\":1}");
        CHECK_THROWS_AS(RemoteSegmenter(malformed.url()).segment(q), MalformedResponse);
        StubServer wrong_size(R"({"width":2,"height":2,"rle":"0:4"})");
        CHECK_THROWS_AS(RemoteSegmenter(wrong_size.url()).segment(q), DimensionMismatch);
        StubServer failing("{}", 500);
        CHECK_THROWS_AS(RemoteSegmenter(failing.url()).segment(q), TransportError);
        StubServer slow(R"({"width":100,"height":100,"rle":"0:10000"})", 200, 600);
        CHECK_THROWS_AS(RemoteSegmenter(slow.url(), std::chrono::milliseconds(150)).segment(q), SegmenterTimeout);
    }
}

TEST_CASE("replay segmenter") {
    const fs::path dir = fresh_dir("masklift_replay_test");
    Rng rng(4);
    const Bitmap2D m = oracle::random_bitmap(rng, 100, 100);
    write_pgm(ReplaySegmenter::mask_path(dir, 7), m);
    CHECK(ReplaySegmenter::mask_path(dir, 7).filename() == "view_0007.pgm");
    ReplaySegmenter seg(dir);
    CHECK(seg.segment(query_for(7, {PromptPoint{1, 1}})) == m);
    CHECK_THROWS_AS(seg.segment(query_for(8, {PromptPoint{1, 1}})), MissingMask);
    SegmenterQuery small = query_for(7, {PromptPoint{1, 1}});
    small.width = 50;
    CHECK_THROWS_AS(seg.segment(small), DimensionMismatch);
    write_file(ReplaySegmenter::mask_path(dir, 9), "garbage");
    CHECK_THROWS_AS(seg.segment(query_for(9, {PromptPoint{1, 1}})), MalformedResponse);
}
