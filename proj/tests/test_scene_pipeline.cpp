#include <algorithm>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "svs/io.hpp"
#include "svs/parallel.hpp"
#include "svs/pipeline.hpp"
#include "test_util.hpp"

using namespace svs;
namespace fs = std::filesystem;

TEST_CASE("Lcg64 is reproducible and uses the MMIX constants") {
    Lcg64 a(42), b(42);
    for (int k = 0; k < 100; ++k) CHECK(a.next() == b.next());
    Lcg64 c(0);
    CHECK(c.next() == 1442695040888963407ULL);
    CHECK(c.next() == 1442695040888963407ULL * 6364136223846793005ULL + 1442695040888963407ULL);
    Lcg64 d(7);
    for (int k = 0; k < 1000; ++k) {
        const double u = d.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("random_texture") {
    const auto t = random_texture(20, 10, 3, 5);
    CHECK(t.height() == 10);
    CHECK(t.width() == 20);
    CHECK(t.channels() == 3);
    CHECK(t.is_valid());
    const auto u = random_texture(20, 10, 3, 5);
    for (Index c = 0; c < 3; ++c) CHECK((t.channel(c) == u.channel(c)).all());
    const auto v = random_texture(20, 10, 3, 6);
    CHECK((t.channel(0) != v.channel(0)).any());

    // First pixel is the mean of the top-left 3x3 block of the padded noise.
    Lcg64 rng(5);
    std::vector<double> noise(static_cast<std::size_t>(12 * 22 * 3));
    for (auto& x : noise) x = rng.uniform();
    double s = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += noise[static_cast<std::size_t>((i * 22 + j) * 3 + 1)];
    CHECK(t(0, 0, 1) == doctest::Approx(s / 9.0).epsilon(1e-14));
}

TEST_CASE("gen_scene ground truth") {
    auto s = gen_scene(64, 32, SceneKind::constant_plane, 1);
    CHECK(s.gt_disparity.valid.all());
    CHECK((s.gt_disparity.values == 5.0).all());
    const auto shifted = shift_image(s.left, 5);
    for (Index c = 0; c < 3; ++c) CHECK((s.right.channel(c) == shifted.channel(c)).all());

    SceneParams p;
    p.foreground_disparity = 9;
    p.background_disparity = 3;
    s = gen_scene(64, 32, SceneKind::two_layer, 2, p);
    std::set<double> values(s.gt_disparity.values.data(), s.gt_disparity.values.data() + s.gt_disparity.values.size());
    CHECK(values == std::set<double>{3.0, 9.0});
    CHECK(s.gt_disparity.values(16, 32) == 9.0);
    CHECK(s.gt_disparity.values(0, 0) == 3.0);
    CHECK(s.right.is_valid());

    s = gen_scene(64, 32, SceneKind::slanted_plane, 3);
    CHECK(s.gt_disparity.values(5, 0) == doctest::Approx(2.0));
    CHECK(s.gt_disparity.values(5, 63) == doctest::Approx(10.0));

    const auto again = gen_scene(64, 32, SceneKind::slanted_plane, 3);
    for (Index c = 0; c < 3; ++c) CHECK((again.right.channel(c) == s.right.channel(c)).all());

    CHECK_THROWS_AS(gen_scene(16, 16, SceneKind::constant_plane, 1), Error);
    CHECK(parse_scene_kind("two-layer") == SceneKind::two_layer);
    CHECK(to_string(SceneKind::slanted_plane) == "slanted-plane");
    CHECK_THROWS_AS(parse_scene_kind("cube"), Error);
}

TEST_CASE("fill_holes_replicate prefers the right neighbour") {
    ImageGrid<double> img(1, 5, 1);
    img.channel(0) << 0.1, 0.0, 0.3, 0.0, 0.0;
    Mask valid(1, 5);
    valid << true, false, true, false, false;
    const auto f = fill_holes_replicate(img, valid);
    CHECK(f(0, 1, 0) == 0.3);
    CHECK(f(0, 3, 0) == 0.3);
    CHECK(f(0, 4, 0) == 0.3);
}

namespace {

RunManifest small_manifest(const fs::path& out) {
    RunManifest m;
    m.scene = SceneKind::constant_plane;
    m.scene_width = 64;
    m.scene_height = 32;
    m.num_levels = 17;
    m.optimizer.iterations = 40;
    m.matcher.window_radius = 2;
    m.matcher.max_disparity = 16;
    m.seed = 3;
    m.output_dir = out;
    return m;
}

}  // namespace

TEST_CASE("run_pipeline recovers a constant plane") {
    testutil::TempDir dir;
    RunManifest m;
    m.scene = SceneKind::constant_plane;
    m.seed = 11;
    m.output_dir = dir.path();
    const auto r = run_pipeline(m);
    REQUIRE(r.final);
    REQUIRE(r.primitive);
    REQUIRE(r.final->d1);
    CHECK(*r.final->d1 < 0.05);
    CHECK(r.psnr_db > 25.0);
    CHECK(std::is_sorted(r.loss_trace.rbegin(), r.loss_trace.rend()));
    for (const char* name : {artifacts::kReport, artifacts::kSynthRight, artifacts::kPrimitiveDisp,
                             artifacts::kFinalDisp, artifacts::kDepth, artifacts::kErrorMap})
        CHECK(fs::exists(dir.path() / name));

    const auto j = nlohmann::json::parse(testutil::read_bytes(dir.path() / artifacts::kReport));
    CHECK(j.contains("primitive"));
    CHECK(j["final"]["d1"].get<double>() == doctest::Approx(*r.final->d1));
    CHECK(j["versions"]["report_schema"] == 1);
    CHECK(j["config"]["seed"] == 11);
    CHECK_FALSE(j["config"].contains("output_dir"));
}

TEST_CASE("run_pipeline without ground truth") {
    testutil::TempDir dir;
    const auto scene = gen_scene(64, 32, SceneKind::constant_plane, 9);
    save_image(scene.left, dir.path() / "l.ppm");
    save_image(scene.right, dir.path() / "r.ppm");
    RunManifest m = small_manifest(dir.path() / "out");
    m.scene.reset();
    m.left_path = dir.path() / "l.ppm";
    m.right_path = dir.path() / "r.ppm";
    const auto r = run_pipeline(m);
    CHECK_FALSE(r.final);
    CHECK_FALSE(r.primitive);
    CHECK_FALSE(fs::exists(dir.path() / "out" / artifacts::kErrorMap));
    CHECK(fs::exists(dir.path() / "out" / artifacts::kDepth));
    const auto j = nlohmann::json::parse(testutil::read_bytes(dir.path() / "out" / artifacts::kReport));
    CHECK_FALSE(j.contains("final"));
    CHECK(j.contains("psnr_db"));
}

TEST_CASE("run_pipeline output is identical across runs and thread counts") {
    testutil::TempDir dir;
    std::vector<std::string> reports, disps;
    for (int threads : {1, 1, 3, 8}) {
        set_num_threads(threads);
        const fs::path out = dir.path() / std::to_string(reports.size());
        run_pipeline(small_manifest(out));
        reports.push_back(testutil::read_bytes(out / artifacts::kReport));
        disps.push_back(testutil::read_bytes(out / artifacts::kFinalDisp));
    }
    set_num_threads(1);
    for (std::size_t k = 1; k < reports.size(); ++k) {
        CHECK(reports[k] == reports[0]);
        CHECK(disps[k] == disps[0]);
    }
}

TEST_CASE("run_pipeline names the failing stage") {
    testutil::TempDir dir;
    RunManifest m = small_manifest(dir.path());
    m.scene.reset();
    try {
        run_pipeline(m);
        FAIL("expected an error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "manifest");
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }

    m.left_path = dir.path() / "missing_l.ppm";
    m.right_path = dir.path() / "missing_r.ppm";
    try {
        run_pipeline(m);
        FAIL("expected an error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "manifest");
        CHECK(e.code() == ErrorCode::Io);
    }

    testutil::write_bytes(dir.path() / "bad.ppm", "P6\n4 4\n255\nxx");
    m.left_path = dir.path() / "bad.ppm";
    m.right_path = dir.path() / "bad.ppm";
    try {
        run_pipeline(m);
        FAIL("expected an error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "load");
        CHECK(e.code() == ErrorCode::TruncatedPayload);
    }

    // Everything lands beyond the depth cap, so nothing is left to score.
    m = small_manifest(dir.path());
    m.eval.cap_max_m = 1.0;
    try {
        run_pipeline(m);
        FAIL("expected an error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "evaluate");
        CHECK(e.code() == ErrorCode::EmptySelection);
    }
}

TEST_CASE("evaluate_disparity adds D1 and matches evaluate_depth") {
    const CameraRig<double> rig;
    const auto gt = DisparityMap<double>::dense(Plane<double>::Constant(8, 8, 10.0));
    const auto pred = DisparityMap<double>::dense(Plane<double>::Constant(8, 8, 12.0));
    const auto a = evaluate_disparity(pred, gt, rig, EvalConfig{});
    const auto b = evaluate_depth(disparity_to_depth(pred, rig), disparity_to_depth(gt, rig), EvalConfig{});
    REQUIRE(a.d1);
    CHECK(*a.d1 == 0.0);
    CHECK_FALSE(b.d1);
    CHECK(a.ard == b.ard);
    CHECK(a.ard == doctest::Approx(1.0 / 6.0));
}
