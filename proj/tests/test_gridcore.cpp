#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "svs/io.hpp"
#include "test_util.hpp"

using namespace svs;
using testutil::TempDir;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an svs::Error");
    return ErrorCode::InvalidArgument;
}

std::string float_bytes_le(float v) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    std::string s(4, '\0');
    for (int k = 0; k < 4; ++k) s[static_cast<std::size_t>(k)] = static_cast<char>((bits >> (8 * k)) & 0xff);
    return s;
}

std::string float_bytes_be(float v) {
    std::string s = float_bytes_le(v);
    return {s.rbegin(), s.rend()};
}

}  // namespace

TEST_CASE("grid types enforce their invariants") {
    CHECK_THROWS_AS(ImageGrid<double>(2, 2, 2), Error);
    CHECK_THROWS_AS(ImageGrid<double>(0, 2, 1), Error);
    ImageGrid<double> g(2, 3, 3, 0.5);
    CHECK(g.size() == 18);
    CHECK(g.is_valid());
    g(1, 2, 0) = 1.5;
    CHECK_FALSE(g.is_valid());

    auto vol = DisparityVolume<double>::uniform(2, 2, 4);
    CHECK(vol.is_valid());
    vol.level(0)(0, 0) += 1e-3;
    CHECK_FALSE(vol.is_valid());
}

TEST_CASE("load_image normalizes by maxval") {
    TempDir tmp;
    testutil::write_bytes(tmp / "a.pgm", std::string("P5\n2 1\n255\n") + '\x00' + '\xff');
    const auto img = load_image(tmp / "a.pgm");
    REQUIRE(img.channels() == 1);
    REQUIRE(img.width() == 2);
    CHECK(img(0, 0, 0) == 0.0);
    CHECK(img(0, 1, 0) == 1.0);

    testutil::write_bytes(tmp / "b.ppm", "P6\n# comment\n3 2\n255\n" + std::string(18, '\x80'));
    const auto rgb = load_image(tmp / "b.ppm");
    REQUIRE(rgb.channels() == 3);
    for (Index c = 0; c < 3; ++c) CHECK((rgb.channel(c) == 128.0 / 255.0).all());

    testutil::write_bytes(tmp / "c.pgm", std::string("P5 1 1 65535\n") + '\x80' + '\x00');
    CHECK(load_image(tmp / "c.pgm")(0, 0, 0) == doctest::Approx(32768.0 / 65535.0));
}

TEST_CASE("load_image rejects malformed files with distinct codes") {
    TempDir tmp;
    testutil::write_bytes(tmp / "magic.pgm", "P2\n1 1\n255\n0");
    CHECK(code_of([&] { load_image(tmp / "magic.pgm"); }) == ErrorCode::UnsupportedFormat);
    testutil::write_bytes(tmp / "maxval.pgm", "P5\n1 1\n100\n\x01");
    CHECK(code_of([&] { load_image(tmp / "maxval.pgm"); }) == ErrorCode::UnsupportedFormat);
    testutil::write_bytes(tmp / "header.pgm", "P5\n1 x\n255\n\x01");
    CHECK(code_of([&] { load_image(tmp / "header.pgm"); }) == ErrorCode::MalformedHeader);
    testutil::write_bytes(tmp / "short.pgm", "P5\n1");
    CHECK(code_of([&] { load_image(tmp / "short.pgm"); }) == ErrorCode::MalformedHeader);
    testutil::write_bytes(tmp / "trunc.ppm", "P6\n2 2\n255\n" + std::string(5, 'a'));
    CHECK(code_of([&] { load_image(tmp / "trunc.ppm"); }) == ErrorCode::TruncatedPayload);
    CHECK(code_of([&] { load_image(tmp / "missing.ppm"); }) == ErrorCode::Io);
}

TEST_CASE("save_image writes 8-bit payloads") {
    TempDir tmp;
    save_image(ImageGrid<double>(2, 3, 1, 0.0), tmp / "zero.pgm");
    CHECK(testutil::read_bytes(tmp / "zero.pgm") == "P5\n3 2\n255\n" + std::string(6, '\0'));
    save_image(ImageGrid<double>(1, 2, 3, 1.0), tmp / "one.ppm");
    CHECK(testutil::read_bytes(tmp / "one.ppm") == "P6\n2 1\n255\n" + std::string(6, '\xff'));

    ImageGrid<double> bad(1, 1, 1, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(save_image(bad, tmp / "nan.pgm"), Error);
}

TEST_CASE("image round trip stays within half a quantization step") {
    TempDir tmp;
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Index c = trial % 2 ? 3 : 1;
        const auto img = oracle::random_image(rng, 1 + trial % 7, 1 + trial % 5, c);
        save_image(img, tmp / "rt.ppm");
        const auto back = load_image(tmp / "rt.ppm");
        REQUIRE(back.same_shape(img));
        for (Index k = 0; k < c; ++k) CHECK(((back.channel(k) - img.channel(k)).abs() <= 1.0 / 510.0 + 1e-15).all());
        // Re-saving a quantized image is lossless.
        save_image(back, tmp / "rt2.ppm");
        CHECK(testutil::read_bytes(tmp / "rt.ppm") == testutil::read_bytes(tmp / "rt2.ppm"));
    }
}

TEST_CASE("PFM loading applies the sentinel rule and byte order") {
    TempDir tmp;
    testutil::write_bytes(tmp / "five.pfm", "Pf\n1 1\n-1.0\n" + float_bytes_le(5.0f));
    auto m = load_disparity(tmp / "five.pfm");
    CHECK(m.values(0, 0) == 5.0);
    CHECK(m.valid(0, 0));

    testutil::write_bytes(tmp / "neg.pfm", "Pf\n1 1\n-1.0\n" + float_bytes_le(-1.0f));
    CHECK_FALSE(load_disparity(tmp / "neg.pfm").valid(0, 0));

    testutil::write_bytes(tmp / "nan.pfm", "Pf\n2 1\n-1\n" + float_bytes_le(std::numeric_limits<float>::quiet_NaN()) +
                                               float_bytes_le(std::numeric_limits<float>::infinity()));
    const auto nan_map = load_depth(tmp / "nan.pfm");
    CHECK(nan_map.valid_count() == 0);
    CHECK(nan_map.values.allFinite());

    // Big-endian, two rows: the file stores the bottom row first.
    testutil::write_bytes(tmp / "be.pfm", "Pf\n1 2\n1.0\n" + float_bytes_be(2.0f) + float_bytes_be(7.0f));
    const auto be = load_disparity(tmp / "be.pfm");
    CHECK(be.values(0, 0) == 7.0);
    CHECK(be.values(1, 0) == 2.0);
}

TEST_CASE("PFM errors") {
    TempDir tmp;
    testutil::write_bytes(tmp / "color.pfm", "PF\n1 1\n-1\n" + std::string(12, '\0'));
    CHECK(code_of([&] { load_disparity(tmp / "color.pfm"); }) == ErrorCode::UnsupportedFormat);
    testutil::write_bytes(tmp / "scale.pfm", "Pf\n1 1\nabc\n" + std::string(4, '\0'));
    CHECK(code_of([&] { load_disparity(tmp / "scale.pfm"); }) == ErrorCode::MalformedHeader);
    testutil::write_bytes(tmp / "zero.pfm", "Pf\n1 1\n0\n" + std::string(4, '\0'));
    CHECK(code_of([&] { load_disparity(tmp / "zero.pfm"); }) == ErrorCode::MalformedHeader);
    testutil::write_bytes(tmp / "size.pfm", "Pf\n2 2\n-1\n" + std::string(12, '\0'));
    CHECK(code_of([&] { load_disparity(tmp / "size.pfm"); }) == ErrorCode::TruncatedPayload);
}

TEST_CASE("save_float_map encodes values and invalid pixels") {
    TempDir tmp;
    DisparityMap<double> m(1, 2);
    m.values(0, 0) = 3.25;
    m.valid(0, 0) = true;
    m.values(0, 1) = 9.0;  // masked out
    save_float_map(m, tmp / "m.pfm");
    CHECK(testutil::read_bytes(tmp / "m.pfm") == "Pf\n2 1\n-1\n" + float_bytes_le(3.25f) + float_bytes_le(-1.0f));
    const auto back = load_disparity(tmp / "m.pfm");
    CHECK(back.values(0, 0) == 3.25);
    CHECK_FALSE(back.valid(0, 1));
}

TEST_CASE("float map round trip is bit-exact on float-representable values") {
    TempDir tmp;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> u(0.0f, 1000.0f);
    for (int trial = 0; trial < 20; ++trial) {
        const Index h = 1 + trial % 6, w = 1 + trial % 9;
        DepthMap<double> m(h, w);
        for (Index i = 0; i < h; ++i)
            for (Index j = 0; j < w; ++j) {
                m.valid(i, j) = (i + j + trial) % 4 != 0;
                if (m.valid(i, j)) m.values(i, j) = static_cast<double>(u(rng));
            }
        save_float_map(m, tmp / "d.pfm");
        const auto back = load_depth(tmp / "d.pfm");
        CHECK((back.valid == m.valid).all());
        CHECK((back.values == m.values).all());
    }
}

TEST_CASE("volume files stack levels vertically") {
    TempDir tmp;
    std::mt19937_64 rng(9);
    const auto vol = oracle::random_volume(rng, 3, 4, 5);
    save_volume(vol, tmp / "v.pfm");
    const auto back = load_volume(tmp / "v.pfm", 5);
    REQUIRE(back.num_levels() == 5);
    for (Index d = 0; d < 5; ++d) CHECK(((back.level(d) - vol.level(d)).abs() < 1e-6).all());
    CHECK_THROWS_AS(load_volume(tmp / "v.pfm", 4), Error);
}
