#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "jcns/errors.hpp"
#include "jcns/raw_io.hpp"

using namespace jcns;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "jcns_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_pgm(const fs::path& p, int w, int h, int maxval, const std::vector<int>& values) {
    std::ofstream f(p, std::ios::binary);
    f << "P5\n# test image\n" << w << " " << h << "\n" << maxval << "\n";
    for (int v : values) {
        f.put(static_cast<char>(v >> 8));
        f.put(static_cast<char>(v & 0xFF));
    }
}

void write_sidecar(const fs::path& p, const std::string& body) {
    std::ofstream f(p.string() + ".json");
    f << body;
}

}  // namespace

TEST_SUITE("raw_io") {

TEST_CASE("cfa helpers") {
    CHECK(parse_bayer("RGGB") == BayerPattern::RGGB);
    CHECK_THROWS_AS(parse_bayer("XYZW"), UnknownCfa);
    CHECK(cfa_color(BayerPattern::RGGB, 0, 0) == Channel::R);
    CHECK(cfa_color(BayerPattern::RGGB, 1, 1) == Channel::B);
    CHECK(cfa_color(BayerPattern::RGGB, -1, -1) == Channel::B);
    CHECK(cfa_color(BayerPattern::GBRG, 0, 1) == Channel::B);
    for (auto p : {BayerPattern::RGGB, BayerPattern::BGGR, BayerPattern::GRBG, BayerPattern::GBRG}) {
        CHECK(parse_bayer(to_string(p)) == p);
        for (int dr = -2; dr <= 2; ++dr) {
            for (int dc = -2; dc <= 2; ++dc) {
                const auto s = shift_pattern(p, dr, dc);
                for (int r = 0; r < 2; ++r) {
                    for (int c = 0; c < 2; ++c) {
                        CHECK(cfa_color(s, r, c) == cfa_color(p, r + dr, c + dc));
                    }
                }
            }
        }
    }
}

TEST_CASE("load a constant 26x26 image") {
    const auto p = scratch("const26.pgm");
    write_pgm(p, 26, 26, 65535, std::vector<int>(26 * 26, 512));
    write_sidecar(p, R"({"cfa": "RGGB", "bit_depth": 12, "a1": 0, "b1": 0, "a2": 1.15, "b2": -1150})");
    const RawImage r = load_raw(p);
    CHECK(r.width == 26);
    CHECK(r.height == 26);
    CHECK(r.at(0, 0) == 512);
    CHECK(r.params.a2 == 1.15);
    CHECK(r.cfa == BayerPattern::RGGB);
}

TEST_CASE("load errors") {
    const auto p = scratch("bad.pgm");
    write_pgm(p, 8, 8, 65535, std::vector<int>(64, 100));

    SUBCASE("unknown cfa") {
        write_sidecar(p, R"({"cfa": "XYZW", "bit_depth": 12})");
        CHECK_THROWS_AS(load_raw(p), UnknownCfa);
    }
    SUBCASE("value above the bit depth") {
        std::vector<int> v(64, 100);
        v[10] = 4096;
        write_pgm(p, 8, 8, 65535, v);
        write_sidecar(p, R"({"cfa": "RGGB", "bit_depth": 12})");
        CHECK_THROWS_AS(load_raw(p), ValueOutOfRange);
    }
    SUBCASE("missing sidecar") {
        fs::remove(p.string() + ".json");
        CHECK_THROWS_AS(load_raw(p), MissingSidecar);
    }
    SUBCASE("short pixel data") {
        {
            std::ofstream f(p, std::ios::binary);
            f << "P5\n8 8\n65535\n";
            f << std::string(20, '\0');
        }
        write_sidecar(p, R"({"cfa": "RGGB"})");
        CHECK_THROWS_AS(load_raw(p), DimensionMismatch);
    }
    SUBCASE("8-bit PGM rejected") {
        {
            std::ofstream f(p, std::ios::binary);
            f << "P5\n8 8\n255\n" << std::string(64, '\1');
        }
        write_sidecar(p, R"({"cfa": "RGGB"})");
        CHECK_THROWS_AS(load_raw(p), FormatError);
    }
    SUBCASE("sidecar dimensions disagree") {
        write_sidecar(p, R"({"cfa": "RGGB", "width": 16})");
        CHECK_THROWS_AS(load_raw(p), DimensionMismatch);
    }
}

TEST_CASE("missing cfa defaults to RGGB") {
    const auto p = scratch("nocfa.pgm");
    write_pgm(p, 8, 8, 65535, std::vector<int>(64, 7));
    write_sidecar(p, R"({"bit_depth": 12})");
    CHECK(load_raw(p).cfa == BayerPattern::RGGB);
}

TEST_CASE("write/load round trip for integer data") {
    SynthSpec s;
    s.kind = SynthSpec::Kind::IidGaussian;
    s.mu = 1500;
    s.sigma = 200;
    s.width = 32;
    s.height = 24;
    s.seed = 3;
    RawImage img = synthesize_raw(s, e1_sensor_params(), 12, BayerPattern::GBRG);
    for (double& v : img.data) {
        v = std::round(v);
    }
    const auto p = scratch("rt.pgm");
    write_raw(img, p);
    CHECK(load_raw(p) == img);
}

TEST_CASE("synthesis") {
    SynthSpec s;
    s.width = 24;
    s.height = 24;
    s.mu = 1000;
    const RawImage c = synthesize_raw(s, e1_sensor_params());
    for (double v : c.data) {
        CHECK(v == 1000);
    }

    s.kind = SynthSpec::Kind::IidGaussian;
    s.sigma = 10;
    s.seed = 7;
    CHECK(synthesize_raw(s, e1_sensor_params()) == synthesize_raw(s, e1_sensor_params()));

    // Values clamp at 0, so the mean is that of max(0, Z): phi(0) = 1/sqrt(2 pi).
    s.mu = 0;
    s.sigma = 1;
    s.seed = 1;
    s.width = s.height = 512;
    const RawImage g = synthesize_raw(s, e1_sensor_params());
    double mean = 0;
    for (double v : g.data) {
        CHECK(v >= 0.0);
        mean += v;
    }
    mean /= static_cast<double>(g.data.size());
    CHECK(std::abs(mean - 1.0 / std::sqrt(2 * std::numbers::pi)) < 3.0 / 512);

    s.width = 20;
    CHECK_THROWS_AS(synthesize_raw(s, e1_sensor_params()), InvalidArgument);
}

TEST_CASE("photo-site validation") {
    RawImage r;
    r.width = 2;
    r.height = 1;
    r.data = {0, 4095};
    CHECK_NOTHROW(r.validate());
    r.data = {-1, 0};
    CHECK_THROWS_AS(r.validate(), ValueOutOfRange);
    r.data = {0};
    CHECK_THROWS_AS(r.validate(), DimensionMismatch);
}

}
