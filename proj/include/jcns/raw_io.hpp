#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace jcns {

enum class BayerPattern { RGGB, BGGR, GRBG, GBRG };

enum class Channel { R = 0, G = 1, B = 2 };

BayerPattern parse_bayer(std::string_view name);
std::string to_string(BayerPattern p);

// Colour recorded at (row, col) of a mosaic whose top-left photo-site follows `p`.
Channel cfa_color(BayerPattern p, long row, long col) noexcept;

// Pattern seen from a window whose origin is offset by (dr, dc) photo-sites.
BayerPattern shift_pattern(BayerPattern p, long dr, long dc) noexcept;

// Heteroscedastic sensor noise: variance a*mu + b at each ISO setting.
struct SensorParams {
    double a1 = 0.0;
    double b1 = 0.0;
    double a2 = 0.0;
    double b2 = 0.0;
    int iso1 = 100;
    int iso2 = 200;

    void validate() const;

    bool operator==(const SensorParams&) const = default;
};

// Difference used throughout the experiments: a2 - a1 = 1.15, b2 - b1 = -1150.
SensorParams e1_sensor_params();

struct RawImage {
    int width = 0;
    int height = 0;
    BayerPattern cfa = BayerPattern::RGGB;
    int bit_depth = 12;
    SensorParams params;
    std::vector<double> data;  // row-major, width * height

    double at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
    double& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }

    double max_value() const { return static_cast<double>((1u << bit_depth) - 1u); }

    void validate() const;

    bool operator==(const RawImage&) const = default;
};

struct SynthSpec {
    enum class Kind { Constant, IidGaussian };
    Kind kind = Kind::Constant;
    double mu = 0.0;
    double sigma = 0.0;
    int width = 0;
    int height = 0;
    std::uint64_t seed = 0;
};

// Reads a 16-bit big-endian binary PGM plus its `<path>.json` sidecar.
RawImage load_raw(const std::filesystem::path& path);

// Writes the PGM and sidecar. Samples are rounded half away from zero and
// clamped to [0, 65535].
void write_raw(const RawImage& img, const std::filesystem::path& path);

RawImage synthesize_raw(const SynthSpec& spec, const SensorParams& params, int bit_depth = 12,
                        BayerPattern cfa = BayerPattern::RGGB);

}  // namespace jcns
