#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "jcns/pipeline.hpp"
#include "jcns/raw_io.hpp"

namespace jcns {

struct QuantTable {
    std::array<int, 64> steps{};  // row-major, index u * 8 + v
    int qf = 50;

    int operator[](int i) const { return steps[static_cast<std::size_t>(i)]; }
};

// Reference luminance table scaled by quality factor (1..100).
QuantTable quant_table(int qf);

// Standard luminance table at qf = 50.
const std::array<int, 64>& base_luminance_table();

enum class CoeffRole : std::uint8_t { Cover = 0, Stego = 1 };

// Coefficient plane in raster layout: coefficient (u, v) of block (bi, bj)
// sits at row 8 bi + u, column 8 bj + v.
struct JpegCoefficients {
    int blocks_w = 0;
    int blocks_h = 0;
    QuantTable table;
    int bit_depth = 12;
    CoeffRole role = CoeffRole::Cover;
    std::vector<std::int32_t> coeffs;

    int width() const noexcept { return 8 * blocks_w; }
    int height() const noexcept { return 8 * blocks_h; }
    std::size_t index(int block, int coef) const {
        const int bi = block / blocks_w;
        const int bj = block % blocks_w;
        return static_cast<std::size_t>(8 * bi + coef / 8) * static_cast<std::size_t>(width()) +
               static_cast<std::size_t>(8 * bj + coef % 8);
    }
    std::int32_t at(int block, int coef) const { return coeffs[index(block, coef)]; }
    std::int32_t& at(int block, int coef) { return coeffs[index(block, coef)]; }

    // Sizes agree and every coefficient fits in int16.
    void validate() const;

    bool operator==(const JpegCoefficients& o) const {
        return blocks_w == o.blocks_w && blocks_h == o.blocks_h && table.steps == o.table.steps &&
               table.qf == o.table.qf && bit_depth == o.bit_depth && role == o.role && coeffs == o.coeffs;
    }
};

inline constexpr std::int32_t kCoeffLimit = 32767;

// Demosaicked luminance plane, row-major; reflect-101 beyond the image edge.
std::vector<double> develop_luminance(const RawImage& raw, GreenKernel gk = GreenKernel::Cross);

// Blockwise DCT of a row-major plane, same raster layout as JpegCoefficients.
std::vector<double> blockwise_dct(const std::vector<double>& plane, int width, int height);
std::vector<double> blockwise_idct(const std::vector<double>& plane, int width, int height);

struct DevelopedCover {
    std::vector<double> dct;  // unquantised, after the level shift
    JpegCoefficients coefficients;
};

DevelopedCover develop_cover(const RawImage& raw, int qf, GreenKernel gk = GreenKernel::Cross);

// coefficient * step, raster layout.
std::vector<double> dequantize(const JpegCoefficients& c);

void write_coeffs(const JpegCoefficients& c, const std::filesystem::path& path);
JpegCoefficients read_coeffs(const std::filesystem::path& path);

// Non-zero coefficients over the 63 AC positions of every block.
std::int64_t nzac_count(const JpegCoefficients& c);

}  // namespace jcns
