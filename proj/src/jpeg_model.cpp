#include "jcns/jpeg_model.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "jcns/covariance.hpp"
#include "jcns/errors.hpp"
#include "jcns/sampler.hpp"

namespace jcns {

namespace {

constexpr char kMagic[4] = {'J', 'C', 'N', 'S'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 1 + 4 + 4 + 1 + 1 + 1;

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint32_t crc32_of(const unsigned char* data, std::size_t n) {
    uLong crc = crc32(0L, Z_NULL, 0);
    return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(n)));
}

void check_dims(int width, int height) {
    if (width <= 0 || height <= 0 || width % 8 != 0 || height % 8 != 0) {
        throw DimensionMismatch("image dimensions must be positive multiples of 8, got " + std::to_string(width) +
                                "x" + std::to_string(height));
    }
}

}  // namespace

const std::array<int, 64>& base_luminance_table() {
    static const std::array<int, 64> t = {
        16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
        14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
        18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
        49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
    };
    return t;
}

QuantTable quant_table(int qf) {
    if (qf < 1 || qf > 100) {
        throw InvalidArgument("quality factor must be in 1..100, got " + std::to_string(qf));
    }
    const int scale = qf < 50 ? 5000 / qf : 200 - 2 * qf;
    QuantTable t;
    t.qf = qf;
    const auto& base = base_luminance_table();
    for (std::size_t i = 0; i < 64; ++i) {
        t.steps[i] = std::max(1, (base[i] * scale + 50) / 100);
    }
    return t;
}

void JpegCoefficients::validate() const {
    check_dims(width(), height());
    if (coeffs.size() != static_cast<std::size_t>(width()) * static_cast<std::size_t>(height())) {
        throw DimensionMismatch("coefficient plane size does not match its block grid");
    }
    for (auto v : coeffs) {
        if (v > kCoeffLimit || v < -kCoeffLimit) {
            throw ValueOutOfRange("coefficient " + std::to_string(v) + " does not fit in int16");
        }
    }
}

std::vector<double> develop_luminance(const RawImage& raw, GreenKernel gk) {
    raw.validate();
    std::array<std::vector<KernelTap>, 4> kernels;
    for (int phase = 0; phase < 4; ++phase) {
        kernels[static_cast<std::size_t>(phase)] = luminance_kernel(raw.cfa, phase / 2, phase % 2, gk);
    }
    std::vector<double> out(raw.data.size(), 0.0);
    for (int r = 0; r < raw.height; ++r) {
        for (int c = 0; c < raw.width; ++c) {
            double acc = 0.0;
            for (const auto& t : kernels[static_cast<std::size_t>((r % 2) * 2 + c % 2)]) {
                acc += t.weight * raw.at(reflect101(r + t.dr, raw.height), reflect101(c + t.dc, raw.width));
            }
            out[static_cast<std::size_t>(r) * raw.width + c] = acc;
        }
    }
    return out;
}

namespace {

template <typename F>
std::vector<double> blockwise(const std::vector<double>& plane, int width, int height, F transform) {
    check_dims(width, height);
    if (plane.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionMismatch("plane size does not match dimensions");
    }
    std::vector<double> out(plane.size());
    double in_block[64];
    double out_block[64];
    for (int bi = 0; bi < height / 8; ++bi) {
        for (int bj = 0; bj < width / 8; ++bj) {
            for (int r = 0; r < 8; ++r) {
                for (int c = 0; c < 8; ++c) {
                    in_block[8 * r + c] = plane[static_cast<std::size_t>(8 * bi + r) * width + 8 * bj + c];
                }
            }
            transform(in_block, out_block);
            for (int r = 0; r < 8; ++r) {
                for (int c = 0; c < 8; ++c) {
                    out[static_cast<std::size_t>(8 * bi + r) * width + 8 * bj + c] = out_block[8 * r + c];
                }
            }
        }
    }
    return out;
}

}  // namespace

std::vector<double> blockwise_dct(const std::vector<double>& plane, int width, int height) {
    return blockwise(plane, width, height, dct8x8);
}

std::vector<double> blockwise_idct(const std::vector<double>& plane, int width, int height) {
    return blockwise(plane, width, height, idct8x8);
}

DevelopedCover develop_cover(const RawImage& raw, int qf, GreenKernel gk) {
    check_dims(raw.width, raw.height);
    const QuantTable table = quant_table(qf);
    std::vector<double> lum = develop_luminance(raw, gk);
    const double shift = std::ldexp(1.0, raw.bit_depth - 1);
    for (double& v : lum) {
        v -= shift;
    }
    DevelopedCover out;
    out.dct = blockwise_dct(lum, raw.width, raw.height);
    auto& c = out.coefficients;
    c.blocks_w = raw.width / 8;
    c.blocks_h = raw.height / 8;
    c.table = table;
    c.bit_depth = raw.bit_depth;
    c.role = CoeffRole::Cover;
    c.coeffs.resize(out.dct.size());
    for (int r = 0; r < raw.height; ++r) {
        for (int col = 0; col < raw.width; ++col) {
            const std::size_t i = static_cast<std::size_t>(r) * raw.width + col;
            c.coeffs[i] = static_cast<std::int32_t>(round_half_away(out.dct[i] / table[(r % 8) * 8 + col % 8]));
        }
    }
    c.validate();
    return out;
}

std::vector<double> dequantize(const JpegCoefficients& c) {
    std::vector<double> out(c.coeffs.size());
    const int w = c.width();
    for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
        const int r = static_cast<int>(i / static_cast<std::size_t>(w));
        const int col = static_cast<int>(i % static_cast<std::size_t>(w));
        out[i] = static_cast<double>(c.coeffs[i]) * c.table[(r % 8) * 8 + col % 8];
    }
    return out;
}

// Layout (little-endian): "JCNS", version u8, blocks_w u32, blocks_h u32, qf u8,
// bit_depth u8, role u8, int16 coefficients in raster order, CRC-32 of all
// preceding bytes as u32.
void write_coeffs(const JpegCoefficients& c, const std::filesystem::path& path) {
    c.validate();
    std::vector<unsigned char> buf;
    buf.reserve(kHeaderSize + 2 * c.coeffs.size() + 4);
    buf.insert(buf.end(), std::begin(kMagic), std::end(kMagic));
    buf.push_back(kVersion);
    put_u32(buf, static_cast<std::uint32_t>(c.blocks_w));
    put_u32(buf, static_cast<std::uint32_t>(c.blocks_h));
    buf.push_back(static_cast<unsigned char>(c.table.qf));
    buf.push_back(static_cast<unsigned char>(c.bit_depth));
    buf.push_back(static_cast<unsigned char>(c.role));
    for (auto v : c.coeffs) {
        const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
        buf.push_back(static_cast<unsigned char>(u & 0xFF));
        buf.push_back(static_cast<unsigned char>(u >> 8));
    }
    put_u32(buf, crc32_of(buf.data(), buf.size()));
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) {
        throw Error("failed writing " + path.string());
    }
}

JpegCoefficients read_coeffs(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot open " + path.string());
    }
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), buf.begin())) {
        if (buf.size() < 4) {
            throw TruncationError(path.string() + ": file too short");
        }
        throw FormatError(path.string() + ": bad magic");
    }
    if (buf.size() < kHeaderSize + 4) {
        throw TruncationError(path.string() + ": truncated header");
    }
    if (buf[4] != kVersion) {
        throw FormatError(path.string() + ": unsupported version " + std::to_string(buf[4]));
    }
    JpegCoefficients c;
    const std::uint32_t bw = get_u32(&buf[5]);
    const std::uint32_t bh = get_u32(&buf[9]);
    if (bw == 0 || bh == 0 || bw > (1u << 16) || bh > (1u << 16)) {
        throw FormatError(path.string() + ": implausible block grid");
    }
    c.blocks_w = static_cast<int>(bw);
    c.blocks_h = static_cast<int>(bh);
    const int qf = buf[13];
    if (qf < 1 || qf > 100) {
        throw FormatError(path.string() + ": quality factor out of range");
    }
    c.table = quant_table(qf);
    c.bit_depth = buf[14];
    if (buf[15] > 1) {
        throw FormatError(path.string() + ": unknown role");
    }
    c.role = static_cast<CoeffRole>(buf[15]);
    const std::size_t n = static_cast<std::size_t>(64) * bw * bh;
    if (buf.size() < kHeaderSize + 2 * n + 4) {
        throw TruncationError(path.string() + ": truncated coefficient data");
    }
    if (buf.size() > kHeaderSize + 2 * n + 4) {
        throw FormatError(path.string() + ": trailing bytes");
    }
    const std::size_t body = kHeaderSize + 2 * n;
    if (get_u32(&buf[body]) != crc32_of(buf.data(), body)) {
        throw ChecksumError(path.string() + ": CRC mismatch");
    }
    c.coeffs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::uint16_t>(buf[kHeaderSize + 2 * i] | buf[kHeaderSize + 2 * i + 1] << 8);
        c.coeffs[i] = static_cast<std::int16_t>(u);
    }
    return c;
}

std::int64_t nzac_count(const JpegCoefficients& c) {
    std::int64_t n = 0;
    const int w = c.width();
    for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
        const bool dc = (i / static_cast<std::size_t>(w)) % 8 == 0 && (i % static_cast<std::size_t>(w)) % 8 == 0;
        if (!dc && c.coeffs[i] != 0) {
            ++n;
        }
    }
    return n;
}

}  // namespace jcns
