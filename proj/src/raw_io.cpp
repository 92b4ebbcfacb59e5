#include "jcns/raw_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jcns/errors.hpp"
#include "jcns/log.hpp"
#include "jcns/random.hpp"

namespace jcns {

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".json");
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) {
                return tok;
            }
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

long parse_header_int(std::istream& in, const char* what) {
    const std::string tok = next_token(in);
    try {
        std::size_t pos = 0;
        const long v = std::stol(tok, &pos);
        if (pos != tok.size()) {
            throw std::invalid_argument(tok);
        }
        return v;
    } catch (const std::exception&) {
        throw FormatError(std::string("PGM header: bad ") + what + " '" + tok + "'");
    }
}

}  // namespace

BayerPattern parse_bayer(std::string_view name) {
    if (name == "RGGB") return BayerPattern::RGGB;
    if (name == "BGGR") return BayerPattern::BGGR;
    if (name == "GRBG") return BayerPattern::GRBG;
    if (name == "GBRG") return BayerPattern::GBRG;
    throw UnknownCfa("unknown CFA pattern '" + std::string(name) + "'");
}

std::string to_string(BayerPattern p) {
    switch (p) {
        case BayerPattern::RGGB: return "RGGB";
        case BayerPattern::BGGR: return "BGGR";
        case BayerPattern::GRBG: return "GRBG";
        case BayerPattern::GBRG: return "GBRG";
    }
    return "?";
}

Channel cfa_color(BayerPattern p, long row, long col) noexcept {
    // Pattern letters are the 2x2 tile in row-major order.
    static constexpr Channel kTiles[4][4] = {
        {Channel::R, Channel::G, Channel::G, Channel::B},  // RGGB
        {Channel::B, Channel::G, Channel::G, Channel::R},  // BGGR
        {Channel::G, Channel::R, Channel::B, Channel::G},  // GRBG
        {Channel::G, Channel::B, Channel::R, Channel::G},  // GBRG
    };
    const int r = static_cast<int>(((row % 2) + 2) % 2);
    const int c = static_cast<int>(((col % 2) + 2) % 2);
    return kTiles[static_cast<int>(p)][r * 2 + c];
}

BayerPattern shift_pattern(BayerPattern p, long dr, long dc) noexcept {
    const Channel c00 = cfa_color(p, dr, dc);
    const Channel c01 = cfa_color(p, dr, dc + 1);
    if (c00 == Channel::R) return BayerPattern::RGGB;
    if (c00 == Channel::B) return BayerPattern::BGGR;
    return c01 == Channel::R ? BayerPattern::GRBG : BayerPattern::GBRG;
}

void SensorParams::validate() const {
    for (double v : {a1, b1, a2, b2}) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("sensor parameters must be finite");
        }
    }
    if (iso1 <= 0 || iso2 <= 0) {
        throw InvalidArgument("ISO values must be positive");
    }
}

SensorParams e1_sensor_params() {
    SensorParams p;
    p.a1 = 0.0;
    p.b1 = 0.0;
    p.a2 = 1.15;
    p.b2 = -1150.0;
    return p;
}

void RawImage::validate() const {
    if (width <= 0 || height <= 0) {
        throw DimensionMismatch("raw image dimensions must be positive");
    }
    if (data.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionMismatch("raw data size does not match width x height");
    }
    if (bit_depth < 1 || bit_depth > 16) {
        throw InvalidArgument("bit_depth must be in [1, 16]");
    }
    params.validate();
    const double hi = max_value();
    for (double v : data) {
        if (!(v >= 0.0) || v > hi) {
            std::ostringstream msg;
            msg << "photo-site value " << v << " outside [0, " << hi << "]";
            throw ValueOutOfRange(msg.str());
        }
    }
}

RawImage load_raw(const std::filesystem::path& path) {
    const auto side = sidecar_path(path);
    if (!std::filesystem::exists(side)) {
        throw MissingSidecar("missing sidecar " + side.string());
    }
    nlohmann::json meta;
    {
        std::ifstream js(side);
        try {
            js >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("sidecar " + side.string() + ": " + e.what());
        }
    }

    RawImage img;
    if (meta.contains("cfa")) {
        img.cfa = parse_bayer(meta.at("cfa").get<std::string>());
    } else {
        img.cfa = BayerPattern::RGGB;
        log_warning("sidecar " + side.string() + " has no 'cfa'; assuming RGGB");
    }
    try {
        img.bit_depth = meta.value("bit_depth", 12);
        img.params.a1 = meta.value("a1", 0.0);
        img.params.b1 = meta.value("b1", 0.0);
        img.params.a2 = meta.value("a2", 0.0);
        img.params.b2 = meta.value("b2", 0.0);
        img.params.iso1 = meta.value("iso1", 100);
        img.params.iso2 = meta.value("iso2", 200);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("sidecar " + side.string() + ": " + e.what());
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path.string());
    }
    if (next_token(in) != "P5") {
        throw FormatError(path.string() + " is not a binary PGM (P5)");
    }
    const long w = parse_header_int(in, "width");
    const long h = parse_header_int(in, "height");
    const long maxval = parse_header_int(in, "maxval");
    if (w <= 0 || h <= 0) {
        throw DimensionMismatch("PGM dimensions must be positive");
    }
    if (maxval < 256 || maxval > 65535) {
        throw FormatError("expected a 16-bit PGM (maxval in [256, 65535])");
    }
    if (meta.contains("width") && meta.at("width").get<long>() != w) {
        throw DimensionMismatch("sidecar width disagrees with PGM header");
    }
    if (meta.contains("height") && meta.at("height").get<long>() != h) {
        throw DimensionMismatch("sidecar height disagrees with PGM header");
    }
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);

    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    std::vector<unsigned char> bytes(2 * n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw DimensionMismatch("PGM pixel data shorter than width x height");
    }
    img.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        img.data[i] = static_cast<double>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
    }
    img.validate();
    return img;
}

void write_raw(const RawImage& img, const std::filesystem::path& path) {
    if (img.data.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
        throw DimensionMismatch("raw data size does not match width x height");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot write " + path.string());
    }
    out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
    std::vector<unsigned char> bytes(2 * img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const double v = std::clamp(std::round(img.data[i]), 0.0, 65535.0);
        const auto u = static_cast<std::uint16_t>(v);
        bytes[2 * i] = static_cast<unsigned char>(u >> 8);
        bytes[2 * i + 1] = static_cast<unsigned char>(u & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));

    nlohmann::json meta = {
        {"cfa", to_string(img.cfa)},   {"bit_depth", img.bit_depth}, {"width", img.width},
        {"height", img.height},        {"a1", img.params.a1},        {"b1", img.params.b1},
        {"a2", img.params.a2},         {"b2", img.params.b2},        {"iso1", img.params.iso1},
        {"iso2", img.params.iso2},
    };
    std::ofstream js(sidecar_path(path));
    js << meta.dump(2) << '\n';
}

RawImage synthesize_raw(const SynthSpec& spec, const SensorParams& params, int bit_depth, BayerPattern cfa) {
    if (spec.width <= 0 || spec.height <= 0 || spec.width % 8 != 0 || spec.height % 8 != 0) {
        throw InvalidArgument("synthetic width and height must be positive multiples of 8");
    }
    if (!(spec.sigma >= 0.0)) {
        throw InvalidArgument("synthetic sigma must be non-negative");
    }
    if (!std::isfinite(spec.mu)) {
        throw InvalidArgument("synthetic mu must be finite");
    }
    params.validate();

    RawImage img;
    img.width = spec.width;
    img.height = spec.height;
    img.cfa = cfa;
    img.bit_depth = bit_depth;
    img.params = params;
    img.data.resize(static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height));
    const double hi = img.max_value();

    if (spec.kind == SynthSpec::Kind::Constant) {
        if (spec.mu < 0.0 || spec.mu > hi) {
            throw InvalidArgument("constant level outside the sensor range");
        }
        std::fill(img.data.begin(), img.data.end(), spec.mu);
    } else {
        Rng rng(spec.seed);
        for (double& v : img.data) {
            v = std::clamp(spec.mu + spec.sigma * rng.normal(), 0.0, hi);
        }
    }
    return img;
}

}  // namespace jcns
