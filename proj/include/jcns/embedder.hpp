#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jcns/covariance.hpp"
#include "jcns/jpeg_model.hpp"
#include "jcns/lattice.hpp"
#include "jcns/pipeline.hpp"
#include "jcns/random.hpp"
#include "jcns/raw_io.hpp"
#include "jcns/sampler.hpp"

namespace jcns {

struct EmbedConfig {
    int qf = 95;
    int K = 5;
    std::uint64_t key = 0;
    GreenKernel green_kernel = GreenKernel::Cross;
    std::optional<std::filesystem::path> report_path;
    int threads = 1;           // 0 = hardware concurrency
    bool keep_pmfs = false;    // retain every coefficient's PMF (needed for costs)
    SamplerOptions sampler;

    void validate() const;
};

// A factorisation that needed diagonal loading.
struct JitterEvent {
    int block = 0;
    MacroLattice lattice = MacroLattice::L1;
    std::string stage;  // "neighbors" (conditioning block) or "conditional" (Schur complement)
    double epsilon = 0.0;
    double amount = 0.0;
};

struct LatticeSummary {
    int blocks = 0;
    double bits = 0.0;
    double bits_per_pixel = 0.0;      // bits / (64 * blocks)
    std::array<double, 64> mode_bits{};  // mean entropy per coefficient position
};

struct CapacityReport {
    int width = 0;
    int height = 0;
    int qf = 0;
    int K = 0;
    std::vector<double> entropy;  // bits, raster layout like JpegCoefficients
    double total_bits = 0.0;
    double bits_per_pixel = 0.0;
    std::int64_t nzac = 0;  // of the cover
    double bits_per_nzac = 0.0;
    std::array<LatticeSummary, 4> lattices{};
    std::vector<JitterEvent> jitter_events;
    std::vector<int> failed_blocks;
    double runtime_seconds = 0.0;

    // Totals and lattice summaries from the entropy plane.
    void recompute(const LatticeAssignment& assign);
};

// Everything needed to sample one block's 64 coefficients given the continuous
// stego values already drawn for its neighbours.
struct BlockModel {
    int block = 0;
    MacroLattice lattice = MacroLattice::L1;
    std::vector<int> neighbors;  // conditioning blocks, in conditioning order
    Eigen::MatrixXd gain;        // 64 x 64*neighbors: conditional mean = gain * known
    Eigen::MatrixXd chol;        // lower factor of the conditional covariance
    bool zero = false;           // deterministic block: no change possible
    bool failed = false;         // singular even after maximal jitter
    std::vector<JitterEvent> jitter;
};

BlockModel build_block_model(const ImageCovarianceModel& model, const LatticeAssignment& assign, int block);

struct BlockDraw {
    std::array<int, 64> changes{};
    std::array<double, 64> continuous{};
    std::array<double, 64> entropy{};
    std::vector<Pmf> pmfs;  // filled when requested
    bool failed = false;
};

// `store` holds 64 continuous values per block (row-major block index).
BlockDraw sample_block(const BlockModel& m, std::span<const double> store, const QuantTable& table, int K, Rng& rng,
                       const SamplerOptions& opts = {}, bool keep_pmfs = false);

// Per-block models of a whole image, reusable across keys. Memory grows with
// the image; meant for small images sampled many times.
class EmbedPlan {
public:
    EmbedPlan(const RawImage& raw, GreenKernel gk = GreenKernel::Cross, int threads = 1);

    const LatticeAssignment& assignment() const noexcept { return assign_; }
    const BlockModel& block(int b) const { return models_[static_cast<std::size_t>(b)]; }
    GreenKernel green_kernel() const noexcept { return gk_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

private:
    int width_;
    int height_;
    GreenKernel gk_;
    LatticeAssignment assign_;
    std::vector<BlockModel> models_;
};

struct EmbedResult {
    JpegCoefficients stego;
    JpegCoefficients cover;
    std::vector<double> cover_dct;   // unquantised cover
    std::vector<int> changes;        // raster layout
    std::vector<double> continuous;  // unquantised stego signal, raster layout
    std::vector<Pmf> pmfs;           // raster layout, only with keep_pmfs
    CapacityReport report;
};

// Full simulated embedding. With `plan`, cached block models are used.
EmbedResult embed(const RawImage& raw, const EmbedConfig& cfg, const EmbedPlan* plan = nullptr);

std::pair<JpegCoefficients, CapacityReport> embed_simulated(const RawImage& raw, const EmbedConfig& cfg);

CapacityReport capacity_map(const RawImage& raw, const EmbedConfig& cfg);

// Adds N(0, photon_variance(x)) to every photo-site, clamped to the sensor range.
RawImage pseudo_embed(const RawImage& raw, std::uint64_t seed);

struct CostPlane {
    int width = 0;
    int height = 0;
    int K = 0;
    std::vector<double> pi0;    // raster layout
    std::vector<double> costs;  // (2K+1) per coefficient, k = -K..K; +inf where pi(k) = 0
};

CostPlane export_costs(const RawImage& raw, const EmbedConfig& cfg);

// Binary: "JCST", version u8, width u32, height u32, K u32, then per
// coefficient pi0 followed by 2K+1 costs, all float64 little-endian.
void write_costs(const CostPlane& c, const std::filesystem::path& path);

// JSON text of a report; the entropy plane is included on request.
std::string report_json(const CapacityReport& r, bool include_plane = false, bool include_runtime = true);
void write_report(const CapacityReport& r, const std::filesystem::path& path, bool include_plane = false);

}  // namespace jcns
