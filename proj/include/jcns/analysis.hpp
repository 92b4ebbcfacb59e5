#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jcns/covariance.hpp"
#include "jcns/lattice.hpp"
#include "jcns/pipeline.hpp"

namespace jcns {

// Stationary analysis: every photo-site has unit variance, so covariances are
// those of M M^t (any common variance only rescales them).
struct StationaryCovariance {
    CovarianceMatrix sigma;
    std::vector<BlockOffset> block_order;

    // 64 x 64 sub-block between two blocks of block_order.
    Eigen::MatrixXd sub_block(std::size_t a, std::size_t b) const {
        return sigma.values.block(64 * static_cast<Eigen::Index>(a), 64 * static_cast<Eigen::Index>(b), 64, 64);
    }
    // Index of an offset in block_order; throws InvalidArgument if absent.
    std::size_t position(BlockOffset off) const;
};

StationaryCovariance stationary_covariance(std::span<const BlockOffset> blocks, BayerPattern cfa, FrontEnd fe,
                                           GreenKernel gk = GreenKernel::Cross, int grid = 3);

// Covariance of a macro-lattice neighbourhood (central block first).
StationaryCovariance neighborhood_covariance(MacroLattice lattice, BayerPattern cfa, FrontEnd fe,
                                             GreenKernel gk = GreenKernel::Cross);

struct IntraBlockDecomposition {
    Eigen::MatrixXd full;      // luminance development
    Eigen::MatrixXd demosaic;  // red channel demosaicking only
    Eigen::MatrixXd lowpass;   // 3x3 low-pass only
    double alpha = 0.0;
    double beta = 0.0;
    double residual = 0.0;     // ||full - alpha demosaic - beta lowpass||_F / ||full||_F
};

IntraBlockDecomposition intra_block_decomposition(BayerPattern cfa, GreenKernel gk = GreenKernel::Cross);

struct ModeCorrelation {
    BlockOffset offset;
    int mode = 0;  // u * 8 + v of the neighbour's coefficient
    double covariance = 0.0;
};

// Cross-block covariances of the central block's mode (u, v) with every mode of
// the other blocks of a 5x5 block grid, sorted by decreasing magnitude. Exact
// zeros are omitted.
std::vector<ModeCorrelation> mode_correlation_ranking(int u, int v, BayerPattern cfa = BayerPattern::RGGB,
                                                      GreenKernel gk = GreenKernel::Cross);

struct LabeledBlock {
    std::string label;  // C for the central block, else the neighbour's direction
    Eigen::MatrixXd values;
};

// Central block's own covariance followed by its cross-covariance with every
// other block of the neighbourhood.
std::vector<LabeledBlock> central_sub_blocks(const StationaryCovariance& s);

// matrix_csv preceded by a "# sub-block <label>" line.
std::string labeled_csv(const LabeledBlock& b);

// Direction name of an offset: C, N, NE, ..., or "di,dj" beyond the 8 neighbours.
std::string direction_name(BlockOffset off);

// Comma-separated rows at round-trip precision.
std::string matrix_csv(const Eigen::MatrixXd& m);
void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path);

std::string ranking_csv(const std::vector<ModeCorrelation>& ranking);

}  // namespace jcns
