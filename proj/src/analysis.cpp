#include "jcns/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "jcns/errors.hpp"

namespace jcns {

std::size_t StationaryCovariance::position(BlockOffset off) const {
    const auto it = std::find(block_order.begin(), block_order.end(), off);
    if (it == block_order.end()) {
        throw InvalidArgument("offset not part of this neighbourhood");
    }
    return static_cast<std::size_t>(it - block_order.begin());
}

StationaryCovariance stationary_covariance(std::span<const BlockOffset> blocks, BayerPattern cfa, FrontEnd fe,
                                           GreenKernel gk, int grid) {
    const PipelineMatrix m = assemble_blocks(blocks, cfa, gk, fe, grid);
    DiagonalCovariance unit{Eigen::VectorXd::Ones(m.m.cols())};
    return {sigma_d(m, unit), m.block_order};
}

StationaryCovariance neighborhood_covariance(MacroLattice lattice, BayerPattern cfa, FrontEnd fe, GreenKernel gk) {
    std::vector<BlockOffset> blocks{BlockOffset{0, 0}};
    for (BlockLabel l : neighbor_labels(lattice)) {
        blocks.push_back(offset_of(l));
    }
    return stationary_covariance(blocks, cfa, fe, gk);
}

IntraBlockDecomposition intra_block_decomposition(BayerPattern cfa, GreenKernel gk) {
    const BlockOffset c[] = {BlockOffset{0, 0}};
    IntraBlockDecomposition d;
    d.full = stationary_covariance(c, cfa, FrontEnd::Luminance, gk).sub_block(0, 0);
    d.demosaic = stationary_covariance(c, cfa, FrontEnd::RedOnly, gk).sub_block(0, 0);
    d.lowpass = stationary_covariance(c, cfa, FrontEnd::Lowpass, gk).sub_block(0, 0);

    // Least squares over all entries: [vec(D) vec(L)] [alpha beta]^t ~ vec(F).
    Eigen::MatrixXd a(d.full.size(), 2);
    a.col(0) = d.demosaic.reshaped();
    a.col(1) = d.lowpass.reshaped();
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(d.full.reshaped());
    d.alpha = coef[0];
    d.beta = coef[1];
    d.residual = (d.full - d.alpha * d.demosaic - d.beta * d.lowpass).norm() / d.full.norm();
    return d;
}

std::vector<ModeCorrelation> mode_correlation_ranking(int u, int v, BayerPattern cfa, GreenKernel gk) {
    if (u < 0 || u >= 8 || v < 0 || v >= 8) {
        throw InvalidArgument("mode indices must be in [0, 8)");
    }
    std::vector<BlockOffset> blocks{BlockOffset{0, 0}};
    for (int di = -2; di <= 2; ++di) {
        for (int dj = -2; dj <= 2; ++dj) {
            if (di != 0 || dj != 0) {
                blocks.push_back({di, dj});
            }
        }
    }
    const StationaryCovariance s = stationary_covariance(blocks, cfa, FrontEnd::Luminance, gk, 5);
    const int mode = u * 8 + v;
    std::vector<ModeCorrelation> out;
    for (std::size_t b = 1; b < blocks.size(); ++b) {
        for (int m = 0; m < 64; ++m) {
            const double c = s.sigma.values(mode, static_cast<Eigen::Index>(64 * b + m));
            if (c != 0.0) {
                out.push_back({blocks[b], m, c});
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const ModeCorrelation& a, const ModeCorrelation& b) {
        return std::abs(a.covariance) > std::abs(b.covariance);
    });
    return out;
}

std::string direction_name(BlockOffset off) {
    static const char* names[3][3] = {{"NW", "N", "NE"}, {"W", "C", "E"}, {"SW", "S", "SE"}};
    if (std::abs(off.di) <= 1 && std::abs(off.dj) <= 1) {
        return names[off.di + 1][off.dj + 1];
    }
    return std::to_string(off.di) + "," + std::to_string(off.dj);
}

std::vector<LabeledBlock> central_sub_blocks(const StationaryCovariance& s) {
    std::vector<LabeledBlock> out;
    for (std::size_t b = 0; b < s.block_order.size(); ++b) {
        out.push_back({direction_name(s.block_order[b]), s.sub_block(0, b)});
    }
    return out;
}

std::string labeled_csv(const LabeledBlock& b) {
    return "# sub-block " + b.label + "\n" + matrix_csv(b.values);
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
    std::string out;
    char buf[32];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            if (c > 0) {
                out += ',';
            }
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    f << matrix_csv(m);
    if (!f) {
        throw Error("failed writing " + path.string());
    }
}

std::string ranking_csv(const std::vector<ModeCorrelation>& ranking) {
    std::string out = "rank,direction,di,dj,u,v,covariance\n";
    char buf[160];
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        const auto& r = ranking[i];
        std::snprintf(buf, sizeof buf, "%zu,%s,%d,%d,%d,%d,%.17g\n", i + 1, direction_name(r.offset).c_str(),
                      r.offset.di, r.offset.dj, r.mode / 8, r.mode % 8, r.covariance);
        out += buf;
    }
    return out;
}

}  // namespace jcns
