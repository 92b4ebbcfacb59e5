#include "jcns/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <utility>

#include "jcns/errors.hpp"

namespace jcns {

namespace {

using SpMat = SparseOperator::Matrix;

SpMat from_eigen_triplets(int rows, int cols, const std::vector<Eigen::Triplet<double>>& t) {
    SpMat m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

void drop_zeros(SpMat& m) {
    m.prune([](Eigen::Index, Eigen::Index, double v) { return v != 0.0; });
    m.makeCompressed();
}

OperatorKind demosaic_kind(Channel c) {
    switch (c) {
        case Channel::R: return OperatorKind::DemosaicR;
        case Channel::G: return OperatorKind::DemosaicG;
        case Channel::B: return OperatorKind::DemosaicB;
    }
    return OperatorKind::DemosaicG;
}

// Applies a kernel at every photo-site of a side x side patch, truncating and
// renormalising where taps fall outside.
template <typename KernelFn>
SpMat kernel_operator(int side, KernelFn&& kernel_at) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(side) * side * 5);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const std::vector<KernelTap> taps = kernel_at(r, c);
            double kept = 0.0;
            for (const auto& tap : taps) {
                const int rr = r + tap.dr;
                const int cc = c + tap.dc;
                if (rr >= 0 && rr < side && cc >= 0 && cc < side) {
                    kept += tap.weight;
                }
            }
            const int row = r * side + c;
            for (const auto& tap : taps) {
                const int rr = r + tap.dr;
                const int cc = c + tap.dc;
                if (rr >= 0 && rr < side && cc >= 0 && cc < side) {
                    const double w = kept == 1.0 ? tap.weight : tap.weight / kept;
                    t.emplace_back(row, rr * side + cc, w);
                }
            }
        }
    }
    return from_eigen_triplets(side * side, side * side, t);
}

}  // namespace

std::string to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::DemosaicR: return "demosaic_r";
        case OperatorKind::DemosaicG: return "demosaic_g";
        case OperatorKind::DemosaicB: return "demosaic_b";
        case OperatorKind::Luminance: return "luminance";
        case OperatorKind::Lowpass: return "lowpass";
        case OperatorKind::Selection: return "selection";
        case OperatorKind::Permutation: return "permutation";
        case OperatorKind::Dct: return "dct";
        case OperatorKind::Assembled: return "assembled";
    }
    return "?";
}

OperatorKind parse_operator_kind(const std::string& name) {
    for (auto k : {OperatorKind::DemosaicR, OperatorKind::DemosaicG, OperatorKind::DemosaicB, OperatorKind::Luminance,
                   OperatorKind::Lowpass, OperatorKind::Selection, OperatorKind::Permutation, OperatorKind::Dct,
                   OperatorKind::Assembled}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw InvalidArgument("unknown operator kind '" + name + "'");
}

GreenKernel parse_green_kernel(const std::string& name) {
    if (name == "cross") return GreenKernel::Cross;
    if (name == "corner") return GreenKernel::Corner;
    throw InvalidArgument("unknown green kernel '" + name + "' (expected cross|corner)");
}

std::string to_string(GreenKernel gk) { return gk == GreenKernel::Cross ? "cross" : "corner"; }

SparseOperator::SparseOperator(OperatorKind kind, Matrix m) : kind_(kind), m_(std::move(m)) {
    m_.makeCompressed();
}

SparseOperator SparseOperator::from_triplets(OperatorKind kind, int rows, int cols, std::span<const Triplet> entries) {
    if (rows <= 0 || cols <= 0) {
        throw InvalidArgument("operator dimensions must be positive");
    }
    std::set<std::pair<int, int>> seen;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(entries.size());
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
            throw InvalidArgument("operator entry out of range");
        }
        if (!seen.emplace(e.row, e.col).second) {
            throw InvalidArgument("duplicate operator entry (" + std::to_string(e.row) + ", " +
                                  std::to_string(e.col) + ")");
        }
        t.emplace_back(e.row, e.col, e.value);
    }
    return SparseOperator(kind, from_eigen_triplets(rows, cols, t));
}

std::vector<Triplet> SparseOperator::entries() const {
    std::vector<Triplet> out;
    out.reserve(static_cast<std::size_t>(m_.nonZeros()));
    for (int r = 0; r < m_.outerSize(); ++r) {
        for (Matrix::InnerIterator it(m_, r); it; ++it) {
            out.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
        }
    }
    return out;
}

Eigen::VectorXd SparseOperator::apply(const Eigen::VectorXd& x) const {
    if (x.size() != m_.cols()) {
        throw DimensionMismatch("operator applied to a vector of the wrong length");
    }
    return m_ * x;
}

void SparseOperator::check_invariants() const {
    switch (kind_) {
        case OperatorKind::Selection:
        case OperatorKind::Permutation:
            for (int r = 0; r < m_.outerSize(); ++r) {
                int count = 0;
                for (Matrix::InnerIterator it(m_, r); it; ++it) {
                    if (it.value() != 0.0 && it.value() != 1.0) {
                        throw InvalidArgument(to_string(kind_) + ": entries must be 0 or 1");
                    }
                    count += it.value() != 0.0;
                }
                if (count > 1) {
                    throw InvalidArgument(to_string(kind_) + ": more than one nonzero in a row");
                }
            }
            break;
        case OperatorKind::DemosaicR:
        case OperatorKind::DemosaicG:
        case OperatorKind::DemosaicB:
            for (int r = 0; r < m_.outerSize(); ++r) {
                double sum = 0.0;
                for (Matrix::InnerIterator it(m_, r); it; ++it) {
                    sum += it.value();
                }
                if (sum != 1.0) {
                    throw InvalidArgument(to_string(kind_) + ": row " + std::to_string(r) + " does not sum to 1");
                }
            }
            break;
        default:
            break;
    }
}

SparseOperator compose(const SparseOperator& lhs, const SparseOperator& rhs) {
    if (lhs.cols() != rhs.rows()) {
        throw DimensionMismatch("cannot compose operators: " + std::to_string(lhs.cols()) + " vs " +
                                std::to_string(rhs.rows()));
    }
    SpMat m = lhs.matrix() * rhs.matrix();
    drop_zeros(m);
    return SparseOperator(OperatorKind::Assembled, std::move(m));
}

std::vector<KernelTap> demosaic_kernel(Channel channel, BayerPattern cfa, long row, long col, GreenKernel gk) {
    const Channel site = cfa_color(cfa, row, col);
    if (site == channel) {
        return {{0, 0, 1.0}};
    }
    const std::vector<KernelTap> cross{{-1, 0, 0.25}, {0, -1, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}};
    const std::vector<KernelTap> corner{{-1, -1, 0.25}, {-1, 1, 0.25}, {1, -1, 0.25}, {1, 1, 0.25}};
    if (channel == Channel::G) {
        return gk == GreenKernel::Cross ? cross : corner;
    }
    if (site == Channel::G) {
        if (cfa_color(cfa, row, col + 1) == channel) {
            return {{0, -1, 0.5}, {0, 1, 0.5}};
        }
        return {{-1, 0, 0.5}, {1, 0, 0.5}};
    }
    // Red at a blue site or blue at a red site.
    return corner;
}

std::vector<KernelTap> luminance_kernel(BayerPattern cfa, long row, long col, GreenKernel gk) {
    std::map<std::pair<int, int>, double> merged;
    const std::pair<Channel, double> weights[] = {{Channel::R, kLumaR}, {Channel::G, kLumaG}, {Channel::B, kLumaB}};
    for (const auto& [ch, w] : weights) {
        for (const auto& tap : demosaic_kernel(ch, cfa, row, col, gk)) {
            merged[{tap.dr, tap.dc}] += w * tap.weight;
        }
    }
    std::vector<KernelTap> out;
    out.reserve(merged.size());
    for (const auto& [pos, w] : merged) {
        out.push_back({pos.first, pos.second, w});
    }
    return out;
}

std::vector<KernelTap> lowpass_kernel() {
    std::vector<KernelTap> k;
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            k.push_back({dr, dc, (dr == 0 && dc == 0 ? 4.0 : 1.0) / 12.0});
        }
    }
    return k;
}

SparseOperator build_demosaic(Channel channel, BayerPattern cfa, int side, GreenKernel gk) {
    if (side < 3) {
        throw InvalidArgument("demosaic patch side must be at least 3");
    }
    return SparseOperator(demosaic_kind(channel), kernel_operator(side, [&](int r, int c) {
                              return demosaic_kernel(channel, cfa, r, c, gk);
                          }));
}

SparseOperator build_luminance(BayerPattern cfa, int side, GreenKernel gk) {
    const auto dr = build_demosaic(Channel::R, cfa, side, gk);
    const auto dg = build_demosaic(Channel::G, cfa, side, gk);
    const auto db = build_demosaic(Channel::B, cfa, side, gk);
    SpMat l = kLumaR * dr.matrix() + kLumaG * dg.matrix() + kLumaB * db.matrix();
    drop_zeros(l);
    return SparseOperator(OperatorKind::Luminance, std::move(l));
}

SparseOperator build_lowpass(int side) {
    if (side < 3) {
        throw InvalidArgument("low-pass patch side must be at least 3");
    }
    const auto k = lowpass_kernel();
    return SparseOperator(OperatorKind::Lowpass, kernel_operator(side, [&](int, int) { return k; }));
}

SparseOperator build_selection(int side, int border) {
    if (border < 0 || side <= 2 * border) {
        throw InvalidArgument("selection requires side > 2 * border");
    }
    const int inner = side - 2 * border;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(inner) * inner);
    for (int r = 0; r < inner; ++r) {
        for (int c = 0; c < inner; ++c) {
            t.emplace_back(r * inner + c, (r + border) * side + (c + border), 1.0);
        }
    }
    return SparseOperator(OperatorKind::Selection, from_eigen_triplets(inner * inner, side * side, t));
}

SparseOperator build_permutation(std::span<const BlockPos> block_order, int grid) {
    if (block_order.empty()) {
        throw InvalidArgument("permutation needs at least one block");
    }
    if (grid < 1) {
        throw InvalidArgument("block grid must be positive");
    }
    const int width = 8 * grid;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(block_order.size() * 64);
    for (std::size_t k = 0; k < block_order.size(); ++k) {
        const BlockPos b = block_order[k];
        if (b.i < 0 || b.i >= grid || b.j < 0 || b.j >= grid) {
            throw InvalidArgument("block label outside the block grid");
        }
        for (std::size_t q = 0; q < k; ++q) {
            if (block_order[q] == b) {
                throw InvalidArgument("duplicate block label in permutation");
            }
        }
        for (int r = 0; r < 8; ++r) {
            for (int c = 0; c < 8; ++c) {
                t.emplace_back(static_cast<int>(k) * 64 + r * 8 + c, (8 * b.i + r) * width + 8 * b.j + c, 1.0);
            }
        }
    }
    return SparseOperator(OperatorKind::Permutation,
                          from_eigen_triplets(static_cast<int>(block_order.size()) * 64, width * width, t));
}

Eigen::Matrix<double, 8, 8> dct_basis() {
    using std::numbers::pi;
    const double a = std::cos(pi / 4) / 2;
    const double b = std::cos(pi / 16) / 2;
    const double c = std::cos(pi / 8) / 2;
    const double d = std::cos(3 * pi / 16) / 2;
    const double e = std::cos(5 * pi / 16) / 2;
    const double f = std::cos(3 * pi / 8) / 2;
    const double g = std::cos(7 * pi / 16) / 2;
    Eigen::Matrix<double, 8, 8> A;
    // clang-format off
    A << a,  a,  a,  a,  a,  a,  a,  a,
         b,  d,  e,  g, -g, -e, -d, -b,
         c,  f, -f, -c, -c, -f,  f,  c,
         d, -g, -b, -e,  e,  b,  g, -d,
         a, -a, -a,  a,  a, -a, -a,  a,
         e, -b,  g,  d, -d, -g,  b, -e,
         f, -c,  c, -f, -f,  c, -c,  f,
         g, -e,  d, -b,  b, -d,  e, -g;
    // clang-format on
    return A;
}

SparseOperator build_transpose64() {
    // Entry (i, j) is 1 iff i == 8 * (j mod 8) + floor(j / 8).
    std::vector<Eigen::Triplet<double>> t;
    for (int j = 0; j < 64; ++j) {
        t.emplace_back(8 * (j % 8) + j / 8, j, 1.0);
    }
    return SparseOperator(OperatorKind::Permutation, from_eigen_triplets(64, 64, t));
}

Eigen::Matrix<double, 64, 64> dct_block_matrix() {
    const Eigen::Matrix<double, 8, 8> A = dct_basis();
    Eigen::Matrix<double, 64, 64> av = Eigen::Matrix<double, 64, 64>::Zero();
    for (int k = 0; k < 8; ++k) {
        av.block<8, 8>(8 * k, 8 * k) = A;
    }
    const Eigen::Matrix<double, 64, 64> tr = build_transpose64().dense();
    return av * tr * av * tr;
}

SparseOperator build_dct(int n_blocks) {
    if (n_blocks < 1) {
        throw InvalidArgument("DCT needs at least one block");
    }
    const Eigen::Matrix<double, 64, 64> tb = dct_block_matrix();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(n_blocks) * 4096);
    for (int k = 0; k < n_blocks; ++k) {
        for (int r = 0; r < 64; ++r) {
            for (int c = 0; c < 64; ++c) {
                if (tb(r, c) != 0.0) {
                    t.emplace_back(64 * k + r, 64 * k + c, tb(r, c));
                }
            }
        }
    }
    return SparseOperator(OperatorKind::Dct, from_eigen_triplets(64 * n_blocks, 64 * n_blocks, t));
}

PipelineMatrix assemble_blocks(std::span<const BlockOffset> blocks, BayerPattern image_cfa, GreenKernel gk,
                               FrontEnd fe, int grid) {
    if (grid < 1 || grid % 2 == 0) {
        throw InvalidArgument("block grid must be odd and positive");
    }
    const int half = grid / 2;
    const int side = 8 * grid + 2;
    std::vector<BlockPos> order;
    order.reserve(blocks.size());
    for (const auto& o : blocks) {
        order.push_back({o.di + half, o.dj + half});
    }
    // Patch origin sits one photo-site above/left of an 8-aligned block corner.
    const BayerPattern patch_cfa = shift_pattern(image_cfa, -1, -1);

    SparseOperator front = [&] {
        switch (fe) {
            case FrontEnd::Luminance: return build_luminance(patch_cfa, side, gk);
            case FrontEnd::RedOnly: return build_demosaic(Channel::R, patch_cfa, side, gk);
            case FrontEnd::Lowpass: return build_lowpass(side);
        }
        return build_luminance(patch_cfa, side, gk);
    }();
    const SparseOperator sel = build_selection(side, 1);
    const SparseOperator perm = build_permutation(order, grid);
    const SparseOperator dct = build_dct(static_cast<int>(order.size()));

    const SparseOperator m = compose(dct, compose(compose(perm, sel), front));
    return PipelineMatrix{m, static_cast<int>(order.size()), side, grid,
                          std::vector<BlockOffset>(blocks.begin(), blocks.end())};
}

PipelineMatrix assemble(MacroLattice lattice, BayerPattern image_cfa, GreenKernel gk) {
    std::vector<BlockOffset> blocks{offset_of(BlockLabel::C)};
    for (BlockLabel l : neighbor_labels(lattice)) {
        blocks.push_back(offset_of(l));
    }
    return assemble_blocks(blocks, image_cfa, gk);
}

void dct8x8(const double* in, double* out) {
    static const Eigen::Matrix<double, 8, 8> A = dct_basis();
    Eigen::Map<const Eigen::Matrix<double, 8, 8, Eigen::RowMajor>> b(in);
    Eigen::Map<Eigen::Matrix<double, 8, 8, Eigen::RowMajor>> o(out);
    o.noalias() = A * b * A.transpose();
}

void idct8x8(const double* in, double* out) {
    static const Eigen::Matrix<double, 8, 8> A = dct_basis();
    Eigen::Map<const Eigen::Matrix<double, 8, 8, Eigen::RowMajor>> b(in);
    Eigen::Map<Eigen::Matrix<double, 8, 8, Eigen::RowMajor>> o(out);
    o.noalias() = A.transpose() * b * A;
}

}  // namespace jcns
