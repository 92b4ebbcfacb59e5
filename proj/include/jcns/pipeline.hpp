#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "jcns/lattice.hpp"
#include "jcns/raw_io.hpp"

namespace jcns {

enum class OperatorKind {
    DemosaicR,
    DemosaicG,
    DemosaicB,
    Luminance,
    Lowpass,
    Selection,
    Permutation,
    Dct,
    Assembled,
};

std::string to_string(OperatorKind kind);
OperatorKind parse_operator_kind(const std::string& name);

// Interpolation used for the green channel at red/blue photo-sites.
// Cross is bilinear demosaicking; Corner is the diagonal kernel some texts print.
enum class GreenKernel { Cross, Corner };

GreenKernel parse_green_kernel(const std::string& name);
std::string to_string(GreenKernel gk);

// Which linear front-end precedes the block DCT.
enum class FrontEnd {
    Luminance,  // bilinear demosaicking + luminance averaging
    RedOnly,    // bilinear demosaicking of the red channel only
    Lowpass,    // 3x3 low-pass filter (1/12)[1 1 1; 1 4 1; 1 1 1], no CFA
};

inline constexpr double kLumaR = 0.2126;
inline constexpr double kLumaG = 0.7152;
inline constexpr double kLumaB = 0.0722;

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

class SparseOperator {
public:
    using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    SparseOperator(OperatorKind kind, Matrix m);

    // Throws InvalidArgument on out-of-range or duplicate (row, col) pairs.
    static SparseOperator from_triplets(OperatorKind kind, int rows, int cols, std::span<const Triplet> entries);

    OperatorKind kind() const noexcept { return kind_; }
    int rows() const noexcept { return static_cast<int>(m_.rows()); }
    int cols() const noexcept { return static_cast<int>(m_.cols()); }
    const Matrix& matrix() const noexcept { return m_; }

    // Stored entries in row-major order.
    std::vector<Triplet> entries() const;

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(m_); }

    // Checks the invariants of this operator's kind; throws InvalidArgument.
    void check_invariants() const;

private:
    OperatorKind kind_;
    Matrix m_;
};

// lhs * rhs, tagged Assembled.
SparseOperator compose(const SparseOperator& lhs, const SparseOperator& rhs);

struct KernelTap {
    int dr = 0;
    int dc = 0;
    double weight = 0.0;
};

// Untruncated bilinear kernel interpolating `channel` at photo-site (row, col) of a
// mosaic with pattern `cfa` at its origin.
std::vector<KernelTap> demosaic_kernel(Channel channel, BayerPattern cfa, long row, long col,
                                       GreenKernel gk = GreenKernel::Cross);

// Luminance kernel at (row, col): the three channel kernels weighted and merged.
std::vector<KernelTap> luminance_kernel(BayerPattern cfa, long row, long col, GreenKernel gk = GreenKernel::Cross);

std::vector<KernelTap> lowpass_kernel();

// side^2 x side^2 interpolation operator on a side x side patch whose (0,0)
// photo-site has pattern `cfa`. Kernels leaving the patch are truncated and
// renormalised to sum to one.
SparseOperator build_demosaic(Channel channel, BayerPattern cfa, int side, GreenKernel gk = GreenKernel::Cross);

SparseOperator build_luminance(BayerPattern cfa, int side, GreenKernel gk = GreenKernel::Cross);

SparseOperator build_lowpass(int side);

// (side - 2*border)^2 x side^2 interior selector, row-major vectorisation.
SparseOperator build_selection(int side, int border = 1);

// Stacks the row-major 8x8 block selectors P_{i,j} of a (8*grid)^2 pixel array.
struct BlockPos {
    int i = 0;
    int j = 0;
    bool operator==(const BlockPos&) const = default;
};
SparseOperator build_permutation(std::span<const BlockPos> block_order, int grid = 3);

// The 8x8 orthonormal DCT-II matrix built from a..g = cos(k*pi/16)/2.
Eigen::Matrix<double, 8, 8> dct_basis();

// Transposition operator on row/column vectorised 8x8 blocks.
SparseOperator build_transpose64();

// T_b = A_v T_r A_v T_r for one block; maps vec_R(B) to vec_R(A B A^t).
Eigen::Matrix<double, 64, 64> dct_block_matrix();

// Block-diagonal DCT over n blocks.
SparseOperator build_dct(int n_blocks);

struct PipelineMatrix {
    SparseOperator m;
    int n_blocks = 0;
    int patch_side = 0;
    int grid = 3;
    std::vector<BlockOffset> block_order;  // relative to the central block
};

// M = T P S L for the given block list (central block first by convention).
// `image_cfa` is the pattern at the top-left of each 8x8 block; the patch starts
// one photo-site above and to the left of the block grid.
PipelineMatrix assemble_blocks(std::span<const BlockOffset> blocks, BayerPattern image_cfa,
                               GreenKernel gk = GreenKernel::Cross, FrontEnd fe = FrontEnd::Luminance,
                               int grid = 3);

// Full neighbourhood of a macro-lattice: C followed by neighbor_labels(lattice).
PipelineMatrix assemble(MacroLattice lattice, BayerPattern image_cfa, GreenKernel gk = GreenKernel::Cross);

// 2-D DCT of an 8x8 block via direct separable evaluation (no matrices).
void dct8x8(const double* in, double* out);
void idct8x8(const double* in, double* out);

}  // namespace jcns
