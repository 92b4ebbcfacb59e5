#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jcns/pipeline.hpp"
#include "jcns/raw_io.hpp"

namespace jcns {

// Diagonal of the photo-site stego covariance.
struct DiagonalCovariance {
    Eigen::VectorXd variances;
};

struct CovarianceMatrix {
    Eigen::MatrixXd values;

    int dim() const noexcept { return static_cast<int>(values.rows()); }

    // Symmetric to 1e-10 relative and smallest eigenvalue >= -1e-8 * trace / dim.
    // Throws InvalidArgument otherwise.
    void check_invariants() const;
};

// Lower-triangular factor with the jitter that was needed to obtain it.
struct CholeskyFactor {
    Eigen::MatrixXd lower;
    double epsilon = 0.0;  // relative level from the jitter schedule (0 = none)
    double jitter = 0.0;   // absolute amount added to the diagonal
    bool zero = false;     // input had zero trace; lower is all zeros
};

struct ConditionalGaussian {
    Eigen::VectorXd mean;
    CovarianceMatrix cov;
    Eigen::MatrixXd chol;
    double known_jitter = 0.0;  // jitter applied to the conditioning block
    double chol_jitter = 0.0;   // jitter applied to the Schur complement
};

// Relative jitter levels tried in turn when a factorisation fails.
inline constexpr double kJitterSchedule[] = {0.0, 1e-12, 1e-10, 1e-8};

// max(0, (a2 - a1) x + (b2 - b1)).
double photon_variance(double x, const SensorParams& params) noexcept;

// `patch` is a row-major side x side array of photo-site values.
DiagonalCovariance sigma_p(std::span<const double> patch, int side, const SensorParams& params);

// M diag(sp) M^t, symmetrised.
CovarianceMatrix sigma_d(const PipelineMatrix& m, const DiagonalCovariance& sp);

// Cholesky with the escalating jitter policy; throws SingularCovariance if even
// the largest jitter fails.
CholeskyFactor cholesky(const Eigen::MatrixXd& cov);

// Gaussian conditioning of the leading `block_dim` coordinates on the rest:
//   mean = S12 S22^-1 known,  cov = S11 - S12 S22^-1 S21.
ConditionalGaussian condition(const CovarianceMatrix& full, const Eigen::VectorXd& known, int block_dim = 64);

// Per-image covariance model used by the embedder. Photo-sites beyond the image
// edge are mirrored without repeating the edge (reflect-101), which keeps the
// CFA phase; mirrored taps refer to the same physical photo-site.
class ImageCovarianceModel {
public:
    ImageCovarianceModel(const RawImage& raw, GreenKernel gk = GreenKernel::Cross);

    int blocks_w() const noexcept { return blocks_w_; }
    int blocks_h() const noexcept { return blocks_h_; }

    // Covariance of the developed stego DCT coefficients of the listed blocks
    // (row-major block indices), in list order.
    CovarianceMatrix block_covariance(std::span<const int> blocks) const;

    // Trace of one block's own covariance without building it.
    double block_trace(int block) const;

private:
    struct Tap {
        int site;
        double weight;
    };
    void pixel_taps(int row, int col, std::vector<Tap>& out) const;

    int width_;
    int height_;
    int blocks_w_;
    int blocks_h_;
    BayerPattern cfa_;
    GreenKernel gk_;
    std::vector<double> variance_;
    std::vector<KernelTap> kernels_[4];  // by CFA phase (row % 2) * 2 + col % 2
    Eigen::Matrix<double, 64, 64> tb_;
};

// Mirror index into [0, n) without repeating the edge sample.
int reflect101(int i, int n) noexcept;

}  // namespace jcns
