#include "jcns/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jcns/errors.hpp"

namespace jcns {

namespace {

// Rejects factors whose pivots collapsed below this fraction of the mean diagonal.
constexpr double kPivotFloor = 1e-13;

bool try_llt(const Eigen::MatrixXd& a, double floor, Eigen::MatrixXd& lower) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        return false;
    }
    lower = llt.matrixL();
    for (Eigen::Index i = 0; i < lower.rows(); ++i) {
        const double p = lower(i, i);
        if (!std::isfinite(p) || p * p <= floor) {
            return false;
        }
    }
    return true;
}

}  // namespace

int reflect101(int i, int n) noexcept {
    if (n == 1) {
        return 0;
    }
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) {
        i += period;
    }
    return i < n ? i : period - i;
}

void CovarianceMatrix::check_invariants() const {
    if (values.rows() != values.cols()) {
        throw InvalidArgument("covariance matrix must be square");
    }
    const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
    if ((values - values.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InvalidArgument("covariance matrix is not symmetric");
    }
    if (values.rows() == 0) {
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(values, Eigen::EigenvaluesOnly);
    const double floor = -1e-8 * values.trace() / static_cast<double>(values.rows());
    if (es.eigenvalues().minCoeff() < floor) {
        std::ostringstream msg;
        msg << "covariance matrix is not PSD (min eigenvalue " << es.eigenvalues().minCoeff() << ")";
        throw InvalidArgument(msg.str());
    }
}

double photon_variance(double x, const SensorParams& p) noexcept {
    const double v = (p.a2 - p.a1) * x + (p.b2 - p.b1);
    return v > 0.0 ? v : 0.0;
}

DiagonalCovariance sigma_p(std::span<const double> patch, int side, const SensorParams& params) {
    if (side <= 0 || patch.size() != static_cast<std::size_t>(side) * static_cast<std::size_t>(side)) {
        throw DimensionMismatch("patch size does not match side x side");
    }
    DiagonalCovariance d;
    d.variances.resize(static_cast<Eigen::Index>(patch.size()));
    for (std::size_t i = 0; i < patch.size(); ++i) {
        d.variances[static_cast<Eigen::Index>(i)] = photon_variance(patch[i], params);
    }
    return d;
}

CovarianceMatrix sigma_d(const PipelineMatrix& m, const DiagonalCovariance& sp) {
    if (sp.variances.size() != m.m.cols()) {
        throw DimensionMismatch("photo-site covariance has " + std::to_string(sp.variances.size()) +
                                " entries, operator expects " + std::to_string(m.m.cols()));
    }
    const SparseOperator::Matrix& mm = m.m.matrix();
    SparseOperator::Matrix weighted = mm * sp.variances.asDiagonal();
    Eigen::SparseMatrix<double, Eigen::RowMajor> prod = weighted * mm.transpose();
    CovarianceMatrix out{Eigen::MatrixXd(prod)};
    out.values = (0.5 * (out.values + out.values.transpose())).eval();
    return out;
}

CholeskyFactor cholesky(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols()) {
        throw DimensionMismatch("cholesky needs a square matrix");
    }
    CholeskyFactor f;
    const Eigen::Index n = cov.rows();
    const double mean_diag = n > 0 ? cov.diagonal().mean() : 0.0;
    if (n == 0 || cov.diagonal().cwiseAbs().maxCoeff() == 0.0) {
        f.lower = Eigen::MatrixXd::Zero(n, n);
        f.zero = true;
        return f;
    }
    if (!(mean_diag > 0.0)) {
        throw SingularCovariance("covariance has a non-positive mean diagonal");
    }
    const double floor = kPivotFloor * mean_diag;
    for (double eps : kJitterSchedule) {
        const double jitter = eps * mean_diag;
        Eigen::MatrixXd a = cov;
        a.diagonal().array() += jitter;
        if (try_llt(a, floor, f.lower)) {
            f.epsilon = eps;
            f.jitter = jitter;
            return f;
        }
    }
    throw SingularCovariance("covariance is not positive definite even with jitter 1e-8");
}

ConditionalGaussian condition(const CovarianceMatrix& full, const Eigen::VectorXd& known, int block_dim) {
    const Eigen::Index n = full.values.rows();
    if (block_dim <= 0 || n <= block_dim) {
        throw InvalidArgument("conditioning needs at least one known block");
    }
    const Eigen::Index rest = n - block_dim;
    if (known.size() != rest) {
        throw DimensionMismatch("known vector has " + std::to_string(known.size()) + " entries, expected " +
                                std::to_string(rest));
    }
    const auto s11 = full.values.topLeftCorner(block_dim, block_dim);
    const auto s21 = full.values.bottomLeftCorner(rest, block_dim);
    const Eigen::MatrixXd s22 = full.values.bottomRightCorner(rest, rest);

    ConditionalGaussian g;
    Eigen::MatrixXd cov;
    const CholeskyFactor f22 = cholesky(s22);
    if (f22.zero) {
        g.mean = Eigen::VectorXd::Zero(block_dim);
        cov = s11;
    } else {
        g.known_jitter = f22.jitter;
        const auto l22 = f22.lower.triangularView<Eigen::Lower>();
        const Eigen::MatrixXd v = l22.solve(s21);
        const Eigen::VectorXd w = l22.solve(known);
        g.mean = v.transpose() * w;
        cov = s11;
        cov.noalias() -= v.transpose() * v;
    }
    g.cov.values = 0.5 * (cov + cov.transpose());
    const CholeskyFactor fc = cholesky(g.cov.values);
    g.chol = fc.lower;
    g.chol_jitter = fc.jitter;
    return g;
}

ImageCovarianceModel::ImageCovarianceModel(const RawImage& raw, GreenKernel gk)
    : width_(raw.width),
      height_(raw.height),
      blocks_w_(raw.width / 8),
      blocks_h_(raw.height / 8),
      cfa_(raw.cfa),
      gk_(gk),
      tb_(dct_block_matrix()) {
    if (raw.width % 8 != 0 || raw.height % 8 != 0 || raw.width < 8 || raw.height < 8) {
        throw DimensionMismatch("image dimensions must be positive multiples of 8");
    }
    variance_.resize(raw.data.size());
    for (std::size_t i = 0; i < raw.data.size(); ++i) {
        variance_[i] = photon_variance(raw.data[i], raw.params);
    }
    for (int phase = 0; phase < 4; ++phase) {
        kernels_[phase] = luminance_kernel(cfa_, phase / 2, phase % 2, gk_);
    }
}

void ImageCovarianceModel::pixel_taps(int row, int col, std::vector<Tap>& out) const {
    out.clear();
    for (const auto& k : kernels_[(row % 2) * 2 + (col % 2)]) {
        const int r = reflect101(row + k.dr, height_);
        const int c = reflect101(col + k.dc, width_);
        const int site = r * width_ + c;
        auto it = std::find_if(out.begin(), out.end(), [&](const Tap& t) { return t.site == site; });
        if (it != out.end()) {
            it->weight += k.weight;
        } else {
            out.push_back({site, k.weight});
        }
    }
}

double ImageCovarianceModel::block_trace(int block) const {
    const int bi = block / blocks_w_;
    const int bj = block % blocks_w_;
    std::vector<Tap> taps;
    double trace = 0.0;
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            pixel_taps(8 * bi + r, 8 * bj + c, taps);
            for (const auto& t : taps) {
                trace += t.weight * t.weight * variance_[static_cast<std::size_t>(t.site)];
            }
        }
    }
    return trace;
}

CovarianceMatrix ImageCovarianceModel::block_covariance(std::span<const int> blocks) const {
    const int nb = static_cast<int>(blocks.size());
    const int np = 64 * nb;

    // Scatter list: (site, local pixel, weight), grouped by site after sorting.
    struct Entry {
        int site;
        int pixel;
        double weight;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(np) * 9);
    std::vector<Tap> taps;
    for (int k = 0; k < nb; ++k) {
        const int b = blocks[static_cast<std::size_t>(k)];
        if (b < 0 || b >= blocks_w_ * blocks_h_) {
            throw InvalidArgument("block index out of range");
        }
        const int bi = b / blocks_w_;
        const int bj = b % blocks_w_;
        for (int r = 0; r < 8; ++r) {
            for (int c = 0; c < 8; ++c) {
                pixel_taps(8 * bi + r, 8 * bj + c, taps);
                for (const auto& t : taps) {
                    entries.push_back({t.site, 64 * k + 8 * r + c, t.weight});
                }
            }
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.site != b.site ? a.site < b.site : a.pixel < b.pixel;
    });

    // Pixel-domain covariance G = W diag(var) W^t.
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(np, np);
    std::vector<char> touched(static_cast<std::size_t>(nb) * nb, 0);
    for (std::size_t s = 0; s < entries.size();) {
        std::size_t e = s;
        while (e < entries.size() && entries[e].site == entries[s].site) {
            ++e;
        }
        const double var = variance_[static_cast<std::size_t>(entries[s].site)];
        if (var > 0.0) {
            for (std::size_t a = s; a < e; ++a) {
                const double wa = var * entries[a].weight;
                for (std::size_t b = s; b < e; ++b) {
                    g(entries[a].pixel, entries[b].pixel) += wa * entries[b].weight;
                }
                for (std::size_t b = s; b < e; ++b) {
                    touched[static_cast<std::size_t>(entries[a].pixel / 64) * nb + entries[b].pixel / 64] = 1;
                }
            }
        }
        s = e;
    }

    // Block-wise DCT on both sides: Sigma_pq = T_b G_pq T_b^t.
    CovarianceMatrix out{Eigen::MatrixXd::Zero(np, np)};
    Eigen::Matrix<double, 64, 64> tmp;
    for (int p = 0; p < nb; ++p) {
        for (int q = p; q < nb; ++q) {
            if (!touched[static_cast<std::size_t>(p) * nb + q]) {
                continue;
            }
            tmp.noalias() = tb_ * g.block<64, 64>(64 * p, 64 * q);
            out.values.block<64, 64>(64 * p, 64 * q).noalias() = tmp * tb_.transpose();
            if (q != p) {
                out.values.block<64, 64>(64 * q, 64 * p) = out.values.block<64, 64>(64 * p, 64 * q).transpose();
            }
        }
    }
    out.values = (0.5 * (out.values + out.values.transpose())).eval();
    return out;
}

}  // namespace jcns
