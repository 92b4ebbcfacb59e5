// Reference computations used by the tests. Nothing here calls into the library
// except for plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "jcns/raw_io.hpp"

namespace oracle {

// Orthonormal 2-D DCT-II by direct summation. in/out are row-major 8x8 and
// out[u*8+v] has u the vertical frequency.
inline void dct2(const double* in, double* out) {
    const double pi = std::numbers::pi;
    for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x) {
                for (int y = 0; y < 8; ++y) {
                    acc += in[x * 8 + y] * std::cos((2 * x + 1) * u * pi / 16) * std::cos((2 * y + 1) * v * pi / 16);
                }
            }
            const double cu = u == 0 ? std::sqrt(0.125) : 0.5;
            const double cv = v == 0 ? std::sqrt(0.125) : 0.5;
            out[u * 8 + v] = cu * cv * acc;
        }
    }
}

// Bilinear demosaicking as masked convolutions (cross kernel for green),
// followed by luminance. Only pixels with a full 3x3 neighbourhood are valid.
// Returns an h x w plane; border pixels are left at zero.
inline std::vector<double> luminance_conv(const std::vector<double>& x, int h, int w, jcns::BayerPattern cfa) {
    static const double krb[3][3] = {{0.25, 0.5, 0.25}, {0.5, 1.0, 0.5}, {0.25, 0.5, 0.25}};
    static const double kg[3][3] = {{0.0, 0.25, 0.0}, {0.25, 1.0, 0.25}, {0.0, 0.25, 0.0}};
    std::vector<double> out(x.size(), 0.0);
    for (int r = 1; r + 1 < h; ++r) {
        for (int c = 1; c + 1 < w; ++c) {
            double ch[3] = {0, 0, 0};
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const auto col = jcns::cfa_color(cfa, r + dr, c + dc);
                    const double v = x[static_cast<std::size_t>(r + dr) * w + c + dc];
                    if (col == jcns::Channel::G) {
                        ch[1] += kg[dr + 1][dc + 1] * v;
                    } else {
                        ch[static_cast<int>(col)] += krb[dr + 1][dc + 1] * v;
                    }
                }
            }
            out[static_cast<std::size_t>(r) * w + c] = 0.2126 * ch[0] + 0.7152 * ch[1] + 0.0722 * ch[2];
        }
    }
    return out;
}

// Accumulates second moments of zero-mean vectors in batches.
class MomentAccumulator {
public:
    explicit MomentAccumulator(Eigen::Index dim) : sum_(Eigen::MatrixXd::Zero(dim, dim)) {}

    // Columns of `samples` are draws.
    void add(const Eigen::MatrixXd& samples) {
        sum_.selfadjointView<Eigen::Lower>().rankUpdate(samples);
        n_ += samples.cols();
    }

    Eigen::MatrixXd covariance() const {
        Eigen::MatrixXd c = sum_.selfadjointView<Eigen::Lower>();
        return c / static_cast<double>(n_);
    }
    long n() const { return n_; }

private:
    Eigen::MatrixXd sum_;
    long n_ = 0;
};

// Largest |est - ref| / SE over entries, with SE of a zero-mean Gaussian second
// moment: sqrt((S_ii S_jj + S_ij^2) / n), times `scale` (sqrt(2) for two samples).
inline double max_z(const Eigen::MatrixXd& est, const Eigen::MatrixXd& ref, long n, double scale = 1.0) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < ref.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double se = scale * std::sqrt((ref(i, i) * ref(j, j) + ref(i, j) * ref(i, j)) / n);
            const double d = std::abs(est(i, j) - ref(i, j));
            if (se == 0.0) {
                if (d > 1e-9 * (1.0 + std::abs(ref(i, j)))) {
                    return INFINITY;
                }
                continue;
            }
            worst = std::max(worst, d / se);
        }
    }
    return worst;
}

// Mass of N(mean, sd^2) on (lo, hi] by adaptive Gauss-Kronrod quadrature of
// the density; infinite limits allowed.
inline double gaussian_mass(double mean, double sd, double lo, double hi) {
    const double inv = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto phi = [&](double z) { return inv * std::exp(-0.5 * z * z); };
    // Beyond 40 sd the density is below 1e-300; clipping keeps the panels finite.
    const double a = std::isinf(lo) ? -40.0 : std::max(-40.0, (lo - mean) / sd);
    const double b = std::isinf(hi) ? 40.0 : std::min(40.0, (hi - mean) / sd);
    if (a >= b) {
        return 0.0;
    }
    // Split at the mode so the peak never falls inside one wide panel.
    double total = 0.0;
    if (a < 0.0 && b > 0.0) {
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(phi, a, 0.0, 10, 1e-13);
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(phi, 0.0, b, 10, 1e-13);
    } else {
        total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(phi, a, b, 10, 1e-13);
    }
    return total;
}

inline jcns::RawImage constant_raw(int w, int h, double v, jcns::SensorParams p = jcns::e1_sensor_params()) {
    jcns::RawImage r;
    r.width = w;
    r.height = h;
    r.params = p;
    r.data.assign(static_cast<std::size_t>(w) * h, v);
    return r;
}

}  // namespace oracle
