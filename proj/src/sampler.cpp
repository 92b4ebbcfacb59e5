#include "jcns/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jcns/errors.hpp"

namespace jcns {

namespace {

// P(a < Z <= b) for standard normal Z, using whichever tail keeps precision.
double interval_prob(double a, double b) noexcept {
    if (a >= 0.0) {
        return normal_ccdf(a) - normal_ccdf(b);
    }
    if (b <= 0.0) {
        return normal_cdf(b) - normal_cdf(a);
    }
    return 1.0 - normal_cdf(a) - normal_ccdf(b);
}

void check_args(double sigma_prime, double q_step, int K) {
    if (!(q_step > 0.0) || !std::isfinite(q_step)) {
        throw InvalidArgument("quantisation step must be positive");
    }
    if (!(sigma_prime >= 0.0) || !std::isfinite(sigma_prime)) {
        throw InvalidArgument("sigma' must be non-negative");
    }
    if (K < 1) {
        throw InvalidArgument("K must be at least 1");
    }
}

}  // namespace

void ChainState::reset() {
    continuous_samples.clear();
    discrete_changes.clear();
    innovations.clear();
    index = 0;
}

long round_half_away(double x) noexcept {
    return static_cast<long>(std::round(x));
}

Pmf pmf(double m_prime, double sigma_prime, double q_step, int K) {
    check_args(sigma_prime, q_step, K);
    Pmf p;
    p.k_min = -K;
    p.k_max = K;
    p.probs.assign(static_cast<std::size_t>(2 * K + 1), 0.0);
    const double m_hat = m_prime / q_step;
    p.center_round = round_half_away(m_hat);
    const double s_hat = sigma_prime / q_step;
    if (s_hat == 0.0) {
        const long atom = std::clamp<long>(p.center_round, -K, K);
        p.probs[static_cast<std::size_t>(atom + K)] = 1.0;
        return p;
    }
    const double inf = std::numeric_limits<double>::infinity();
    for (int k = -K; k <= K; ++k) {
        const double a = k == -K ? -inf : (k - 0.5 - m_hat) / s_hat;
        const double b = k == K ? inf : (k + 0.5 - m_hat) / s_hat;
        p.probs[static_cast<std::size_t>(k + K)] = std::max(0.0, interval_prob(a, b));
    }
    return p;
}

int sample_discrete(const Pmf& p, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    int last = p.k_min;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        if (p.probs[i] <= 0.0) {
            continue;
        }
        last = p.k_min + static_cast<int>(i);
        acc += p.probs[i];
        if (u < acc) {
            return last;
        }
    }
    // Rounding left a sliver above the final partial sum.
    return last;
}

double rejection_sample_continuous(double m_prime, double sigma_prime, int k, double q_step, int K, Rng& rng,
                                   const SamplerOptions& opts) {
    check_args(sigma_prime, q_step, K);
    if (k < -K || k > K) {
        throw InvalidArgument("change outside the alphabet");
    }
    if (sigma_prime == 0.0) {
        return m_prime;
    }
    const double inf = std::numeric_limits<double>::infinity();
    const double m_hat = m_prime / q_step;
    const double s_hat = sigma_prime / q_step;
    const double lo = k == -K ? -inf : k - 0.5;
    const double hi = k == K ? inf : k + 0.5;
    const double a = (lo - m_hat) / s_hat;
    const double b = (hi - m_hat) / s_hat;
    const double prob = interval_prob(a, b);
    if (!(prob >= 1e-300)) {
        throw DegenerateBin("bin " + std::to_string(k) + " has probability below 1e-300");
    }
    if (opts.force_naive || prob >= opts.naive_min_acceptance) {
        for (;;) {
            const double z = rng.normal();
            if (z > a && z <= b) {
                return (m_hat + s_hat * z) * q_step;
            }
        }
    }
    const double u = rng.uniform();
    double z;
    if (a >= 0.0) {
        const double qa = normal_ccdf(a);
        const double qb = normal_ccdf(b);
        z = normal_cquantile(qa - u * (qa - qb));
    } else if (b <= 0.0) {
        const double pa = normal_cdf(a);
        const double pb = normal_cdf(b);
        z = normal_quantile(pa + u * (pb - pa));
    } else {
        const double pa = normal_cdf(a);
        z = normal_quantile(pa + u * prob);
    }
    z = std::clamp(z, std::nextafter(a, inf), b);
    return (m_hat + s_hat * z) * q_step;
}

ChainStep chain_step(const Eigen::MatrixXd& chol, const Eigen::VectorXd& base_mean, ChainState& state,
                     double q_step, int K, Rng& rng, const SamplerOptions& opts) {
    const int i = state.index;
    if (i < 0 || i >= chol.rows() || base_mean.size() != chol.rows()) {
        throw InvalidArgument("chain index or dimensions out of range");
    }
    ChainStep step;
    double m = base_mean[i];
    for (int l = 0; l < i; ++l) {
        m += chol(i, l) * state.innovations[static_cast<std::size_t>(l)];
    }
    step.m_prime = m;
    step.sigma_prime = std::abs(chol(i, i));
    step.pmf = pmf(step.m_prime, step.sigma_prime, q_step, K);
    step.k = sample_discrete(step.pmf, rng);
    step.s = rejection_sample_continuous(step.m_prime, step.sigma_prime, step.k, q_step, K, rng, opts);
    const double n = step.sigma_prime > 0.0 ? (step.s - step.m_prime) / step.sigma_prime : 0.0;
    state.continuous_samples.push_back(step.s);
    state.discrete_changes.push_back(step.k);
    state.innovations.push_back(n);
    state.index = i + 1;
    return step;
}

double entropy(const Pmf& p) {
    double h = 0.0;
    for (double v : p.probs) {
        if (v > 0.0) {
            h -= v * std::log2(v);
        }
    }
    return h;
}

std::vector<double> costs(const Pmf& p) {
    std::vector<double> rho(p.probs.size(), std::numeric_limits<double>::infinity());
    const double p0 = p.at(0);
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        if (p.probs[i] > 0.0 && p0 > 0.0) {
            rho[i] = std::log(p0 / p.probs[i]);
        } else if (p.k_min + static_cast<int>(i) == 0) {
            rho[i] = 0.0;
        }
    }
    return rho;
}

}  // namespace jcns
