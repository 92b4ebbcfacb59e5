#pragma once

#include <vector>

#include <Eigen/Dense>

#include "jcns/random.hpp"

namespace jcns {

// Distribution of the quantised change k in [-K, K]. Change k collects the
// continuous stego values in ((k - 0.5) Q, (k + 0.5) Q]; mass beyond the
// alphabet is folded into the end symbols.
struct Pmf {
    int k_min = 0;
    int k_max = 0;
    std::vector<double> probs;
    long center_round = 0;  // round-half-away of m'/Q

    double at(int k) const { return probs[static_cast<std::size_t>(k - k_min)]; }
    int half_width() const noexcept { return k_max; }
};

struct ChainState {
    std::vector<double> continuous_samples;
    std::vector<int> discrete_changes;
    std::vector<double> innovations;  // n_l = (s_l - m'_l) / sigma'_l
    int index = 0;

    void reset();
};

struct SamplerOptions {
    bool force_naive = false;            // always use the plain accept loop
    double naive_min_acceptance = 0.01;  // below this the truncated inverse CDF is used
};

// Round half away from zero.
long round_half_away(double x) noexcept;

Pmf pmf(double m_prime, double sigma_prime, double q_step, int K);

int sample_discrete(const Pmf& p, Rng& rng);

// Draw of N(m', sigma'^2) restricted to the cell of change k. k = +-K cells are
// unbounded on their outer side, matching the folded PMF.
double rejection_sample_continuous(double m_prime, double sigma_prime, int k, double q_step, int K, Rng& rng,
                                   const SamplerOptions& opts = {});

struct ChainStep {
    Pmf pmf;
    int k = 0;
    double s = 0.0;
    double m_prime = 0.0;
    double sigma_prime = 0.0;
};

// One step of the sequential coefficient chain. `chol` is the lower factor of
// the conditional block covariance, `base_mean` its conditional mean.
ChainStep chain_step(const Eigen::MatrixXd& chol, const Eigen::VectorXd& base_mean, ChainState& state,
                     double q_step, int K, Rng& rng, const SamplerOptions& opts = {});

// Shannon entropy in bits.
double entropy(const Pmf& p);

// rho(k) = ln(pi(0) / pi(k)); +infinity where pi(k) = 0.
std::vector<double> costs(const Pmf& p);

}  // namespace jcns
