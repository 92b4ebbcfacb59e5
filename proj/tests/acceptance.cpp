// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jcns/covariance.hpp"
#include "jcns/embedder.hpp"
#include "jcns/jpeg_model.hpp"
#include "jcns/lattice.hpp"
#include "jcns/pipeline.hpp"
#include "jcns/sampler.hpp"
#include "oracles.hpp"

using namespace jcns;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) {
        ++failures;
    }
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<double> random_patch(int side, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(1100.0, 4000.0);
    std::vector<double> p(static_cast<std::size_t>(side) * side);
    for (double& x : p) {
        x = u(gen);
    }
    return p;
}

// |A - B| / (sqrt2 * SE(S)) for two independent moment estimates of S.
double two_sample_z(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& s, long n) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double se = std::sqrt(2.0 * (s(i, i) * s(j, j) + s(i, j) * s(i, j)) / static_cast<double>(n));
            const double d = std::abs(a(i, j) - b(i, j));
            if (se == 0.0) {
                if (d > 1e-9) {
                    return INFINITY;
                }
                continue;
            }
            worst = std::max(worst, d / se);
        }
    }
    return worst;
}

RawImage iid_raw(int w, int h, double mu, double sigma, std::uint64_t seed) {
    SynthSpec s;
    s.kind = SynthSpec::Kind::IidGaussian;
    s.mu = mu;
    s.sigma = sigma;
    s.width = w;
    s.height = h;
    s.seed = seed;
    return synthesize_raw(s, e1_sensor_params());
}

EmbedConfig config(int qf, int K, std::uint64_t key, int threads = 1) {
    EmbedConfig c;
    c.qf = qf;
    c.K = K;
    c.key = key;
    c.threads = threads;
    return c;
}

void criterion1() {
    const auto t0 = Clock::now();
    bool ok = true;
    double worst_ac = 0.0, worst_dc = 0.0;
    for (BayerPattern cfa : {BayerPattern::RGGB, BayerPattern::BGGR, BayerPattern::GRBG, BayerPattern::GBRG}) {
        const PipelineMatrix m1 = assemble(MacroLattice::L1, cfa);
        const PipelineMatrix m4 = assemble(MacroLattice::L4, cfa);
        ok = ok && m1.m.rows() == 64 && m1.m.cols() == 676 && m4.m.rows() == 576 && m4.m.cols() == 676;
        const Eigen::VectorXd y = m4.m.apply(Eigen::VectorXd::Constant(676, 1000.0));
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (i % 64 == 0) {
                worst_dc = std::max(worst_dc, std::abs(y[i] - 8000.0));
            } else {
                worst_ac = std::max(worst_ac, std::abs(y[i]));
            }
        }
    }
    const double t = seconds_since(t0);
    ok = ok && worst_ac <= 1e-9 && worst_dc <= 1e-9 && t < 1.0;
    report(1, ok, fmt("L1 64x676, L4 576x676; constant input: max |AC| %.2e, max |DC-8000| %.2e; %.3f s", worst_ac,
                      worst_dc, t));
}

void criterion2() {
    const Eigen::Matrix<double, 8, 8> a = dct_basis();
    const double orth = (a * a.transpose() - Eigen::Matrix<double, 8, 8>::Identity()).cwiseAbs().maxCoeff();
    const Eigen::Matrix<double, 64, 64> tb = dct_block_matrix();
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int b = 0; b < 1000; ++b) {
        Eigen::Matrix<double, 64, 1> x;
        for (int i = 0; i < 64; ++i) {
            x[i] = nd(gen);
        }
        double ref[64];
        oracle::dct2(x.data(), ref);
        const Eigen::Matrix<double, 64, 1> y = tb * x;
        for (int i = 0; i < 64; ++i) {
            worst = std::max(worst, std::abs(y[i] - ref[i]));
        }
    }
    report(2, orth <= 1e-12 && worst <= 1e-10,
           fmt("max |A A^t - I| %.2e; T_b vs direct DCT on 1000 blocks %.2e", orth, worst));
}

void criterion3() {
    const auto t0 = Clock::now();
    const SensorParams params = e1_sensor_params();
    const PipelineMatrix pm = assemble(MacroLattice::L1, BayerPattern::RGGB);
    const Eigen::MatrixXd dense = pm.m.dense();
    std::vector<int> cols;
    for (int c = 0; c < dense.cols(); ++c) {
        if (dense.col(c).cwiseAbs().maxCoeff() > 0.0) {
            cols.push_back(c);
        }
    }
    Eigen::MatrixXd msub(64, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        msub.col(static_cast<Eigen::Index>(j)) = dense.col(cols[j]);
    }
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    const long draws = 1000000;
    const int batch = 10000;
    double worst = 0.0;
    for (int p = 0; p < 5; ++p) {
        const std::vector<double> patch = random_patch(26, gen);
        const DiagonalCovariance sp = sigma_p(patch, 26, params);
        const Eigen::MatrixXd sd = sigma_d(pm, sp).values;
        Eigen::VectorXd scale(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) {
            scale[static_cast<Eigen::Index>(j)] = std::sqrt(sp.variances[cols[j]]);
        }
        oracle::MomentAccumulator acc(64);
        Eigen::MatrixXd z(scale.size(), batch);
        for (long done = 0; done < draws; done += batch) {
            for (Eigen::Index c = 0; c < batch; ++c) {
                for (Eigen::Index r = 0; r < z.rows(); ++r) {
                    z(r, c) = scale[r] * nd(gen);
                }
            }
            acc.add(msub * z);
        }
        worst = std::max(worst, oracle::max_z(acc.covariance(), sd, acc.n()));
    }
    const double t = seconds_since(t0);
    report(3, worst <= 5.0 && t < 120.0,
           fmt("5 patches, 1e6 draws each: worst |MC - Sigma_d| = %.2f SE; %.1f s", worst, t));
}

void criterion4() {
    std::mt19937_64 gen(4);
    const SensorParams params = e1_sensor_params();

    std::vector<BlockOffset> offs = {{0, 0}};
    for (int di = -2; di <= 2; ++di) {
        for (int dj = -2; dj <= 2; ++dj) {
            if (di != 0 || dj != 0) {
                offs.push_back({di, dj});
            }
        }
    }
    const PipelineMatrix big = assemble_blocks(offs, BayerPattern::RGGB, GreenKernel::Cross, FrontEnd::Luminance, 5);
    const std::vector<double> patch = random_patch(big.patch_side, gen);
    const Eigen::MatrixXd s = sigma_d(big, sigma_p(patch, big.patch_side, params)).values;
    int far_pairs = 0, nonzero_far = 0, near_zero = 0;
    for (int a = 0; a < big.n_blocks; ++a) {
        for (int b = 0; b < big.n_blocks; ++b) {
            const BlockOffset oa = big.block_order[static_cast<std::size_t>(a)];
            const BlockOffset ob = big.block_order[static_cast<std::size_t>(b)];
            const int cheb = std::max(std::abs(oa.di - ob.di), std::abs(oa.dj - ob.dj));
            const double mx = s.block(64 * a, 64 * b, 64, 64).cwiseAbs().maxCoeff();
            if (cheb >= 2) {
                ++far_pairs;
                nonzero_far += mx != 0.0;
            } else {
                near_zero += mx == 0.0;
            }
        }
    }

    // Frobenius norms of the centre's cross-covariances in a 3x3 neighbourhood.
    const PipelineMatrix l4 = assemble(MacroLattice::L4, BayerPattern::RGGB);
    bool order_ok = true;
    std::string detail;
    const std::vector<double> flat(676, 2000.0);
    for (const std::vector<double>* p : {&flat, &patch}) {
        std::vector<double> sub(676);
        for (int r = 0; r < 26; ++r) {
            for (int c = 0; c < 26; ++c) {
                sub[static_cast<std::size_t>(r * 26 + c)] =
                    (*p)[static_cast<std::size_t>(r * (p == &flat ? 26 : big.patch_side) + c)];
            }
        }
        const Eigen::MatrixXd s4 = sigma_d(l4, sigma_p(sub, 26, params)).values;
        double diag_max = 0.0, hv_min = INFINITY;
        for (int b = 1; b < l4.n_blocks; ++b) {
            const BlockOffset o = l4.block_order[static_cast<std::size_t>(b)];
            const double f = s4.block(0, 64 * b, 64, 64).norm();
            if (o.di != 0 && o.dj != 0) {
                diag_max = std::max(diag_max, f);
            } else {
                hv_min = std::min(hv_min, f);
            }
        }
        order_ok = order_ok && diag_max < hv_min;
        detail += fmt(" %s: diag max %.4g < h/v min %.4g;", p == &flat ? "flat" : "random", diag_max, hv_min);
    }
    report(4, nonzero_far == 0 && near_zero == 0 && order_ok,
           fmt("%d non-8-connected block pairs, %d not exactly zero;", far_pairs, nonzero_far) + detail);
}

void criterion5() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(5);
    const std::vector<double> patch = random_patch(26, gen);
    const PipelineMatrix pm = assemble(MacroLattice::L2, BayerPattern::RGGB);
    const CovarianceMatrix full = sigma_d(pm, sigma_p(patch, 26, e1_sensor_params()));
    const Eigen::MatrixXd& s = full.values;
    const int dim = full.dim();

    // Outer blocks first, each by its own chain; the centre then by condition().
    std::vector<Eigen::MatrixXd> outer_chol;
    for (int b = 1; b < 5; ++b) {
        outer_chol.push_back(cholesky(s.block(64 * b, 64 * b, 64, 64)).lower);
    }
    const ConditionalGaussian cond = condition(full, Eigen::VectorXd::Zero(dim - 64), 64);
    const Eigen::MatrixXd s22 = s.bottomRightCorner(dim - 64, dim - 64);
    const Eigen::MatrixXd gain = s22.ldlt().solve(s.bottomLeftCorner(dim - 64, 64)).transpose();
    Eigen::VectorXd probe(dim - 64);
    for (Eigen::Index i = 0; i < probe.size(); ++i) {
        probe[i] = std::normal_distribution<double>(0.0, 30.0)(gen);
    }
    const double mean_err = (condition(full, probe, 64).mean - gain * probe).cwiseAbs().maxCoeff();

    const long draws = 100000;
    const double q = 3.0;
    const int K = 4;
    oracle::MomentAccumulator chain_acc(dim), direct_acc(dim);
    Rng rng(55);
    const int batch = 2000;
    Eigen::MatrixXd xs(dim, batch);
    const Eigen::VectorXd zero64 = Eigen::VectorXd::Zero(64);
    for (long done = 0; done < draws; done += batch) {
        for (int c = 0; c < batch; ++c) {
            for (int b = 0; b < 4; ++b) {
                ChainState st;
                for (int i = 0; i < 64; ++i) {
                    xs(64 * (b + 1) + i, c) = chain_step(outer_chol[static_cast<std::size_t>(b)], zero64, st, q, K, rng).s;
                }
            }
            const Eigen::VectorXd mean = gain * xs.col(c).tail(dim - 64);
            ChainState st;
            for (int i = 0; i < 64; ++i) {
                xs(i, c) = chain_step(cond.chol, mean, st, q, K, rng).s;
            }
        }
        chain_acc.add(xs);
    }
    const Eigen::MatrixXd lfull = cholesky(s).lower;
    std::mt19937_64 g2(6);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd z(dim, batch);
    for (long done = 0; done < draws; done += batch) {
        for (Eigen::Index c = 0; c < batch; ++c) {
            for (Eigen::Index r = 0; r < dim; ++r) {
                z(r, c) = nd(g2);
            }
        }
        direct_acc.add(lfull * z);
    }
    const double zc = two_sample_z(chain_acc.covariance(), direct_acc.covariance(), s, draws);
    const double z_chain = oracle::max_z(chain_acc.covariance(), s, draws);
    const double t = seconds_since(t0);
    report(5, zc <= 5.0 && mean_err <= 1e-6 && t < 300.0,
           fmt("L2 neighbourhood (320-dim), 1e5 draws: chain vs direct %.2f SE, chain vs Sigma %.2f SE; "
               "condition() mean err %.1e; %.1f s",
               zc, z_chain, mean_err, t));
}

void criterion6() {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> um(-40.0, 40.0), ul(std::log(1e-2), std::log(40.0));
    std::uniform_int_distribution<int> uq(1, 60), uk(1, 10);
    double worst = 0.0, worst_sum = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double m = um(gen);
        const double sd = std::exp(ul(gen));
        const double q = uq(gen);
        const int K = uk(gen);
        const Pmf p = pmf(m, sd, q, K);
        double sum = 0.0;
        for (int k = -K; k <= K; ++k) {
            const double lo = k == -K ? -INFINITY : (k - 0.5) * q;
            const double hi = k == K ? INFINITY : (k + 0.5) * q;
            worst = std::max(worst, std::abs(p.at(k) - oracle::gaussian_mass(m, sd, lo, hi)));
            sum += p.at(k);
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
    report(6, worst <= 1e-10 && worst_sum <= 1e-9,
           fmt("1000 (m', sigma', Q, K) points: max |pmf - quadrature| %.2e, max |sum - 1| %.2e", worst, worst_sum));
}

void criterion7() {
    const auto t0 = Clock::now();
    const RawImage raw = oracle::constant_raw(48, 48, 2000);
    const EmbedPlan plan(raw);
    const EmbedConfig base = config(95, 5, 0);
    // Blocks (2,2) (2,3) (3,2) (3,3): one from each lattice.
    const std::vector<BlockOffset> offs = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    auto gather = [&](const std::vector<double>& plane, Eigen::Ref<Eigen::VectorXd> out) {
        for (int b = 0; b < 4; ++b) {
            const int bi = 2 + offs[static_cast<std::size_t>(b)].di;
            const int bj = 2 + offs[static_cast<std::size_t>(b)].dj;
            for (int c = 0; c < 64; ++c) {
                out[64 * b + c] = plane[static_cast<std::size_t>((8 * bi + c / 8) * 48 + 8 * bj + c % 8)];
            }
        }
    };

    const std::vector<double> flat(676, 2000.0);
    const DiagonalCovariance sp = sigma_p(flat, 26, raw.params);
    const Eigen::MatrixXd s_cc = sigma_d(assemble(MacroLattice::L1, BayerPattern::RGGB), sp).values;
    const Eigen::MatrixXd s_joint = sigma_d(assemble_blocks(offs, BayerPattern::RGGB), sp).values;

    const long runs = 10000;
    oracle::MomentAccumulator emb(256), pse(256);
    const std::vector<double> cover = develop_cover(raw, 95).dct;
    Eigen::MatrixXd xs(256, 500), ys(256, 500);
    std::vector<double> diff(cover.size());
    bool bounded = true;
    for (long r = 0; r < runs; r += 500) {
        for (int c = 0; c < 500; ++c) {
            EmbedConfig cfg = base;
            cfg.key = static_cast<std::uint64_t>(r + c + 1);
            const EmbedResult e = embed(raw, cfg, &plan);
            gather(e.continuous, xs.col(c));
            for (int k : e.changes) {
                bounded = bounded && std::abs(k) <= cfg.K;
            }
            const std::vector<double> dev = develop_cover(pseudo_embed(raw, cfg.key ^ 0xABCDEFull), 95).dct;
            for (std::size_t i = 0; i < diff.size(); ++i) {
                diff[i] = dev[i] - cover[i];
            }
            gather(diff, ys.col(c));
        }
        emb.add(xs);
        pse.add(ys);
    }
    const Eigen::MatrixXd ce = emb.covariance();
    double z_block = 0.0;
    for (int b = 0; b < 4; ++b) {
        z_block = std::max(z_block, oracle::max_z(ce.block(64 * b, 64 * b, 64, 64), s_cc, runs));
    }
    const double z_joint = oracle::max_z(ce, s_joint, runs);
    const double z_pseudo = two_sample_z(ce, pse.covariance(), s_joint, runs);
    const double t = seconds_since(t0);
    report(7, z_block <= 5.0 && z_joint <= 5.0 && z_pseudo <= 5.0 && bounded && t < 600.0,
           fmt("constant 48x48, 1e4 runs: per-block vs Sigma_d(L1) %.2f SE, 4-block joint %.2f SE, "
               "embed vs pseudo-embed %.2f SE; %.1f s",
               z_block, z_joint, z_pseudo, t));
}

void criterion8() {
    const RawImage raw = oracle::constant_raw(128, 128, 1000);
    const auto [stego, rep] = embed_simulated(raw, config(95, 5, 8));
    const JpegCoefficients cover = develop_cover(raw, 95).coefficients;
    const bool zero = std::all_of(rep.entropy.begin(), rep.entropy.end(), [](double h) { return h == 0.0; });
    report(8, rep.total_bits == 0.0 && zero && stego.coeffs == cover.coeffs,
           fmt("x = 1000: capacity %.17g bits, stego %s cover", rep.total_bits,
               stego.coeffs == cover.coeffs ? "==" : "!="));
}

double criterion9_and_timing() {
    const RawImage raw = iid_raw(512, 512, 1005, 1, 9);
    const auto t0 = Clock::now();
    const EmbedResult q100 = embed(raw, config(100, 5, 9));
    const double t100 = seconds_since(t0);
    const auto& l = q100.report.lattices;
    const double r1 = l[0].bits_per_pixel, r2 = l[1].bits_per_pixel, r3 = l[2].bits_per_pixel,
                 r4 = l[3].bits_per_pixel;
    const bool rates_ok = r1 > r2 && r2 >= r3 && r3 > r4;

    const CapacityReport q95 = capacity_map(raw, config(95, 5, 9));
    bool modes_ok = true;
    std::string bands;
    for (int li = 0; li < 4; ++li) {
        double band[15] = {};
        int count[15] = {};
        for (int c = 1; c < 64; ++c) {
            band[c / 8 + c % 8] += q95.lattices[static_cast<std::size_t>(li)].mode_bits[static_cast<std::size_t>(c)];
            ++count[c / 8 + c % 8];
        }
        double low = 0.0, high = 0.0;
        for (int f = 1; f <= 14; ++f) {
            band[f] /= count[f];
            if (f > 1 && band[f] > band[f - 1]) {
                modes_ok = false;
            }
            (f <= 7 ? low : high) += band[f] / 7.0;
        }
        modes_ok = modes_ok && low > high;
        bands += fmt(" L%d band1 %.3f band7 %.3f band14 %.3f;", li + 1, band[1], band[7], band[14]);
    }
    report(9, rates_ok && modes_ok,
           fmt("QF100 bits/pixel L1 %.4f L2 %.4f L3 %.4f L4 %.4f; QF95 AC band means over u+v:", r1, r2, r3, r4) +
               bands);
    return t100;
}

void criterion10() {
    const RawImage raw = iid_raw(128, 128, 2000, 30, 10);
    bool ok = true;
    double prev = -1.0;
    std::string detail;
    for (int K : {1, 2, 3, 5}) {
        const EmbedResult r = embed(raw, config(95, K, 10));
        ok = ok && r.report.total_bits >= prev;
        prev = r.report.total_bits;
        for (std::size_t i = 0; i < r.changes.size(); ++i) {
            ok = ok && std::abs(r.changes[i]) <= K && r.stego.coeffs[i] - r.cover.coeffs[i] == r.changes[i];
        }
        detail += fmt(" K=%d %.1f bits;", K, r.report.total_bits);
    }
    report(10, ok, "total entropy" + detail + " |changes| <= K");
}

void criterion11() {
    const RawImage raw = iid_raw(128, 128, 2000, 30, 11);
    const EmbedResult ref = embed(raw, config(90, 3, 0x5EED));
    const std::string ref_json = report_json(ref.report, true, false);
    bool ok = true;
    for (int threads : {1, 4, 8}) {
        const EmbedResult r = embed(raw, config(90, 3, 0x5EED, threads));
        ok = ok && r.stego == ref.stego && r.changes == ref.changes && report_json(r.report, true, false) == ref_json;
    }
    report(11, ok, "repeat run and 1/4/8 threads: stego planes and reports bit-identical");
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    const double t512 = criterion9_and_timing();
    criterion10();
    criterion11();
    report(12, t512 <= 60.0, fmt("512x512 single-threaded embed (QF100, K=5): %.1f s", t512));
    std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
