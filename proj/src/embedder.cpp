#include "jcns/embedder.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstring>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "jcns/errors.hpp"
#include "jcns/log.hpp"

namespace jcns {

namespace {

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is handled
// exactly once; the first exception is rethrown after all workers stop.
template <typename F>
void parallel_for(std::size_t n, int threads, F fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) {
        pool.emplace_back(work);
    }
    work();
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

std::size_t raster_index(int blocks_w, int block, int coef) {
    const int width = 8 * blocks_w;
    return static_cast<std::size_t>(8 * (block / blocks_w) + coef / 8) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(8 * (block % blocks_w) + coef % 8);
}

void record_jitter(BlockModel& m, const char* stage, const CholeskyFactor& f) {
    if (f.epsilon > 0.0) {
        m.jitter.push_back({m.block, m.lattice, stage, f.epsilon, f.jitter});
    }
}

}  // namespace

void EmbedConfig::validate() const {
    if (K < 1) {
        throw InvalidArgument("K must be at least 1");
    }
    if (qf < 1 || qf > 100) {
        throw InvalidArgument("quality factor must be in 1..100");
    }
    if (threads < 0) {
        throw InvalidArgument("thread count must be non-negative");
    }
}

BlockModel build_block_model(const ImageCovarianceModel& model, const LatticeAssignment& assign, int block) {
    BlockModel m;
    m.block = block;
    m.lattice = assign.assignment[static_cast<std::size_t>(block)];
    const Neighborhood nb = neighborhood(assign, block);
    m.neighbors = nb.neighbor_blocks;
    const Eigen::Index rest = 64 * static_cast<Eigen::Index>(m.neighbors.size());

    // A block without photonic variance has zero covariance with everything.
    if (model.block_trace(block) == 0.0) {
        m.zero = true;
        m.gain = Eigen::MatrixXd::Zero(64, rest);
        m.chol = Eigen::MatrixXd::Zero(64, 64);
        return m;
    }

    std::vector<int> blocks;
    blocks.reserve(m.neighbors.size() + 1);
    blocks.push_back(block);
    blocks.insert(blocks.end(), m.neighbors.begin(), m.neighbors.end());
    const CovarianceMatrix sigma = model.block_covariance(blocks);

    try {
        Eigen::MatrixXd cov = sigma.values.topLeftCorner(64, 64);
        if (rest == 0) {
            m.gain.resize(64, 0);
        } else {
            const CholeskyFactor f22 = cholesky(sigma.values.bottomRightCorner(rest, rest));
            record_jitter(m, "neighbors", f22);
            if (f22.zero) {
                m.gain = Eigen::MatrixXd::Zero(64, rest);
            } else {
                const auto l22 = f22.lower.triangularView<Eigen::Lower>();
                const Eigen::MatrixXd v = l22.solve(sigma.values.bottomLeftCorner(rest, 64));
                m.gain = f22.lower.transpose().triangularView<Eigen::Upper>().solve(v).transpose();
                cov.noalias() -= v.transpose() * v;
            }
        }
        cov = 0.5 * (cov + cov.transpose()).eval();
        const CholeskyFactor fc = cholesky(cov);
        record_jitter(m, "conditional", fc);
        m.chol = fc.lower;
        m.zero = fc.zero && m.gain.cwiseAbs().sum() == 0.0;
    } catch (const SingularCovariance& e) {
        m.failed = true;
        m.gain = Eigen::MatrixXd::Zero(64, rest);
        m.chol = Eigen::MatrixXd::Zero(64, 64);
        log_warning("block " + std::to_string(block) + " (" + to_string(m.lattice) +
                    "): " + e.what() + "; no changes embedded");
    }
    return m;
}

BlockDraw sample_block(const BlockModel& m, std::span<const double> store, const QuantTable& table, int K, Rng& rng,
                       const SamplerOptions& opts, bool keep_pmfs) {
    BlockDraw d;
    if (m.failed) {
        d.failed = true;
        if (keep_pmfs) {
            d.pmfs.assign(64, pmf(0.0, 0.0, 1.0, K));
        }
        return d;
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(64);
    if (!m.neighbors.empty() && !m.zero) {
        Eigen::VectorXd known(64 * static_cast<Eigen::Index>(m.neighbors.size()));
        for (std::size_t j = 0; j < m.neighbors.size(); ++j) {
            const std::size_t off = static_cast<std::size_t>(m.neighbors[j]) * 64;
            for (int c = 0; c < 64; ++c) {
                known[static_cast<Eigen::Index>(64 * j + c)] = store[off + static_cast<std::size_t>(c)];
            }
        }
        mean.noalias() = m.gain * known;
    }
    if (keep_pmfs) {
        d.pmfs.reserve(64);
    }
    ChainState state;
    try {
        for (int i = 0; i < 64; ++i) {
            ChainStep step = chain_step(m.chol, mean, state, table[i], K, rng, opts);
            d.changes[static_cast<std::size_t>(i)] = step.k;
            d.continuous[static_cast<std::size_t>(i)] = step.s;
            d.entropy[static_cast<std::size_t>(i)] = entropy(step.pmf);
            if (keep_pmfs) {
                d.pmfs.push_back(std::move(step.pmf));
            }
        }
    } catch (const DegenerateBin& e) {
        log_warning("block " + std::to_string(m.block) + ": " + e.what() + "; no changes embedded");
        BlockDraw empty;
        empty.failed = true;
        if (keep_pmfs) {
            empty.pmfs.assign(64, pmf(0.0, 0.0, 1.0, K));
        }
        return empty;
    }
    return d;
}

EmbedPlan::EmbedPlan(const RawImage& raw, GreenKernel gk, int threads)
    : width_(raw.width), height_(raw.height), gk_(gk) {
    raw.validate();
    const ImageCovarianceModel model(raw, gk);
    assign_ = tile(model.blocks_w(), model.blocks_h());
    models_.resize(assign_.assignment.size());
    parallel_for(models_.size(), resolve_threads(threads),
                 [&](std::size_t b) { models_[b] = build_block_model(model, assign_, static_cast<int>(b)); });
}

void CapacityReport::recompute(const LatticeAssignment& assign) {
    total_bits = 0.0;
    for (double h : entropy) {
        total_bits += h;
    }
    const double pixels = static_cast<double>(width) * static_cast<double>(height);
    bits_per_pixel = pixels > 0 ? total_bits / pixels : 0.0;
    bits_per_nzac = nzac > 0 ? total_bits / static_cast<double>(nzac) : 0.0;
    for (int l = 0; l < 4; ++l) {
        LatticeSummary s;
        const auto& blocks = assign.blocks_by_lattice[static_cast<std::size_t>(l)];
        s.blocks = static_cast<int>(blocks.size());
        for (int b : blocks) {
            for (int c = 0; c < 64; ++c) {
                const double h = entropy[raster_index(assign.blocks_w, b, c)];
                s.bits += h;
                s.mode_bits[static_cast<std::size_t>(c)] += h;
            }
        }
        if (s.blocks > 0) {
            s.bits_per_pixel = s.bits / (64.0 * s.blocks);
            for (double& v : s.mode_bits) {
                v /= s.blocks;
            }
        }
        lattices[static_cast<std::size_t>(l)] = s;
    }
}

EmbedResult embed(const RawImage& raw, const EmbedConfig& cfg, const EmbedPlan* plan) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    DevelopedCover cover = develop_cover(raw, cfg.qf, cfg.green_kernel);
    const int bw = cover.coefficients.blocks_w;
    const int bh = cover.coefficients.blocks_h;
    const int nblocks = bw * bh;
    const int threads = resolve_threads(cfg.threads);

    std::unique_ptr<ImageCovarianceModel> model;
    LatticeAssignment assign;
    if (plan) {
        if (plan->width() != raw.width || plan->height() != raw.height || plan->green_kernel() != cfg.green_kernel) {
            throw InvalidArgument("embed plan does not match the image or green kernel");
        }
        assign = plan->assignment();
    } else {
        model = std::make_unique<ImageCovarianceModel>(raw, cfg.green_kernel);
        assign = tile(bw, bh);
    }

    EmbedResult res;
    const std::size_t n = cover.coefficients.coeffs.size();
    res.changes.assign(n, 0);
    res.continuous.assign(n, 0.0);
    if (cfg.keep_pmfs) {
        res.pmfs.resize(n);
    }
    CapacityReport& rep = res.report;
    rep.width = raw.width;
    rep.height = raw.height;
    rep.qf = cfg.qf;
    rep.K = cfg.K;
    rep.entropy.assign(n, 0.0);

    std::vector<double> store(static_cast<std::size_t>(nblocks) * 64, 0.0);
    for (MacroLattice lat : kAllLattices) {
        const auto& blocks = assign.blocks_by_lattice[static_cast<std::size_t>(lat)];
        std::vector<BlockDraw> draws(blocks.size());
        std::vector<std::vector<JitterEvent>> jitter(blocks.size());
        std::vector<char> failed(blocks.size(), 0);
        parallel_for(blocks.size(), threads, [&](std::size_t idx) {
            const int b = blocks[idx];
            BlockModel local;
            const BlockModel* m = nullptr;
            if (plan) {
                m = &plan->block(b);
            } else {
                local = build_block_model(*model, assign, b);
                m = &local;
            }
            Rng rng(derive_seed(cfg.key, {static_cast<std::uint64_t>(lat), static_cast<std::uint64_t>(b)}));
            draws[idx] = sample_block(*m, store, cover.coefficients.table, cfg.K, rng, cfg.sampler, cfg.keep_pmfs);
            jitter[idx] = m->jitter;
            failed[idx] = m->failed || draws[idx].failed;
        });
        // Blocks of one lattice never condition on each other, so the store is
        // only updated once the whole lattice is drawn.
        for (std::size_t idx = 0; idx < blocks.size(); ++idx) {
            const int b = blocks[idx];
            BlockDraw& d = draws[idx];
            for (int c = 0; c < 64; ++c) {
                const std::size_t r = raster_index(bw, b, c);
                res.changes[r] = d.changes[static_cast<std::size_t>(c)];
                res.continuous[r] = d.continuous[static_cast<std::size_t>(c)];
                rep.entropy[r] = d.entropy[static_cast<std::size_t>(c)];
                store[static_cast<std::size_t>(b) * 64 + static_cast<std::size_t>(c)] =
                    d.continuous[static_cast<std::size_t>(c)];
                if (cfg.keep_pmfs) {
                    res.pmfs[r] = std::move(d.pmfs[static_cast<std::size_t>(c)]);
                }
            }
            rep.jitter_events.insert(rep.jitter_events.end(), jitter[idx].begin(), jitter[idx].end());
            if (failed[idx]) {
                rep.failed_blocks.push_back(b);
            }
        }
    }
    std::sort(rep.failed_blocks.begin(), rep.failed_blocks.end());

    res.stego = cover.coefficients;
    res.stego.role = CoeffRole::Stego;
    for (std::size_t i = 0; i < n; ++i) {
        res.stego.coeffs[i] += res.changes[i];
    }
    res.stego.validate();
    rep.nzac = nzac_count(cover.coefficients);
    rep.recompute(assign);
    res.cover = std::move(cover.coefficients);
    res.cover_dct = std::move(cover.dct);
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!rep.jitter_events.empty()) {
        log_info(std::to_string(rep.jitter_events.size()) + " factorisations needed jitter");
    }
    if (cfg.report_path) {
        write_report(rep, *cfg.report_path);
    }
    return res;
}

std::pair<JpegCoefficients, CapacityReport> embed_simulated(const RawImage& raw, const EmbedConfig& cfg) {
    EmbedResult r = embed(raw, cfg);
    return {std::move(r.stego), std::move(r.report)};
}

CapacityReport capacity_map(const RawImage& raw, const EmbedConfig& cfg) {
    return embed(raw, cfg).report;
}

RawImage pseudo_embed(const RawImage& raw, std::uint64_t seed) {
    raw.validate();
    RawImage out = raw;
    Rng rng(seed);
    const double hi = raw.max_value();
    for (double& x : out.data) {
        const double v = photon_variance(x, raw.params);
        if (v > 0.0) {
            x = std::clamp(x + std::sqrt(v) * rng.normal(), 0.0, hi);
        }
    }
    return out;
}

CostPlane export_costs(const RawImage& raw, const EmbedConfig& cfg) {
    EmbedConfig c = cfg;
    c.keep_pmfs = true;
    const EmbedResult r = embed(raw, c);
    CostPlane out;
    out.width = raw.width;
    out.height = raw.height;
    out.K = cfg.K;
    const std::size_t per = static_cast<std::size_t>(2 * cfg.K + 1);
    out.pi0.resize(r.pmfs.size());
    out.costs.resize(r.pmfs.size() * per);
    for (std::size_t i = 0; i < r.pmfs.size(); ++i) {
        out.pi0[i] = r.pmfs[i].at(0);
        const std::vector<double> rho = costs(r.pmfs[i]);
        std::copy(rho.begin(), rho.end(), out.costs.begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    return out;
}

void write_costs(const CostPlane& c, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
        f.write(reinterpret_cast<const char*>(b), 4);
    };
    auto put_f64 = [&](double d) {
        std::uint64_t u;
        std::memcpy(&u, &d, sizeof u);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) {
            b[i] = static_cast<unsigned char>(u >> (8 * i));
        }
        f.write(reinterpret_cast<const char*>(b), 8);
    };
    f.write("JCST", 4);
    const char version = 1;
    f.write(&version, 1);
    put_u32(static_cast<std::uint32_t>(c.width));
    put_u32(static_cast<std::uint32_t>(c.height));
    put_u32(static_cast<std::uint32_t>(c.K));
    const std::size_t per = static_cast<std::size_t>(2 * c.K + 1);
    for (std::size_t i = 0; i < c.pi0.size(); ++i) {
        put_f64(c.pi0[i]);
        for (std::size_t k = 0; k < per; ++k) {
            put_f64(c.costs[i * per + k]);
        }
    }
    if (!f) {
        throw Error("failed writing " + path.string());
    }
}

std::string report_json(const CapacityReport& r, bool include_plane, bool include_runtime) {
    using nlohmann::json;
    json j;
    j["width"] = r.width;
    j["height"] = r.height;
    j["qf"] = r.qf;
    j["K"] = r.K;
    j["totals"] = {{"bits", r.total_bits},
                   {"bits_per_pixel", r.bits_per_pixel},
                   {"nzac", r.nzac},
                   {"bits_per_nzac", r.bits_per_nzac}};
    json lats = json::array();
    for (int l = 0; l < 4; ++l) {
        const auto& s = r.lattices[static_cast<std::size_t>(l)];
        lats.push_back({{"lattice", to_string(static_cast<MacroLattice>(l))},
                        {"blocks", s.blocks},
                        {"bits", s.bits},
                        {"bits_per_pixel", s.bits_per_pixel},
                        {"mode_bits", s.mode_bits}});
    }
    j["lattices"] = lats;
    json events = json::array();
    for (const auto& e : r.jitter_events) {
        events.push_back({{"block", e.block},
                          {"lattice", to_string(e.lattice)},
                          {"stage", e.stage},
                          {"epsilon", e.epsilon},
                          {"amount", e.amount}});
    }
    j["jitter_events"] = events;
    j["failed_blocks"] = r.failed_blocks;
    if (include_runtime) {
        j["runtime_seconds"] = r.runtime_seconds;
    }
    if (include_plane) {
        j["entropy"] = r.entropy;
    }
    return j.dump(2);
}

void write_report(const CapacityReport& r, const std::filesystem::path& path, bool include_plane) {
    std::ofstream f(path);
    if (!f) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    f << report_json(r, include_plane) << '\n';
    if (!f) {
        throw Error("failed writing " + path.string());
    }
}

}  // namespace jcns
