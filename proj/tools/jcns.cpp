// jcns: command-line front end for the embedding simulator.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "jcns/analysis.hpp"
#include "jcns/embedder.hpp"
#include "jcns/errors.hpp"
#include "jcns/jpeg_model.hpp"
#include "jcns/log.hpp"
#include "jcns/raw_io.hpp"

namespace fs = std::filesystem;
using namespace jcns;

namespace {

std::uint64_t parse_key(const std::string& s) {
    std::size_t pos = 0;
    const std::string body = s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0 ? s.substr(2) : s;
    if (body.empty() || body.size() > 16) {
        throw InvalidArgument("key must be 1 to 16 hex digits");
    }
    const std::uint64_t v = std::stoull(body, &pos, 16);
    if (pos != body.size()) {
        throw InvalidArgument("key must be hexadecimal: " + s);
    }
    return v;
}

FrontEnd parse_mode(const std::string& m) {
    if (m == "full") return FrontEnd::Luminance;
    if (m == "demosaic") return FrontEnd::RedOnly;
    if (m == "lowpass") return FrontEnd::Lowpass;
    throw InvalidArgument("unknown mode '" + m + "' (full, demosaic, lowpass)");
}

struct EmbedArgs {
    std::string input;
    int qf = 95;
    int K = 5;
    std::string key = "0";
    std::string green = "cross";
    int threads = 1;
    bool force_naive = false;
};

void add_embed_options(CLI::App* sub, EmbedArgs& a) {
    sub->add_option("raw", a.input, "RAW pre-cover (16-bit PGM with .json sidecar)")->required();
    sub->add_option("--qf", a.qf, "JPEG quality factor")->check(CLI::Range(1, 100));
    sub->add_option("--K", a.K, "alphabet half-width")->check(CLI::PositiveNumber);
    sub->add_option("--key", a.key, "secret key, hexadecimal");
    sub->add_option("--green-kernel", a.green, "cross or corner")->check(CLI::IsMember({"cross", "corner"}));
    sub->add_option("--threads", a.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    sub->add_flag("--naive-rejection", a.force_naive, "always use the plain accept loop for continuous draws");
}

EmbedConfig make_config(const EmbedArgs& a) {
    EmbedConfig cfg;
    cfg.qf = a.qf;
    cfg.K = a.K;
    cfg.key = parse_key(a.key);
    cfg.green_kernel = parse_green_kernel(a.green);
    cfg.threads = a.threads;
    cfg.sampler.force_naive = a.force_naive;
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulated JPEG embedding with conditional Gaussian noise from RAW pre-covers"};
    app.require_subcommand(1);
    app.fallthrough();
    bool verbose = false;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose, "log progress");
    app.add_flag("-q,--quiet", quiet, "suppress warnings");

    // synth
    auto* synth = app.add_subcommand("synth", "synthesize a RAW image");
    synth->set_help_flag("--help", "Print this help message and exit");
    std::string kind = "constant";
    SynthSpec spec;
    std::string cfa_name = "RGGB";
    int bit_depth = 12;
    SensorParams params = e1_sensor_params();
    std::string synth_out;
    synth->add_option("--kind", kind, "constant or iid")->check(CLI::IsMember({"constant", "iid"}));
    synth->add_option("--mu", spec.mu, "mean value")->required();
    synth->add_option("--sigma", spec.sigma, "standard deviation (iid)");
    synth->add_option("--w", spec.width, "width")->required();
    synth->add_option("--h", spec.height, "height")->required();
    synth->add_option("--seed", spec.seed, "RNG seed");
    synth->add_option("--cfa", cfa_name, "Bayer pattern");
    synth->add_option("--bit-depth", bit_depth, "sensor bit depth")->check(CLI::Range(8, 16));
    synth->add_option("--a1", params.a1);
    synth->add_option("--b1", params.b1);
    synth->add_option("--a2", params.a2);
    synth->add_option("--b2", params.b2);
    synth->add_option("-o,--output", synth_out, "output PGM")->required();

    // develop
    auto* develop = app.add_subcommand("develop", "develop a RAW image to quantised DCT coefficients");
    std::string dev_in;
    std::string dev_out;
    int dev_qf = 95;
    std::string dev_green = "cross";
    develop->add_option("raw", dev_in)->required();
    develop->add_option("--qf", dev_qf)->check(CLI::Range(1, 100));
    develop->add_option("--green-kernel", dev_green)->check(CLI::IsMember({"cross", "corner"}));
    develop->add_option("-o,--output", dev_out)->required();

    // embed
    auto* embed_cmd = app.add_subcommand("embed", "simulate embedding and write stego coefficients");
    EmbedArgs emb;
    std::string emb_out;
    std::string emb_report;
    bool emb_plane = false;
    add_embed_options(embed_cmd, emb);
    embed_cmd->add_option("-o,--output", emb_out, "stego coefficient file")->required();
    embed_cmd->add_option("--report", emb_report, "JSON report");
    embed_cmd->add_flag("--entropy-plane", emb_plane, "include the per-coefficient entropy plane in the report");

    // pseudo-embed
    auto* pseudo = app.add_subcommand("pseudo-embed", "add photo-site stego noise to a RAW image");
    std::string ps_in;
    std::string ps_out;
    std::uint64_t ps_seed = 0;
    pseudo->add_option("raw", ps_in)->required();
    pseudo->add_option("--seed", ps_seed);
    pseudo->add_option("-o,--output", ps_out)->required();

    // capacity
    auto* capacity = app.add_subcommand("capacity", "entropy report of the embedding");
    EmbedArgs cap;
    std::string cap_out;
    bool cap_plane = false;
    add_embed_options(capacity, cap);
    capacity->add_option("-o,--output", cap_out, "JSON report")->required();
    capacity->add_flag("--entropy-plane", cap_plane, "include the per-coefficient entropy plane");

    // covariance
    auto* cov = app.add_subcommand("covariance", "stationary DCT covariance of a macro-lattice neighbourhood");
    std::string cov_lat = "L4";
    std::string cov_mode = "full";
    std::string cov_cfa = "RGGB";
    std::string cov_green = "cross";
    std::string cov_out;
    std::string cov_dump;
    bool cov_sub = false;
    cov->add_option("--neighborhood", cov_lat)->check(CLI::IsMember({"L1", "L2", "L3", "L4"}));
    cov->add_option("--mode", cov_mode)->check(CLI::IsMember({"full", "demosaic", "lowpass"}));
    cov->add_option("--cfa", cov_cfa);
    cov->add_option("--green-kernel", cov_green)->check(CLI::IsMember({"cross", "corner"}));
    cov->add_option("-o,--output", cov_out, "CSV of the covariance")->required();
    cov->add_flag("--sub-blocks", cov_sub, "also write <output>.<label>.csv for the central block against each block");
    cov->add_option("--dump-operator", cov_dump,
                    "also write this operator (demosaic_r, demosaic_g, demosaic_b, luminance, lowpass, selection, "
                    "permutation, dct, assembled) as row,col,value triplets to <output>.<kind>.csv");

    // costs
    auto* costs_cmd = app.add_subcommand("costs", "export per-coefficient costs ln(pi(0)/pi(k))");
    EmbedArgs cst;
    std::string cst_out;
    add_embed_options(costs_cmd, cst);
    costs_cmd->add_option("-o,--output", cst_out)->required();

    // analysis
    auto* analysis = app.add_subcommand("analysis", "intra-block decomposition and mode correlation ranking");
    std::string an_cfa = "RGGB";
    std::string an_dir = ".";
    int an_u = 0;
    int an_v = 1;
    analysis->add_option("--cfa", an_cfa);
    analysis->add_option("--u", an_u, "vertical frequency of the ranked mode")->check(CLI::Range(0, 7));
    analysis->add_option("--v", an_v, "horizontal frequency of the ranked mode")->check(CLI::Range(0, 7));
    analysis->add_option("--out-dir", an_dir);

    CLI11_PARSE(app, argc, argv);
    set_log_level(quiet ? LogLevel::Silent : verbose ? LogLevel::Info : LogLevel::Warning);

    try {
        if (*synth) {
            spec.kind = kind == "iid" ? SynthSpec::Kind::IidGaussian : SynthSpec::Kind::Constant;
            const RawImage raw = synthesize_raw(spec, params, bit_depth, parse_bayer(cfa_name));
            write_raw(raw, synth_out);
        } else if (*develop) {
            const RawImage raw = load_raw(dev_in);
            write_coeffs(develop_cover(raw, dev_qf, parse_green_kernel(dev_green)).coefficients, dev_out);
        } else if (*embed_cmd) {
            const RawImage raw = load_raw(emb.input);
            const EmbedResult r = embed(raw, make_config(emb));
            write_coeffs(r.stego, emb_out);
            if (!emb_report.empty()) {
                write_report(r.report, emb_report, emb_plane);
            }
            log_info("embedded " + std::to_string(r.report.total_bits) + " bits in " +
                     std::to_string(r.report.runtime_seconds) + " s");
        } else if (*pseudo) {
            write_raw(pseudo_embed(load_raw(ps_in), ps_seed), ps_out);
        } else if (*capacity) {
            const RawImage raw = load_raw(cap.input);
            write_report(capacity_map(raw, make_config(cap)), cap_out, cap_plane);
        } else if (*cov) {
            const MacroLattice lat = parse_lattice(cov_lat);
            const BayerPattern cfa = parse_bayer(cov_cfa);
            const GreenKernel gk = parse_green_kernel(cov_green);
            const StationaryCovariance s = neighborhood_covariance(lat, cfa, parse_mode(cov_mode), gk);
            write_matrix_csv(s.sigma.values, cov_out);
            if (cov_sub) {
                for (const auto& b : central_sub_blocks(s)) {
                    write_text(cov_out + "." + b.label + ".csv", labeled_csv(b));
                }
            }
            if (!cov_dump.empty()) {
                const OperatorKind k = parse_operator_kind(cov_dump);
                const BayerPattern patch_cfa = shift_pattern(cfa, -1, -1);
                std::vector<BlockPos> order;
                for (const auto& o : s.block_order) {
                    order.push_back({o.di + 1, o.dj + 1});
                }
                const int n = static_cast<int>(order.size());
                SparseOperator op = [&]() -> SparseOperator {
                    switch (k) {
                        case OperatorKind::DemosaicR: return build_demosaic(Channel::R, patch_cfa, 26, gk);
                        case OperatorKind::DemosaicG: return build_demosaic(Channel::G, patch_cfa, 26, gk);
                        case OperatorKind::DemosaicB: return build_demosaic(Channel::B, patch_cfa, 26, gk);
                        case OperatorKind::Luminance: return build_luminance(patch_cfa, 26, gk);
                        case OperatorKind::Lowpass: return build_lowpass(26);
                        case OperatorKind::Selection: return build_selection(26);
                        case OperatorKind::Permutation: return build_permutation(order);
                        case OperatorKind::Dct: return build_dct(n);
                        case OperatorKind::Assembled: break;
                    }
                    return assemble_blocks(s.block_order, cfa, gk, parse_mode(cov_mode)).m;
                }();
                std::string text = "row,col,value\n";
                char buf[64];
                for (const auto& t : op.entries()) {
                    std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", t.row, t.col, t.value);
                    text += buf;
                }
                write_text(cov_out + "." + cov_dump + ".csv", text);
            }
        } else if (*costs_cmd) {
            const RawImage raw = load_raw(cst.input);
            write_costs(export_costs(raw, make_config(cst)), cst_out);
        } else if (*analysis) {
            const BayerPattern cfa = parse_bayer(an_cfa);
            const fs::path dir(an_dir);
            fs::create_directories(dir);
            const IntraBlockDecomposition d = intra_block_decomposition(cfa);
            write_matrix_csv(d.full, dir / "intra_full.csv");
            write_matrix_csv(d.demosaic, dir / "intra_demosaic.csv");
            write_matrix_csv(d.lowpass, dir / "intra_lowpass.csv");
            char buf[160];
            std::snprintf(buf, sizeof buf, "alpha,beta,residual\n%.17g,%.17g,%.17g\n", d.alpha, d.beta, d.residual);
            write_text(dir / "intra_superposition.csv", buf);
            write_text(dir / ("ranking_" + std::to_string(an_u) + "_" + std::to_string(an_v) + ".csv"),
                       ranking_csv(mode_correlation_ranking(an_u, an_v, cfa)));
        }
    } catch (const std::exception& e) {
        std::cerr << "jcns: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
