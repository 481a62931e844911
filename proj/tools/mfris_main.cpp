#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfris/sweep.hpp"
#include "mfris/units.hpp"

using namespace mfris;

namespace {

ScenarioConfig load_or_default(const std::string& path, std::uint64_t seed_override,
                               bool have_seed) {
    ScenarioConfig cfg;
    if (!path.empty()) {
        cfg = load_config_file(path);
    } else {
        ValidationReport rep = validate(cfg);
        if (!rep.ok()) throw std::runtime_error(rep.joined());
    }
    if (have_seed) cfg.rng_seed = seed_override;
    return cfg;
}

std::vector<double> parse_points(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        out.push_back(std::stod(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

void print_rows(const std::vector<ResultRow>& rows) {
    for (const auto& r : rows)
        std::printf("%-16s %-10s %s=%-8.4g trial=%-3d %s=%-10.6g %s\n", r.scheme.c_str(),
                    r.csi.c_str(), r.swept_var.c_str(), r.swept_value, r.trial, r.metric.c_str(),
                    r.value, r.status.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical toolkit for multi-functional surface assisted networks"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string config_path, out_path, scheme_list = "mf-ris", csi_mode = "perfect";
    std::string var_name = "p_bs_dbm", points_text;
    std::uint64_t seed = 0;
    bool have_seed = false, timing = false, serial = false;
    int trials = 1, draws = 1000;
    std::string dump_channels;

    app.add_option("--config", config_path, "JSON configuration document");
    auto* seed_opt = app.add_option("--seed", seed, "Master RNG seed override");
    app.add_option("--out", out_path, "CSV output path");
    app.add_flag("--timing", timing, "Record wall-clock times (breaks byte reproducibility)");

    auto* analyze = app.add_subcommand("analyze", "Closed-form single-user capacity sweep");
    double an_p = 5.0, an_h_db = -45.0, an_g_db = -60.0, an_beta_db = 13.0, an_sumpa_mw = -1.0;
    int an_m = 300;
    std::string an_points = "1,3,5,8,10,13,16,21,26,32,40,50,64,80,100";
    analyze->add_option("--p-bs", an_p, "Transmit power [W]");
    analyze->add_option("--h-sq-db", an_h_db, "Forward link squared gain [dB]");
    analyze->add_option("--g-sq-db", an_g_db, "Reverse link squared gain [dB]");
    analyze->add_option("--beta-max-db", an_beta_db, "Amplification cap [dB]");
    analyze->add_option("--m-total", an_m, "Surface size");
    analyze->add_option("--sum-pa-mw", an_sumpa_mw,
                        "Total harvested power [mW]; <0 back-solves the 33.2 dB point");
    analyze->add_option("--points", an_points, "Amplifier-count grid (comma separated)");

    auto* optimize = app.add_subcommand("optimize", "Alternating design on one realization");
    optimize->add_option("--dump-channels", dump_channels, "Write channels as CSV");

    auto* robust = app.add_subcommand("robust", "Worst-case design on one realization");

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep of a figure family");
    sweep->add_option("--var", var_name, "m_a | p_bs_dbm | m | ris_y | total_power_dbm");
    sweep->add_option("--points", points_text, "Grid values, comma separated")->required();
    sweep->add_option("--trials", trials, "Trials per grid point");
    sweep->add_option("--scheme", scheme_list, "Comma separated scheme list");
    sweep->add_option("--csi", csi_mode, "perfect | robust | non-robust");
    sweep->add_flag("--serial", serial, "Use the serial reference dispatcher");

    auto* validate_cmd = app.add_subcommand("validate", "Sampled check of a worst-case design");
    validate_cmd->add_option("--draws", draws, "Error realizations to draw");

    CLI11_PARSE(app, argc, argv);
    have_seed = seed_opt->count() > 0;

    try {
        AlgorithmOptions opts;

        if (analyze->parsed()) {
            AnalysisParams p;
            p.P_BS_max = an_p;
            p.M = an_m;
            p.h_sq = db_to_linear(an_h_db);
            p.g_sq = db_to_linear(an_g_db);
            p.beta_max = db_to_linear(an_beta_db);
            if (an_sumpa_mw >= 0.0) {
                p.sum_pa = an_sumpa_mw * 1e-3;
            } else {
                p.M_A = 10;
                const double po = back_solve_po_mf(db_to_linear(33.2), p);
                p.sum_pa = sum_pa_from_output_power(p, po, 10);
            }
            const SweepResult res = run_analysis_sweep(p, parse_points(an_points));
            if (!out_path.empty()) emit_csv(res.rows, out_path);
            print_rows(res.rows);
            return 0;
        }

        ScenarioConfig cfg = load_or_default(config_path, seed, have_seed);

        if (optimize->parsed() || robust->parsed()) {
            RngStream chan_rng(cfg.rng_seed, 0, 1);
            RngStream algo_rng(cfg.rng_seed, 0, 2);
            const ChannelSet set = generate_channel_set(cfg, chan_rng);
            if (!dump_channels.empty()) dump_channels_csv(set, dump_channels);

            std::vector<ResultRow> rows;
            ResultRow row;
            row.swept_var = "p_bs_dbm";
            row.swept_value = watts_to_dbm(cfg.P_BS_max);
            row.seed = cfg.rng_seed;
            row.metric = "sr_bits";
            if (robust->parsed()) {
                const RobustAoResult res = robust_alternating_optimize(set, cfg, opts, algo_rng);
                row.scheme = scheme_name(Scheme::MfRis);
                row.csi = csi_name(CsiMode::Robust);
                row.value = res.true_sum_rate;
                row.status = res.status;
                row.iters = res.outer_iterations;
                std::printf("certified worst-case sum rate: %.6f bits/s/Hz\n",
                            res.solution.certified_sum_rate);
                std::printf("sum rate on the true channels: %.6f bits/s/Hz\n", res.true_sum_rate);
            } else {
                AoOptions ao;
                const AoResult res =
                    alternating_optimize(ChannelView::true_of(set), cfg, opts, ao, algo_rng);
                row.scheme = scheme_name(Scheme::MfRis);
                row.csi = csi_name(CsiMode::Perfect);
                row.value = res.sum_rate_value;
                row.status = res.status;
                row.iters = res.outer_iterations;
                std::printf("sum rate: %.6f bits/s/Hz after %d rounds (%s)\n", res.sum_rate_value,
                            res.outer_iterations, res.status.c_str());
                std::printf("trace:");
                for (const double v : res.sr_trace) std::printf(" %.4f", v);
                std::printf("\n");
            }
            rows.push_back(row);
            if (!out_path.empty()) emit_csv(rows, out_path);
            return 0;
        }

        if (validate_cmd->parsed()) {
            RngStream chan_rng(cfg.rng_seed, 0, 1);
            RngStream algo_rng(cfg.rng_seed, 0, 2);
            const ChannelSet set = generate_channel_set(cfg, chan_rng);
            const RobustAoResult res = robust_alternating_optimize(set, cfg, opts, algo_rng);
            RngStream draw_rng(cfg.rng_seed, 0, 3);
            const SamplingReport rep =
                validate_by_sampling(res.solution, set, cfg, draws, draw_rng);
            std::printf("draws=%d violations=%zu worst=%.3e\n", rep.draws,
                        rep.violations.size(), rep.worst_violation);
            if (!out_path.empty()) write_violation_csv(rep, out_path);
            return rep.violations.empty() ? 0 : 2;
        }

        // sweep
        SweepSpec spec;
        if (!parse_variable(var_name, spec.variable))
            throw std::runtime_error("unknown sweep variable: " + var_name);
        spec.grid = parse_points(points_text);
        spec.trials = trials;
        spec.schemes.clear();
        std::size_t pos = 0;
        while (pos < scheme_list.size()) {
            std::size_t next = scheme_list.find(',', pos);
            if (next == std::string::npos) next = scheme_list.size();
            Scheme s;
            const std::string tok = scheme_list.substr(pos, next - pos);
            if (!parse_scheme(tok, s)) throw std::runtime_error("unknown scheme: " + tok);
            spec.schemes.push_back(s);
            pos = next + 1;
        }
        if (!parse_csi(csi_mode, spec.csi)) throw std::runtime_error("unknown csi mode: " + csi_mode);
        spec.parallel = !serial;

        const SweepResult res = run_sweep(cfg, spec, opts, timing);
        if (!out_path.empty()) emit_csv(res.rows, out_path);
        print_rows(res.rows);
        return res.any_failure ? 2 : 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
