#include "mfris/sweep.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfris/units.hpp"

namespace mfris {

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::MfRis: return "mf-ris";
        case Scheme::SelfSustainable: return "self-sustainable";
        case Scheme::ReflectingOnly: return "reflecting-only";
        case Scheme::NoRis: return "no-ris";
        case Scheme::NonRobust: return "non-robust";
    }
    return "?";
}

const char* csi_name(CsiMode m) {
    switch (m) {
        case CsiMode::Perfect: return "perfect";
        case CsiMode::Robust: return "robust";
        case CsiMode::NonRobust: return "non-robust";
    }
    return "?";
}

const char* variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::AmplifyCount: return "m_a";
        case SweepVariable::TransmitPower: return "p_bs_dbm";
        case SweepVariable::Elements: return "m";
        case SweepVariable::RisY: return "ris_y";
        case SweepVariable::TotalPower: return "total_power_dbm";
    }
    return "?";
}

bool parse_scheme(const std::string& name, Scheme& out) {
    for (Scheme s : {Scheme::MfRis, Scheme::SelfSustainable, Scheme::ReflectingOnly,
                     Scheme::NoRis, Scheme::NonRobust}) {
        if (name == scheme_name(s)) {
            out = s;
            return true;
        }
    }
    return false;
}

bool parse_csi(const std::string& name, CsiMode& out) {
    for (CsiMode m : {CsiMode::Perfect, CsiMode::Robust, CsiMode::NonRobust}) {
        if (name == csi_name(m)) {
            out = m;
            return true;
        }
    }
    return false;
}

bool parse_variable(const std::string& name, SweepVariable& out) {
    for (SweepVariable v :
         {SweepVariable::AmplifyCount, SweepVariable::TransmitPower, SweepVariable::Elements,
          SweepVariable::RisY, SweepVariable::TotalPower}) {
        if (name == variable_name(v)) {
            out = v;
            return true;
        }
    }
    return false;
}

namespace {

// Evenly spread amplifier pattern used by fixed-split sweeps.
Eigen::VectorXd spread_pattern(int m, int m_a) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    if (m_a <= 0) return alpha;
    for (int i = 0; i < m_a; ++i) {
        const int idx = static_cast<int>(std::floor(static_cast<double>(i) * m / m_a));
        alpha(std::min(idx, m - 1)) = 1.0;
    }
    // collisions from rounding: fill remaining slots left to right
    int placed = static_cast<int>(alpha.sum());
    for (int i = 0; i < m && placed < m_a; ++i) {
        if (alpha(i) < 0.5) {
            alpha(i) = 1.0;
            ++placed;
        }
    }
    return alpha;
}

ScenarioConfig configure_point(const ScenarioConfig& base, SweepVariable variable, double value,
                               Scheme scheme) {
    ScenarioConfig cfg = base;
    switch (variable) {
        case SweepVariable::AmplifyCount:
            break; // handled through the fixed split
        case SweepVariable::TransmitPower:
            cfg.P_BS_max = dbm_to_watts(value);
            break;
        case SweepVariable::Elements:
            cfg.M = static_cast<int>(value);
            break;
        case SweepVariable::RisY:
            cfg.geometry.ris_position[1] = value;
            break;
        case SweepVariable::TotalPower: {
            // reflecting surfaces pay their shifters out of the same budget
            double p = dbm_to_watts(value);
            if (scheme == Scheme::ReflectingOnly)
                p = std::max(p - cfg.M * cfg.energy.P_b, 1e-6);
            cfg.P_BS_max = p;
            break;
        }
    }
    return cfg;
}

} // namespace

ResultRow run_point(const ScenarioConfig& base, SweepVariable variable, double value,
                    Scheme scheme, CsiMode csi, int trial, const AlgorithmOptions& opts,
                    bool capture_timing) {
    ResultRow row;
    row.scheme = scheme_name(scheme);
    row.csi = scheme == Scheme::NonRobust ? csi_name(CsiMode::NonRobust) : csi_name(csi);
    row.swept_var = variable_name(variable);
    row.swept_value = value;
    row.trial = trial;
    row.seed = base.rng_seed;
    row.metric = "sr_bits";

    const auto t0 = std::chrono::steady_clock::now();
    try {
        ScenarioConfig cfg = configure_point(base, variable, value, scheme);
        ValidationReport rep = validate(cfg);
        if (!rep.ok()) throw std::runtime_error(rep.joined());

        // Draws are keyed by trial only, so grid points compare the same
        // fading realizations and the trend is a paired difference.
        RngStream chan_rng(cfg.rng_seed, static_cast<std::uint64_t>(trial), 1);
        RngStream algo_rng(cfg.rng_seed, static_cast<std::uint64_t>(trial), 2);

        const ChannelSet set = generate_channel_set(cfg, chan_rng);

        AoOptions ao;
        switch (scheme) {
            case Scheme::MfRis:
                break;
            case Scheme::SelfSustainable:
                ao.ris.energy = EnergyModel::SelfSustainable;
                ao.ris.beta_cap = 1.0;
                break;
            case Scheme::ReflectingOnly:
                ao.ris.energy = EnergyModel::None;
                ao.ris.beta_cap = 1.0;
                ao.fixed_alpha = true;
                ao.alpha_pattern = Eigen::VectorXd::Ones(cfg.M);
                break;
            case Scheme::NoRis:
                ao.skip_surface = true;
                break;
            case Scheme::NonRobust:
                break;
        }
        if (variable == SweepVariable::AmplifyCount && scheme != Scheme::NoRis) {
            ao.fixed_alpha = true;
            ao.alpha_pattern = spread_pattern(cfg.M, static_cast<int>(value));
        }

        const ChannelView truth = ChannelView::true_of(set);
        if (scheme == Scheme::NonRobust || (csi == CsiMode::NonRobust && scheme == Scheme::MfRis)) {
            const AoResult res =
                alternating_optimize(ChannelView::estimate_of(set), cfg, opts, ao, algo_rng);
            row.value = sum_rate(truth, res.surface, res.beams, cfg.sigma0_sq, cfg.sigma1_sq);
            row.status = res.status;
            row.iters = res.outer_iterations;
        } else if (csi == CsiMode::Robust && scheme == Scheme::MfRis) {
            const RobustAoResult res = robust_alternating_optimize(set, cfg, opts, algo_rng);
            row.value = res.true_sum_rate;
            row.status = res.status;
            row.iters = res.outer_iterations;
        } else {
            // perfect CSI for this scheme (robust variants exist only for the
            // amplifying surface; other schemes fall back to estimates)
            const ChannelView design =
                csi == CsiMode::Perfect ? truth : ChannelView::estimate_of(set);
            const AoResult res = alternating_optimize(design, cfg, opts, ao, algo_rng);
            row.value = sum_rate(truth, res.surface, res.beams, cfg.sigma0_sq, cfg.sigma1_sq);
            row.status = res.status;
            row.iters = res.outer_iterations;
        }
    } catch (const std::exception& e) {
        row.status = std::string("error:") + e.what();
        row.value = 0.0;
    }
    if (capture_timing) {
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    }
    return row;
}

SweepResult run_sweep(const ScenarioConfig& config, const SweepSpec& spec,
                      const AlgorithmOptions& opts, bool capture_timing) {
    if (spec.grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
    if (spec.trials < 1) throw std::invalid_argument("run_sweep: trials >= 1 required");

    struct Task {
        int point, trial, scheme;
    };
    std::vector<Task> tasks;
    for (int p = 0; p < static_cast<int>(spec.grid.size()); ++p)
        for (int t = 0; t < spec.trials; ++t)
            for (int s = 0; s < static_cast<int>(spec.schemes.size()); ++s)
                tasks.push_back({p, t, s});

    SweepResult result;
    result.rows.resize(tasks.size());

    const int n_tasks = static_cast<int>(tasks.size());
#pragma omp parallel for schedule(dynamic) if (spec.parallel)
    for (int i = 0; i < n_tasks; ++i) {
        const Task& task = tasks[static_cast<std::size_t>(i)];
        result.rows[static_cast<std::size_t>(i)] =
            run_point(config, spec.variable, spec.grid[static_cast<std::size_t>(task.point)],
                      spec.schemes[static_cast<std::size_t>(task.scheme)], spec.csi, task.trial,
                      opts, capture_timing);
    }

    for (const auto& row : result.rows)
        if (row.status.rfind("error:", 0) == 0) result.any_failure = true;
    return result;
}

SweepResult run_analysis_sweep(const AnalysisParams& params, const std::vector<double>& ma_grid) {
    SweepResult result;
    for (const double value : ma_grid) {
        AnalysisParams p = params;
        p.M_A = static_cast<int>(value);

        ResultRow mf;
        mf.scheme = scheme_name(Scheme::MfRis);
        mf.csi = csi_name(CsiMode::Perfect);
        mf.swept_var = variable_name(SweepVariable::AmplifyCount);
        mf.swept_value = value;
        mf.metric = "snr_db";
        const SisoSnr snr = snr_mf(p);
        mf.value = snr.feasible && snr.gamma > 0.0 ? linear_to_db(snr.gamma) : 0.0;
        mf.status = snr.feasible ? "ok" : "infeasible";
        result.rows.push_back(mf);

        ResultRow se = mf;
        se.scheme = scheme_name(Scheme::SelfSustainable);
        const SeResult r = snr_se(p);
        se.value = r.feasible && r.gamma > 0.0 ? linear_to_db(r.gamma) : 0.0;
        se.status = r.feasible ? "ok" : "infeasible";
        result.rows.push_back(se);
    }
    return result;
}

std::string csv_string(const std::vector<ResultRow>& rows) {
    std::string out = "scheme,csi,swept_var,swept_value,trial,seed,metric,value,status,iters,wall_ms\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.9g,%d,%llu,%s,%.9g,%s,%d,%.9g\n",
                      r.scheme.c_str(), r.csi.c_str(), r.swept_var.c_str(), r.swept_value,
                      r.trial, static_cast<unsigned long long>(r.seed), r.metric.c_str(), r.value,
                      r.status.c_str(), r.iters, r.wall_ms);
        out += buf;
    }
    return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("emit_csv: empty result table");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
    const std::string text = csv_string(rows);
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

} // namespace mfris
