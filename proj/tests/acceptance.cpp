// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// criteria hold at their stated tolerances.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mfris/analysis.hpp"
#include "mfris/robust.hpp"
#include "mfris/sweep.hpp"
#include "mfris/units.hpp"

using namespace mfris;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %-34s %s\n", pass ? "PASS" : "FAIL", id, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

AnalysisParams section_three_params() {
    AnalysisParams p;
    p.P_BS_max = 5.0;
    p.M = 300;
    p.M_A = 10;
    p.h_sq = db_to_linear(-45.0);
    p.g_sq = db_to_linear(-60.0);
    p.sigma0_sq = dbm_to_watts(-70.0);
    p.sigma1_sq = dbm_to_watts(-70.0);
    p.beta_max = db_to_linear(13.0);
    return p;
}

AnalysisParams random_params(RngStream& rng) {
    AnalysisParams p;
    p.P_BS_max = rng.uniform(1.0, 10.0);
    p.M = 20 + static_cast<int>(rng.uniform(0.0, 40.0));
    p.h_sq = std::pow(10.0, rng.uniform(-6.0, -3.0));
    p.g_sq = std::pow(10.0, rng.uniform(-8.0, -5.0));
    p.sigma0_sq = std::pow(10.0, rng.uniform(-11.0, -9.0));
    p.sigma1_sq = std::pow(10.0, rng.uniform(-11.0, -9.0));
    p.beta_max = rng.uniform(2.0, 40.0);
    p.energy.P_b = rng.uniform(0.5e-3, 3e-3);
    p.energy.P_DC = rng.uniform(0.1e-3, 1e-3);
    p.energy.P_C = rng.uniform(1e-6, 5e-6);
    p.energy.xi = rng.uniform(1.0, 1.5);
    p.sum_pa = rng.uniform(5e-3, 80e-3);
    p.M_A = 1 + static_cast<int>(rng.uniform(0.0, p.M - 1.0));
    return p;
}

// Strong-harvest line-of-sight scenario shared by the cross-module checks.
struct SisoSetup {
    ScenarioConfig cfg;
    ChannelView view;
    AnalysisParams params;
};

SisoSetup make_siso_setup(int m, double h_sq_db, double g_sq_db) {
    SisoSetup s;
    s.cfg.N = 1;
    s.cfg.K = 1;
    s.cfg.M = m;
    s.cfg.P_BS_max = 5.0;
    s.cfg.beta_max = db_to_linear(13.0);
    validate(s.cfg);

    const double h_sq = db_to_linear(h_sq_db);
    const double g_sq = db_to_linear(g_sq_db);
    const Eigen::VectorXcd a_in = steering_vector(m, 0.4, 1.1, 0.5);
    const Eigen::VectorXcd a_out = steering_vector(m, 1.9, 0.7, 0.5);
    s.view.h = {Eigen::VectorXcd::Zero(1)}; // direct link blocked
    s.view.g = {std::sqrt(g_sq) * a_out};
    s.view.H = std::sqrt(h_sq) * a_in;

    s.params = section_three_params();
    s.params.M = m;
    s.params.h_sq = h_sq;
    s.params.g_sq = g_sq;
    return s;
}

} // namespace

int main() {
    const auto suite_t0 = std::chrono::steady_clock::now();
    char buf[256];

    // ------------------------------------------------------------------ 1
    {
        AnalysisParams p = section_three_params();
        p.sum_pa = 42e-3;
        const auto t0 = std::chrono::steady_clock::now();
        const SeResult r = snr_se(p);
        const double ms = seconds_since(t0) * 1e3;
        const double db = linear_to_db(r.gamma);
        std::snprintf(buf, sizeof(buf), "snr_se = %.4f dB (target 22.0 +- 0.05), %.3f ms", db, ms);
        report(1, "closed-form anchor", r.feasible && std::abs(db - 22.0) <= 0.05 && ms < 1.0,
               buf);
    }

    // ------------------------------------------------------------------ 2
    {
        AnalysisParams p = section_three_params();
        const double po = back_solve_po_mf(db_to_linear(33.2), p);
        p.sum_pa = sum_pa_from_output_power(p, po, p.M_A);
        const SisoSnr r = snr_mf(p);
        const double db = r.feasible ? linear_to_db(r.gamma) : 0.0;
        const CrossoverResult c = crossover_threshold(p);
        std::snprintf(buf, sizeof(buf),
                      "back-solved P_O = %.3f mW, snr_mf = %.3f dB, threshold = %.2f", po * 1e3,
                      db, c.threshold);
        report(2, "back-solved anchor (documented)",
               std::abs(db - 33.2) <= 0.1 && c.exists && std::abs(c.threshold - 21.0) <= 1.0,
               buf);
    }

    // ------------------------------------------------------------------ 3
    {
        const auto t0 = std::chrono::steady_clock::now();
        RngStream rng(101);
        bool ok = true;
        std::string why;
        for (int draw = 0; draw < 50 && ok; ++draw) {
            AnalysisParams p = random_params(rng);

            // amplitude against the million-point grid
            const SisoSolution sol =
                optimal_siso_solution(p, rng.cnormal_vector(p.M_A), rng.cnormal_vector(p.M_A));
            if (sol.feasible) {
                const double step = p.beta_max / 1e6;
                const double load =
                    static_cast<double>(p.M_A) * (p.P_BS_max * p.h_sq + p.sigma1_sq);
                const double po = max_output_power(p, p.M_A);
                double best_beta = 0.0, best_gamma = -1.0;
                for (double beta = 0.0; beta <= p.beta_max + 0.5 * step; beta += step) {
                    if (beta * load > po) break;
                    const double gamma = p.P_BS_max * beta * p.h_sq * p.g_sq * p.M_A * p.M_A /
                                         (beta * p.sigma1_sq * p.g_sq * p.M_A + p.sigma0_sq);
                    if (gamma > best_gamma) {
                        best_gamma = gamma;
                        best_beta = beta;
                    }
                }
                if (std::abs(sol.beta_star - best_beta) > step * 1.0001) {
                    ok = false;
                    why = "amplitude off grid";
                }
            }

            // split against exhaustive search
            int best = 0;
            double best_gamma = 0.0;
            for (int m = 0; m <= p.M; ++m) {
                AnalysisParams q = p;
                q.M_A = m;
                const SisoSnr r = snr_mf(q);
                if (r.feasible && r.gamma > best_gamma) {
                    best_gamma = r.gamma;
                    best = m;
                }
            }
            if (optimal_elements_mf(p) != best) {
                ok = false;
                why = "element split mismatch";
            }

            // reflect-mode split formula vs exhaustive feasibility
            const SeResult se = snr_se(p);
            int se_best = 0;
            double se_gamma = -1.0;
            for (int m = 0; m <= p.M; ++m) {
                const double cons =
                    m * p.energy.P_b + static_cast<double>(p.M - m) * p.energy.P_C;
                if (cons > p.sum_pa) continue;
                const double gamma = p.P_BS_max * p.h_sq * p.g_sq * m * m / p.sigma0_sq;
                if (gamma > se_gamma) {
                    se_gamma = gamma;
                    se_best = m;
                }
            }
            if (se.optimal_m_a != se_best) {
                ok = false;
                why = "reflect split mismatch";
            }
        }
        const double sec = seconds_since(t0);
        std::snprintf(buf, sizeof(buf), "50 draws in %.2f s%s%s", sec, ok ? "" : ": ",
                      why.c_str());
        report(3, "proposition oracles", ok && sec < 10.0, buf);
    }

    // ------------------------------------------------------------------ 4
    {
        EnergyParams e;
        e.Omega = e.omega_from_circuit();
        const double zero = std::abs(harvested_power(0.0, e));
        const double sat = harvested_power(1.0, e);
        bool monotone = true;
        RngStream rng(102);
        std::vector<double> xs(10000);
        for (auto& x : xs) x = rng.uniform(0.0, 0.1);
        std::sort(xs.begin(), xs.end());
        double prev = -1.0;
        for (const double x : xs) {
            const double p = harvested_power(x, e);
            if (p < prev) monotone = false;
            prev = p;
        }
        std::snprintf(buf, sizeof(buf), "P(0) = %.2e, Z - P(1W) = %.2e, monotone = %d", zero,
                      e.Z - sat, monotone);
        report(4, "energy-model properties",
               zero <= 1e-18 && std::abs(sat - e.Z) <= 1e-9 * e.Z && monotone, buf);
    }

    // ------------------------------------------------------------------ 5
    {
        RngStream rng(103);
        bool ok = true;
        for (int inst = 0; inst < 10 && ok; ++inst) {
            const double a0 = std::pow(10.0, rng.uniform(-4.0, 1.0));
            const double b0 = std::pow(10.0, rng.uniform(0.0, 3.0));
            const double tight =
                std::abs(rate_lower_bound(a0, b0, a0, b0) - std::log2(1.0 + 1.0 / (a0 * b0)));
            if (tight > 1e-12) ok = false;
            for (int i = 0; i < 100; ++i) {
                const double a = a0 * std::pow(10.0, rng.uniform(-1.0, 1.0));
                const double b = b0 * std::pow(10.0, rng.uniform(-1.0, 1.0));
                if (rate_lower_bound(a, b, a0, b0) > std::log2(1.0 + 1.0 / (a * b)) + 1e-12)
                    ok = false;
            }
            const double h = 1e-6;
            const double da = (rate_lower_bound(a0 * (1 + h), b0, a0, b0) -
                               rate_lower_bound(a0 * (1 - h), b0, a0, b0)) /
                              (2 * h * a0);
            const double log2e = 1.4426950408889634;
            const double expect = -log2e / (a0 + a0 * a0 * b0);
            if (std::abs(da - expect) > 1e-5 * std::abs(expect)) ok = false;
        }
        report(5, "surrogate-rate suite", ok, ok ? "tightness, bound, gradients" : "mismatch");
    }

    // ------------------------------------------------------------------ 6
    {
        const auto t0 = std::chrono::steady_clock::now();
        ScenarioConfig cfg; // Table-driven defaults: N=4, K=3
        cfg.M = 8;
        cfg.rng_seed = 2026;
        validate(cfg);
        RngStream chan(cfg.rng_seed, 0, 1), algo(cfg.rng_seed, 0, 2);
        const ChannelSet set = generate_channel_set(cfg, chan);
        const ChannelView view = ChannelView::true_of(set);

        AlgorithmOptions opts;
        AoOptions ao;
        const AoResult res = alternating_optimize(view, cfg, opts, ao, algo);

        bool trace_ok = true;
        for (std::size_t i = 1; i < res.sr_trace.size(); ++i)
            if (res.sr_trace[i] < res.sr_trace[i - 1] - 1e-6) trace_ok = false;

        const SrocrResult fin =
            solve_beamforming_srocr(view, res.surface, res.beams, cfg, opts, ao.ris);
        double worst_f = 1.0;
        for (const double r : fin.rank_ratio) worst_f = std::min(worst_f, r);

        RngStream algo2(cfg.rng_seed, 1, 2);
        const PenaltyResult pen =
            solve_ris_penalty(view, fin.beams, res.surface, cfg, opts, ao.ris, algo2);

        bool binary_ok = true;
        for (int m = 0; m < cfg.M; ++m) {
            const double a = pen.state.alpha(m);
            if (std::min(a, 1.0 - a) > 1e-3) binary_ok = false;
        }
        const double sec = seconds_since(t0);
        std::snprintf(buf, sizeof(buf),
                      "F ratio %.6f, U ratio %.6f, residual %.2e, trace ok %d, %.0f s", worst_f,
                      pen.rank_ratio, pen.penalty_residual, trace_ok, sec);
        report(6, "algorithm convergence (desk)",
               worst_f >= 0.999 && pen.rank_ratio >= 0.999 &&
                   pen.penalty_residual <= 1e-6 && binary_ok && trace_ok && sec <= 300.0,
               buf);
    }

    // ------------------------------------------------------------------ 7
    {
        SisoSetup s = make_siso_setup(12, -27.0, -50.0);
        const int m_a = 2;
        s.params.M_A = m_a;
        s.params.sum_pa = sum_pa_los(s.params, s.params.M - m_a);
        const SisoSnr gamma = snr_mf(s.params);
        const double closed = std::log2(1.0 + gamma.gamma);

        AlgorithmOptions opts;
        AoOptions ao;
        ao.fixed_alpha = true;
        ao.alpha_pattern = Eigen::VectorXd::Zero(s.cfg.M);
        for (int i = 0; i < m_a; ++i) ao.alpha_pattern(i * s.cfg.M / m_a) = 1.0;
        RngStream algo(5, 0, 2);
        const AoResult res = alternating_optimize(s.view, s.cfg, opts, ao, algo);

        const double rel = std::abs(res.sum_rate_value - closed) / closed;
        std::snprintf(buf, sizeof(buf), "closed form %.4f vs alternation %.4f (%.2f%%)", closed,
                      res.sum_rate_value, rel * 100.0);
        report(7, "cross-module consistency", gamma.feasible && rel <= 0.05, buf);
    }

    // ------------------------------------------------------------------ 8
    {
        const auto t0 = std::chrono::steady_clock::now();
        SisoSetup s = make_siso_setup(2, -26.0, -45.0);
        s.cfg.beta_max = db_to_linear(3.0); // keeps the feasible gains on the grid

        AlgorithmOptions opts;
        AoOptions ao;
        RngStream algo(8, 0, 2);
        const AoResult res = alternating_optimize(s.view, s.cfg, opts, ao, algo);

        // exhaustive grid: mode patterns x 64 phases x 32 amplitudes per element
        const double p = s.cfg.P_BS_max;
        std::vector<Eigen::VectorXcd> f(1, Eigen::VectorXcd::Constant(1, std::sqrt(p)));
        const BeamformerState beams = BeamformerState::from_vectors(f);
        double grid_best = 0.0;
        for (int pattern = 0; pattern < 4; ++pattern) {
            SurfaceState st = SurfaceState::zeros(2);
            st.alpha(0) = pattern & 1 ? 1.0 : 0.0;
            st.alpha(1) = pattern & 2 ? 1.0 : 0.0;
            const int live = st.amplify_count();
            const int n_theta = 64, n_beta = 32;
            const long combos = static_cast<long>(std::pow(n_theta, live)) *
                                static_cast<long>(std::pow(n_beta, live));
            for (long c = 0; c < combos; ++c) {
                long rest = c;
                for (int m = 0, lane = 0; m < 2; ++m) {
                    if (st.alpha(m) < 0.5) continue;
                    const long t_idx = rest % n_theta;
                    rest /= n_theta;
                    const long b_idx = rest % n_beta;
                    rest /= n_beta;
                    st.theta(m) = 2.0 * M_PI * t_idx / n_theta;
                    st.beta(m) = s.cfg.beta_max * b_idx / (n_beta - 1);
                    ++lane;
                }
                if (sustainability_margin(st, s.view.H, beams.F, s.cfg.sigma1_sq,
                                          s.cfg.energy) < 0.0)
                    continue;
                grid_best = std::max(grid_best, sum_rate(s.view, st, beams, s.cfg.sigma0_sq,
                                                         s.cfg.sigma1_sq));
            }
        }
        const double sec = seconds_since(t0);
        std::snprintf(buf, sizeof(buf), "alternation %.4f vs grid %.4f, %.0f s",
                      res.sum_rate_value, grid_best, sec);
        report(8, "tiny-instance global check",
               res.sum_rate_value >= 0.95 * grid_best && sec <= 120.0, buf);
    }

    // ------------------------------------------------------------------ 9
    {
        RngStream rng(109);
        bool identity_ok = true;
        for (int draw = 0; draw < 100; ++draw) {
            const int N = 3, M = 4;
            const Eigen::VectorXcd h = rng.cnormal_vector(N);
            const Eigen::MatrixXcd G = rng.cnormal_matrix(M, N);
            const Eigen::VectorXcd f = rng.cnormal_vector(N);
            const Eigen::VectorXcd v = rng.cnormal_vector(M);
            const Eigen::VectorXcd f0 = rng.cnormal_vector(N);
            const Eigen::VectorXcd v0 = rng.cnormal_vector(M);
            const Eigen::VectorXcd dh = 0.3 * rng.cnormal_vector(N);
            const Eigen::MatrixXcd dG = 0.3 * rng.cnormal_matrix(M, N);
            const double a = lemma1_coefficients(h, G, f, v, f0, v0).eval(dh, dG);
            const double b = lemma1_direct(h, G, dh, dG, f, v, f0, v0);
            if (std::abs(a - b) > 1e-9 * (1.0 + std::abs(b))) identity_ok = false;
        }

        // S-procedure soundness sampling
        double sproc_worst = 0.0;
        {
            Eigen::MatrixXcd A = rng.cnormal_matrix(3, 3);
            A = (0.5 * (A + A.adjoint())).eval();
            const Eigen::VectorXcd a = rng.cnormal_vector(3);
            const double xi = 0.6;
            conic::Program prog;
            const int tvar = prog.add_real("t");
            prog.maximize(conic::Expr::variable(tvar));
            QuadFormExpr f0;
            f0.A = conic::ExprMatrix::constant(A);
            f0.a.resize(3);
            for (int i = 0; i < 3; ++i) f0.a[i] = conic::Expr(conic::cd(a(i)));
            f0.a0 = conic::Expr(4.0) - conic::Expr::variable(tvar);
            std::vector<QuadraticForm> balls(1);
            balls[0].A = -Eigen::MatrixXcd::Identity(3, 3);
            balls[0].a = Eigen::VectorXcd::Zero(3);
            balls[0].a0 = xi * xi;
            s_procedure_lmi(prog, f0, balls);
            const conic::Solution sol = prog.solve();
            for (int d = 0; d < 10000; ++d) {
                const Eigen::VectorXcd x = rng.uniform_ball_vector(3, xi);
                const double val = std::real((x.adjoint() * A * x)(0, 0)) +
                                   2.0 * std::real((a.adjoint() * x)(0, 0)) + 4.0 -
                                   sol.objective;
                sproc_worst = std::min(sproc_worst, val);
            }
        }

        // sign-definiteness soundness sampling
        double sign_worst = 0.0;
        {
            const Eigen::MatrixXcd E = rng.cnormal_matrix(2, 3);
            const Eigen::MatrixXcd F = rng.cnormal_matrix(2, 3);
            const double xi = 0.25;
            conic::Program prog;
            const int svar = prog.add_real("s");
            prog.maximize(-conic::Expr::variable(svar));
            conic::ExprMatrix D = conic::ExprMatrix::zero(3, 3);
            for (int i = 0; i < 3; ++i) D(i, i) = conic::Expr::variable(svar);
            std::vector<SignDefPair> pairs(1);
            pairs[0].E = conic::ExprMatrix::constant(E);
            pairs[0].F = F;
            pairs[0].xi = xi;
            sign_definiteness_lmi(prog, D, pairs);
            const conic::Solution sol = prog.solve();
            for (int d = 0; d < 10000; ++d) {
                Eigen::MatrixXcd Gm = rng.uniform_ball_matrix(2, 2, xi);
                Eigen::MatrixXcd rhs = E.adjoint() * Gm * F;
                rhs = (rhs + rhs.adjoint()).eval();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                    sol.values(svar) * Eigen::MatrixXcd::Identity(3, 3) - rhs,
                    Eigen::EigenvaluesOnly);
                sign_worst = std::min(sign_worst, es.eigenvalues().minCoeff());
            }
        }

        // robust design: sampling validation and collapse
        ScenarioConfig cfg;
        cfg.N = 2;
        cfg.K = 2;
        cfg.M = 3;
        cfg.P_BS_max = dbm_to_watts(36.0);
        cfg.beta_max = db_to_linear(16.0);
        cfg.geometry.ris_position = {4.0, 2.0, 6.0};
        cfg.uncertainty.kappa_h = std::sqrt(0.01);
        cfg.uncertainty.kappa_g = std::sqrt(0.01);
        cfg.uncertainty.kappa_H = std::sqrt(0.01);
        cfg.rng_seed = 2027;
        validate(cfg);

        AlgorithmOptions opts;
        RngStream chan(cfg.rng_seed, 0, 1), algo(cfg.rng_seed, 0, 2);
        const ChannelSet set = generate_channel_set(cfg, chan);
        const RobustAoResult rob = robust_alternating_optimize(set, cfg, opts, algo);
        RngStream draw(cfg.rng_seed, 0, 3);
        const SamplingReport rep = validate_by_sampling(rob.solution, set, cfg, 1000, draw);

        // kappa -> 0 collapse
        ScenarioConfig cfg0 = cfg;
        cfg0.uncertainty = {};
        validate(cfg0);
        RngStream chan0(cfg0.rng_seed, 0, 1), algo0(cfg0.rng_seed, 0, 2),
            algo1(cfg0.rng_seed, 0, 2);
        const ChannelSet set0 = generate_channel_set(cfg0, chan0);
        const RobustAoResult rob0 = robust_alternating_optimize(set0, cfg0, opts, algo0);
        AoOptions ao;
        const AoResult perf =
            alternating_optimize(ChannelView::true_of(set0), cfg0, opts, ao, algo1);
        const double collapse_gap =
            std::abs(rob0.true_sum_rate - perf.sum_rate_value) /
            std::max(perf.sum_rate_value, 1e-9);

        std::snprintf(buf, sizeof(buf),
                      "identity %d, lmi worst %.1e/%.1e, %zu violations, collapse %.2f%%",
                      identity_ok, sproc_worst, sign_worst, rep.violations.size(),
                      collapse_gap * 100.0);
        report(9, "robust suite",
               identity_ok && sproc_worst >= -1e-7 && sign_worst >= -1e-7 &&
                   rep.violations.empty() && collapse_gap <= 0.02,
               buf);
    }

    // ----------------------------------------------------------------- 10
    {
        const auto t0 = std::chrono::steady_clock::now();

        // (a) single-user closed-form shape
        bool shape_ok = true;
        {
            AnalysisParams p = section_three_params();
            const double po = back_solve_po_mf(db_to_linear(33.2), p);
            p.sum_pa = sum_pa_from_output_power(p, po, 10);
            const int peak = optimal_elements_mf(p);
            double prev = -1.0;
            bool rising = true;
            for (int m = 0; m <= p.M; ++m) {
                AnalysisParams q = p;
                q.M_A = m;
                const SisoSnr r = snr_mf(q);
                if (!r.feasible) break;
                if (rising && m > peak) rising = false;
                if (rising && r.gamma < prev - 1e-9) shape_ok = false;
                if (!rising && r.gamma > prev + 1e-9 && m > peak + 1) shape_ok = false;
                prev = r.gamma;
            }
            double prev_se = -1.0;
            for (int m = 1; m <= p.M; ++m) {
                AnalysisParams q = p;
                q.M_A = m;
                const SeResult r = snr_se(q);
                if (!r.feasible) break;
                if (r.gamma <= prev_se) shape_ok = false;
                prev_se = r.gamma;
            }
        }

        // (b) ordering on identical channels, averaged over trials
        bool order_ok = true;
        double mf_mean = 0.0, se_mean = 0.0;
        {
            ScenarioConfig cfg;
            cfg.M = 12;
            cfg.P_BS_max = dbm_to_watts(40.0);
            cfg.geometry.ris_position = {4.0, 2.0, 6.0};
            cfg.rng_seed = 55;
            validate(cfg);
            AlgorithmOptions opts;
            SweepSpec spec;
            spec.variable = SweepVariable::TransmitPower;
            spec.grid = {40.0};
            spec.trials = 10;
            spec.schemes = {Scheme::MfRis, Scheme::SelfSustainable};
            const SweepResult res = run_sweep(cfg, spec, opts);
            for (const auto& r : res.rows) {
                if (r.scheme == "mf-ris") mf_mean += r.value;
                if (r.scheme == "self-sustainable") se_mean += r.value;
            }
            mf_mean /= spec.trials;
            se_mean /= spec.trials;
            order_ok = mf_mean >= se_mean * (1.0 - 1e-3);
        }

        bool robust_le_perfect = true;
        double rob_mean = 0.0, perf_mean = 0.0;
        {
            ScenarioConfig cfg;
            cfg.N = 2;
            cfg.K = 2;
            cfg.M = 4;
            cfg.P_BS_max = dbm_to_watts(36.0);
            cfg.geometry.ris_position = {4.0, 2.0, 6.0};
            cfg.uncertainty.kappa_h = std::sqrt(0.1);
            cfg.uncertainty.kappa_g = std::sqrt(0.1);
            cfg.uncertainty.kappa_H = std::sqrt(0.1);
            cfg.rng_seed = 57;
            validate(cfg);
            AlgorithmOptions opts;
            for (int trial = 0; trial < 10; ++trial) {
                RngStream chan(cfg.rng_seed, trial, 1);
                RngStream a1(cfg.rng_seed, trial, 2), a2(cfg.rng_seed, trial, 2);
                const ChannelSet set = generate_channel_set(cfg, chan);
                const RobustAoResult rob = robust_alternating_optimize(set, cfg, opts, a1);
                AoOptions ao;
                const AoResult perf =
                    alternating_optimize(ChannelView::true_of(set), cfg, opts, ao, a2);
                rob_mean += rob.true_sum_rate;
                perf_mean += perf.sum_rate_value;
                if (rob.true_sum_rate > perf.sum_rate_value + 1e-6) robust_le_perfect = false;
            }
            rob_mean /= 10.0;
            perf_mean /= 10.0;
        }

        // (c) surface position sweep: rate decays as it leaves the transmitter
        bool position_ok = true;
        double first_mean = 0.0, last_mean = 0.0;
        {
            ScenarioConfig cfg;
            cfg.M = 12;
            cfg.P_BS_max = dbm_to_watts(40.0);
            cfg.rng_seed = 58;
            validate(cfg);
            AlgorithmOptions opts;
            SweepSpec spec;
            spec.variable = SweepVariable::RisY;
            spec.grid = {2.0, 10.0, 18.0, 26.0, 34.0};
            spec.trials = 10;
            spec.schemes = {Scheme::MfRis};
            const SweepResult res = run_sweep(cfg, spec, opts);
            std::vector<double> means(spec.grid.size(), 0.0);
            for (const auto& r : res.rows)
                for (std::size_t g = 0; g < spec.grid.size(); ++g)
                    if (r.swept_value == spec.grid[g]) means[g] += r.value / spec.trials;
            for (std::size_t g = 1; g < means.size(); ++g)
                if (means[g] > means[g - 1] * (1.0 + 1e-3) + 1e-6) position_ok = false;
            first_mean = means.front();
            last_mean = means.back();
        }

        const double sec = seconds_since(t0);
        std::snprintf(buf, sizeof(buf),
                      "shape %d; mf %.3f vs se %.3f; rob %.3f vs perf %.3f; y-sweep %.3f->%.3f; "
                      "%.0f s",
                      shape_ok, mf_mean, se_mean, rob_mean, perf_mean, first_mean, last_mean,
                      sec);
        report(10, "figure trends (desk scale)",
               shape_ok && order_ok && robust_le_perfect && position_ok && sec <= 1800.0, buf);
    }

    // ----------------------------------------------------------------- 11
    {
        ScenarioConfig cfg;
        cfg.N = 2;
        cfg.K = 1;
        cfg.M = 2;
        cfg.geometry.ris_position = {4.0, 2.0, 6.0};
        cfg.rng_seed = 77;
        validate(cfg);
        AlgorithmOptions opts;
        SweepSpec spec;
        spec.variable = SweepVariable::TransmitPower;
        spec.grid = {33.0, 36.0};
        spec.trials = 2;
        spec.schemes = {Scheme::MfRis, Scheme::NoRis};

        emit_csv(run_sweep(cfg, spec, opts).rows, "/tmp/mfris_acc_a.csv");
        spec.parallel = false;
        emit_csv(run_sweep(cfg, spec, opts).rows, "/tmp/mfris_acc_b.csv");
        auto slurp = [](const char* path) {
            std::ifstream in(path, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        const std::string a = slurp("/tmp/mfris_acc_a.csv");
        const std::string b = slurp("/tmp/mfris_acc_b.csv");
        std::remove("/tmp/mfris_acc_a.csv");
        std::remove("/tmp/mfris_acc_b.csv");
        std::snprintf(buf, sizeof(buf), "%zu bytes, identical = %d", a.size(), a == b);
        report(11, "determinism", !a.empty() && a == b, buf);
    }

    std::printf("----\n%s: %d criterion failure(s), %.0f s total\n",
                g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures, seconds_since(suite_t0));
    return g_failures == 0 ? 0 : 1;
}
