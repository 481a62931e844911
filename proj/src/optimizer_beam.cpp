#include <cmath>

#include "mfris/optimizer.hpp"
#include "optimizer_internal.hpp"

namespace mfris {

using conic::cd;
using conic::Expr;
using conic::ExprMatrix;
using conic::HermitianVar;
using conic::Program;
using conic::Solution;
using conic::Status;

namespace {

struct BeamProblem {
    Program prog;
    std::vector<HermitianVar> F;
    std::vector<int> Q, A, B;
    std::vector<int> C, zeta; // harvesting elements only
    std::vector<int> harvest_index;
};

// Subproblem of one rank-relaxation iteration: fixed surface, lifted
// beamformers, SCA surrogates at the supplied operating point.
BeamProblem build_beam_problem(const ChannelView& ch, const SurfaceState& st,
                               const ScenarioConfig& cfg, const RisOptions& ris,
                               const OperatingPoint& op, const PwlLogistic& pwl,
                               const std::vector<Eigen::VectorXcd>& srocr_dir,
                               const Eigen::VectorXd& srocr_w) {
    const int K = ch.users();
    const int N = ch.antennas();
    const int M = ch.elements();
    const double s0 = cfg.sigma0_sq;

    BeamProblem bp;
    Program& prog = bp.prog;

    for (int k = 0; k < K; ++k) bp.F.push_back(prog.add_hermitian(N, "F" + std::to_string(k)));
    for (int k = 0; k < K; ++k) {
        bp.Q.push_back(prog.add_real("Q" + std::to_string(k)));
        bp.A.push_back(prog.add_real("A" + std::to_string(k)));
        bp.B.push_back(prog.add_real("B" + std::to_string(k)));
    }

    Expr objective;
    for (int k = 0; k < K; ++k) objective += Expr::variable(bp.Q[k]);
    prog.maximize(objective);

    // transmit power budget
    Expr total_tr;
    for (int k = 0; k < K; ++k) total_tr += bp.F[k].trace();
    prog.add_le(total_tr, cfg.P_BS_max);

    std::vector<ExprMatrix> Fmat;
    for (int k = 0; k < K; ++k) {
        Fmat.push_back(bp.F[k].matrix());
        prog.add_psd(Fmat.back());
    }

    // per-user signal and interference in noise units
    const Eigen::MatrixXcd Theta = st.coefficient_matrix();
    std::vector<Eigen::RowVectorXcd> hbar(K);
    std::vector<double> ris_noise(K, 0.0);
    for (int k = 0; k < K; ++k) {
        hbar[k] = ch.combined_row(st, k);
        if (M > 0) ris_noise[k] = cfg.sigma1_sq * (ch.g[k].adjoint() * Theta).squaredNorm();
    }

    for (int k = 0; k < K; ++k) {
        add_rate_surrogate_row(prog, Expr::variable(bp.Q[k]), Expr::variable(bp.A[k]),
                               Expr::variable(bp.B[k]), op.A0(k), op.B0(k));

        const Eigen::MatrixXcd row = hbar[k] / std::sqrt(s0); // noise-unit channel
        const Eigen::MatrixXcd row_h = row.adjoint();
        auto quad = [&](int i) { return ((row * Fmat[i]) * row_h)(0, 0); };
        // 1/A <= |hbar f_k|^2  <->  A * signal >= 1; the factors are balanced
        // around the expansion point so the block stays well conditioned
        const double bal = 1.0 / std::max(op.A0(k), 1e-30);
        prog.add_abs2_le_product(Expr(1.0), Expr::variable(bp.A[k]) * cd(bal, 0.0),
                                 quad(k) * cd(1.0 / bal, 0.0));

        Expr interference;
        for (int i = 0; i < K; ++i)
            if (i != k) interference += quad(i);
        prog.add_ge(Expr::variable(bp.B[k]) - interference, ris_noise[k] / s0 + 1.0);
    }

    (void)srocr_dir;
    (void)srocr_w; // rank-relaxation rows appended by the caller

    // Self-sustainability bookkeeping. A surface with no amplifying or
    // reflecting elements is powered down and puts no demand on the beams.
    const bool surface_live = [&] {
        for (int m = 0; m < M; ++m)
            if (st.alpha(m) > 0.5) return true;
        return false;
    }();
    if (M > 0 && ris.energy != EnergyModel::None && surface_live) {
        const EnergyParams& e = cfg.energy;
        const double omega = e.omega_from_circuit();

        // element-level RF power expressions (watts)
        std::vector<Expr> rf(M);
        for (int m = 0; m < M; ++m) {
            const Eigen::MatrixXcd hm = ch.H.row(m);
            const Eigen::MatrixXcd hm_h = hm.adjoint();
            Expr acc;
            for (int k = 0; k < K; ++k) acc += ((hm * Fmat[k]) * hm_h)(0, 0);
            rf[m] = acc + Expr(cfg.sigma1_sq);
        }

        int m_a = 0;
        Expr harvest_lb; // sum of 2/C0 - C/C0^2 over harvesting elements
        for (int m = 0; m < M; ++m) {
            if (st.alpha(m) > 0.5) {
                ++m_a;
                continue;
            }
            const int c = prog.add_real("C" + std::to_string(m));
            const int z = prog.add_real("zeta" + std::to_string(m));
            bp.C.push_back(c);
            bp.zeta.push_back(z);
            bp.harvest_index.push_back(m);
            prog.add_ge(Expr::variable(z), 0.0);
            prog.add_le(Expr::variable(z) - rf[m], 0.0);
            pwl.add_rows(prog, Expr::variable(c), Expr::variable(z));
            const double c0 = op.C0(m);
            harvest_lb += Expr(2.0 / c0) - Expr::variable(c) * cd(1.0 / (c0 * c0), 0.0);
        }

        Expr consumption; // fixed + amplifier load, in the logistic-normalized form
        double fixed = 0.0;
        Expr p_o;
        if (ris.energy == EnergyModel::MfRis) {
            fixed = m_a * (e.P_b + e.P_DC) + (M - m_a) * e.P_C;
            for (int m = 0; m < M; ++m) {
                const double gain2 = std::norm(Theta(m, m));
                if (gain2 > 0.0) p_o += rf[m] * cd(gain2, 0.0);
            }
            consumption = Expr(fixed) + p_o * cd(e.xi, 0.0);
        } else { // SelfSustainable: reflection-mode consumption only
            fixed = m_a * e.P_b + (M - m_a) * e.P_C;
            consumption = Expr(fixed);
        }
        // (fixed + xi P_O)(1-Omega)/Z + M Omega <= sum_H C^-1 (lb) + M_A Omega
        prog.add_le(consumption * cd((1.0 - omega) / e.Z, 0.0) - harvest_lb,
                    static_cast<double>(m_a - M) * omega);
    }

    return bp;
}

} // namespace

SrocrResult solve_beamforming_srocr(const ChannelView& ch, const SurfaceState& st,
                                    const BeamformerState& warm, const ScenarioConfig& cfg,
                                    const AlgorithmOptions& opts, const RisOptions& ris) {
    const int K = ch.users();
    const int N = ch.antennas();
    SrocrResult result;
    result.beams = warm;

    if (cfg.P_BS_max <= 0.0) {
        std::vector<Eigen::VectorXcd> zero(K, Eigen::VectorXcd::Zero(N));
        result.beams = BeamformerState::from_vectors(std::move(zero));
        result.trace.feasible = true;
        result.rank_ratio.assign(K, 1.0);
        return result;
    }

    const PwlLogistic pwl(cfg.energy.a, cfg.energy.q, max_element_rf_power(ch, cfg),
                          opts.logistic_segments);

    std::vector<Eigen::MatrixXcd> F_cur = warm.F;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(K);
    double delta = opts.srocr_step0;
    double obj_prev = -std::numeric_limits<double>::infinity();
    bool enforce_rank = false;

    auto ratios_of = [&](const std::vector<Eigen::MatrixXcd>& F) {
        std::vector<double> r(K, 1.0);
        for (int k = 0; k < K; ++k) {
            const double tr = F[k].trace().real();
            if (tr <= 1e-300) continue;
            r[k] = conic::leading_eigenpair(F[k]).first / tr;
        }
        return r;
    };

    for (int it = 0; it < opts.max_inner_iterations; ++it) {
        BeamformerState cur;
        cur.F = F_cur;
        cur.f.resize(K);
        for (int k = 0; k < K; ++k) {
            const double tr = F_cur[k].trace().real();
            cur.f[k] = tr > 1e-300
                           ? Eigen::VectorXcd(std::sqrt(tr) *
                                              conic::leading_eigenpair(F_cur[k]).second)
                           : Eigen::VectorXcd::Zero(N);
        }
        const OperatingPoint op = make_operating_point(ch, st, cur, cfg, pwl);

        std::vector<Eigen::VectorXcd> dirs(K);
        for (int k = 0; k < K; ++k) {
            const double tr = F_cur[k].trace().real();
            dirs[k] = tr > 1e-300 ? Eigen::VectorXcd(conic::leading_eigenpair(F_cur[k]).second)
                                  : Eigen::VectorXcd::Unit(N, 0);
        }

        BeamProblem bp = build_beam_problem(ch, st, cfg, ris, op, pwl, dirs, w);
        // rank-relaxation rows (added here so the builder stays linear-only)
        for (int k = 0; k < K; ++k) {
            if (w(k) <= 0.0) continue;
            Expr lhs;
            const Eigen::MatrixXcd P = dirs[k] * dirs[k].adjoint();
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) lhs += P(j, i) * bp.F[k].entry(i, j);
            lhs -= bp.F[k].trace() * cd(w(k), 0.0);
            bp.prog.add_ge(lhs, 0.0);
        }

        const Solution sol = bp.prog.solve(opts.solver);
        result.trace.solves++;

        bool usable = sol.status == Status::Optimal ||
            ((sol.status == Status::MaxIterations || sol.status == Status::NumericalFailure) &&
             sol.max_violation <= 1e-6);
        // A tightened rank row may shave the objective; retry with a smaller
        // step instead of accepting a decreasing iterate. Once the step has
        // collapsed, rank enforcement takes priority and dips are accepted,
        // matching the plain accept-on-solvable reading.
        if (usable && !enforce_rank && std::isfinite(obj_prev) &&
            sol.objective < obj_prev - 5e-7)
            usable = false;
        if (usable) {
            for (int k = 0; k < K; ++k) F_cur[k] = bp.F[k].value(sol.values);
            result.trace.objective.push_back(sol.objective);
            delta = opts.srocr_step0;

            const auto ratios = ratios_of(F_cur);
            double worst = 1.0;
            for (int k = 0; k < K; ++k) {
                w(k) = std::min(opts.srocr_w_cap, ratios[k] + delta);
                worst = std::min(worst, ratios[k]);
            }
            const bool converged =
                std::isfinite(obj_prev) && worst >= opts.rank_ratio_target &&
                std::abs(sol.objective - obj_prev) <=
                    opts.rel_obj_tol * std::max(1.0, std::abs(obj_prev));
            obj_prev = sol.objective;
            if (converged) break;
        } else {
            delta *= 0.5;
            if (delta < opts.srocr_stall_floor) {
                if (!enforce_rank) {
                    enforce_rank = true;
                    delta = opts.srocr_step0;
                } else {
                    result.trace.stalled = true;
                    break;
                }
            }
            const auto ratios = ratios_of(F_cur);
            for (int k = 0; k < K; ++k) w(k) = std::min(opts.srocr_w_cap, ratios[k] + delta);
        }
    }

    result.rank_ratio = ratios_of(F_cur);
    std::vector<Eigen::VectorXcd> f(K);
    for (int k = 0; k < K; ++k) {
        const double tr = F_cur[k].trace().real();
        if (tr <= 1e-300) {
            f[k] = Eigen::VectorXcd::Zero(N);
            continue;
        }
        auto [lambda, u] = conic::leading_eigenpair(F_cur[k]);
        f[k] = std::sqrt(std::max(lambda, 0.0)) * u;
    }
    result.beams = BeamformerState::from_vectors(std::move(f));
    return result;
}

} // namespace mfris
