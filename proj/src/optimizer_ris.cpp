#include <cstdio>
#include <algorithm>
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

Expr trace_product(const Eigen::MatrixXcd& X, const HermitianVar& U) {
    Expr acc;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) acc += X(i, j) * U.entry(j, i);
    return acc;
}

struct RisContext {
    const ChannelView& ch;
    const BeamformerState& bm;
    const ScenarioConfig& cfg;
    const RisOptions& ris;
    double beta_cap;
    std::vector<int> active;             // surface elements represented in U
    Eigen::VectorXd k_rf;                // per-element (H sumF H^H)_mm + sigma1^2 [W]
    std::vector<std::vector<Eigen::MatrixXcd>> X; // X[k][i] = Htilde_k F_i Htilde_k^H / sigma0^2
    std::vector<Eigen::VectorXd> gd;     // per user, sigma1^2 |g_k(m)|^2 / sigma0^2 on active set
};

// Expansion data evaluated on the relaxed iterate itself (trace forms), so
// the previous point stays feasible for the next subproblem.
OperatingPoint trace_operating_point(const RisContext& ctx, const Eigen::MatrixXcd& U_cur,
                                     const Eigen::VectorXd& harvest_share,
                                     const PwlLogistic& pwl);

RisContext make_context(const ChannelView& ch, const BeamformerState& bm,
                        const ScenarioConfig& cfg, const RisOptions& ris,
                        const std::vector<int>& active) {
    RisContext ctx{ch, bm, cfg, ris, ris.beta_cap > 0.0 ? ris.beta_cap : cfg.beta_max,
                   active, {}, {}, {}};
    const int K = ch.users();
    const int M = ch.elements();
    const int na = static_cast<int>(active.size());
    const double s0 = cfg.sigma0_sq;

    Eigen::MatrixXcd sumF = Eigen::MatrixXcd::Zero(ch.antennas(), ch.antennas());
    for (const auto& Fk : bm.F) sumF += Fk;
    const Eigen::MatrixXcd rf = ch.H * sumF * ch.H.adjoint();
    ctx.k_rf.resize(M);
    for (int m = 0; m < M; ++m) ctx.k_rf(m) = std::real(rf(m, m)) + cfg.sigma1_sq;

    ctx.X.resize(K);
    ctx.gd.resize(K);
    for (int k = 0; k < K; ++k) {
        Eigen::MatrixXcd Ht(na + 1, ch.antennas());
        for (int t = 0; t < na; ++t)
            Ht.row(t) = std::conj(ch.g[k](active[t])) * ch.H.row(active[t]);
        Ht.row(na) = ch.h[k].adjoint();
        ctx.X[k].resize(K);
        for (int i = 0; i < K; ++i) {
            const Eigen::MatrixXcd t = Ht * bm.F[i] * Ht.adjoint() / s0;
            ctx.X[k][i] = 0.5 * (t + t.adjoint()); // exact Hermitian coefficients
        }
        ctx.gd[k].resize(na);
        for (int t = 0; t < na; ++t)
            ctx.gd[k](t) = cfg.sigma1_sq * std::norm(ch.g[k](active[t])) / s0;
    }
    return ctx;
}

OperatingPoint trace_operating_point(const RisContext& ctx, const Eigen::MatrixXcd& U_cur,
                                     const Eigen::VectorXd& harvest_share,
                                     const PwlLogistic& pwl) {
    const int K = ctx.ch.users();
    const int M = ctx.ch.elements();
    const int na = static_cast<int>(ctx.active.size());
    OperatingPoint op;
    op.A0.resize(K);
    op.B0.resize(K);
    op.zeta0 = Eigen::VectorXd::Zero(M);
    op.C0 = Eigen::VectorXd::Zero(M);
    for (int k = 0; k < K; ++k) {
        double sig = std::real((ctx.X[k][k] * U_cur).trace());
        sig = std::max(sig, 1e-30);
        double inter = 1.0;
        for (int i = 0; i < K; ++i)
            if (i != k) inter += std::real((ctx.X[k][i] * U_cur).trace());
        for (int t = 0; t < na; ++t)
            inter += ctx.gd[k](t) * std::max(std::real(U_cur(t, t)), 0.0);
        op.A0(k) = 1.0 / sig;
        op.B0(k) = inter;
        op.sum_rate_surrogate += std::log2(1.0 + 1.0 / (op.A0(k) * op.B0(k)));
    }
    for (int m = 0; m < M; ++m) {
        op.zeta0(m) = harvest_share(m) * ctx.k_rf(m);
        op.C0(m) = pwl.value(op.zeta0(m));
    }
    return op;
}

struct RisProblem {
    Program prog;
    HermitianVar U;
    std::vector<int> alpha, beta;     // empty in fixed-split mode
    std::vector<int> d, dbar, dbin;   // penalty slacks
    std::vector<int> Q, A, B;
    std::vector<int> C, zeta;         // aligned with pwl_elems
    std::vector<int> pwl_elems;       // surface indices carrying logistic rows
    int fixed_harvest_count = 0;      // elements contributing the constant Omega
};

// Shared constraint body of the coefficient subproblems. In joint mode the
// binary split is relaxed with penalty slacks; in fixed-split mode U only
// spans the amplifying set and the diagonal doubles as the gain vector.
RisProblem build_ris_problem(const RisContext& ctx, const OperatingPoint& op,
                             const PwlLogistic& pwl, bool joint_mode,
                             const Eigen::VectorXd& alpha_fix, const Eigen::VectorXd& alpha0,
                             const Eigen::VectorXd& beta0, const Eigen::VectorXcd& u_eig,
                             double v_srocr, double rho) {
    const ChannelView& ch = ctx.ch;
    const ScenarioConfig& cfg = ctx.cfg;
    const int K = ch.users();
    const int M = ch.elements();
    const int na = static_cast<int>(ctx.active.size());

    RisProblem rp;
    Program& prog = rp.prog;
    rp.U = prog.add_hermitian(na + 1, "U");
    prog.fix(rp.U.diag_var(na), 1.0);

    for (int k = 0; k < K; ++k) {
        rp.Q.push_back(prog.add_real("Q" + std::to_string(k)));
        rp.A.push_back(prog.add_real("A" + std::to_string(k)));
        rp.B.push_back(prog.add_real("B" + std::to_string(k)));
    }

    Expr objective;
    for (int k = 0; k < K; ++k) objective += Expr::variable(rp.Q[k]);

    const ExprMatrix Umat = rp.U.matrix();
    prog.add_psd(Umat);

    // diagonal gain bounds
    for (int t = 0; t < na; ++t) prog.add_box(rp.U.diag_var(t), 0.0, ctx.beta_cap);

    // rank-relaxation row
    if (v_srocr > 0.0) {
        const Eigen::MatrixXcd P = u_eig * u_eig.adjoint();
        Expr lhs = trace_product(P, rp.U) - rp.U.trace() * cd(v_srocr, 0.0);
        prog.add_ge(lhs, 0.0);
    }

    // rate chain
    for (int k = 0; k < K; ++k) {
        add_rate_surrogate_row(prog, Expr::variable(rp.Q[k]), Expr::variable(rp.A[k]),
                               Expr::variable(rp.B[k]), op.A0(k), op.B0(k));
        const double bal = 1.0 / std::max(op.A0(k), 1e-30);
        prog.add_abs2_le_product(Expr(1.0), Expr::variable(rp.A[k]) * cd(bal, 0.0),
                                 trace_product(ctx.X[k][k], rp.U) * cd(1.0 / bal, 0.0));
        Expr interference;
        for (int i = 0; i < K; ++i)
            if (i != k) interference += trace_product(ctx.X[k][i], rp.U);
        for (int t = 0; t < na; ++t)
            interference += Expr::variable(rp.U.diag_var(t)) * cd(ctx.gd[k](t), 0.0);
        prog.add_ge(Expr::variable(rp.B[k]) - interference, 1.0);
    }

    // split machinery
    if (joint_mode) {
        for (int t = 0; t < na; ++t) {
            rp.alpha.push_back(prog.add_real_bounded(0.0, 1.0, "alpha" + std::to_string(t)));
            rp.beta.push_back(prog.add_real_bounded(0.0, ctx.beta_cap, "beta" + std::to_string(t)));
            rp.d.push_back(prog.add_real_nonneg("d" + std::to_string(t)));
            rp.dbar.push_back(prog.add_real_nonneg("dbar" + std::to_string(t)));
            rp.dbin.push_back(prog.add_real_nonneg("dbin" + std::to_string(t)));
        }
        for (int t = 0; t < na; ++t) {
            const Expr a = Expr::variable(rp.alpha[t]);
            const Expr b = Expr::variable(rp.beta[t]);
            const Expr eta = Expr::variable(rp.U.diag_var(t));
            const double a0 = alpha0(t), b0 = beta0(t);

            // relaxed binary split: alpha - alpha^2 <= 0 via its tangent bound
            prog.add_le(a * cd(1.0 - 2.0 * a0, 0.0) - Expr::variable(rp.dbin[t]), -a0 * a0);

            // eta <= first-order expansion of alpha^2 beta, slack-padded
            prog.add_le(eta - a * cd(2.0 * a0 * b0, 0.0) - b * cd(a0 * a0, 0.0) -
                            Expr::variable(rp.d[t]),
                        -2.0 * a0 * a0 * b0);

            // alpha^2 beta <= eta via the split c/2 alpha^4 + beta^2/(2c).
            // The fixed point is exact at binary alpha; the clamp keeps the
            // bound usable while an element is still near harvesting mode.
            const double c = std::clamp(b0 / std::clamp(a0 * a0, 1e-2, 1.0), 1e-2, 1e2);
            const int s = prog.add_real_nonneg("s" + std::to_string(t));  // >= alpha^2
            const int tt = prog.add_real_nonneg("t" + std::to_string(t)); // >= s^2
            const int r = prog.add_real_nonneg("r" + std::to_string(t));  // >= beta^2
            prog.add_abs2_le_product(a, Expr(1.0), Expr::variable(s));
            prog.add_abs2_le_product(Expr::variable(s), Expr(1.0), Expr::variable(tt));
            prog.add_abs2_le_product(b, Expr(1.0), Expr::variable(r));
            prog.add_le(Expr::variable(tt) * cd(0.5 * c, 0.0) +
                            Expr::variable(r) * cd(0.5 / c, 0.0) - eta -
                            Expr::variable(rp.dbar[t]),
                        0.0);
        }
        for (int t = 0; t < na; ++t) {
            objective -= Expr::variable(rp.d[t]) * cd(rho, 0.0);
            objective -= Expr::variable(rp.dbar[t]) * cd(rho, 0.0);
            objective -= Expr::variable(rp.dbin[t]) * cd(rho, 0.0);
        }
    }

    // harvesting bookkeeping
    if (ctx.ris.energy != EnergyModel::None) {
        const EnergyParams& e = cfg.energy;
        const double omega = e.omega_from_circuit();
        Expr harvest_lb;
        double fixed_omega_count = 0.0;

        if (joint_mode) {
            for (int t = 0; t < na; ++t) {
                const int m = ctx.active[t];
                const int c = prog.add_real("C" + std::to_string(m));
                const int z = prog.add_real("zeta" + std::to_string(m));
                rp.C.push_back(c);
                rp.zeta.push_back(z);
                rp.pwl_elems.push_back(m);
                prog.add_ge(Expr::variable(z), 0.0);
                // zeta <= (1 - alpha) k_rf
                prog.add_le(Expr::variable(z) + Expr::variable(rp.alpha[t]) * cd(ctx.k_rf(m), 0.0),
                            ctx.k_rf(m));
                pwl.add_rows(prog, Expr::variable(c), Expr::variable(z));
                const double c0 = op.C0(m);
                harvest_lb += Expr(2.0 / c0) - Expr::variable(c) * cd(1.0 / (c0 * c0), 0.0);
            }
        } else {
            // harvesting set is static; amplifiers contribute the Omega constant
            for (int m = 0; m < M; ++m) {
                if (alpha_fix(m) > 0.5) {
                    fixed_omega_count += 1.0;
                    continue;
                }
                const int c = prog.add_real("C" + std::to_string(m));
                rp.C.push_back(c);
                rp.pwl_elems.push_back(m);
                // zeta is constant here: the element always harvests k_rf
                prog.add_ge(Expr::variable(c), pwl.value(ctx.k_rf(m)));
                const double c0 = op.C0(m);
                harvest_lb += Expr(2.0 / c0) - Expr::variable(c) * cd(1.0 / (c0 * c0), 0.0);
            }
        }

        Expr consumption;
        if (ctx.ris.energy == EnergyModel::MfRis) {
            Expr p_o;
            for (int t = 0; t < na; ++t)
                p_o += Expr::variable(rp.U.diag_var(t)) * cd(ctx.k_rf(ctx.active[t]), 0.0);
            Expr w_c;
            if (joint_mode) {
                Expr sum_a;
                for (int t = 0; t < na; ++t) sum_a += Expr::variable(rp.alpha[t]);
                w_c = sum_a * cd(e.P_b + e.P_DC - e.P_C, 0.0) + Expr(M * e.P_C);
            } else {
                w_c = Expr(fixed_omega_count * (e.P_b + e.P_DC) +
                           (M - fixed_omega_count) * e.P_C);
            }
            consumption = w_c + p_o * cd(e.xi, 0.0);
        } else { // SelfSustainable
            Expr w_c;
            if (joint_mode) {
                Expr sum_a;
                for (int t = 0; t < na; ++t) sum_a += Expr::variable(rp.alpha[t]);
                w_c = sum_a * cd(e.P_b - e.P_C, 0.0) + Expr(M * e.P_C);
            } else {
                w_c = Expr(fixed_omega_count * e.P_b + (M - fixed_omega_count) * e.P_C);
            }
            consumption = w_c;
        }
        rp.fixed_harvest_count = static_cast<int>(fixed_omega_count);
        prog.add_le(consumption * cd((1.0 - omega) / e.Z, 0.0) - harvest_lb,
                    (fixed_omega_count - static_cast<double>(M)) * omega);
    }

    prog.maximize(objective);
    return rp;
}

SurfaceState surface_from_u(const Eigen::VectorXcd& u, const std::vector<int>& active,
                            const Eigen::VectorXd& alpha_pattern, double beta_cap, int M) {
    SurfaceState st = SurfaceState::zeros(M);
    st.alpha = alpha_pattern;
    for (std::size_t t = 0; t < active.size(); ++t) {
        const int m = active[t];
        if (st.alpha(m) < 0.5) continue;
        const std::complex<double> coeff = std::conj(u(static_cast<Eigen::Index>(t)));
        st.beta(m) = std::min(std::norm(coeff), beta_cap);
        double th = std::arg(coeff);
        if (th < 0.0) th += 2.0 * M_PI;
        st.theta(m) = th;
    }
    return st;
}

// SROCR direction: the principal component with its reference entry
// re-attached. When the direct link vanishes the objective cannot see the
// reference border, the relaxed optimum becomes a two-eigenvalue face, and
// the raw eigenvector (reference component zero) can never certify past it;
// the completed direction can.
Eigen::VectorXcd structured_direction(const Eigen::MatrixXcd& U_cur) {
    const Eigen::Index last = U_cur.rows() - 1;
    auto [lambda, u] = conic::leading_eigenpair(U_cur);
    Eigen::VectorXcd dir = std::sqrt(std::max(lambda, 0.0)) * u;
    const std::complex<double> ref = dir(last);
    if (std::abs(ref) > 1e-9) {
        dir *= std::conj(ref) / std::abs(ref);
        dir(last) = std::abs(ref);
    } else {
        dir(last) = 1.0; // reattach the free reference phase
    }
    dir.normalize();
    return dir;
}

double structured_ratio(const Eigen::MatrixXcd& U_cur) {
    const Eigen::VectorXcd u = structured_direction(U_cur);
    return std::real((u.adjoint() * U_cur * u)(0, 0)) /
           std::max(U_cur.trace().real(), 1e-300);
}

// Rank-one state of the current relaxed iterate, used for expansion points.
SurfaceState nearest_surface(const Eigen::MatrixXcd& U_cur, const std::vector<int>& active,
                             const Eigen::VectorXd& alpha_pattern, double beta_cap, int M) {
    const auto [lambda, u] = conic::leading_eigenpair(U_cur);
    Eigen::VectorXcd scaled = std::sqrt(std::max(lambda, 0.0)) * u;
    const Eigen::Index last = scaled.size() - 1;
    if (std::abs(scaled(last)) > 1e-12) scaled *= std::conj(scaled(last)) / std::abs(scaled(last));
    return surface_from_u(scaled.head(last), active, alpha_pattern, beta_cap, M);
}

struct PolishOutcome {
    SurfaceState state;
    InnerTrace trace;
    double rank_ratio = 1.0;
};

// Fixed-split coefficient design: rank relaxation over the amplifying set only.
PolishOutcome polish_fixed_split(const RisContext& ctx, const SurfaceState& warm,
                                 const AlgorithmOptions& opts, const PwlLogistic& pwl) {
    const ChannelView& ch = ctx.ch;
    const int M = ch.elements();
    const int na = static_cast<int>(ctx.active.size());

    PolishOutcome out;
    out.state = warm;
    if (na == 0) {
        out.state = SurfaceState::zeros(M);
        out.state.alpha = warm.alpha; // possibly all-harvest
        return out;
    }

    Eigen::MatrixXcd U_cur(na + 1, na + 1);
    {
        Eigen::VectorXcd u(na + 1);
        for (int t = 0; t < na; ++t) {
            const int m = ctx.active[t];
            u(t) = std::conj(warm.alpha(m) * std::sqrt(warm.beta(m)) *
                             std::polar(1.0, warm.theta(m)));
        }
        u(na) = 1.0;
        U_cur = u * u.adjoint();
    }

    double v = 0.0;
    double delta = opts.srocr_step0;
    double obj_prev = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd hshare = Eigen::VectorXd::Ones(M) - warm.alpha;

    for (int it = 0; it < opts.max_inner_iterations; ++it) {
        const OperatingPoint op = trace_operating_point(ctx, U_cur, hshare, pwl);
        const Eigen::VectorXcd u_eig = structured_direction(U_cur);

        RisProblem rp = build_ris_problem(ctx, op, pwl, false, warm.alpha, Eigen::VectorXd(),
                                          Eigen::VectorXd(), u_eig, v, 0.0);
        const Solution sol = rp.prog.solve(opts.solver);
        out.trace.solves++;

        const bool usable = sol.status == Status::Optimal ||
            ((sol.status == Status::MaxIterations || sol.status == Status::NumericalFailure) &&
             sol.max_violation <= 1e-6);
#ifdef MFRIS_RIS_DEBUG
        if (!usable)
            std::printf("  [polish] it=%d status=%s viol=%.2e v=%.6f\n", it,
                        conic::status_name(sol.status), sol.max_violation, v);
#endif
        if (usable) {
            U_cur = rp.U.value(sol.values);
            out.trace.objective.push_back(sol.objective);
            delta = opts.srocr_step0;
            const double new_ratio =
                conic::leading_eigenpair(U_cur).first / std::max(U_cur.trace().real(), 1e-300);
            v = std::min(opts.srocr_w_cap, structured_ratio(U_cur) + delta);
            const bool converged = std::isfinite(obj_prev) && new_ratio >= opts.rank_ratio_target &&
                                   std::abs(sol.objective - obj_prev) <=
                                       opts.rel_obj_tol * std::max(1.0, std::abs(obj_prev));
            obj_prev = sol.objective;
            if (converged) break;
        } else {
            delta *= 0.5;
            if (delta < opts.srocr_stall_floor) {
                out.trace.stalled = true;
                break;
            }
            v = std::min(opts.srocr_w_cap, structured_ratio(U_cur) + delta);
        }
    }

    out.rank_ratio =
        conic::leading_eigenpair(U_cur).first / std::max(U_cur.trace().real(), 1e-300);
    out.state = nearest_surface(U_cur, ctx.active, warm.alpha, ctx.beta_cap, M);
    return out;
}

} // namespace

PenaltyResult solve_ris_penalty(const ChannelView& ch, const BeamformerState& bm,
                                const SurfaceState& warm, const ScenarioConfig& cfg,
                                const AlgorithmOptions& opts_in, const RisOptions& ris,
                                RngStream& rng) {
    // The slack gate sits at 1e-6, so these subproblems run with the solver
    // pushed one decade tighter than the shared default.
    AlgorithmOptions opts = opts_in;
    opts.solver.feas_tol = std::min(opts.solver.feas_tol, 1e-9);

    PenaltyResult result;
    result.state = warm;
    const int M = ch.elements();
    if (M == 0) return result;

    const PwlLogistic pwl(cfg.energy.a, cfg.energy.q, max_element_rf_power(ch, cfg),
                          opts.logistic_segments);

    std::vector<int> all(M);
    for (int m = 0; m < M; ++m) all[m] = m;

    if (!ris.optimize_alpha) {
        std::vector<int> active;
        for (int m = 0; m < M; ++m)
            if (warm.alpha(m) > 0.5) active.push_back(m);
        const RisContext ctx = make_context(ch, bm, cfg, ris, active);
        const PolishOutcome po = polish_fixed_split(ctx, warm, opts, pwl);
        result.state = po.state;
        result.trace = po.trace;
        result.rank_ratio = po.rank_ratio;
        return result;
    }

    const RisContext ctx = make_context(ch, bm, cfg, ris, all);
    const double cap = ctx.beta_cap;

    Eigen::MatrixXcd U_cur;
    Eigen::VectorXd alpha_c = warm.alpha, beta_c = warm.beta;
    auto reset_from_surface = [&](const SurfaceState& s) {
        Eigen::VectorXcd u(M + 1);
        for (int m = 0; m < M; ++m)
            u(m) = std::conj(s.alpha(m) * std::sqrt(s.beta(m)) * std::polar(1.0, s.theta(m)));
        u(M) = 1.0;
        U_cur = u * u.adjoint();
        alpha_c = s.alpha;
        beta_c = s.beta;
        for (int m = 0; m < M; ++m)
            if (beta_c(m) <= 1e-9) beta_c(m) = std::min(1.0, cap); // expansion needs volume
    };
    reset_from_surface(warm);

    double v = 0.0;
    double delta = opts.srocr_step0;
    double rho = opts.rho0;
    double obj_prev = -std::numeric_limits<double>::infinity();
    double residual_prev = std::numeric_limits<double>::infinity();
    int l2 = 0, reinits = 0, releases = 0;
    bool converged = false;

    const int hard_cap = (opts.max_reinit + 1) * (opts.t_max + 2);
    for (int it = 0; it < hard_cap && !converged; ++it) {
        if (l2 > opts.t_max) {
            if (reinits >= opts.max_reinit) break;
            ++reinits;
            releases = 0;
            // reseed from a structured split; phases still get a jitter
            SurfaceState s = aligned_surface(ch, bm, cfg, std::max(1, reinits * M / 4), cap);
            for (int m = 0; m < M; ++m)
                s.theta(m) = std::fmod(s.theta(m) + rng.uniform(-0.2, 0.2) + 2.0 * M_PI,
                                       2.0 * M_PI);
            repair_energy_margin(s, ch, bm, cfg);
            reset_from_surface(s);
            v = 0.0;
            delta = opts.srocr_step0;
            rho = opts.rho0;
            l2 = 0;
        }

        const OperatingPoint op =
            trace_operating_point(ctx, U_cur, Eigen::VectorXd::Ones(M) - alpha_c, pwl);
        const Eigen::VectorXcd u_eig = structured_direction(U_cur);

        RisProblem rp =
            build_ris_problem(ctx, op, pwl, true, Eigen::VectorXd(), alpha_c, beta_c, u_eig, v, rho);
        const Solution sol = rp.prog.solve(opts.solver);
        result.trace.solves++;
        ++l2;

        const bool usable = sol.status == Status::Optimal ||
            ((sol.status == Status::MaxIterations || sol.status == Status::NumericalFailure) &&
             sol.max_violation <= 1e-6);
#ifdef MFRIS_RIS_DEBUG
        if (!usable)
            std::printf("  [joint-fail] l2=%d status=%s viol=%.2e v=%.6f rho=%.1e\n", l2,
                        conic::status_name(sol.status), sol.max_violation, v, rho);
#endif
        if (usable) {
            U_cur = rp.U.value(sol.values);
            for (int m = 0; m < M; ++m) {
                alpha_c(m) = std::clamp(sol.values(rp.alpha[m]), 0.0, 1.0);
                beta_c(m) = std::clamp(sol.values(rp.beta[m]), 0.0, cap);
            }
            double residual = 0.0;
            for (int m = 0; m < M; ++m)
                residual += sol.values(rp.d[m]) + sol.values(rp.dbar[m]) + sol.values(rp.dbin[m]);
            result.penalty_residual = residual;
#ifdef MFRIS_RIS_DEBUG
            {
                double sd = 0, sdb = 0, sbin = 0;
                for (int m = 0; m < M; ++m) {
                    sd += sol.values(rp.d[m]);
                    sdb += sol.values(rp.dbar[m]);
                    sbin += sol.values(rp.dbin[m]);
                }
                std::printf("  [ris] l2=%d rho=%.1e d=%.3e dbar=%.3e dbin=%.3e v=%.5f obj=%.4f ", l2,
                            rho, sd, sdb, sbin, v, sol.objective);
                std::printf("alpha=[");
                for (int m = 0; m < M; ++m) std::printf("%.3f ", alpha_c(m));
                std::printf("] eta=[");
                for (int m = 0; m < M; ++m) std::printf("%.3f ", std::real(U_cur(m, m)));
                std::printf("] beta=[");
                for (int m = 0; m < M; ++m) std::printf("%.3f ", beta_c(m));
                std::printf("]\n");
            }
#endif

            double rate_part = 0.0;
            for (int k = 0; k < ch.users(); ++k) rate_part += sol.values(rp.Q[k]);
            result.trace.objective.push_back(rate_part);

            delta = opts.srocr_step0;
            const double ratio =
                conic::leading_eigenpair(U_cur).first / std::max(U_cur.trace().real(), 1e-300);
            v = std::min(opts.srocr_w_cap, structured_ratio(U_cur) + delta);
            rho = std::min(rho * opts.rho_growth, opts.rho_max);

            double gap = 0.0;
            for (int m = 0; m < M; ++m)
                gap = std::max(gap, std::min(alpha_c(m), 1.0 - alpha_c(m)));
            result.alpha_binary_gap = gap;
            result.rank_ratio = ratio;

            converged = std::isfinite(obj_prev) && residual <= opts.penalty_residual_tol &&
                        ratio >= opts.rank_ratio_target && gap <= 1e-3 &&
                        std::abs(rate_part - obj_prev) <=
                            opts.rel_obj_tol * std::max(1.0, std::abs(obj_prev));
            obj_prev = rate_part;

            // A fully escalated penalty can stall against the rank row when
            // the relaxation locked onto a direction the slacks must leave.
            // Dropping the row for one solve lets the exact penalty pick the
            // consistent vertex; tightening then resumes from there.
            const bool stuck = rho >= opts.rho_max && residual > opts.penalty_residual_tol &&
                               residual > 0.95 * residual_prev && ratio >= 0.99;
            residual_prev = residual;
            if (stuck && releases < 3) {
                ++releases;
                v = 0.0;
            }
        } else {
            delta *= 0.5;
            if (delta < opts.srocr_stall_floor) {
                result.trace.stalled = true;
                break;
            }
            v = std::min(opts.srocr_w_cap, structured_ratio(U_cur) + delta);
        }
    }

    // Binary extraction and a final gain/phase-only pass with the split frozen.
    Eigen::VectorXd rounded(M);
    for (int m = 0; m < M; ++m) rounded(m) = alpha_c(m) >= 0.5 ? 1.0 : 0.0;

    SurfaceState rounded_state = nearest_surface(U_cur, all, rounded, cap, M);
    for (int m = 0; m < M; ++m)
        if (rounded(m) > 0.5 && rounded_state.beta(m) <= 1e-9)
            rounded_state.beta(m) = std::min(1.0, cap);
    if (ris.energy != EnergyModel::None) repair_energy_margin(rounded_state, ch, bm, cfg);

    std::vector<int> active;
    for (int m = 0; m < M; ++m)
        if (rounded_state.alpha(m) > 0.5) active.push_back(m);
    const RisContext polish_ctx = make_context(ch, bm, cfg, ris, active);
    const PolishOutcome po = polish_fixed_split(polish_ctx, rounded_state, opts, pwl);

    result.state = po.state;
    result.trace.solves += po.trace.solves;
    for (const double o : po.trace.objective) result.trace.objective.push_back(o);
    result.rank_ratio = std::min(result.rank_ratio, po.rank_ratio);
    return result;
}

} // namespace mfris
