#include <cmath>

#include "robust_internal.hpp"

namespace mfris {

using conic::cd;
using conic::Expr;
using conic::ExprMatrix;
using conic::Program;
using conic::Solution;
using conic::Status;

RobustContext RobustContext::make(const ChannelSet& set, const ScenarioConfig& cfg) {
    RobustContext ctx{set, cfg, 0.0, 0.0, 0, 0, 0, {}, {}, {}, {}, {}};
    ctx.K = set.users();
    ctx.N = static_cast<int>(set.est_H.cols());
    ctx.M = static_cast<int>(set.est_H.rows());
    ctx.sn = std::sqrt(cfg.sigma0_sq);

    double rf = cfg.sigma1_sq;
    for (int m = 0; m < ctx.M; ++m)
        rf = std::max(rf, cfg.P_BS_max * set.est_H.row(m).squaredNorm() + cfg.sigma1_sq);
    ctx.s_pow = std::sqrt(rf);

    ctx.h.resize(ctx.K);
    ctx.G.resize(ctx.K);
    ctx.xi_h.resize(ctx.K);
    ctx.xi_G.resize(ctx.K);
    ctx.xi_g.resize(ctx.K);
    for (int k = 0; k < ctx.K; ++k) {
        ctx.h[k] = set.est_h[k] / ctx.sn;
        ctx.G[k] = set.est_G[k] / ctx.sn;
        ctx.xi_h[k] = set.radius_h[k] / ctx.sn;
        ctx.xi_G[k] = set.radius_G[k] / ctx.sn;
        ctx.xi_g[k] = set.radius_g[k];
    }
    return ctx;
}

RobustExpansion nominal_expansion(const RobustContext& ctx, const BeamformerState& bm,
                                  const SurfaceState& st, const PwlLogistic& pwl) {
    RobustExpansion ex;
    ex.f0 = bm.f;
    // conjugated coefficients make h^H + v^H G the physical combined row
    ex.v0 = st.coefficients().conjugate();
    ex.A0.resize(ctx.K);
    ex.B0.resize(ctx.K);
    for (int k = 0; k < ctx.K; ++k) {
        const Eigen::RowVectorXcd row = ctx.h[k].adjoint() + ex.v0.adjoint() * ctx.G[k];
        double sig = std::norm((row * bm.f[k])(0, 0));
        sig = std::max(sig, 1e-12);
        double denom = 1.0;
        for (int i = 0; i < ctx.K; ++i)
            if (i != k) denom += std::norm((row * bm.f[i])(0, 0));
        for (int m = 0; m < ctx.M; ++m)
            denom += ctx.cfg.sigma1_sq * std::norm(ctx.set.est_g[k](m)) * std::norm(ex.v0(m)) /
                     ctx.cfg.sigma0_sq;
        ex.A0(k) = 1.0 / sig;
        ex.B0(k) = denom;
    }
    ex.C0.resize(ctx.M);
    Eigen::MatrixXcd sumF = Eigen::MatrixXcd::Zero(ctx.N, ctx.N);
    for (const auto& Fk : bm.F) sumF += Fk;
    for (int m = 0; m < ctx.M; ++m) {
        const double rf =
            (1.0 - st.alpha(m)) *
            (std::real((ctx.set.est_H.row(m) * sumF * ctx.set.est_H.row(m).adjoint())(0, 0)) +
             ctx.cfg.sigma1_sq);
        ex.C0(m) = pwl.value(rf);
    }
    return ex;
}

namespace {

struct BeamVars {
    std::vector<conic::ComplexVectorVar> f;
    std::vector<int> Q, A, B, t, D;
    std::vector<int> C, zeta;
    std::vector<int> harvest_index;
};

// Factor of the symbol-averaged power quadratic over vectorized channel
// errors: columns of conj(W) (x) I_M, where W stacks the beams.
ExprMatrix kron_beam_factor(const std::vector<conic::ComplexVectorVar>& f, int M) {
    const int K = static_cast<int>(f.size());
    const int N = static_cast<int>(f[0].size());
    ExprMatrix C(M * N, K * M);
    for (int j = 0; j < N; ++j)
        for (int kk = 0; kk < K; ++kk)
            for (int r = 0; r < M; ++r) C(j * M + r, kk * M + r) = f[kk].entry(j).conjugate();
    return C;
}

Eigen::MatrixXcd kron_beam_factor_value(const std::vector<Eigen::VectorXcd>& f, int M) {
    const int K = static_cast<int>(f.size());
    const int N = static_cast<int>(f[0].size());
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(M * N, K * M);
    for (int j = 0; j < N; ++j)
        for (int kk = 0; kk < K; ++kk)
            for (int r = 0; r < M; ++r) C(j * M + r, kk * M + r) = std::conj(f[kk](j));
    return C;
}

BeamVars build_robust_beam_problem(Program& prog, const RobustContext& ctx,
                                   const SurfaceState& st, const RobustExpansion& ex,
                                   const PwlLogistic& pwl) {
    const int K = ctx.K, N = ctx.N, M = ctx.M;
    const ScenarioConfig& cfg = ctx.cfg;
    const Eigen::VectorXcd v = st.coefficients().conjugate(); // internal convention
    const double s1 = cfg.sigma1_sq;
    const int MN = M * N;

    BeamVars bv;
    for (int k = 0; k < K; ++k)
        bv.f.push_back(prog.add_complex_vector(N, "f" + std::to_string(k)));
    for (int k = 0; k < K; ++k) {
        bv.Q.push_back(prog.add_real("Q" + std::to_string(k)));
        bv.A.push_back(prog.add_real("A" + std::to_string(k)));
        bv.B.push_back(prog.add_real("B" + std::to_string(k)));
        bv.t.push_back(prog.add_real("t" + std::to_string(k)));
        bv.D.push_back(prog.add_real_nonneg("Dk" + std::to_string(k)));
        prog.add_ge(Expr::variable(bv.t.back()), 1e-12);
    }

    Expr obj;
    for (int k = 0; k < K; ++k) obj += Expr::variable(bv.Q[k]);
    prog.maximize(obj);

    {
        std::vector<Expr> stack;
        for (int k = 0; k < K; ++k)
            for (int n = 0; n < N; ++n) stack.push_back(bv.f[k].entry(n));
        prog.add_soc(stack, Expr(std::sqrt(cfg.P_BS_max)));
    }

    // worst-case signal certificate per user
    for (int k = 0; k < K; ++k) {
        add_rate_surrogate_row(prog, Expr::variable(bv.Q[k]), Expr::variable(bv.A[k]),
                               Expr::variable(bv.B[k]), ex.A0(k), ex.B0(k));
        const double bal = 1.0 / std::max(ex.A0(k), 1e-30);
        prog.add_abs2_le_product(Expr(1.0), Expr::variable(bv.A[k]) * cd(bal, 0.0),
                                 Expr::variable(bv.t[k]) * cd(1.0 / bal, 0.0));

        std::vector<Expr> f_e(N), v_e(M);
        for (int n = 0; n < N; ++n) f_e[n] = bv.f[k].entry(n);
        for (int m = 0; m < M; ++m) v_e[m] = Expr(cd(v(m)));
        const QuadFormExpr form = lemma1_expr(ctx.h[k], ctx.G[k], f_e, v_e, ex.f0[k], ex.v0);

        const Eigen::Index dim = N + static_cast<Eigen::Index>(MN);
        Eigen::VectorXd scale(dim);
        scale.head(N).setConstant(std::max(ctx.xi_h[k], 1e-9));
        scale.tail(MN).setConstant(std::max(ctx.xi_G[k], 1e-9));
        QuadFormExpr f0;
        f0.A = ExprMatrix(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j)
                f0.A(i, j) = form.A(i, j) * cd(scale(i) * scale(j), 0.0);
        f0.a.resize(dim);
        for (Eigen::Index i = 0; i < dim; ++i) f0.a[i] = form.a[i] * cd(scale(i), 0.0);
        f0.a0 = form.a0 - Expr::variable(bv.t[k]);

        std::vector<QuadraticForm> balls(2);
        balls[0].A = Eigen::MatrixXcd::Zero(dim, dim);
        balls[0].A.topLeftCorner(N, N) = -Eigen::MatrixXcd::Identity(N, N);
        balls[0].a = Eigen::VectorXcd::Zero(dim);
        balls[0].a0 = 1.0;
        balls[1].A = Eigen::MatrixXcd::Zero(dim, dim);
        balls[1].A.bottomRightCorner(MN, MN) = -Eigen::MatrixXcd::Identity(MN, MN);
        balls[1].a = Eigen::VectorXcd::Zero(dim);
        balls[1].a0 = 1.0;
        s_procedure_lmi(prog, f0, balls);
    }

    // worst-case interference bound over (dh, dG)
    for (int k = 0; k < K; ++k) {
        ExprMatrix D(K, K);
        D(0, 0) = Expr::variable(bv.B[k]) - Expr::variable(bv.D[k]) - Expr(1.0);
        const Eigen::RowVectorXcd row = ctx.h[k].adjoint() + v.adjoint() * ctx.G[k];
        for (int i = 0, col = 1; i < K; ++i) {
            if (i == k) continue;
            Expr e;
            for (int n = 0; n < N; ++n) e += bv.f[i].entry(n) * cd(row(n));
            D(0, col) = e;
            D(col, 0) = e.conjugate();
            D(col, col) = Expr(1.0);
            ++col;
        }
        ExprMatrix E(N, K);
        for (int i = 0, col = 1; i < K; ++i) {
            if (i == k) continue;
            for (int n = 0; n < N; ++n) E(n, col) = -bv.f[i].entry(n);
            ++col;
        }
        // Column-structured extraction: the direct-link error is an N x 1
        // block, so its F-factor touches only the corner. The identity-F
        // variant would fold the uncertainty into the unit diagonal, which
        // the noise-normalized units cannot absorb.
        std::vector<SignDefPair> pairs(2);
        pairs[0].E = E;
        pairs[0].F = Eigen::MatrixXcd::Zero(1, K);
        pairs[0].F(0, 0) = 1.0;
        pairs[0].xi = ctx.xi_h[k];
        pairs[1].E = E;
        pairs[1].F = Eigen::MatrixXcd::Zero(M, K);
        pairs[1].F.col(0) = v;
        pairs[1].xi = ctx.xi_G[k];
        sign_definiteness_lmi(prog, D, pairs);
    }

    // worst-case surface-noise bound over dg
    for (int k = 0; k < K; ++k) {
        const double c = std::sqrt(s1) / ctx.sn;
        ExprMatrix D(M + 1, M + 1);
        D(0, 0) = Expr::variable(bv.D[k]);
        for (int m = 0; m < M; ++m) {
            const cd border = c * std::conj(ctx.set.est_g[k](m)) * std::conj(v(m));
            D(0, m + 1) = Expr(border);
            D(m + 1, 0) = Expr(std::conj(border));
            D(m + 1, m + 1) = Expr(1.0);
        }
        ExprMatrix E = ExprMatrix::zero(M, M + 1);
        for (int m = 0; m < M; ++m) E(m, m + 1) = Expr(cd(-c * std::conj(v(m))));
        std::vector<SignDefPair> pairs(1);
        pairs[0].E = E;
        pairs[0].F = Eigen::MatrixXcd::Identity(M + 1, M + 1);
        pairs[0].xi = ctx.xi_g[k];
        sign_definiteness_lmi(prog, D, pairs);
    }

    // harvesting ledger
    const EnergyParams& en = cfg.energy;
    const double omega = en.omega_from_circuit();
    const double sp2 = ctx.s_pow * ctx.s_pow;
    Expr harvest_lb;
    int m_a = 0;
    for (int m = 0; m < M; ++m) {
        if (st.alpha(m) > 0.5) {
            ++m_a;
            continue;
        }
        const int c_var = prog.add_real("C" + std::to_string(m));
        const int z_var = prog.add_real("zeta" + std::to_string(m));
        bv.C.push_back(c_var);
        bv.zeta.push_back(z_var);
        bv.harvest_index.push_back(m);
        prog.add_ge(Expr::variable(z_var), 0.0);
        pwl.add_rows(prog, Expr::variable(c_var), Expr::variable(z_var));
        const double c0 = ex.C0(m);
        harvest_lb += Expr(2.0 / c0) - Expr::variable(c_var) * cd(1.0 / (c0 * c0), 0.0);
    }

    const ExprMatrix Cfac = kron_beam_factor(bv.f, M);
    const Eigen::MatrixXcd Cfac0 = kron_beam_factor_value(ex.f0, M);
    const int KM = K * M;

    // Per harvesting element: captured-power certificate over the row error.
    // Each user's term is lower-bounded by its first-order expansion in the
    // beams, and the single-ball S-procedure closes the row uncertainty.
    for (std::size_t idx = 0; idx < bv.harvest_index.size(); ++idx) {
        const int m = bv.harvest_index[idx];
        const double xi = std::max(ctx.set.radius_H, 1e-9); // row-norm bound, unsplit
        const Eigen::VectorXcd hrow = ctx.set.est_H.row(m).adjoint();

        ExprMatrix A = ExprMatrix::zero(N, N);
        std::vector<Expr> avec(N);
        Expr a0 = Expr(s1) - Expr::variable(bv.zeta[idx]);
        for (int k = 0; k < K; ++k) {
            const Eigen::VectorXcd& f0 = ex.f0[k];
            const cd cL = (hrow.adjoint() * f0)(0, 0);
            Expr cR;
            for (int n = 0; n < N; ++n) cR += bv.f[k].entry(n).conjugate() * cd(hrow(n));
            for (int i = 0; i < N; ++i) {
                for (int j = 0; j < N; ++j) {
                    Expr e = bv.f[k].entry(j).conjugate() * cd(f0(i));
                    e += bv.f[k].entry(i) * cd(std::conj(f0(j)));
                    e -= Expr(cd(f0(i) * std::conj(f0(j))));
                    A(i, j) += e * cd(xi * xi, 0.0); // unit-ball normalization
                }
                Expr lin = bv.f[k].entry(i) * cd(std::conj(cL));
                lin += cR * cd(f0(i));
                lin -= Expr(cd(std::conj(cL) * f0(i)));
                avec[i] += lin * cd(xi, 0.0);
            }
            a0 += cR * cd(cL) + (cR * cd(cL)).conjugate() - Expr(std::norm(cL));
        }
        QuadFormExpr f0q;
        f0q.A = A;
        f0q.a = avec;
        f0q.a0 = a0;
        std::vector<QuadraticForm> ball(1);
        ball[0].A = -Eigen::MatrixXcd::Identity(N, N);
        ball[0].a = Eigen::VectorXcd::Zero(N);
        ball[0].a0 = 1.0;
        s_procedure_lmi(prog, f0q, ball);
    }

    // output-power certificate over dH, Schur-extended so the beams stay linear
    {
        const int u_var = prog.add_real_nonneg("uH_out");
        double theta_f2 = 0.0;
        for (int m = 0; m < M; ++m) theta_f2 += std::norm(v(m));
        const double chat = ctx.set.radius_H * ctx.set.radius_H * theta_f2;

        const double wc = m_a * (en.P_b + en.P_DC) + (M - m_a) * en.P_C;
        Expr wbar =
            (harvest_lb + Expr(static_cast<double>(m_a - M) * omega)) *
                cd(en.Z / (1.0 - omega) / en.xi, 0.0) -
            Expr(wc / en.xi);
        const Expr minus_b = wbar - Expr(s1 * theta_f2);

        Eigen::VectorXcd y(MN); // vec(Theta H~), Theta = diag(conj(v))
        for (int j = 0; j < N; ++j)
            for (int r = 0; r < M; ++r) y(j * M + r) = std::conj(v(r)) * ctx.set.est_H(r, j);

        const int dim = MN + 1 + KM;
        ExprMatrix block = ExprMatrix::zero(dim, dim);
        for (int i = 0; i < MN; ++i) block(i, i) = Expr::variable(u_var);
        block(MN, MN) =
            (minus_b - Expr::variable(u_var, cd(chat, 0.0))) * cd(1.0 / sp2, 0.0);
        for (int i = 0; i < MN; ++i)
            for (int col = 0; col < KM; ++col) {
                block(i, MN + 1 + col) = Cfac(i, col);
                block(MN + 1 + col, i) = Cfac(i, col).conjugate();
            }
        for (int kk = 0; kk < K; ++kk)
            for (int r = 0; r < M; ++r) {
                Expr e;
                for (int j = 0; j < N; ++j)
                    e += bv.f[kk].entry(j).conjugate() *
                         (std::conj(y(j * M + r)) / ctx.s_pow);
                block(MN, MN + 1 + kk * M + r) = e;
                block(MN + 1 + kk * M + r, MN) = e.conjugate();
            }
        for (int d = 0; d < KM; ++d) block(MN + 1 + d, MN + 1 + d) = Expr(1.0);
        prog.add_psd(block);
    }

    return bv;
}

} // namespace

RobustStepResult solve_robust_beamforming(const ChannelSet& set, const SurfaceState& st,
                                          const RobustSolution& warm, const ScenarioConfig& cfg,
                                          const AlgorithmOptions& opts) {
    const RobustContext ctx = RobustContext::make(set, cfg);
    const PwlLogistic pwl(cfg.energy.a, cfg.energy.q, ctx.s_pow * ctx.s_pow,
                          opts.logistic_segments);

    RobustStepResult result;
    result.solution = warm;
    result.solution.surface = st;

    RobustExpansion ex = nominal_expansion(ctx, warm.beams, st, pwl);
    if (warm.quality_a.size() == ctx.K) {
        ex.A0 = warm.quality_a;
        ex.B0 = warm.quality_b;
    }
    if (warm.logistic_c.size() == ctx.M)
        for (int m = 0; m < ctx.M; ++m)
            if (warm.logistic_c(m) > 1.0) ex.C0(m) = warm.logistic_c(m);

    double obj_prev = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_inner_iterations; ++it) {
        Program prog;
        BeamVars bv = build_robust_beam_problem(prog, ctx, st, ex, pwl);
        const Solution sol = prog.solve(opts.solver);
        result.trace.solves++;

        const bool usable = sol.status == Status::Optimal ||
            ((sol.status == Status::MaxIterations || sol.status == Status::NumericalFailure) &&
             sol.max_violation <= 1e-6);
        if (!usable) {
            if (it == 0) result.solution.feasible = false;
            break;
        }

        std::vector<Eigen::VectorXcd> f(ctx.K);
        for (int k = 0; k < ctx.K; ++k) f[k] = bv.f[k].value(sol.values);
        result.solution.beams = BeamformerState::from_vectors(std::move(f));
        result.solution.quality_a.resize(ctx.K);
        result.solution.quality_b.resize(ctx.K);
        result.solution.signal_floor.resize(ctx.K);
        for (int k = 0; k < ctx.K; ++k) {
            result.solution.quality_a(k) = sol.values(bv.A[k]);
            result.solution.quality_b(k) = sol.values(bv.B[k]);
            result.solution.signal_floor(k) = sol.values(bv.t[k]);
        }
        result.solution.logistic_c = ex.C0;
        result.solution.harvest_rf = Eigen::VectorXd::Zero(ctx.M);
        for (std::size_t i = 0; i < bv.harvest_index.size(); ++i) {
            result.solution.logistic_c(bv.harvest_index[i]) = sol.values(bv.C[i]);
            result.solution.harvest_rf(bv.harvest_index[i]) = sol.values(bv.zeta[i]);
        }
        double cert = 0.0;
        for (int k = 0; k < ctx.K; ++k)
            cert += std::log2(1.0 + 1.0 / std::max(sol.values(bv.A[k]) * sol.values(bv.B[k]),
                                                   1e-300));
        result.solution.certified_sum_rate = cert;
        result.trace.objective.push_back(sol.objective);

        for (int k = 0; k < ctx.K; ++k) {
            ex.f0[k] = result.solution.beams.f[k];
            ex.A0(k) = std::max(sol.values(bv.A[k]), 1e-12);
            ex.B0(k) = std::max(sol.values(bv.B[k]), 1.0);
        }
        for (std::size_t i = 0; i < bv.harvest_index.size(); ++i)
            ex.C0(bv.harvest_index[i]) = std::max(sol.values(bv.C[i]), 1.0 + 1e-12);

        if (std::isfinite(obj_prev) && std::abs(sol.objective - obj_prev) <=
                                           opts.rel_obj_tol * std::max(1.0, std::abs(obj_prev)))
            break;
        obj_prev = sol.objective;
    }
    return result;
}

} // namespace mfris
