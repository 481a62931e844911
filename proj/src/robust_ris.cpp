#include <algorithm>
#include <cmath>

#include "robust_internal.hpp"

namespace mfris {

using conic::cd;
using conic::Expr;
using conic::ExprMatrix;
using conic::Program;
using conic::Solution;
using conic::Status;

namespace {

struct RisVars {
    conic::ComplexVectorVar v;
    std::vector<int> e, q, qbar;          // modulus surrogates and their slacks
    std::vector<int> alpha, beta;         // empty when the split is frozen
    std::vector<int> d, dbar, dbin;
    std::vector<int> Q, A, B, t, D;
    std::vector<int> C, zeta;
    std::vector<int> wG, uH;              // product-expansion multipliers
    int uH_out = -1;
};

struct RisExpansion {
    Eigen::VectorXcd v0;
    Eigen::VectorXd alpha0, beta0, e0;
    Eigen::VectorXd A0, B0, C0;
    Eigen::VectorXd uH0;   // per-element power multipliers
    double uHout0 = 1.0;   // output-power multiplier
    Eigen::VectorXd wG0;   // per-user interference multipliers
};

// Coefficient subproblem under bounded uncertainty with the beams frozen.
RisVars build_robust_ris_problem(Program& prog, const RobustContext& ctx,
                                 const BeamformerState& bm, const RisExpansion& ex,
                                 const PwlLogistic& pwl, bool joint_mode,
                                 const Eigen::VectorXd& alpha_fix, double rho,
                                 double beta_cap) {
    const int K = ctx.K, N = ctx.N, M = ctx.M;
    const ScenarioConfig& cfg = ctx.cfg;
    const double s1 = cfg.sigma1_sq;
    const int MN = M * N;
    const int KM = K * M;
    const double sp2 = ctx.s_pow * ctx.s_pow;

    RisVars rv;
    rv.v = prog.add_complex_vector(M, "v");
    if (!joint_mode) {
        for (int m = 0; m < M; ++m) {
            if (alpha_fix(m) < 0.5) {
                prog.fix(rv.v.at(m).re, 0.0);
                prog.fix(rv.v.at(m).im, 0.0);
            }
        }
    }
    for (int m = 0; m < M; ++m) {
        rv.e.push_back(prog.add_real_bounded(0.0, beta_cap, "e" + std::to_string(m)));
        rv.q.push_back(prog.add_real_nonneg("qv" + std::to_string(m)));
        rv.qbar.push_back(prog.add_real_nonneg("qbarv" + std::to_string(m)));
    }
    for (int k = 0; k < K; ++k) {
        rv.Q.push_back(prog.add_real("Q" + std::to_string(k)));
        rv.A.push_back(prog.add_real("A" + std::to_string(k)));
        rv.B.push_back(prog.add_real("B" + std::to_string(k)));
        rv.t.push_back(prog.add_real("t" + std::to_string(k)));
        rv.D.push_back(prog.add_real_nonneg("Dk" + std::to_string(k)));
        prog.add_ge(Expr::variable(rv.t.back()), 1e-12);
    }

    Expr obj;
    for (int k = 0; k < K; ++k) obj += Expr::variable(rv.Q[k]);

    // modulus surrogates: |v_m|^2 <= e_m + q_m and its expansion-side bound
    for (int m = 0; m < M; ++m) {
        prog.add_abs2_le_product(rv.v.entry(m),
                                 Expr::variable(rv.e[m]) + Expr::variable(rv.q[m]), Expr(1.0));
        const cd v0m = ex.v0(m);
        Expr lin = rv.v.entry(m).conjugate() * v0m;
        lin += (rv.v.entry(m).conjugate() * v0m).conjugate();
        prog.add_ge(lin - Expr::variable(rv.e[m]) + Expr::variable(rv.qbar[m]),
                    std::norm(v0m));
        obj -= (Expr::variable(rv.q[m]) + Expr::variable(rv.qbar[m])) * cd(rho, 0.0);
    }

    // split machinery
    if (joint_mode) {
        for (int m = 0; m < M; ++m) {
            rv.alpha.push_back(prog.add_real_bounded(0.0, 1.0, "alpha" + std::to_string(m)));
            rv.beta.push_back(prog.add_real_bounded(0.0, beta_cap, "beta" + std::to_string(m)));
            rv.d.push_back(prog.add_real_nonneg("d" + std::to_string(m)));
            rv.dbar.push_back(prog.add_real_nonneg("dbar" + std::to_string(m)));
            rv.dbin.push_back(prog.add_real_nonneg("dbin" + std::to_string(m)));
        }
        for (int m = 0; m < M; ++m) {
            const Expr a = Expr::variable(rv.alpha[m]);
            const Expr b = Expr::variable(rv.beta[m]);
            const Expr e = Expr::variable(rv.e[m]);
            const double a0 = ex.alpha0(m), b0 = ex.beta0(m);
            prog.add_le(a * cd(1.0 - 2.0 * a0, 0.0) - Expr::variable(rv.dbin[m]), -a0 * a0);
            prog.add_le(e - a * cd(2.0 * a0 * b0, 0.0) - b * cd(a0 * a0, 0.0) -
                            Expr::variable(rv.d[m]),
                        -2.0 * a0 * a0 * b0);
            const double c = std::clamp(b0 / std::clamp(a0 * a0, 1e-2, 1.0), 1e-2, 1e2);
            const int s = prog.add_real_nonneg("s" + std::to_string(m));
            const int tt = prog.add_real_nonneg("tq" + std::to_string(m));
            const int r = prog.add_real_nonneg("r" + std::to_string(m));
            prog.add_abs2_le_product(a, Expr(1.0), Expr::variable(s));
            prog.add_abs2_le_product(Expr::variable(s), Expr(1.0), Expr::variable(tt));
            prog.add_abs2_le_product(b, Expr(1.0), Expr::variable(r));
            prog.add_le(Expr::variable(tt) * cd(0.5 * c, 0.0) +
                            Expr::variable(r) * cd(0.5 / c, 0.0) - e -
                            Expr::variable(rv.dbar[m]),
                        0.0);
            obj -= (Expr::variable(rv.d[m]) + Expr::variable(rv.dbar[m]) +
                    Expr::variable(rv.dbin[m])) *
                   cd(rho, 0.0);
        }
    }
    prog.maximize(obj);

    // rate chain and worst-case signal certificates (beams frozen)
    for (int k = 0; k < K; ++k) {
        add_rate_surrogate_row(prog, Expr::variable(rv.Q[k]), Expr::variable(rv.A[k]),
                               Expr::variable(rv.B[k]), ex.A0(k), ex.B0(k));
        const double bal = 1.0 / std::max(ex.A0(k), 1e-30);
        prog.add_abs2_le_product(Expr(1.0), Expr::variable(rv.A[k]) * cd(bal, 0.0),
                                 Expr::variable(rv.t[k]) * cd(1.0 / bal, 0.0));

        std::vector<Expr> f_e(N), v_e(M);
        for (int n = 0; n < N; ++n) f_e[n] = Expr(cd(bm.f[k](n)));
        for (int m = 0; m < M; ++m) v_e[m] = rv.v.entry(m);
        const QuadFormExpr form = lemma1_expr(ctx.h[k], ctx.G[k], f_e, v_e, bm.f[k], ex.v0);

        const Eigen::Index dim = N + MN;
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
        f0.a0 = form.a0 - Expr::variable(rv.t[k]);
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

    // worst-case interference bound; the multiplier-gain product is expanded
    // to first order around the previous iterate
    for (int k = 0; k < K; ++k) {
        const int w_h = prog.add_real_nonneg("wh" + std::to_string(k));
        const int w_G = prog.add_real_nonneg("wG" + std::to_string(k));
        rv.wG.push_back(w_G);

        Expr sum_eq;
        for (int m = 0; m < M; ++m) sum_eq += Expr::variable(rv.e[m]) + Expr::variable(rv.q[m]);
        double s_prev = 0.0;
        for (int m = 0; m < M; ++m) s_prev += std::norm(ex.v0(m));
        const double wg0 = ex.wG0(k);
        Expr cross = sum_eq * cd(wg0, 0.0);
        cross += Expr::variable(w_G, cd(s_prev, 0.0));
        cross -= Expr(wg0 * s_prev);

        const int dim = K + N + N;
        ExprMatrix block = ExprMatrix::zero(dim, dim);
        block(0, 0) = Expr::variable(rv.B[k]) - Expr::variable(rv.D[k]) - Expr(1.0) -
                      Expr::variable(w_h) - cross;
        for (int i = 0, col = 1; i < K; ++i) {
            if (i == k) continue;
            Expr e = Expr(cd((ctx.h[k].adjoint() * bm.f[i])(0, 0)));
            for (int m = 0; m < M; ++m)
                e += rv.v.entry(m).conjugate() * cd((ctx.G[k].row(m) * bm.f[i])(0, 0));
            block(0, col) = e;
            block(col, 0) = e.conjugate();
            block(col, col) = Expr(1.0); // column-structured extraction
            ++col;
        }
        // borders: xi_h F^H and xi_G F^H against the dh / dG uncertainties
        for (int i = 0, col = 1; i < K; ++i) {
            if (i == k) continue;
            for (int n = 0; n < N; ++n) {
                block(col, K + n) = Expr(cd(ctx.xi_h[k] * std::conj(bm.f[i](n))));
                block(K + n, col) = Expr(cd(ctx.xi_h[k] * bm.f[i](n)));
                block(col, K + N + n) = Expr(cd(ctx.xi_G[k] * std::conj(bm.f[i](n))));
                block(K + N + n, col) = Expr(cd(ctx.xi_G[k] * bm.f[i](n)));
            }
            ++col;
        }
        for (int n = 0; n < N; ++n) {
            block(K + n, K + n) = Expr::variable(w_h);
            block(K + N + n, K + N + n) = Expr::variable(w_G);
        }
        prog.add_psd(block);
    }

    // worst-case surface-noise bound over dg (surface variable)
    for (int k = 0; k < K; ++k) {
        const double c = std::sqrt(s1) / ctx.sn;
        ExprMatrix D(M + 1, M + 1);
        D(0, 0) = Expr::variable(rv.D[k]);
        for (int m = 0; m < M; ++m) {
            // Theta entries are conj(v) under the internal convention
            D(0, m + 1) = rv.v.entry(m).conjugate() * cd(c * std::conj(ctx.set.est_g[k](m)));
            D(m + 1, 0) = D(0, m + 1).conjugate();
            D(m + 1, m + 1) = Expr(1.0);
        }
        ExprMatrix E = ExprMatrix::zero(M, M + 1);
        for (int m = 0; m < M; ++m) E(m, m + 1) = rv.v.entry(m).conjugate() * cd(-c, 0.0);
        std::vector<SignDefPair> pairs(1);
        pairs[0].E = E;
        pairs[0].F = Eigen::MatrixXcd::Identity(M + 1, M + 1);
        pairs[0].xi = ctx.xi_g[k];
        sign_definiteness_lmi(prog, D, pairs);
    }

    // harvesting ledger
    const EnergyParams& en = cfg.energy;
    const double omega = en.omega_from_circuit();
    Expr harvest_lb;
    for (int m = 0; m < M; ++m) {
        const int c_var = prog.add_real("C" + std::to_string(m));
        const int z_var = prog.add_real("zeta" + std::to_string(m));
        rv.C.push_back(c_var);
        rv.zeta.push_back(z_var);
        prog.add_ge(Expr::variable(z_var), 0.0);
        pwl.add_rows(prog, Expr::variable(c_var), Expr::variable(z_var));
        const double c0 = ex.C0(m);
        harvest_lb += Expr(2.0 / c0) - Expr::variable(c_var) * cd(1.0 / (c0 * c0), 0.0);
    }

    const Eigen::MatrixXcd Cfac0 = [&] {
        Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(MN, KM);
        for (int j = 0; j < N; ++j)
            for (int kk = 0; kk < K; ++kk)
                for (int r = 0; r < M; ++r) C(j * M + r, kk * M + r) = std::conj(bm.f[kk](j));
        return C;
    }();
    const Eigen::MatrixXcd Bq = Cfac0 * Cfac0.adjoint(); // constant power quadratic

    // captured-power certificates over dH, all elements
    for (int m = 0; m < M; ++m) {
        const int u_var = prog.add_real_nonneg("uH" + std::to_string(m));
        rv.uH.push_back(u_var);
        const double xi2 = ctx.set.radius_H * ctx.set.radius_H;
        Eigen::VectorXcd ybar(MN); // vec(e_m e_m^T H~) direction
        ybar.setZero();
        for (int j = 0; j < N; ++j) ybar(j * M + m) = ctx.set.est_H(m, j);

        Expr one_minus_a = Expr(1.0);
        const double a0 = joint_mode ? ex.alpha0(m) : alpha_fix(m);
        if (joint_mode) one_minus_a -= Expr::variable(rv.alpha[m]);
        else one_minus_a -= Expr(alpha_fix(m));

        // first-order pieces around alpha0 / uH0
        const double u0 = ex.uH0(m);
        Expr fts_u;
        if (joint_mode) {
            // (1-a0)((1-a0)u - 2u0 a + 2u0 a0)
            fts_u = (Expr::variable(u_var) * cd(1.0 - a0, 0.0) -
                     Expr::variable(rv.alpha[m]) * cd(2.0 * u0, 0.0) + Expr(2.0 * u0 * a0)) *
                    cd(1.0 - a0, 0.0);
        } else {
            fts_u = Expr::variable(u_var) * cd((1.0 - a0) * (1.0 - a0), 0.0);
        }
        const double ybb = std::real((ybar.adjoint() * Bq * ybar)(0, 0));
        Expr corner =
            one_minus_a * cd(s1, 0.0) - Expr::variable(rv.zeta[m]) - fts_u * cd(xi2, 0.0);
        // quadratic corner term (1-a)^2 ybb lower-bounded by its tangent
        if (joint_mode) {
            corner += (Expr((1.0 - a0) * (1.0 - a0)) -
                       (Expr::variable(rv.alpha[m]) - Expr(a0)) * cd(2.0 * (1.0 - a0), 0.0)) *
                      cd(ybb, 0.0);
        } else {
            corner += Expr((1.0 - a0) * (1.0 - a0) * ybb);
        }

        const int dim = MN + 1;
        ExprMatrix block = ExprMatrix::zero(dim, dim);
        const Eigen::MatrixXcd Bydir = Bq * ybar;
        for (int i = 0; i < MN; ++i) {
            for (int j = 0; j < MN; ++j) block(i, j) = Expr(cd(Bq(i, j)));
            block(i, i) += Expr::variable(u_var);
            const cd bi = Bydir(i, 0) / ctx.s_pow;
            block(i, MN) = one_minus_a * bi;
            block(MN, i) = block(i, MN).conjugate();
        }
        block(MN, MN) = corner * cd(1.0 / sp2, 0.0);
        prog.add_psd(block);
    }

    // output-power certificate over dH (Schur-extended; v enters the border)
    {
        const int u_var = prog.add_real_nonneg("uH_out");
        rv.uH_out = u_var;
        const double xi2 = ctx.set.radius_H * ctx.set.radius_H;

        Expr sum_eq;
        for (int m = 0; m < M; ++m) sum_eq += Expr::variable(rv.e[m]) + Expr::variable(rv.q[m]);
        double s_prev = 0.0;
        for (int m = 0; m < M; ++m) s_prev += std::norm(ex.v0(m));
        const double u0 = ex.uHout0;
        Expr cross = sum_eq * cd(u0, 0.0);
        cross += Expr::variable(u_var, cd(s_prev, 0.0));
        cross -= Expr(u0 * s_prev);

        Expr w_c;
        if (joint_mode) {
            Expr sum_a;
            for (int m = 0; m < M; ++m) sum_a += Expr::variable(rv.alpha[m]);
            w_c = sum_a * cd(en.P_b + en.P_DC - en.P_C, 0.0) + Expr(M * en.P_C);
        } else {
            double m_a = 0.0;
            for (int m = 0; m < M; ++m) m_a += alpha_fix(m);
            w_c = Expr(m_a * (en.P_b + en.P_DC) + (M - m_a) * en.P_C);
        }
        Expr wbar = (harvest_lb - Expr(M * omega)) * cd(en.Z / (1.0 - omega) / en.xi, 0.0) -
                    w_c * cd(1.0 / en.xi, 0.0);
        Expr minus_b = wbar - sum_eq * cd(s1, 0.0);
        Expr corner = minus_b - cross * cd(xi2, 0.0);

        const int dim = MN + 1 + KM;
        ExprMatrix block = ExprMatrix::zero(dim, dim);
        for (int i = 0; i < MN; ++i) block(i, i) = Expr::variable(u_var);
        block(MN, MN) = corner * cd(1.0 / sp2, 0.0);
        for (int i = 0; i < MN; ++i)
            for (int col = 0; col < KM; ++col)
                if (Cfac0(i, col) != cd(0.0, 0.0)) {
                    block(i, MN + 1 + col) = Expr(cd(Cfac0(i, col)));
                    block(MN + 1 + col, i) = Expr(cd(std::conj(Cfac0(i, col))));
                }
        for (int kk = 0; kk < K; ++kk)
            for (int r = 0; r < M; ++r) {
                // y = vec(Theta H~) with Theta = diag(conj(v));
                // c2 entry: sum_j conj(y(jM+r)) conj(f_kk(j)) / s_pow = v_r (...)
                Expr e;
                for (int j = 0; j < N; ++j)
                    e += rv.v.entry(r) *
                         cd(std::conj(ctx.set.est_H(r, j)) * std::conj(bm.f[kk](j)) / ctx.s_pow);
                block(MN, MN + 1 + kk * M + r) = e;
                block(MN + 1 + kk * M + r, MN) = e.conjugate();
            }
        for (int d2 = 0; d2 < KM; ++d2) block(MN + 1 + d2, MN + 1 + d2) = Expr(1.0);
        prog.add_psd(block);
    }

    return rv;
}

} // namespace

RobustStepResult solve_robust_ris(const ChannelSet& set, const RobustSolution& warm,
                                  const ScenarioConfig& cfg, const AlgorithmOptions& opts,
                                  RngStream& rng) {
    const RobustContext ctx = RobustContext::make(set, cfg);
    const PwlLogistic pwl(cfg.energy.a, cfg.energy.q, ctx.s_pow * ctx.s_pow,
                          opts.logistic_segments);
    const int M = ctx.M;
    const double cap = cfg.beta_max;

    RobustStepResult result;
    result.solution = warm;
    if (M == 0) return result;

    RisExpansion ex;
    ex.v0 = warm.surface.coefficients().conjugate(); // internal convention
    ex.alpha0 = warm.surface.alpha;
    ex.beta0 = warm.surface.beta;
    for (int m = 0; m < M; ++m)
        if (ex.beta0(m) <= 1e-9) ex.beta0(m) = std::min(1.0, cap);
    ex.e0 = Eigen::VectorXd::Zero(M);
    for (int m = 0; m < M; ++m) ex.e0(m) = std::norm(ex.v0(m));
    {
        const RobustExpansion base = nominal_expansion(ctx, warm.beams, warm.surface, pwl);
        ex.A0 = base.A0;
        ex.B0 = base.B0;
        ex.C0 = base.C0;
    }
    if (warm.quality_a.size() == ctx.K) {
        ex.A0 = warm.quality_a;
        ex.B0 = warm.quality_b;
    }
    // Product expansions start at zero so the first subproblem is exact when
    // the radii vanish; accepted iterates refresh them.
    ex.uH0 = Eigen::VectorXd::Zero(M);
    ex.uHout0 = 0.0;
    ex.wG0 = Eigen::VectorXd::Zero(ctx.K);

    auto run_loop = [&](bool joint, const Eigen::VectorXd& alpha_fix, int iter_budget,
                        double rho_start) {
        double rho = rho_start;
        double obj_prev = -std::numeric_limits<double>::infinity();
        int l2 = 0, reinits = 0;
        for (int it = 0; it < iter_budget; ++it) {
            if (joint && l2 > opts.t_max) {
                if (reinits >= opts.max_reinit) break;
                ++reinits;
                for (int m = 0; m < M; ++m) {
                    ex.v0(m) = std::polar(std::sqrt(std::min(1.0, cap)),
                                          rng.uniform(0.0, 2.0 * M_PI)) *
                               (ex.alpha0(m) > 0.5 ? 1.0 : 0.0);
                    ex.e0(m) = std::norm(ex.v0(m));
                }
                rho = opts.rho0;
                l2 = 0;
            }
            Program prog;
            RisVars rv = build_robust_ris_problem(prog, ctx, warm.beams, ex, pwl, joint,
                                                  alpha_fix, rho, cap);
            const Solution sol = prog.solve(opts.solver);
            result.trace.solves++;
            ++l2;

            const bool usable =
                sol.status == Status::Optimal ||
            ((sol.status == Status::MaxIterations || sol.status == Status::NumericalFailure) &&
             sol.max_violation <= 1e-6);
            if (!usable) {
                if (result.trace.objective.empty() && it == 0) result.solution.feasible = false;
                break;
            }
            result.solution.feasible = true;

            // accept
            ex.v0 = rv.v.value(sol.values);
            for (int m = 0; m < M; ++m) ex.e0(m) = sol.values(rv.e[m]);
            if (joint)
                for (int m = 0; m < M; ++m) {
                    ex.alpha0(m) = std::clamp(sol.values(rv.alpha[m]), 0.0, 1.0);
                    ex.beta0(m) = std::clamp(sol.values(rv.beta[m]), 0.0, cap);
                }
            for (int k = 0; k < ctx.K; ++k) {
                ex.A0(k) = std::max(sol.values(rv.A[k]), 1e-12);
                ex.B0(k) = std::max(sol.values(rv.B[k]), 1.0);
            }
            for (int m = 0; m < M; ++m)
                ex.C0(m) = std::max(sol.values(rv.C[m]), 1.0 + 1e-12);
            // refresh the product-expansion points
            for (int k = 0; k < ctx.K; ++k) ex.wG0(k) = std::max(sol.values(rv.wG[k]), 0.0);
            for (int m = 0; m < M; ++m) ex.uH0(m) = std::max(sol.values(rv.uH[m]), 0.0);
            ex.uHout0 = std::max(sol.values(rv.uH_out), 0.0);

            double residual = 0.0;
            for (int m = 0; m < M; ++m)
                residual += sol.values(rv.q[m]) + sol.values(rv.qbar[m]);
            if (joint)
                for (int m = 0; m < M; ++m)
                    residual += sol.values(rv.d[m]) + sol.values(rv.dbar[m]) +
                                sol.values(rv.dbin[m]);
            result.penalty_residual = residual;

            double rate_part = 0.0;
            for (int k = 0; k < ctx.K; ++k) rate_part += sol.values(rv.Q[k]);
            result.trace.objective.push_back(rate_part);

            result.solution.quality_a.resize(ctx.K);
            result.solution.quality_b.resize(ctx.K);
            result.solution.signal_floor.resize(ctx.K);
            for (int k = 0; k < ctx.K; ++k) {
                result.solution.quality_a(k) = sol.values(rv.A[k]);
                result.solution.quality_b(k) = sol.values(rv.B[k]);
                result.solution.signal_floor(k) = sol.values(rv.t[k]);
            }
            result.solution.logistic_c.resize(M);
            result.solution.harvest_rf.resize(M);
            for (int m = 0; m < M; ++m) {
                result.solution.logistic_c(m) = sol.values(rv.C[m]);
                result.solution.harvest_rf(m) = sol.values(rv.zeta[m]);
            }
            double cert = 0.0;
            for (int k = 0; k < ctx.K; ++k)
                cert += std::log2(1.0 + 1.0 / std::max(sol.values(rv.A[k]) * sol.values(rv.B[k]),
                                                       1e-300));
            result.solution.certified_sum_rate = cert;

            rho = std::min(rho * opts.rho_growth, opts.rho_max);

            const bool converged =
                std::isfinite(obj_prev) && residual <= opts.penalty_residual_tol &&
                std::abs(rate_part - obj_prev) <=
                    opts.rel_obj_tol * std::max(1.0, std::abs(obj_prev));
            obj_prev = rate_part;
            if (converged) break;
        }
    };

    // joint pass, then the frozen-split polish after rounding
    run_loop(true, Eigen::VectorXd(), (opts.max_reinit + 1) * (opts.t_max + 2), opts.rho0);

    Eigen::VectorXd rounded(M);
    for (int m = 0; m < M; ++m) rounded(m) = ex.alpha0(m) >= 0.5 ? 1.0 : 0.0;
    for (int m = 0; m < M; ++m) {
        if (rounded(m) < 0.5) {
            ex.v0(m) = 0.0;
            ex.e0(m) = 0.0;
        } else if (std::abs(ex.v0(m)) < 1e-6) {
            ex.v0(m) = std::polar(1.0, 0.0);
            ex.e0(m) = 1.0;
        }
        ex.alpha0(m) = rounded(m);
    }
    run_loop(false, rounded, 8, std::max(opts.rho_max, 1e5));

    SurfaceState st = SurfaceState::zeros(M);
    st.alpha = rounded;
    for (int m = 0; m < M; ++m) {
        if (rounded(m) < 0.5) continue;
        const std::complex<double> coeff = std::conj(ex.v0(m)); // back to physical
        st.beta(m) = std::min(std::norm(coeff), cap);
        double th = std::arg(coeff);
        if (th < 0.0) th += 2.0 * M_PI;
        st.theta(m) = th;
    }
    result.solution.surface = st;
    return result;
}

} // namespace mfris
