#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mfris/robust.hpp"
#include "mfris/units.hpp"

using namespace mfris;
using conic::cd;
using conic::Expr;
using conic::ExprMatrix;
using conic::Program;
using conic::Solution;
using conic::Status;

namespace {

ScenarioConfig robust_config(int n, int k, int m, double kappa_sq) {
    ScenarioConfig cfg;
    cfg.N = n;
    cfg.K = k;
    cfg.M = m;
    cfg.P_BS_max = dbm_to_watts(36.0);
    cfg.beta_max = db_to_linear(16.0);
    cfg.uncertainty.kappa_h = std::sqrt(kappa_sq);
    cfg.uncertainty.kappa_g = std::sqrt(kappa_sq);
    cfg.uncertainty.kappa_H = std::sqrt(kappa_sq);
    // Close-in surface so the harvesting budget can actually power amplifiers.
    cfg.geometry.ris_position = {4.0, 2.0, 6.0};
    REQUIRE(validate(cfg).ok());
    return cfg;
}

} // namespace

TEST_CASE("linearized beam gain matches its defining expansion") {
    RngStream rng(61);
    const int N = 3, M = 4;
    for (int draw = 0; draw < 100; ++draw) {
        const Eigen::VectorXcd h = rng.cnormal_vector(N);
        const Eigen::MatrixXcd G = rng.cnormal_matrix(M, N);
        const Eigen::VectorXcd f = rng.cnormal_vector(N);
        const Eigen::VectorXcd v = rng.cnormal_vector(M);
        const Eigen::VectorXcd f0 = rng.cnormal_vector(N);
        const Eigen::VectorXcd v0 = rng.cnormal_vector(M);
        const Eigen::VectorXcd dh = 0.3 * rng.cnormal_vector(N);
        const Eigen::MatrixXcd dG = 0.3 * rng.cnormal_matrix(M, N);

        const Lemma1Coefficients co = lemma1_coefficients(h, G, f, v, f0, v0);
        const double via_form = co.eval(dh, dG);
        const double direct = lemma1_direct(h, G, dh, dG, f, v, f0, v0);
        CHECK(via_form == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("linearized beam gain is tight and a global under-estimator") {
    RngStream rng(62);
    const int N = 2, M = 3;
    const Eigen::VectorXcd h = rng.cnormal_vector(N);
    const Eigen::MatrixXcd G = rng.cnormal_matrix(M, N);
    const Eigen::VectorXcd f0 = rng.cnormal_vector(N);
    const Eigen::VectorXcd v0 = rng.cnormal_vector(M);

    SUBCASE("exact at the expansion point with zero error") {
        const Lemma1Coefficients co = lemma1_coefficients(h, G, f0, v0, f0, v0);
        const double value = co.eval(Eigen::VectorXcd::Zero(N), Eigen::MatrixXcd::Zero(M, N));
        const std::complex<double> row_f =
            (h.adjoint() * f0)(0, 0) + (v0.adjoint() * G * f0)(0, 0);
        CHECK(value == doctest::Approx(std::norm(row_f)).epsilon(1e-12));
    }
    SUBCASE("never exceeds the true squared gain") {
        for (int draw = 0; draw < 200; ++draw) {
            const Eigen::VectorXcd f = f0 + 0.5 * rng.cnormal_vector(N);
            const Eigen::VectorXcd v = v0 + 0.5 * rng.cnormal_vector(M);
            const Eigen::VectorXcd dh = 0.2 * rng.cnormal_vector(N);
            const Eigen::MatrixXcd dG = 0.2 * rng.cnormal_matrix(M, N);
            const Lemma1Coefficients co = lemma1_coefficients(h, G, f, v, f0, v0);
            const double bound = co.eval(dh, dG);
            const std::complex<double> row_f = ((h + dh).adjoint() * f)(0, 0) +
                                               (v.adjoint() * (G + dG) * f)(0, 0);
            CHECK(bound <= std::norm(row_f) + 1e-9 * (1.0 + std::norm(row_f)));
        }
    }
    SUBCASE("all-zero channels give the zero form") {
        const Lemma1Coefficients co =
            lemma1_coefficients(Eigen::VectorXcd::Zero(N), Eigen::MatrixXcd::Zero(M, N),
                                Eigen::VectorXcd::Zero(N), v0, Eigen::VectorXcd::Zero(N), v0);
        CHECK(co.A.norm() == 0.0);
        CHECK(co.a.norm() == 0.0);
        CHECK(co.a0 == 0.0);
    }
}

TEST_CASE("expression-level coefficients agree with the numeric path") {
    RngStream rng(63);
    const int N = 2, M = 3;
    const Eigen::VectorXcd h = rng.cnormal_vector(N);
    const Eigen::MatrixXcd G = rng.cnormal_matrix(M, N);
    const Eigen::VectorXcd f = rng.cnormal_vector(N);
    const Eigen::VectorXcd v = rng.cnormal_vector(M);
    const Eigen::VectorXcd f0 = rng.cnormal_vector(N);
    const Eigen::VectorXcd v0 = rng.cnormal_vector(M);

    std::vector<Expr> f_e(N), v_e(M);
    for (int n = 0; n < N; ++n) f_e[n] = Expr(cd(f(n)));
    for (int m = 0; m < M; ++m) v_e[m] = Expr(cd(v(m)));
    const QuadFormExpr qe = lemma1_expr(h, G, f_e, v_e, f0, v0);
    const Lemma1Coefficients co = lemma1_coefficients(h, G, f, v, f0, v0);

    const Eigen::VectorXd none(0);
    for (Eigen::Index i = 0; i < co.A.rows(); ++i)
        for (Eigen::Index j = 0; j < co.A.cols(); ++j)
            CHECK(std::abs(qe.A(i, j).eval(none) - co.A(i, j)) <= 1e-12 * (1.0 + std::abs(co.A(i, j))));
    for (Eigen::Index i = 0; i < co.a.size(); ++i)
        CHECK(std::abs(qe.a[i].eval(none) - co.a(i)) <= 1e-12 * (1.0 + std::abs(co.a(i))));
    CHECK(std::abs(qe.a0.eval(none) - cd(co.a0)) <= 1e-12 * (1.0 + std::abs(co.a0)));
}

TEST_CASE("scalar S-procedure feasibility boundary") {
    // f1 = xi^2 - |x|^2 >= 0, f0 = c - |x|^2 >= 0: implication iff c >= xi^2
    auto probe = [](double c, double xi_sq) {
        Program prog;
        prog.maximize(Expr(0.0));
        QuadFormExpr f0;
        f0.A = ExprMatrix::constant(-Eigen::MatrixXcd::Identity(1, 1));
        f0.a = {Expr(0.0)};
        f0.a0 = Expr(c);
        std::vector<QuadraticForm> cons(1);
        cons[0].A = -Eigen::MatrixXcd::Identity(1, 1);
        cons[0].a = Eigen::VectorXcd::Zero(1);
        cons[0].a0 = xi_sq;
        s_procedure_lmi(prog, f0, cons);
        return prog.solve().status;
    };
    CHECK(probe(1.0, 0.5) == Status::Optimal);
    CHECK(probe(0.3, 0.5) == Status::Infeasible);
}

TEST_CASE("S-procedure soundness by sampling") {
    RngStream rng(64);
    const int n = 3;
    for (int inst = 0; inst < 3; ++inst) {
        Eigen::MatrixXcd A = rng.cnormal_matrix(n, n);
        A = (0.5 * (A + A.adjoint())).eval();
        const Eigen::VectorXcd a = rng.cnormal_vector(n);
        const double xi = rng.uniform(0.1, 1.0);

        // find the certified constant: max t s.t. x^H A x + 2Re{a^H x} + c >= t on the ball
        Program prog;
        const int tvar = prog.add_real("t");
        prog.maximize(Expr::variable(tvar));
        QuadFormExpr f0;
        f0.A = ExprMatrix::constant(A.cast<cd>());
        f0.a.resize(n);
        for (int i = 0; i < n; ++i) f0.a[i] = Expr(cd(a(i)));
        f0.a0 = Expr(5.0) - Expr::variable(tvar);
        std::vector<QuadraticForm> cons(1);
        cons[0].A = -Eigen::MatrixXcd::Identity(n, n);
        cons[0].a = Eigen::VectorXcd::Zero(n);
        cons[0].a0 = xi * xi;
        s_procedure_lmi(prog, f0, cons);
        const Solution sol = prog.solve();
        REQUIRE(sol.status == Status::Optimal);
        const double t = sol.objective;

        double worst = 1e300;
        for (int d = 0; d < 10000; ++d) {
            const Eigen::VectorXcd x = rng.uniform_ball_vector(n, xi);
            const double val = std::real((x.adjoint() * A * x)(0, 0)) +
                               2.0 * std::real((a.adjoint() * x)(0, 0)) + 5.0 - t;
            worst = std::min(worst, val);
        }
        CHECK(worst >= -1e-8);
    }
}

TEST_CASE("sign-definiteness collapses to plain PSD without uncertainty") {
    Program prog;
    prog.maximize(Expr(0.0));
    ExprMatrix D = ExprMatrix::constant(2.0 * Eigen::MatrixXcd::Identity(3, 3));
    std::vector<SignDefPair> pairs(1);
    pairs[0].E = ExprMatrix::zero(2, 3);
    pairs[0].F = Eigen::MatrixXcd::Identity(2, 3).eval();
    pairs[0].F = Eigen::MatrixXcd::Zero(2, 3);
    pairs[0].F(0, 0) = 1.0;
    pairs[0].F(1, 1) = 1.0;
    pairs[0].xi = 0.7;
    sign_definiteness_lmi(prog, D, pairs);
    CHECK(prog.solve().status == Status::Optimal);
}

TEST_CASE("sign-definiteness soundness by sampling") {
    RngStream rng(65);
    const int n = 3, p = 2, q = 2;
    for (int inst = 0; inst < 3; ++inst) {
        Eigen::MatrixXcd E = rng.cnormal_matrix(p, n);
        Eigen::MatrixXcd F = rng.cnormal_matrix(q, n);
        const double xi = rng.uniform(0.05, 0.3);

        // certify D = s I against all ||G||_F <= xi: minimize s
        Program prog;
        const int svar = prog.add_real("s");
        prog.maximize(-Expr::variable(svar));
        ExprMatrix D = ExprMatrix::zero(n, n);
        for (int i = 0; i < n; ++i) D(i, i) = Expr::variable(svar);
        std::vector<SignDefPair> pairs(1);
        pairs[0].E = ExprMatrix::constant(E);
        pairs[0].F = F;
        pairs[0].xi = xi;
        sign_definiteness_lmi(prog, D, pairs);
        const Solution sol = prog.solve();
        REQUIRE(sol.status == Status::Optimal);
        const double s = sol.values(svar);

        double worst = 1e300;
        for (int d = 0; d < 10000; ++d) {
            Eigen::MatrixXcd G = rng.uniform_ball_matrix(p, q, xi);
            Eigen::MatrixXcd rhs = E.adjoint() * G * F;
            rhs = (rhs + rhs.adjoint()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                s * Eigen::MatrixXcd::Identity(n, n) - rhs, Eigen::EigenvaluesOnly);
            worst = std::min(worst, es.eigenvalues().minCoeff());
        }
        CHECK(worst >= -1e-7);
    }
}

TEST_CASE("two-by-two Schur probes") {
    auto probe = [](double x) {
        Program prog;
        prog.maximize(Expr(0.0));
        ExprMatrix b(2, 2);
        b(0, 0) = Expr(1.0);
        b(1, 1) = Expr(1.0);
        b(0, 1) = Expr(x);
        b(1, 0) = Expr(x);
        prog.add_psd(b);
        return prog.solve().status;
    };
    CHECK(probe(0.5) == Status::Optimal);
    CHECK(probe(2.0) == Status::Infeasible);
}

TEST_CASE("robust beamforming on a desk instance") {
    ScenarioConfig cfg = robust_config(2, 2, 3, 0.01);
    RngStream rng(66);
    const ChannelSet set = generate_channel_set(cfg, rng);
    const ChannelView est = ChannelView::estimate_of(set);

    AoOptions ao;
    RngStream r2(7);
    const InitialPoint init = initialize_point(est, cfg, ao, r2);

    RobustSolution warm;
    warm.beams = init.beams;
    warm.surface = init.surface;

    AlgorithmOptions opts;
    const RobustStepResult res = solve_robust_beamforming(set, init.surface, warm, cfg, opts);
    REQUIRE(res.solution.feasible);
    CHECK(res.solution.certified_sum_rate > 0.0);
    CHECK(res.solution.beams.total_power() <= cfg.P_BS_max * (1.0 + 1e-8));

    // certified floors hold under sampled uncertainty
    RngStream r3(8);
    const SamplingReport rep = validate_by_sampling(res.solution, set, cfg, 300, r3);
    CHECK(rep.worst_violation <= 1e-6);
}

TEST_CASE("robust alternation: collapse, ordering, monotone trace") {
    RngStream rng(67);
    AlgorithmOptions opts;

    SUBCASE("zero radii track the perfect-CSI design within 2 percent") {
        ScenarioConfig cfg = robust_config(2, 2, 3, 0.0);
        RngStream gen(68);
        const ChannelSet set = generate_channel_set(cfg, gen);
        RngStream r1(9), r2(9);
        const RobustAoResult robust = robust_alternating_optimize(set, cfg, opts, r1);
        AoOptions ao;
        const AoResult perfect =
            alternating_optimize(ChannelView::true_of(set), cfg, opts, ao, r2);
        CHECK(robust.true_sum_rate >=
              perfect.sum_rate_value * 0.98 - 1e-6);
        CHECK(robust.true_sum_rate <= perfect.sum_rate_value * 1.02 + 1e-6);
    }

    SUBCASE("uncertainty costs rate and the trace is monotone") {
        ScenarioConfig cfg = robust_config(2, 2, 3, 0.1);
        RngStream gen(69);
        const ChannelSet set = generate_channel_set(cfg, gen);
        RngStream r1(10), r2(10);
        const RobustAoResult robust = robust_alternating_optimize(set, cfg, opts, r1);
        for (std::size_t i = 1; i < robust.certified_trace.size(); ++i)
            CHECK(robust.certified_trace[i] >= robust.certified_trace[i - 1] - 1e-6);

        AoOptions ao;
        const AoResult perfect =
            alternating_optimize(ChannelView::true_of(set), cfg, opts, ao, r2);
        CHECK(robust.true_sum_rate <= perfect.sum_rate_value + 1e-6);

        RngStream r3(11);
        const SamplingReport rep = validate_by_sampling(robust.solution, set, cfg, 300, r3);
        CHECK(rep.worst_violation <= 1e-6);
    }
}

TEST_CASE("sampling flags a non-robust design and passes a trivial one") {
    AlgorithmOptions opts;
    SUBCASE("non-robust design violates under drawn errors") {
        ScenarioConfig cfg = robust_config(2, 2, 3, 0.1);
        RngStream gen(70);
        const ChannelSet set = generate_channel_set(cfg, gen);
        RngStream r1(12);
        AoOptions ao;
        const AoResult nominal =
            alternating_optimize(ChannelView::estimate_of(set), cfg, opts, ao, r1);

        // dress the nominal design with nominal certificates
        RobustSolution pseudo;
        pseudo.beams = nominal.beams;
        pseudo.surface = nominal.surface;
        const ChannelView est = ChannelView::estimate_of(set);
        pseudo.quality_a.resize(cfg.K);
        pseudo.quality_b.resize(cfg.K);
        pseudo.signal_floor.resize(cfg.K);
        for (int k = 0; k < cfg.K; ++k) {
            const Eigen::RowVectorXcd row = est.combined_row(nominal.surface, k);
            const double sig = std::norm((row * nominal.beams.f[k])(0, 0));
            double denom = cfg.sigma0_sq;
            for (int i = 0; i < cfg.K; ++i)
                if (i != k) denom += std::norm((row * nominal.beams.f[i])(0, 0));
            denom += cfg.sigma1_sq *
                     (est.g[k].adjoint() * nominal.surface.coefficient_matrix()).squaredNorm();
            pseudo.signal_floor(k) = sig / cfg.sigma0_sq;
            pseudo.quality_a(k) = cfg.sigma0_sq / sig;
            pseudo.quality_b(k) = denom / cfg.sigma0_sq;
        }
        RngStream r2(13);
        const SamplingReport rep = validate_by_sampling(pseudo, set, cfg, 500, r2);
        CHECK(rep.violations.size() > 0);
        CHECK(rep.worst_violation > 1e-6);
    }
    SUBCASE("zero radii are trivially clean") {
        ScenarioConfig cfg = robust_config(2, 1, 2, 0.0);
        RngStream gen(71);
        const ChannelSet set = generate_channel_set(cfg, gen);
        RobustSolution pseudo;
        RngStream r1(14);
        AoOptions ao;
        const AoResult nominal =
            alternating_optimize(ChannelView::true_of(set), cfg, opts, ao, r1);
        pseudo.beams = nominal.beams;
        pseudo.surface = nominal.surface;
        RngStream r2(15);
        const SamplingReport rep = validate_by_sampling(pseudo, set, cfg, 100, r2);
        CHECK(rep.worst_violation <= 1e-9);
        CHECK(rep.violations.empty());
    }
}
