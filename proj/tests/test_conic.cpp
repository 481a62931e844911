#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "mfris/conic.hpp"
#include "mfris/rng.hpp"

using namespace mfris;
using namespace mfris::conic;

TEST_CASE("identity SDP: min Tr(X) s.t. X >= I") {
    Program prog;
    auto X = prog.add_hermitian(2, "X");
    prog.maximize(-X.trace());
    prog.add_psd(X.matrix() - ExprMatrix::constant(Eigen::MatrixXcd::Identity(2, 2)));
    Solution sol = prog.solve();
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective == doctest::Approx(-2.0).epsilon(1e-6));
    const Eigen::MatrixXcd Xv = X.value(sol.values);
    CHECK((Xv - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-5);
    CHECK(sol.max_violation <= 1e-7);
}

TEST_CASE("eigenvalue SDP: min t s.t. tI - diag(1,3) >= 0") {
    Program prog;
    const int t = prog.add_real("t");
    prog.maximize(-Expr::variable(t));
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(2, 2);
    D(0, 0) = 1.0;
    D(1, 1) = 3.0;
    ExprMatrix block(2, 2);
    block(0, 0) = Expr::variable(t) - Expr(1.0);
    block(1, 1) = Expr::variable(t) - Expr(3.0);
    prog.add_psd(block);
    Solution sol = prog.solve();
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.values(t) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("infeasible SDP: X >= I and Tr(X) <= 1") {
    Program prog;
    auto X = prog.add_hermitian(2, "X");
    prog.maximize(Expr(0.0));
    prog.add_psd(X.matrix() - ExprMatrix::constant(Eigen::MatrixXcd::Identity(2, 2)));
    prog.add_le(X.trace(), 1.0);
    Solution sol = prog.solve();
    CHECK(sol.status == Status::Infeasible);
}

TEST_CASE("unbounded LP detected") {
    Program prog;
    const int t = prog.add_real("t");
    prog.maximize(Expr::variable(t));
    prog.add_ge(Expr::variable(t), 0.0);
    Solution sol = prog.solve();
    CHECK(sol.status == Status::Unbounded);
}

TEST_CASE("LP corner: max x+y, x<=3, y<=4, x,y>=0") {
    Program prog;
    const int x = prog.add_real_bounded(0.0, 3.0, "x");
    const int y = prog.add_real_bounded(0.0, 4.0, "y");
    prog.maximize(Expr::variable(x) + Expr::variable(y));
    Solution sol = prog.solve();
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective == doctest::Approx(7.0).epsilon(1e-7));
}

TEST_CASE("second-order cone via arrowhead block") {
    Program prog;
    const int t = prog.add_real("t");
    prog.maximize(-Expr::variable(t));
    prog.add_soc({Expr(3.0), Expr(4.0)}, Expr::variable(t));
    Solution sol = prog.solve();
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.values(t) == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("hyperbolic constraint |z|^2 <= x*y") {
    Program prog;
    const int z = prog.add_real("z");
    const int x = prog.add_real_bounded(0.0, 2.0, "x");
    const int y = prog.add_real_bounded(0.0, 8.0, "y");
    prog.maximize(Expr::variable(z));
    prog.add_abs2_le_product(Expr::variable(z), Expr::variable(x), Expr::variable(y));
    Solution sol = prog.solve();
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective == doctest::Approx(4.0).epsilon(1e-5));
}

TEST_CASE("equality elimination: max x with x+y=3, y>=1, x<=5") {
    Program prog;
    const int x = prog.add_real("x");
    const int y = prog.add_real("y");
    prog.maximize(Expr::variable(x));
    prog.add_eq(Expr::variable(x) + Expr::variable(y), 3.0);
    prog.add_ge(Expr::variable(y), 1.0);
    prog.add_le(Expr::variable(x), 5.0);
    Solution sol = prog.solve();
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(sol.values(x) + sol.values(y) == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("random Hermitian eigenvalue problems match dense decomposition") {
    RngStream rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 4;
        Eigen::MatrixXcd A = rng.cnormal_matrix(n, n);
        A = (A + A.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
        const double lmax = es.eigenvalues().maxCoeff();

        Program prog;
        const int t = prog.add_real("t");
        prog.maximize(-Expr::variable(t));
        ExprMatrix block = ExprMatrix::constant(-A);
        for (int i = 0; i < n; ++i) block(i, i) += Expr::variable(t);
        prog.add_psd(block);
        Solution sol = prog.solve();
        REQUIRE(sol.status == Status::Optimal);
        CHECK(sol.values(t) == doctest::Approx(lmax).epsilon(1e-6));
    }
}

TEST_CASE("complex program equals its manual real embedding") {
    RngStream rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        const int n = 4;
        Eigen::MatrixXcd A = rng.cnormal_matrix(n, n);
        A = (A + A.adjoint()).eval();

        Program pc;
        const int tc = pc.add_real("t");
        pc.maximize(-Expr::variable(tc));
        ExprMatrix bc = ExprMatrix::constant(-A);
        for (int i = 0; i < n; ++i) bc(i, i) += Expr::variable(tc);
        pc.add_psd(bc);
        Solution sc = pc.solve();

        Eigen::MatrixXd E(2 * n, 2 * n);
        E.topLeftCorner(n, n) = A.real();
        E.bottomRightCorner(n, n) = A.real();
        E.topRightCorner(n, n) = -A.imag();
        E.bottomLeftCorner(n, n) = A.imag();
        Program pr;
        const int tr = pr.add_real("t");
        pr.maximize(-Expr::variable(tr));
        ExprMatrix br = ExprMatrix::constant(-E.cast<std::complex<double>>());
        for (int i = 0; i < 2 * n; ++i) br(i, i) += Expr::variable(tr);
        pr.add_psd(br);
        Solution sr = pr.solve();

        REQUIRE(sc.status == Status::Optimal);
        REQUIRE(sr.status == Status::Optimal);
        CHECK(sc.objective == doctest::Approx(sr.objective).epsilon(1e-6));
    }
}

TEST_CASE("badly scaled data still solves after equilibration") {
    // Mimics the physical scales: powers ~1, channel products ~1e-10.
    Program prog;
    const int p = prog.add_real_bounded(0.0, 5.0, "p");
    const int snr = prog.add_real("snr");
    prog.maximize(Expr::variable(snr));
    // snr <= 3.16e-6 * p / 1e-10
    prog.add_le(Expr::variable(snr) * cd(1e-10, 0.0) - Expr::variable(p) * cd(3.16e-6, 0.0), 0.0);
    Solution sol = prog.solve();
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective == doctest::Approx(5.0 * 3.16e-6 / 1e-10).epsilon(1e-5));
}

TEST_CASE("leading eigenpair") {
    SUBCASE("diagonal") {
        Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
        d(0, 0) = 1.0;
        d(1, 1) = 5.0;
        d(2, 2) = 2.0;
        auto [lambda, v] = leading_eigenpair(d);
        CHECK(lambda == doctest::Approx(5.0).epsilon(1e-10));
        CHECK(std::abs(v(1)) == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("rank one") {
        RngStream rng(3);
        Eigen::VectorXcd x = rng.cnormal_vector(5);
        x.normalize();
        const Eigen::MatrixXcd A = x * x.adjoint();
        auto [lambda, v] = leading_eigenpair(A);
        CHECK(lambda == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(x.dot(v)) == doctest::Approx(1.0).epsilon(1e-8)); // up to phase
    }
    SUBCASE("random 8x8 against full decomposition") {
        RngStream rng(5);
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::MatrixXcd A = rng.cnormal_matrix(8, 8);
            A = (A + A.adjoint()).eval();
            auto [lambda, v] = leading_eigenpair(A);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
            CHECK(lambda == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-10));
            CHECK((A * v - lambda * v).norm() <= 1e-9 * A.norm());
            CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    SUBCASE("non-Hermitian input throws") {
        Eigen::MatrixXcd bad(2, 2);
        bad << 1.0, 2.0, 3.0, 4.0;
        CHECK_THROWS(leading_eigenpair(bad));
    }
}

TEST_CASE("PSD certificate: optimal solutions have bounded violation") {
    RngStream rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        Program prog;
        auto X = prog.add_hermitian(3, "X");
        Eigen::MatrixXcd C = rng.cnormal_matrix(3, 3);
        C = (C + C.adjoint()).eval();
        // max <C, X> s.t. Tr X <= 1, X >= 0 -> lambda_max(C) at rank-one X
        Expr obj;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) obj += C(j, i) * X.entry(i, j);
        prog.maximize(obj);
        prog.add_psd(X.matrix());
        prog.add_le(X.trace(), 1.0);
        Solution sol = prog.solve();
        REQUIRE(sol.status == Status::Optimal);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(C);
        CHECK(sol.objective == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-6));
        CHECK(sol.max_violation <= 1e-7);
    }
}
