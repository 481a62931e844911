#include <cstdio>
#include <cmath>
#include <limits>
#include <vector>

#include "conic_internal.hpp"

namespace mfris::conic {

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    Eigen::VectorXd v(n * (n + 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        v(k++) = m(j, j);
        for (Eigen::Index i = j + 1; i < n; ++i) v(k++) = M_SQRT2 * 0.5 * (m(i, j) + m(j, i));
    }
    return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v, int dim) {
    Eigen::MatrixXd m(dim, dim);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < dim; ++j) {
        m(j, j) = v(k++);
        for (Eigen::Index i = j + 1; i < dim; ++i) {
            const double x = v(k++) * M_SQRT1_2;
            m(i, j) = x;
            m(j, i) = x;
        }
    }
    return m;
}

namespace {

// Cholesky with escalating diagonal jitter; the blocks are kept PD by the
// fraction-to-boundary rule but can come numerically close to singular.
bool robust_llt(const Eigen::MatrixXd& a, Eigen::LLT<Eigen::MatrixXd>& llt) {
    llt.compute(a);
    if (llt.info() == Eigen::Success) return true;
    const double base = std::max(a.diagonal().maxCoeff(), 1.0);
    double jitter = 1e-14 * base;
    Eigen::MatrixXd aj = a;
    for (int attempt = 0; attempt < 8; ++attempt) {
        aj.diagonal().array() += jitter;
        llt.compute(aj);
        if (llt.info() == Eigen::Success) return true;
        jitter *= 100.0;
    }
    return false;
}

struct ConeVec {
    Eigen::VectorXd lin;
    std::vector<Eigen::VectorXd> psd;

    static ConeVec zero(const CompiledProblem& p) {
        ConeVec v;
        v.lin = Eigen::VectorXd::Zero(p.lin_h.size());
        v.psd.reserve(p.psd.size());
        for (const auto& b : p.psd) v.psd.emplace_back(Eigen::VectorXd::Zero(b.svec_dim));
        return v;
    }

    static ConeVec identity(const CompiledProblem& p) {
        ConeVec v;
        v.lin = Eigen::VectorXd::Ones(p.lin_h.size());
        v.psd.reserve(p.psd.size());
        for (const auto& b : p.psd)
            v.psd.emplace_back(svec(Eigen::MatrixXd::Identity(b.dim, b.dim)));
        return v;
    }

    double dot(const ConeVec& o) const {
        double d = lin.dot(o.lin);
        for (std::size_t b = 0; b < psd.size(); ++b) d += psd[b].dot(o.psd[b]);
        return d;
    }

    double squaredNorm() const { return dot(*this); }
    double norm() const { return std::sqrt(squaredNorm()); }

    ConeVec& axpy(double a, const ConeVec& o) {
        lin += a * o.lin;
        for (std::size_t b = 0; b < psd.size(); ++b) psd[b] += a * o.psd[b];
        return *this;
    }

    ConeVec& scale(double a) {
        lin *= a;
        for (auto& p : psd) p *= a;
        return *this;
    }
};

// Nesterov-Todd scaling state.
struct Scaling {
    Eigen::VectorXd w_lin;      // s = w .* lambda, z = lambda ./ w
    Eigen::VectorXd lambda_lin; // sqrt(s .* z)
    struct PsdScale {
        Eigen::MatrixXd R, Rinv;
        Eigen::VectorXd lambda; // diagonal of the scaled point
    };
    std::vector<PsdScale> psd;
};

bool compute_scaling(const CompiledProblem& p, const ConeVec& s, const ConeVec& z, Scaling& W) {
    W.w_lin = (s.lin.array() / z.lin.array()).sqrt();
    W.lambda_lin = (s.lin.array() * z.lin.array()).sqrt();
    if (!W.w_lin.allFinite() || !W.lambda_lin.allFinite()) return false;

    W.psd.resize(p.psd.size());
    for (std::size_t b = 0; b < p.psd.size(); ++b) {
        const int m = p.psd[b].dim;
        const Eigen::MatrixXd S = smat(s.psd[b], m);
        const Eigen::MatrixXd Z = smat(z.psd[b], m);
        Eigen::LLT<Eigen::MatrixXd> ls, lz;
        if (!robust_llt(S, ls) || !robust_llt(Z, lz)) return false;
        const Eigen::MatrixXd Ls = ls.matrixL();
        const Eigen::MatrixXd Lz = lz.matrixL();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lz.transpose() * Ls,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::VectorXd sig = svd.singularValues();
        if (sig.minCoeff() <= 0.0 || !sig.allFinite()) return false;
        const Eigen::VectorXd isqrt = sig.array().sqrt().inverse();
        // R^-1 S R^-T = R^T Z R = diag(sig)
        W.psd[b].R = Ls * svd.matrixV() * isqrt.asDiagonal();
        W.psd[b].Rinv = isqrt.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
        W.psd[b].lambda = sig;
    }
    return true;
}

// Scaled-space transforms per block: Wv = R^T V R, W^T v = R V R^T,
// W^-1 v = R^-T V R^-1, W^-T v = R^-1 V R^-T.
Eigen::VectorXd psd_congruence(const Eigen::MatrixXd& A, const Eigen::VectorXd& v, int dim,
                               bool transpose_a) {
    const Eigen::MatrixXd V = smat(v, dim);
    if (transpose_a) return svec(A.transpose() * V * A);
    return svec(A * V * A.transpose());
}

struct Workspace {
    const CompiledProblem& p;
    int n;
    double obj_scale = 1.0;
    Eigen::VectorXd col_scale; // applied to variables
    Eigen::VectorXd lin_scale; // applied to linear rows
    Eigen::VectorXd blk_scale; // applied to PSD blocks

    CompiledProblem sp; // scaled copy
    std::vector<std::vector<Eigen::MatrixXd>> col_mats; // smat of -B_j per block

    explicit Workspace(const CompiledProblem& prob) : p(prob), n(prob.n) {}

    // Ruiz-style equilibration; row groups on a PSD block share one factor
    // so the cone geometry is preserved.
    void equilibrate() {
        col_scale = Eigen::VectorXd::Ones(n);
        lin_scale = Eigen::VectorXd::Ones(p.lin_h.size());
        blk_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p.psd.size()));
        sp = p;

        for (int pass = 0; pass < 6; ++pass) {
            Eigen::VectorXd colmax = Eigen::VectorXd::Zero(n);
            for (std::size_t r = 0; r < sp.lin_rows.size(); ++r)
                for (const auto& [j, a] : sp.lin_rows[r])
                    colmax(j) = std::max(colmax(j), std::abs(a));
            for (const auto& b : sp.psd)
                for (std::size_t t = 0; t < b.vars.size(); ++t)
                    colmax(b.vars[t]) = std::max(
                        colmax(b.vars[t]), b.cols.col(static_cast<Eigen::Index>(t)).lpNorm<Eigen::Infinity>());
            for (int j = 0; j < n; ++j) {
                if (colmax(j) <= 0.0) continue;
                const double f = 1.0 / std::sqrt(colmax(j));
                col_scale(j) *= f;
                for (auto& row : sp.lin_rows)
                    for (auto& [jj, a] : row)
                        if (jj == j) a *= f;
                for (auto& b : sp.psd)
                    for (std::size_t t = 0; t < b.vars.size(); ++t)
                        if (b.vars[t] == j) b.cols.col(static_cast<Eigen::Index>(t)) *= f;
            }

            for (std::size_t r = 0; r < sp.lin_rows.size(); ++r) {
                double rowmax = 0.0;
                for (const auto& [j, a] : sp.lin_rows[r]) rowmax = std::max(rowmax, std::abs(a));
                if (rowmax <= 0.0) continue;
                const double f = 1.0 / std::sqrt(rowmax);
                lin_scale(static_cast<Eigen::Index>(r)) *= f;
                for (auto& [j, a] : sp.lin_rows[r]) a *= f;
                sp.lin_h(static_cast<Eigen::Index>(r)) *= f;
            }
            for (std::size_t bi = 0; bi < sp.psd.size(); ++bi) {
                auto& b = sp.psd[bi];
                double bmax = 0.0;
                for (std::size_t t = 0; t < b.vars.size(); ++t)
                    bmax = std::max(bmax, b.cols.col(static_cast<Eigen::Index>(t)).lpNorm<Eigen::Infinity>());
                if (bmax <= 0.0) continue;
                const double f = 1.0 / std::sqrt(bmax);
                blk_scale(static_cast<Eigen::Index>(bi)) *= f;
                b.cols *= f;
                b.h *= f;
            }
        }

        sp.c = p.c;
        for (int j = 0; j < n; ++j) sp.c(j) *= col_scale(j);
        const double cmax = sp.c.lpNorm<Eigen::Infinity>();
        obj_scale = cmax > 0.0 ? cmax : 1.0;
        sp.c /= obj_scale;

        col_mats.resize(sp.psd.size());
        for (std::size_t b = 0; b < sp.psd.size(); ++b) {
            col_mats[b].resize(sp.psd[b].vars.size());
            for (std::size_t t = 0; t < sp.psd[b].vars.size(); ++t)
                col_mats[b][t] = smat(sp.psd[b].cols.col(static_cast<Eigen::Index>(t)), sp.psd[b].dim);
        }
    }

    void mul_G(const Eigen::VectorXd& x, ConeVec& out) const {
        for (std::size_t r = 0; r < sp.lin_rows.size(); ++r) {
            double v = 0.0;
            for (const auto& [j, a] : sp.lin_rows[r]) v += a * x(j);
            out.lin(static_cast<Eigen::Index>(r)) = v;
        }
        for (std::size_t b = 0; b < sp.psd.size(); ++b) {
            out.psd[b].setZero();
            for (std::size_t t = 0; t < sp.psd[b].vars.size(); ++t)
                out.psd[b] += sp.psd[b].cols.col(static_cast<Eigen::Index>(t)) * x(sp.psd[b].vars[t]);
        }
    }

    void mul_Gt(const ConeVec& z, Eigen::VectorXd& out) const {
        out.setZero();
        for (std::size_t r = 0; r < sp.lin_rows.size(); ++r)
            for (const auto& [j, a] : sp.lin_rows[r]) out(j) += a * z.lin(static_cast<Eigen::Index>(r));
        for (std::size_t b = 0; b < sp.psd.size(); ++b)
            for (std::size_t t = 0; t < sp.psd[b].vars.size(); ++t)
                out(sp.psd[b].vars[t]) += sp.psd[b].cols.col(static_cast<Eigen::Index>(t)).dot(z.psd[b]);
    }
};

// Jordan-algebra helpers in the scaled space (lambda diagonal).
void jordan_div_psd(const Eigen::VectorXd& lambda, Eigen::MatrixXd& B) {
    for (Eigen::Index i = 0; i < B.rows(); ++i)
        for (Eigen::Index j = 0; j < B.cols(); ++j) B(i, j) *= 2.0 / (lambda(i) + lambda(j));
}

double max_step_lin(const Eigen::VectorXd& lambda, const Eigen::VectorXd& d) {
    double amax = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d(i) < 0.0) amax = std::min(amax, -lambda(i) / d(i));
    return amax;
}

double max_step_psd(const Eigen::VectorXd& lambda, const Eigen::VectorXd& d, int dim) {
    Eigen::MatrixXd D = smat(d, dim);
    const Eigen::VectorXd is = lambda.array().sqrt().inverse();
    D = is.asDiagonal() * D * is.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues().minCoeff();
    if (emin >= 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / emin;
}

struct StepSolver {
    const Workspace& w;
    const Scaling& W;
    Eigen::LLT<Eigen::MatrixXd> s_chol;
    bool ok = false;

    StepSolver(const Workspace& wk, const Scaling& sc) : w(wk), W(sc) {
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(w.n, w.n);
        for (std::size_t r = 0; r < w.sp.lin_rows.size(); ++r) {
            const double iw2 = 1.0 / (W.w_lin(static_cast<Eigen::Index>(r)) * W.w_lin(static_cast<Eigen::Index>(r)));
            for (const auto& [j1, a1] : w.sp.lin_rows[r])
                for (const auto& [j2, a2] : w.sp.lin_rows[r]) S(j1, j2) += a1 * a2 * iw2;
        }
        for (std::size_t b = 0; b < w.sp.psd.size(); ++b) {
            const auto& blk = w.sp.psd[b];
            const int t = static_cast<int>(blk.vars.size());
            if (t == 0) continue;
            Eigen::MatrixXd Gs(blk.svec_dim, t);
            for (int j = 0; j < t; ++j) {
                // W^-T g = R^-1 mat(g) R^-T
                const Eigen::MatrixXd tmp =
                    W.psd[b].Rinv * w.col_mats[b][static_cast<std::size_t>(j)] * W.psd[b].Rinv.transpose();
                Gs.col(j) = svec(tmp);
            }
            const Eigen::MatrixXd Sb = Gs.transpose() * Gs;
            for (int i = 0; i < t; ++i)
                for (int j = 0; j < t; ++j) S(blk.vars[static_cast<std::size_t>(i)], blk.vars[static_cast<std::size_t>(j)]) += Sb(i, j);
        }
        S.diagonal().array() += 1e-13 * std::max(1.0, S.diagonal().maxCoeff());
        ok = robust_llt(S, s_chol);
    }

    // G^T dz = p ; G dx - W^T W dz = q
    void solve1(const Eigen::VectorXd& p, const ConeVec& q, Eigen::VectorXd& dx,
                ConeVec& dz) const {
        solve1_core(p, q, dx, dz);
        // one pass of iterative refinement on the unreduced system
        Eigen::VectorXd rp(w.n);
        w.mul_Gt(dz, rp);
        rp = p - rp;
        ConeVec rq = ConeVec::zero(w.sp);
        w.mul_G(dx, rq);
        ConeVec wtw = dz;
        wtw.lin.array() *= W.w_lin.array() * W.w_lin.array();
        for (std::size_t b = 0; b < w.sp.psd.size(); ++b) {
            const Eigen::MatrixXd RRt = W.psd[b].R * W.psd[b].R.transpose();
            wtw.psd[b] = psd_congruence(RRt, dz.psd[b], w.sp.psd[b].dim, false);
        }
        rq.axpy(-1.0, wtw);
        rq.scale(-1.0).axpy(1.0, q); // rq = q - (G dx - W^T W dz)

        Eigen::VectorXd ddx(w.n);
        ConeVec ddz = ConeVec::zero(w.sp);
        solve1_core(rp, rq, ddx, ddz);
        dx += ddx;
        dz.axpy(1.0, ddz);
    }

    void solve1_core(const Eigen::VectorXd& p, const ConeVec& q, Eigen::VectorXd& dx,
                     ConeVec& dz) const {
        ConeVec qs = q; // W^-T q
        qs.lin.array() /= W.w_lin.array();
        for (std::size_t b = 0; b < w.sp.psd.size(); ++b)
            qs.psd[b] = psd_congruence(W.psd[b].Rinv, q.psd[b], w.sp.psd[b].dim, false);

        Eigen::VectorXd rhs(w.n);
        w.mul_Gt(qs_scaled_adjoint(qs), rhs); // G^T W^-1 qs  (see helper)
        rhs += p;
        dx = s_chol.solve(rhs);

        // dz = W^-1 (W^-T(G dx) - qs)
        w.mul_G(dx, dz);
        for (std::size_t b = 0; b < w.sp.psd.size(); ++b)
            dz.psd[b] = psd_congruence(W.psd[b].Rinv, dz.psd[b], w.sp.psd[b].dim, false);
        dz.lin.array() /= W.w_lin.array();
        dz.axpy(-1.0, qs);
        dz.lin.array() /= W.w_lin.array();
        for (std::size_t b = 0; b < w.sp.psd.size(); ++b)
            dz.psd[b] = psd_congruence(W.psd[b].Rinv, dz.psd[b], w.sp.psd[b].dim, true);
    }

private:
    // W^-1 applied to an already W^-T-scaled vector, fused for mul_Gt use:
    // G^T W^-1 y with y in scaled space.
    ConeVec qs_scaled_adjoint(const ConeVec& y) const {
        ConeVec out = y;
        out.lin.array() /= W.w_lin.array();
        for (std::size_t b = 0; b < w.sp.psd.size(); ++b)
            out.psd[b] = psd_congruence(W.psd[b].Rinv, y.psd[b], w.sp.psd[b].dim, true);
        return out;
    }
};

} // namespace

RawSolution solve_hsd(const CompiledProblem& prob, const SolverOptions& opts) {
    RawSolution out;
    const Eigen::Index n_lin = prob.lin_h.size();
    const bool no_cone = (n_lin == 0 && prob.psd.empty());
    if (no_cone) {
        out.x = Eigen::VectorXd::Zero(prob.n);
        out.status = (prob.c.lpNorm<Eigen::Infinity>() == 0.0) ? Status::Optimal : Status::Unbounded;
        return out;
    }

    Workspace w(prob);
    w.equilibrate();

    const double nu = prob.cone_degree();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(w.n);
    ConeVec s = ConeVec::identity(w.sp);
    ConeVec z = ConeVec::identity(w.sp);
    double tau = 1.0, kappa = 1.0;

    const double resc0 = std::max(1.0, w.sp.c.norm());
    double resh0 = 1.0;
    {
        double h2 = w.sp.lin_h.squaredNorm();
        for (const auto& b : w.sp.psd) h2 += b.h.squaredNorm();
        resh0 = std::max(1.0, std::sqrt(h2));
    }

    ConeVec h = ConeVec::zero(w.sp);
    h.lin = w.sp.lin_h;
    for (std::size_t b = 0; b < w.sp.psd.size(); ++b) h.psd[b] = w.sp.psd[b].h;

    Eigen::VectorXd rx(w.n), gtz(w.n);
    ConeVec rz = ConeVec::zero(w.sp);
    ConeVec gx = ConeVec::zero(w.sp);

    double best_metric = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x = Eigen::VectorXd::Zero(w.n);
    bool best_valid = false;
    int stall = 0;

    Scaling W;
    for (int iter = 0; iter <= opts.max_iterations; ++iter) {
        out.iterations = iter;

        w.mul_Gt(z, gtz);
        rx = gtz + w.sp.c * tau;
        w.mul_G(x, gx);
        rz = gx;
        rz.axpy(1.0, s).axpy(-tau, h);
        const double cx = w.sp.c.dot(x);
        const double hz = h.dot(z);
        const double rtau = kappa + cx + hz;

        const double gap_sz = s.dot(z);
        const double mu = (gap_sz + tau * kappa) / (nu + 1.0);

        const double pcost = cx / tau;
        const double gap = gap_sz / (tau * tau);
        const double relgap = gap / std::max(1.0, std::abs(pcost));
        const double pres = rz.norm() / tau / resh0;
        const double dres = rx.norm() / tau / resc0;

        if (opts.verbose)
            std::printf("it %3d  pres %9.2e dres %9.2e relgap %9.2e tau %9.2e kappa %9.2e mu %9.2e\n",
                        iter, pres, dres, relgap, tau, kappa, mu);

        if (!std::isfinite(mu) || !std::isfinite(pres) || !std::isfinite(dres)) {
            out.status = Status::NumericalFailure;
            break;
        }

        const double metric = std::max(pres, dres) + relgap;
        if (metric < best_metric) {
            best_metric = metric;
            best_x = x / tau;
            best_valid = true;
        }

        if (pres <= opts.feas_tol && dres <= opts.feas_tol &&
            (gap <= opts.abs_gap_tol || relgap <= opts.gap_tol)) {
            out.status = Status::Optimal;
            out.x = x / tau;
            break;
        }
        if (hz < 0.0) {
            const double cert = gtz.norm() / resc0 / (-hz);
            if (cert <= opts.feas_tol) {
                out.status = Status::Infeasible;
                break;
            }
        }
        if (cx < 0.0) {
            ConeVec pcert = gx;
            pcert.axpy(1.0, s);
            if (pcert.norm() / resh0 / (-cx) <= opts.feas_tol) {
                out.status = Status::Unbounded;
                break;
            }
        }
        if (iter == opts.max_iterations) {
            out.status = Status::MaxIterations;
            break;
        }
        // the homogeneous ray can collapse on weakly-posed data
        if (tau < 1e-13) {
            out.status = best_metric < 1e3 * opts.feas_tol ? Status::MaxIterations
                                                           : Status::NumericalFailure;
            break;
        }

        if (!compute_scaling(w.sp, s, z, W)) {
            out.status = best_metric < 1e3 * opts.feas_tol ? Status::MaxIterations
                                                           : Status::NumericalFailure;
            break;
        }
        StepSolver solver(w, W);
        if (!solver.ok) {
            out.status = best_metric < 1e3 * opts.feas_tol ? Status::MaxIterations
                                                           : Status::NumericalFailure;
            break;
        }

        Eigen::VectorXd x1(w.n);
        ConeVec z1 = ConeVec::zero(w.sp);
        solver.solve1(-w.sp.c, h, x1, z1);
        const double denom_base = kappa / tau - w.sp.c.dot(x1) - h.dot(z1);

        // scaled-space lambda vectors
        auto solve_step = [&](const Eigen::VectorXd& bx, const ConeVec& bz, double btau,
                              const ConeVec& bs_scaled, double bkappa, Eigen::VectorXd& dx,
                              ConeVec& dz, ConeVec& ds, double& dtau, double& dkappa) {
            // r_s = lambda \ bs
            ConeVec r_s = bs_scaled;
            r_s.lin.array() /= W.lambda_lin.array();
            for (std::size_t b = 0; b < w.sp.psd.size(); ++b) {
                Eigen::MatrixXd B = smat(bs_scaled.psd[b], w.sp.psd[b].dim);
                jordan_div_psd(W.psd[b].lambda, B);
                r_s.psd[b] = svec(B);
            }
            // bz~ = bz - W^T r_s
            ConeVec bz2 = bz;
            {
                ConeVec wtr = r_s;
                wtr.lin.array() *= W.w_lin.array();
                for (std::size_t b = 0; b < w.sp.psd.size(); ++b)
                    wtr.psd[b] = psd_congruence(W.psd[b].R, r_s.psd[b], w.sp.psd[b].dim, false);
                bz2.axpy(-1.0, wtr);
            }
            Eigen::VectorXd x2(w.n);
            ConeVec z2 = ConeVec::zero(w.sp);
            solver.solve1(bx, bz2, x2, z2);
            const double btau2 = btau + bkappa / tau;
            dtau = (btau2 + w.sp.c.dot(x2) + h.dot(z2)) / denom_base;
            dx = x2 + dtau * x1;
            dz = z2;
            dz.axpy(dtau, z1);
            // ds = W^T (r_s - W dz)
            ds = r_s;
            {
                ConeVec wdz = dz;
                wdz.lin.array() *= W.w_lin.array();
                for (std::size_t b = 0; b < w.sp.psd.size(); ++b)
                    wdz.psd[b] = psd_congruence(W.psd[b].R, dz.psd[b], w.sp.psd[b].dim, true);
                ds.axpy(-1.0, wdz);
            }
            ds.lin.array() *= W.w_lin.array();
            for (std::size_t b = 0; b < w.sp.psd.size(); ++b)
                ds.psd[b] = psd_congruence(W.psd[b].R, ds.psd[b], w.sp.psd[b].dim, false);
            dkappa = (bkappa - kappa * dtau) / tau;
        };

        auto max_step = [&](const ConeVec& ds, const ConeVec& dz, double dtau,
                            double dkappa) {
            // scaled directions
            ConeVec dst = ds;
            dst.lin.array() /= W.w_lin.array();
            for (std::size_t b = 0; b < w.sp.psd.size(); ++b)
                dst.psd[b] = psd_congruence(W.psd[b].Rinv, ds.psd[b], w.sp.psd[b].dim, false);
            ConeVec dzt = dz;
            dzt.lin.array() *= W.w_lin.array();
            for (std::size_t b = 0; b < w.sp.psd.size(); ++b)
                dzt.psd[b] = psd_congruence(W.psd[b].R, dz.psd[b], w.sp.psd[b].dim, true);

            double amax = std::numeric_limits<double>::infinity();
            amax = std::min(amax, max_step_lin(W.lambda_lin, dst.lin));
            amax = std::min(amax, max_step_lin(W.lambda_lin, dzt.lin));
            for (std::size_t b = 0; b < w.sp.psd.size(); ++b) {
                amax = std::min(amax, max_step_psd(W.psd[b].lambda, dst.psd[b], w.sp.psd[b].dim));
                amax = std::min(amax, max_step_psd(W.psd[b].lambda, dzt.psd[b], w.sp.psd[b].dim));
            }
            if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
            if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
            return std::make_pair(amax, std::make_pair(dst, dzt));
        };

        // Predictor.
        ConeVec bs_aff = ConeVec::zero(w.sp);
        bs_aff.lin = -(W.lambda_lin.array() * W.lambda_lin.array()).matrix();
        for (std::size_t b = 0; b < w.sp.psd.size(); ++b) {
            const Eigen::VectorXd l2 = W.psd[b].lambda.array().square();
            bs_aff.psd[b] = -svec(Eigen::MatrixXd(l2.asDiagonal()));
        }
        Eigen::VectorXd dxa(w.n);
        ConeVec dza = ConeVec::zero(w.sp), dsa = ConeVec::zero(w.sp);
        double dtaua = 0.0, dkappaa = 0.0;
        ConeVec mrza = rz;
        mrza.scale(-1.0);
        // Sign note: with rtau = kappa + c^T x + h^T z, Newton damping of the
        // tau row requires -c^T dx - h^T dz - dkappa = +rtau.
        solve_step(-rx, mrza, rtau, bs_aff, -tau * kappa, dxa, dza, dsa, dtaua, dkappaa);

        auto [amax_aff, scaled_aff] = max_step(dsa, dza, dtaua, dkappaa);
        const double alpha_aff = std::min(1.0, amax_aff);
        double sigma = std::pow(1.0 - alpha_aff, 3);
        sigma = std::min(1.0, std::max(sigma, 1e-8));

        // Combined corrector.
        ConeVec bs = bs_aff;
        bs.lin.array() += sigma * mu;
        bs.lin.array() -= (scaled_aff.first.lin.array() * scaled_aff.second.lin.array());
        for (std::size_t b = 0; b < w.sp.psd.size(); ++b) {
            const int dim = w.sp.psd[b].dim;
            const Eigen::MatrixXd Ds = smat(scaled_aff.first.psd[b], dim);
            const Eigen::MatrixXd Dz = smat(scaled_aff.second.psd[b], dim);
            const Eigen::MatrixXd prod = 0.5 * (Ds * Dz + Dz * Ds);
            bs.psd[b] -= svec(prod);
            bs.psd[b] += sigma * mu * svec(Eigen::MatrixXd::Identity(dim, dim));
        }
        const double bkappa = -tau * kappa + sigma * mu - dtaua * dkappaa;

        Eigen::VectorXd dx(w.n);
        ConeVec dz = ConeVec::zero(w.sp), ds = ConeVec::zero(w.sp);
        double dtau = 0.0, dkappa = 0.0;
        ConeVec mrz = rz;
        mrz.scale(-(1.0 - sigma));
        solve_step(-(1.0 - sigma) * rx, mrz, (1.0 - sigma) * rtau, bs, bkappa, dx, dz, ds, dtau,
                   dkappa);

        auto [amax, scaled_comb] = max_step(ds, dz, dtau, dkappa);
        (void)scaled_comb;
        const double alpha = std::min(1.0, 0.99 * amax);
        if (!(alpha > 1e-10)) {
            if (++stall >= 3) {
                out.status = best_metric < 1e3 * opts.feas_tol ? Status::MaxIterations
                                                               : Status::NumericalFailure;
                break;
            }
        } else {
            stall = 0;
        }

        x += alpha * dx;
        s.axpy(alpha, ds);
        z.axpy(alpha, dz);
        tau += alpha * dtau;
        kappa += alpha * dkappa;
        if (!(tau > 0.0) || !(kappa >= 0.0) || !x.allFinite()) {
            out.status = Status::NumericalFailure;
            break;
        }
    }

    if (out.status == Status::MaxIterations || out.status == Status::NumericalFailure) {
        if (best_valid) out.x = best_x;
        else out.x = Eigen::VectorXd::Zero(w.n);
    }
    if (out.x.size() == 0 && out.status == Status::Optimal) out.x = x / tau;

    // undo the equilibration
    if (out.x.size() == w.n)
        for (int j = 0; j < w.n; ++j) out.x(j) *= w.col_scale(j);
    return out;
}

} // namespace mfris::conic
