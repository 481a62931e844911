#include <cmath>
#include <stdexcept>

#include "mfris/optimizer.hpp"
#include "optimizer_internal.hpp"

namespace mfris {

double BeamformerState::total_power() const {
    double p = 0.0;
    for (const auto& fk : f) p += fk.squaredNorm();
    return p;
}

BeamformerState BeamformerState::from_vectors(std::vector<Eigen::VectorXcd> vectors) {
    BeamformerState bm;
    bm.f = std::move(vectors);
    bm.F.reserve(bm.f.size());
    for (const auto& fk : bm.f) bm.F.push_back(fk * fk.adjoint());
    return bm;
}

ChannelView ChannelView::true_of(const ChannelSet& set) {
    return ChannelView{set.h, set.g, set.H};
}

ChannelView ChannelView::estimate_of(const ChannelSet& set) {
    return ChannelView{set.est_h, set.est_g, set.est_H};
}

Eigen::RowVectorXcd ChannelView::combined_row(const SurfaceState& st, int k) const {
    Eigen::RowVectorXcd row = h[k].adjoint();
    if (elements() > 0) row += g[k].adjoint() * st.coefficient_matrix() * H;
    return row;
}

double achievable_rate(const ChannelView& ch, const SurfaceState& st, const BeamformerState& bm,
                       double sigma0_sq, double sigma1_sq, int k) {
    const Eigen::RowVectorXcd hbar = ch.combined_row(st, k);
    const double signal = std::norm((hbar * bm.f[k])(0, 0));
    double denom = sigma0_sq;
    for (int i = 0; i < ch.users(); ++i) {
        if (i == k) continue;
        denom += std::norm((hbar * bm.f[i])(0, 0));
    }
    if (ch.elements() > 0)
        denom += sigma1_sq *
                 (ch.g[k].adjoint() * st.coefficient_matrix()).squaredNorm();
    return std::log2(1.0 + signal / denom);
}

double sum_rate(const ChannelView& ch, const SurfaceState& st, const BeamformerState& bm,
                double sigma0_sq, double sigma1_sq) {
    double sr = 0.0;
    for (int k = 0; k < ch.users(); ++k)
        sr += achievable_rate(ch, st, bm, sigma0_sq, sigma1_sq, k);
    return sr;
}

double rate_lower_bound(double A, double B, double A0, double B0) {
    if (A <= 0.0 || B <= 0.0 || A0 <= 0.0 || B0 <= 0.0)
        throw std::invalid_argument("rate_lower_bound: arguments must be positive");
    return rate_lower_bound_scaled(A, B, A0, B0);
}

double rate_lower_bound_scaled(double A, double B, double A0, double B0) {
    const double log2e = 1.4426950408889634;
    const double base = std::log2(1.0 + 1.0 / (A0 * B0));
    const double da = log2e * (A - A0) / (A0 + A0 * A0 * B0);
    const double db = log2e * (B - B0) / (B0 + B0 * B0 * A0);
    return base - da - db;
}

Eigen::VectorXcd extract_rank_one(const Eigen::MatrixXcd& X, double ratio_threshold) {
    const double tr = X.trace().real();
    if (tr <= 1e-300) return Eigen::VectorXcd::Zero(X.rows());
    auto [lambda, u] = conic::leading_eigenpair(X);
    if (lambda / tr < ratio_threshold)
        throw std::runtime_error("extract_rank_one: dominance ratio below threshold");
    return std::sqrt(std::max(lambda, 0.0)) * u;
}

// ------------------------------------------------------------ PwlLogistic

PwlLogistic::PwlLogistic(double a, double q, double zeta_hi, int segments) : a_(a), q_(q) {
    const int n = std::max(segments, 1);
    const double hi = std::max(zeta_hi, 1e-12);
    knots_.resize(n + 1);
    for (int i = 0; i <= n; ++i) knots_[i] = hi * static_cast<double>(i) / n;
    slope_.resize(n);
    intercept_.resize(n);
    for (int i = 0; i < n; ++i) {
        const double z0 = knots_[i], z1 = knots_[i + 1];
        const double f0 = curve(z0), f1 = curve(z1);
        slope_[i] = (f1 - f0) / (z1 - z0);
        intercept_[i] = f0 - slope_[i] * z0;
    }
}

double PwlLogistic::curve(double zeta) const { return 1.0 + std::exp(-a_ * (zeta - q_)); }

double PwlLogistic::value(double zeta) const {
    double v = curve(knots_.back()); // constant floor
    for (std::size_t i = 0; i < slope_.size(); ++i)
        v = std::max(v, slope_[i] * zeta + intercept_[i]);
    return v;
}

void PwlLogistic::add_rows(conic::Program& prog, const conic::Expr& c_expr,
                           const conic::Expr& zeta_expr) const {
    using conic::cd;
    for (std::size_t i = 0; i < slope_.size(); ++i)
        prog.add_ge(c_expr - zeta_expr * cd(slope_[i], 0.0), intercept_[i]);
    prog.add_ge(c_expr, curve(knots_.back()));
}

// ------------------------------------------------------------ operating point

OperatingPoint make_operating_point(const ChannelView& ch, const SurfaceState& st,
                                    const BeamformerState& bm, const ScenarioConfig& cfg,
                                    const PwlLogistic& pwl) {
    const int K = ch.users();
    const int M = ch.elements();
    OperatingPoint op;
    op.A0.resize(K);
    op.B0.resize(K);
    op.zeta0 = Eigen::VectorXd::Zero(M);
    op.C0 = Eigen::VectorXd::Zero(M);

    for (int k = 0; k < K; ++k) {
        const Eigen::RowVectorXcd hbar = ch.combined_row(st, k);
        double signal = std::norm((hbar * bm.f[k])(0, 0));
        signal = std::max(signal, 1e-30);
        double denom = cfg.sigma0_sq;
        for (int i = 0; i < K; ++i)
            if (i != k) denom += std::norm((hbar * bm.f[i])(0, 0));
        if (M > 0)
            denom += cfg.sigma1_sq *
                     (ch.g[k].adjoint() * st.coefficient_matrix()).squaredNorm();
        // noise units
        op.A0(k) = cfg.sigma0_sq / signal;
        op.B0(k) = denom / cfg.sigma0_sq;
        op.sum_rate_surrogate += std::log2(1.0 + 1.0 / (op.A0(k) * op.B0(k)));
    }

    if (M > 0) {
        Eigen::MatrixXcd sumF = Eigen::MatrixXcd::Zero(ch.antennas(), ch.antennas());
        for (const auto& Fk : bm.F) sumF += Fk;
        const Eigen::MatrixXcd rf = ch.H * sumF * ch.H.adjoint();
        for (int m = 0; m < M; ++m) {
            op.zeta0(m) =
                (1.0 - st.alpha(m)) * (std::real(rf(m, m)) + cfg.sigma1_sq);
            op.C0(m) = pwl.value(op.zeta0(m));
        }
    }
    return op;
}

void add_rate_surrogate_row(conic::Program& prog, const conic::Expr& q_expr,
                            const conic::Expr& a_expr, const conic::Expr& b_expr, double a0,
                            double b0) {
    using conic::cd;
    const double log2e = 1.4426950408889634;
    const double base = std::log2(1.0 + 1.0 / (a0 * b0));
    const double ca = log2e / (a0 + a0 * a0 * b0);
    const double cb = log2e / (b0 + b0 * b0 * a0);
    // Q <= base - ca (A - a0) - cb (B - b0)
    prog.add_le(q_expr + a_expr * cd(ca, 0.0) + b_expr * cd(cb, 0.0),
                base + ca * a0 + cb * b0);
}

double max_element_rf_power(const ChannelView& ch, const ScenarioConfig& cfg) {
    double worst = 0.0;
    for (int m = 0; m < ch.elements(); ++m)
        worst = std::max(worst, ch.H.row(m).squaredNorm());
    return cfg.P_BS_max * worst + cfg.sigma1_sq;
}

// ------------------------------------------------------------ initialization

InitialPoint initialize_point(const ChannelView& ch, const ScenarioConfig& cfg,
                              const AoOptions& ao, RngStream& rng) {
    const int K = ch.users();
    const int M = ch.elements();
    InitialPoint init;

    // Matched transmission with an equal power split.
    std::vector<Eigen::VectorXcd> f(K);
    for (int k = 0; k < K; ++k) {
        const double nrm = ch.h[k].norm();
        if (nrm > 0.0) {
            f[k] = std::sqrt(cfg.P_BS_max / K) * ch.h[k] / nrm;
        } else {
            f[k] = Eigen::VectorXcd::Zero(ch.antennas());
            f[k](0) = std::sqrt(cfg.P_BS_max / K);
        }
    }
    init.beams = BeamformerState::from_vectors(std::move(f));

    SurfaceState st = SurfaceState::zeros(M);
    if (M > 0 && !ao.skip_surface) {
        const double cap = ao.ris.beta_cap > 0.0 ? ao.ris.beta_cap : cfg.beta_max;
        for (int m = 0; m < M; ++m) {
            st.beta(m) = std::min(1.0, cap);
            st.theta(m) = rng.uniform(0.0, 2.0 * M_PI);
        }
        if (ao.fixed_alpha && ao.alpha_pattern.size() == M) {
            st.alpha = ao.alpha_pattern;
        } else {
            // Alternating split starting in harvest mode: ceil(M/2) harvesters.
            for (int m = 0; m < M; ++m) st.alpha(m) = (m % 2 == 1) ? 1.0 : 0.0;
        }
        if (ao.ris.energy != EnergyModel::None) {
            init.surface_feasible = repair_energy_margin(st, ch, init.beams, cfg);
            if (!init.surface_feasible) st = SurfaceState::zeros(M);
        }
    }
    init.surface = st;
    return init;
}

SurfaceState aligned_surface(const ChannelView& ch, const BeamformerState& bm,
                             const ScenarioConfig& cfg, int m_a, double beta_cap) {
    const int M = ch.elements();
    SurfaceState st = SurfaceState::zeros(M);
    if (M == 0) return st;
    m_a = std::min(m_a, M);
    for (int i = 0; i < m_a; ++i) {
        const int idx = std::min(static_cast<int>(std::floor(static_cast<double>(i) * M / m_a)),
                                 M - 1);
        st.alpha(idx) = 1.0;
    }
    int placed = static_cast<int>(st.alpha.sum());
    for (int m = 0; m < M && placed < m_a; ++m)
        if (st.alpha(m) < 0.5) {
            st.alpha(m) = 1.0;
            ++placed;
        }

    // strongest direct link picks the alignment target
    int k_best = 0;
    double best = -1.0;
    for (int k = 0; k < ch.users(); ++k) {
        const double s = std::abs((ch.h[k].adjoint() * bm.f[k])(0, 0));
        if (s > best) {
            best = s;
            k_best = k;
        }
    }
    const std::complex<double> direct = (ch.h[k_best].adjoint() * bm.f[k_best])(0, 0);
    const Eigen::VectorXcd through = ch.H * bm.f[k_best];
    for (int m = 0; m < M; ++m) {
        if (st.alpha(m) < 0.5) continue;
        st.beta(m) = std::min(1.0, beta_cap);
        const std::complex<double> path = std::conj(ch.g[k_best](m)) * through(m);
        double th = std::arg(direct) - std::arg(path);
        th = std::fmod(th, 2.0 * M_PI);
        if (th < 0.0) th += 2.0 * M_PI;
        st.theta(m) = th;
    }
    repair_energy_margin(st, ch, bm, cfg);
    return st;
}

bool repair_energy_margin(SurfaceState& st, const ChannelView& ch, const BeamformerState& bm,
                          const ScenarioConfig& cfg) {
    if (st.size() == 0) return true;
    auto margin = [&](const SurfaceState& s) {
        return sustainability_margin(s, ch.H, bm.F, cfg.sigma1_sq, cfg.energy);
    };

    // Shrinking the gains only lowers the amplifier load; when even dark
    // amplifiers cannot be sustained, hand them over to harvesting one by
    // one and retry.
    while (true) {
        if (margin(st) >= 0.0) return true;
        SurfaceState trial = st;
        trial.beta.setZero();
        if (margin(trial) >= 0.0) {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                trial.beta = st.beta * mid;
                (margin(trial) >= 0.0 ? lo : hi) = mid;
            }
            trial.beta = st.beta * lo;
            st = trial;
            return true;
        }
        if (st.amplify_count() == 0) return false;
        for (int m = 0; m < st.size(); ++m) {
            if (st.alpha(m) > 0.5) {
                st.alpha(m) = 0.0;
                st.beta(m) = 0.0;
                break;
            }
        }
    }
}

} // namespace mfris
