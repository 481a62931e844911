#include "mfris/analysis.hpp"

#include <cmath>

#include "mfris/energy.hpp"

namespace mfris {

namespace {

// Constant forms of the per-split bookkeeping:
//   sum_pa - m_a*(P_b + P_DC) - (M - m_a)*P_C = v1 - m_a*v2.
double v1_of(const AnalysisParams& p) { return p.sum_pa - p.M * p.energy.P_C; }
double v2_of(const AnalysisParams& p) { return p.energy.P_b + p.energy.P_DC - p.energy.P_C; }

} // namespace

double max_output_power(const AnalysisParams& p, int m_a) {
    return (v1_of(p) - static_cast<double>(m_a) * v2_of(p)) / p.energy.xi;
}

double amplification_boundary(const AnalysisParams& p) {
    const double load = p.energy.xi * p.beta_max * (p.P_BS_max * p.h_sq + p.sigma1_sq);
    return v1_of(p) / (load + v2_of(p));
}

SisoSnr snr_mf_at(const AnalysisParams& p, double m_a) {
    SisoSnr r;
    if (m_a <= 0.0) {
        r.gamma = 0.0;
        return r;
    }
    const double boundary = amplification_boundary(p);
    const double ph = p.P_BS_max * p.h_sq;
    if (m_a <= boundary) {
        r.branch = SnrBranch::AmplificationLimited;
        r.gamma = p.P_BS_max * p.beta_max * p.h_sq * p.g_sq * m_a * m_a /
                  (p.beta_max * p.sigma1_sq * p.g_sq * m_a + p.sigma0_sq);
        return r;
    }
    r.branch = SnrBranch::PowerLimited;
    const double po = (v1_of(p) - m_a * v2_of(p)) / p.energy.xi;
    if (po < 0.0) {
        r.feasible = false;
        r.gamma = 0.0;
        return r;
    }
    r.gamma = p.P_BS_max * p.h_sq * p.g_sq * po * m_a /
              (p.sigma1_sq * p.g_sq * po + p.sigma0_sq * (ph + p.sigma1_sq));
    return r;
}

SisoSnr snr_mf(const AnalysisParams& p) { return snr_mf_at(p, static_cast<double>(p.M_A)); }

SisoSolution optimal_siso_solution(const AnalysisParams& p, const Eigen::VectorXcd& g_vec,
                                   const Eigen::VectorXcd& h_vec) {
    SisoSolution sol;
    sol.p_star = p.P_BS_max;
    sol.theta_star.resize(g_vec.size());
    for (Eigen::Index m = 0; m < g_vec.size(); ++m) {
        double t = std::arg(g_vec(m)) - std::arg(h_vec(m));
        t = std::fmod(t, 2.0 * M_PI);
        if (t < 0.0) t += 2.0 * M_PI;
        sol.theta_star(m) = t;
    }

    const double boundary = amplification_boundary(p);
    const double m_a = static_cast<double>(p.M_A);
    if (m_a <= boundary) {
        sol.branch = SnrBranch::AmplificationLimited;
        sol.beta_star = p.beta_max;
    } else {
        sol.branch = SnrBranch::PowerLimited;
        const double po = max_output_power(p, p.M_A);
        if (po < 0.0) {
            sol.feasible = false;
            sol.beta_star = 0.0;
            sol.gamma = 0.0;
            return sol;
        }
        sol.beta_star = po / (m_a * (p.P_BS_max * p.h_sq + p.sigma1_sq));
    }
    sol.gamma = snr_mf(p).gamma;
    return sol;
}

SeResult snr_se(const AnalysisParams& p) {
    SeResult r;
    const double m_a = static_cast<double>(p.M_A);
    r.gamma = p.P_BS_max * p.h_sq * p.g_sq * m_a * m_a / p.sigma0_sq;
    const double consumption =
        m_a * p.energy.P_b + static_cast<double>(p.M - p.M_A) * p.energy.P_C;
    r.feasible = consumption <= p.sum_pa;
    if (!r.feasible) r.gamma = 0.0;

    // Largest supportable reflecting count.
    const double v1 = p.sum_pa - p.M * p.energy.P_C;
    const double v2 = p.energy.P_b - p.energy.P_C;
    double opt = v2 > 0.0 ? std::floor(v1 / v2) : static_cast<double>(p.M);
    opt = std::max(0.0, std::min(opt, static_cast<double>(p.M)));
    r.optimal_m_a = static_cast<int>(opt);
    return r;
}

int optimal_elements_mf(const AnalysisParams& p) {
    const double w3 = p.sigma1_sq * p.g_sq;
    const double w4 = p.energy.xi * p.sigma0_sq * (p.P_BS_max * p.h_sq + p.sigma1_sq);
    const double v1 = v1_of(p);
    const double v2 = v2_of(p);

    const double m_a1 = amplification_boundary(p);
    double m_a2 = 0.0;
    if (v1 > 0.0 && v2 > 0.0 && w3 > 0.0) {
        m_a2 = (v1 * w3 + w4 - std::sqrt(v1 * w3 * w4 + w4 * w4)) / (v2 * w3);
    }
    double m_bar = std::max(m_a1, m_a2);
    m_bar = std::max(0.0, std::min(m_bar, static_cast<double>(p.M)));

    AnalysisParams q = p;
    const double lo = std::floor(m_bar);
    const double hi = std::ceil(m_bar);
    const SisoSnr glo = snr_mf_at(q, lo);
    const SisoSnr ghi = snr_mf_at(q, hi);
    const double vlo = glo.feasible ? glo.gamma : -1.0;
    const double vhi = ghi.feasible ? ghi.gamma : -1.0;
    // Ties resolve to the smaller split.
    return static_cast<int>(vhi > vlo ? hi : lo);
}

CrossoverResult crossover_threshold(const AnalysisParams& p) {
    CrossoverResult r;
    const double w3 = p.sigma1_sq * p.g_sq;
    const double w4 = p.energy.xi * p.sigma0_sq * (p.P_BS_max * p.h_sq + p.sigma1_sq);
    const double v1 = v1_of(p);
    const double v2 = v2_of(p);
    const double w5 = v2 * p.sigma0_sq + v1 * w3 + w4;

    const double t1 = (p.beta_max - 1.0) * p.sigma0_sq / (p.beta_max * w3);

    const double disc = w5 * w5 - 4.0 * v1 * v2 * w3 * p.sigma0_sq;
    if (disc < 0.0) {
        r.exists = false;
        r.threshold = 0.0;
        return r;
    }
    // Stable evaluation of the smaller quadratic root.
    const double t2 = 2.0 * v1 * p.sigma0_sq / (w5 + std::sqrt(disc));
    r.threshold = std::min(t1, t2);
    return r;
}

double sum_pa_los(const AnalysisParams& p, int m_h) {
    const double rf = p.P_BS_max * p.h_sq + p.sigma1_sq;
    return static_cast<double>(m_h) * harvested_power(rf, p.energy);
}

double back_solve_po_mf(double gamma_target, const AnalysisParams& p) {
    const double ph = p.P_BS_max * p.h_sq;
    const double m_a = static_cast<double>(p.M_A);
    const double num = gamma_target * p.sigma0_sq * (ph + p.sigma1_sq);
    const double den = p.P_BS_max * p.h_sq * p.g_sq * m_a - gamma_target * p.sigma1_sq * p.g_sq;
    return num / den;
}

double sum_pa_from_output_power(const AnalysisParams& p, double p_o, int m_a) {
    return p.energy.xi * p_o + static_cast<double>(m_a) * (p.energy.P_b + p.energy.P_DC) +
           static_cast<double>(p.M - m_a) * p.energy.P_C;
}

} // namespace mfris
