#pragma once

#include <Eigen/Dense>

#include "mfris/scenario.hpp"

namespace mfris {

// Inputs of the single-user line-of-sight capacity analysis. sum_pa is the
// total harvested power: the worked examples under-determine it, so it is an
// explicit input with helpers below to derive it from the harvesting model
// or back-solve it from a target SNR.
struct AnalysisParams {
    double P_BS_max = 5.0;
    int M = 300;
    int M_A = 10;
    double h_sq = 0.0;     // squared path gain, BS-RIS
    double g_sq = 0.0;     // squared path gain, RIS-user
    double sigma0_sq = 1e-10;
    double sigma1_sq = 1e-10;
    double beta_max = 19.952623149688797; // 13 dB
    EnergyParams energy;
    double sum_pa = 0.0; // total harvested power [W]
};

enum class SnrBranch { AmplificationLimited, PowerLimited };

struct SisoSnr {
    double gamma = 0.0; // linear
    SnrBranch branch = SnrBranch::AmplificationLimited;
    bool feasible = true;
};

struct SisoSolution {
    double p_star = 0.0;
    Eigen::VectorXd theta_star; // per element
    double beta_star = 0.0;     // uniform across amplifying elements
    SnrBranch branch = SnrBranch::AmplificationLimited;
    double gamma = 0.0;
    bool feasible = true;
};

// Maximum surface output power available for amplification at a given split.
double max_output_power(const AnalysisParams& p, int m_a);

// Boundary between the amplification-limited and power-limited regimes.
double amplification_boundary(const AnalysisParams& p);

SisoSolution optimal_siso_solution(const AnalysisParams& p, const Eigen::VectorXcd& g_vec,
                                   const Eigen::VectorXcd& h_vec);

SisoSnr snr_mf(const AnalysisParams& p);
SisoSnr snr_mf_at(const AnalysisParams& p, double m_a); // real-valued split

struct SeResult {
    double gamma = 0.0;
    bool feasible = true;
    int optimal_m_a = 0;
};
SeResult snr_se(const AnalysisParams& p);

// Split maximizing the achievable SNR, resolved on the integer grid.
int optimal_elements_mf(const AnalysisParams& p);

struct CrossoverResult {
    double threshold = 0.0; // real-valued; integers at or below favor amplification
    bool exists = true;     // false when the closed form has no real root
};
CrossoverResult crossover_threshold(const AnalysisParams& p);

// Harvest under LoS illumination: M_H elements exposed to p*h_sq + sigma1_sq.
double sum_pa_los(const AnalysisParams& p, int m_h);

// Output power reproducing a target SNR in the power-limited branch.
double back_solve_po_mf(double gamma_target, const AnalysisParams& p);
double sum_pa_from_output_power(const AnalysisParams& p, double p_o, int m_a);

} // namespace mfris
