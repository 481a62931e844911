#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mfris/scenario.hpp"

namespace mfris {

// Per-element operating state of the surface: mode indicator alpha
// (1 = amplify, 0 = harvest), power gain beta, phase theta.
struct SurfaceState {
    Eigen::VectorXd alpha; // entries in {0,1}
    Eigen::VectorXd beta;  // entries in [0, beta_max]
    Eigen::VectorXd theta; // radians, wrapped to [0, 2*pi)

    Eigen::Index size() const { return alpha.size(); }
    int amplify_count() const;

    // Diagonal coefficients alpha_m * sqrt(beta_m) * exp(j theta_m).
    Eigen::VectorXcd coefficients() const;
    Eigen::MatrixXcd coefficient_matrix() const;

    static SurfaceState zeros(Eigen::Index m);
};

struct PowerReport {
    Eigen::VectorXd rf_per_element;      // [W]
    Eigen::VectorXd harvest_per_element; // [W]
    double output_power = 0.0;           // [W]
    double consumed = 0.0;               // [W]
    double margin = 0.0;                 // harvested - consumed [W]
};

// Solver slack on the self-sustainability constraint.
inline constexpr double kEnergyMarginTolerance = -1e-9;

// RF power captured by element m: (1-alpha_m) * (row_m(H) sum(F_k) row_m(H)^H + sigma1_sq).
// The expectation over symbols and surface noise is evaluated in closed form
// through the lifted trace identity.
double received_rf_power(const Eigen::MatrixXcd& H,
                         const std::vector<Eigen::MatrixXcd>& F,
                         double sigma1_sq, const Eigen::VectorXd& alpha, Eigen::Index m);

// Logistic harvesting curve, exactly zero at zero input and saturating below Z.
double harvested_power(double p_rf, const EnergyParams& params);

// Tr(Theta (H sum(F) H^H + sigma1_sq I) Theta^H).
double output_power(const Eigen::MatrixXcd& Theta, const Eigen::MatrixXcd& H,
                    const std::vector<Eigen::MatrixXcd>& F, double sigma1_sq);

// Harvested minus consumed power for the full surface; feasible when >= 0
// (within kEnergyMarginTolerance).
PowerReport power_report(const SurfaceState& state, const Eigen::MatrixXcd& H,
                         const std::vector<Eigen::MatrixXcd>& F, double sigma1_sq,
                         const EnergyParams& params);

double sustainability_margin(const SurfaceState& state, const Eigen::MatrixXcd& H,
                             const std::vector<Eigen::MatrixXcd>& F, double sigma1_sq,
                             const EnergyParams& params);

} // namespace mfris
