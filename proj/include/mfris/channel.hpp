#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfris/rng.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

// True and estimated links with their uncertainty radii. The cascaded
// channel is G_k = diag(g_k^H) H throughout.
struct ChannelSet {
    std::vector<Eigen::VectorXcd> h; // K direct links, length N
    std::vector<Eigen::VectorXcd> g; // K RIS-user links, length M
    Eigen::MatrixXcd H;              // BS-RIS link, M x N
    std::vector<Eigen::MatrixXcd> G; // K cascaded links, M x N

    std::vector<Eigen::VectorXcd> est_h;
    std::vector<Eigen::VectorXcd> est_g;
    Eigen::MatrixXcd est_H;
    std::vector<Eigen::MatrixXcd> est_G;

    std::vector<double> radius_h;
    std::vector<double> radius_g;
    double radius_H = 0.0;
    std::vector<double> radius_G;

    int users() const { return static_cast<int>(h.size()); }
};

// Squared path gains and angles of the single-user line-of-sight setup.
struct SisoChannelParams {
    double h_sq = 0.0;
    double g_sq = 0.0;
    double psi_azimuth = 0.0;
    double psi_elevation = 0.0;
    double phi_azimuth = 0.0;
    double phi_elevation = 0.0;
};

// One bounded perturbation of the estimated channels.
struct UncertaintyDraw {
    std::vector<Eigen::VectorXcd> dh;
    std::vector<Eigen::VectorXcd> dg;
    Eigen::MatrixXcd dH;
    std::vector<Eigen::MatrixXcd> dG;
};

enum class CascadedErrorMode {
    Derived,        // dG recomputed from (dg, dH) for physical consistency
    IndependentBall // dG drawn uniformly in its own Frobenius ball
};

// gain = 10^(ref_loss_db/10) * d^(-exponent); d below the 1 m reference is an error.
double path_loss(double distance, double exponent, double ref_loss_db);

// Uniform linear array response, half-wavelength convention is spacing = 0.5.
Eigen::VectorXcd steering_vector(Eigen::Index count, double azimuth, double elevation,
                                 double spacing);

// Deterministic Rician realizations plus ball-bounded estimation errors.
// Identical (config, stream) inputs reproduce the set bit for bit.
ChannelSet generate_channel_set(const ScenarioConfig& config, RngStream& rng);

// Draws one error realization inside the configured radii.
UncertaintyDraw sample_uncertainty(const ChannelSet& set, RngStream& rng,
                                   CascadedErrorMode mode = CascadedErrorMode::Derived);

// Applies a draw to the estimates, giving one admissible true-channel candidate.
ChannelSet apply_uncertainty(const ChannelSet& set, const UncertaintyDraw& draw);

// CSV dump of real/imag parts for cross-implementation regression.
void dump_channels_csv(const ChannelSet& set, const std::string& path);

} // namespace mfris
