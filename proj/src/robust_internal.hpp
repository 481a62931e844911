#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mfris/robust.hpp"
#include "optimizer_internal.hpp"

namespace mfris {

// Shared data of the robust subproblem builders. The rate chain runs in
// noise units (channel amplitudes divided by sigma0) and power-type LMIs
// carry an instance-derived corner scale, which keeps the compiled blocks
// within a few orders of magnitude.
struct RobustContext {
    const ChannelSet& set;
    const ScenarioConfig& cfg;
    double sn = 0.0;    // sqrt(sigma0_sq)
    double s_pow = 0.0; // power-LMI corner scale [sqrt(W)]
    int K = 0, N = 0, M = 0;

    std::vector<Eigen::VectorXcd> h; // est_h / sn
    std::vector<Eigen::MatrixXcd> G; // est_G / sn
    std::vector<double> xi_h;        // radius / sn
    std::vector<double> xi_G;
    std::vector<double> xi_g;        // unscaled (enters scaled borders explicitly)

    static RobustContext make(const ChannelSet& set, const ScenarioConfig& cfg);
};

// Per-user expansion data carried between successive convexifications.
struct RobustExpansion {
    std::vector<Eigen::VectorXcd> f0; // beams
    Eigen::VectorXcd v0;              // surface coefficients
    Eigen::VectorXd A0, B0;           // noise units
    Eigen::VectorXd C0;               // logistic auxiliaries (harvesting set layout)
};

RobustExpansion nominal_expansion(const RobustContext& ctx, const BeamformerState& bm,
                                  const SurfaceState& st, const PwlLogistic& pwl);

} // namespace mfris
