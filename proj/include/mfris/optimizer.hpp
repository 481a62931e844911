#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfris/channel.hpp"
#include "mfris/conic.hpp"
#include "mfris/energy.hpp"
#include "mfris/rng.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

struct BeamformerState {
    std::vector<Eigen::VectorXcd> f; // K transmit vectors, length N
    std::vector<Eigen::MatrixXcd> F; // lifted outer products

    double total_power() const;
    static BeamformerState from_vectors(std::vector<Eigen::VectorXcd> vectors);
};

// The channels a designer actually works with; `true_of` for perfect CSI,
// `estimate_of` when designs run on estimates.
struct ChannelView {
    std::vector<Eigen::VectorXcd> h;
    std::vector<Eigen::VectorXcd> g;
    Eigen::MatrixXcd H;

    int users() const { return static_cast<int>(h.size()); }
    int antennas() const { return static_cast<int>(h.empty() ? 0 : h[0].size()); }
    int elements() const { return static_cast<int>(H.rows()); }

    static ChannelView true_of(const ChannelSet& set);
    static ChannelView estimate_of(const ChannelSet& set);

    Eigen::RowVectorXcd combined_row(const SurfaceState& st, int k) const;
};

struct AlgorithmOptions {
    // rank-one relaxation
    double srocr_step0 = 0.1;
    double srocr_stall_floor = 1e-8;
    // keeping the trace-ratio bound strictly below one preserves an interior
    double srocr_w_cap = 0.9999;
    double rank_ratio_target = 0.999;
    double rel_obj_tol = 1e-3;
    int max_inner_iterations = 40;

    // penalty schedule
    double rho0 = 1e-3;
    double rho_growth = 10.0;
    double rho_max = 1e3;
    int t_max = 30;
    int max_reinit = 2;
    double penalty_residual_tol = 1e-6;

    // outer alternation
    int max_outer_iterations = 30;
    double outer_rel_tol = 1e-3;

    int logistic_segments = 64;
    conic::SolverOptions solver = [] {
        conic::SolverOptions s;
        s.gap_tol = 1e-9; // keeps objective noise beneath the trace tolerances
        s.abs_gap_tol = 1e-11;
        return s;
    }();
};

enum class EnergyModel { MfRis, SelfSustainable, None };

struct RisOptions {
    bool optimize_alpha = true;
    double beta_cap = -1.0; // <0: use config beta_max
    EnergyModel energy = EnergyModel::MfRis;
};

struct InnerTrace {
    std::vector<double> objective; // accepted iterations
    bool stalled = false;
    bool feasible = true;
    int solves = 0;
};

double achievable_rate(const ChannelView& ch, const SurfaceState& st, const BeamformerState& bm,
                       double sigma0_sq, double sigma1_sq, int k);
double sum_rate(const ChannelView& ch, const SurfaceState& st, const BeamformerState& bm,
                double sigma0_sq, double sigma1_sq);

// First-order surrogate of log2(1 + 1/(A*B)), tight at the expansion point
// and a global under-estimator elsewhere.
double rate_lower_bound(double A, double B, double A0, double B0);

// Unit-scaled principal component; requires eigenvalue dominance >= ratio_threshold.
Eigen::VectorXcd extract_rank_one(const Eigen::MatrixXcd& X, double ratio_threshold = 0.999);

struct SrocrResult {
    BeamformerState beams;
    InnerTrace trace;
    std::vector<double> rank_ratio;
};

SrocrResult solve_beamforming_srocr(const ChannelView& ch, const SurfaceState& st,
                                    const BeamformerState& warm, const ScenarioConfig& cfg,
                                    const AlgorithmOptions& opts,
                                    const RisOptions& ris = RisOptions{});

struct PenaltyResult {
    SurfaceState state;
    InnerTrace trace;
    double penalty_residual = 0.0;
    double rank_ratio = 1.0;
    double alpha_binary_gap = 0.0; // max_m min(alpha, 1-alpha) pre-rounding
};

PenaltyResult solve_ris_penalty(const ChannelView& ch, const BeamformerState& bm,
                                const SurfaceState& warm, const ScenarioConfig& cfg,
                                const AlgorithmOptions& opts, const RisOptions& ris,
                                RngStream& rng);

struct AoResult {
    BeamformerState beams;
    SurfaceState surface;
    std::vector<double> sr_trace; // after each accepted outer half-step
    double sum_rate_value = 0.0;
    double pre_rounding_sum_rate = 0.0;
    int outer_iterations = 0;
    bool surface_active = true; // false when self-sustainability failed outright
    std::string status = "ok";
};

struct AoOptions {
    RisOptions ris;
    bool fixed_alpha = false;          // keep the warm split untouched
    Eigen::VectorXd alpha_pattern;     // used when fixed_alpha and size == M
    bool skip_surface = false;         // no-RIS operation
};

// Feasible starting point: equal-power transmission matched to the direct
// links, unit gains, random phases, and a split projected to positive margin.
struct InitialPoint {
    BeamformerState beams;
    SurfaceState surface;
    bool surface_feasible = true;
};
InitialPoint initialize_point(const ChannelView& ch, const ScenarioConfig& cfg,
                              const AoOptions& ao, RngStream& rng);

AoResult alternating_optimize(const ChannelView& ch, const ScenarioConfig& cfg,
                              const AlgorithmOptions& opts, const AoOptions& ao, RngStream& rng);

// Scales amplitudes down / flips amplifiers to harvesting until the
// self-sustainability margin clears the solver tolerance.
bool repair_energy_margin(SurfaceState& st, const ChannelView& ch, const BeamformerState& bm,
                          const ScenarioConfig& cfg);

// Spread split of m_a amplifiers with phases aligned to the strongest
// user's direct path; a cheap structured candidate for warm starts.
SurfaceState aligned_surface(const ChannelView& ch, const BeamformerState& bm,
                             const ScenarioConfig& cfg, int m_a, double beta_cap);

} // namespace mfris
