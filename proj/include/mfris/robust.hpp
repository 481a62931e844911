#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfris/channel.hpp"
#include "mfris/conic.hpp"
#include "mfris/optimizer.hpp"

namespace mfris {

// x -> x^H A x + 2 Re{a^H x} + a0
struct QuadraticForm {
    Eigen::MatrixXcd A;
    Eigen::VectorXcd a;
    double a0 = 0.0;

    double eval(const Eigen::VectorXcd& x) const;
};

// Linearized beam-gain coefficients over the stacked error x = [dh; vec(dG*)].
struct Lemma1Coefficients {
    Eigen::MatrixXcd A; // (N + MN) square
    Eigen::VectorXcd a;
    double a0 = 0.0;

    double eval(const Eigen::VectorXcd& dh, const Eigen::MatrixXcd& dG) const;
};

// First-order expansion of |(h + dh)^H f + v^H (G + dG) f|^2 around
// (f_exp, v_exp), organized as a quadratic form in the stacked error.
Lemma1Coefficients lemma1_coefficients(const Eigen::VectorXcd& h_est,
                                       const Eigen::MatrixXcd& G_est,
                                       const Eigen::VectorXcd& f, const Eigen::VectorXcd& v,
                                       const Eigen::VectorXcd& f_exp,
                                       const Eigen::VectorXcd& v_exp);

// The pre-quadratic-form expansion 2 Re{g1} - g2 evaluated directly.
double lemma1_direct(const Eigen::VectorXcd& h_est, const Eigen::MatrixXcd& G_est,
                     const Eigen::VectorXcd& dh, const Eigen::MatrixXcd& dG,
                     const Eigen::VectorXcd& f, const Eigen::VectorXcd& v,
                     const Eigen::VectorXcd& f_exp, const Eigen::VectorXcd& v_exp);

// Expression-level quadratic form for program assembly; entries are affine
// in whichever of f / v the caller left variable.
struct QuadFormExpr {
    conic::ExprMatrix A;
    std::vector<conic::Expr> a;
    conic::Expr a0;
};

QuadFormExpr lemma1_expr(const Eigen::VectorXcd& h_est, const Eigen::MatrixXcd& G_est,
                         const std::vector<conic::Expr>& f, const std::vector<conic::Expr>& v,
                         const Eigen::VectorXcd& f_exp, const Eigen::VectorXcd& v_exp);

// "f0(x) >= 0 whenever f_j(x) >= 0 for all j" as one PSD block with fresh
// nonnegative multipliers; returns their variable ids.
std::vector<int> s_procedure_lmi(conic::Program& prog, const QuadFormExpr& f0,
                                 const std::vector<QuadraticForm>& constraints);

struct SignDefPair {
    conic::ExprMatrix E; // may be affine
    Eigen::MatrixXcd F;  // constant
    double xi = 0.0;     // Frobenius radius of the uncertainty it guards
};

// "D >= sum_j (E_j^H G_j F_j + h.c.) for all ||G_j||_F <= xi_j" as the
// bordered PSD block with fresh multipliers; returns their variable ids.
std::vector<int> sign_definiteness_lmi(conic::Program& prog, const conic::ExprMatrix& D,
                                       const std::vector<SignDefPair>& pairs);

struct RobustSolution {
    BeamformerState beams;
    SurfaceState surface;
    // certified worst-case bounds per user (linear SINR scale)
    Eigen::VectorXd quality_a; // noise units
    Eigen::VectorXd quality_b; // noise units
    Eigen::VectorXd signal_floor; // t_k, noise units
    Eigen::VectorXd logistic_c;   // C_m values backing the harvest claim
    Eigen::VectorXd harvest_rf;   // zeta_m [W]
    double certified_sum_rate = 0.0;
    bool feasible = true;
};

struct RobustStepResult {
    RobustSolution solution;
    InnerTrace trace;
    double penalty_residual = 0.0;
};

// One SCA pass of the transmit design under bounded uncertainty (fixed surface).
RobustStepResult solve_robust_beamforming(const ChannelSet& set, const SurfaceState& st,
                                          const RobustSolution& warm, const ScenarioConfig& cfg,
                                          const AlgorithmOptions& opts);

// Penalty-based surface design under bounded uncertainty (fixed beams).
RobustStepResult solve_robust_ris(const ChannelSet& set, const RobustSolution& warm,
                                  const ScenarioConfig& cfg, const AlgorithmOptions& opts,
                                  RngStream& rng);

struct RobustAoResult {
    RobustSolution solution;
    std::vector<double> certified_trace; // nondecreasing across accepted steps
    double true_sum_rate = 0.0;          // evaluated on the true channels
    int outer_iterations = 0;
    std::string status = "ok";
};

RobustAoResult robust_alternating_optimize(const ChannelSet& set, const ScenarioConfig& cfg,
                                           const AlgorithmOptions& opts, RngStream& rng);

struct ViolationRecord {
    int draw = 0;
    std::string constraint;
    double violation = 0.0; // positive means violated
};

struct SamplingReport {
    std::vector<ViolationRecord> violations; // entries with violation > tol only
    double worst_violation = 0.0;
    double worst_sinr_gap = 0.0; // certified bound minus achieved, positive = broken
    int draws = 0;
};

// Empirical check of the semi-infinite guarantees over sampled errors.
SamplingReport validate_by_sampling(const RobustSolution& sol, const ChannelSet& set,
                                    const ScenarioConfig& cfg, int n_samples, RngStream& rng,
                                    CascadedErrorMode mode = CascadedErrorMode::Derived,
                                    double tol = 1e-6);

void write_violation_csv(const SamplingReport& report, const std::string& path);

} // namespace mfris
