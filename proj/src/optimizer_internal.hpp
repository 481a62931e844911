#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mfris/conic.hpp"
#include "mfris/optimizer.hpp"

namespace mfris {

// Piecewise-linear chord over-approximation of the logistic auxiliary
// C(zeta) = 1 + exp(-a(zeta - q)) on [0, zeta_hi]. Chords of a convex
// function lie above it, so "C >= every chord" keeps the true constraint
// satisfied and the implied harvest estimate conservative.
class PwlLogistic {
public:
    PwlLogistic(double a, double q, double zeta_hi, int segments);

    double curve(double zeta) const;   // exact logistic auxiliary
    double value(double zeta) const;   // chord envelope at zeta (>= curve)
    double zeta_hi() const { return knots_.back(); }

    // Rows C >= chord_i(zeta) for every segment, plus the constant floor.
    void add_rows(conic::Program& prog, const conic::Expr& c_expr,
                  const conic::Expr& zeta_expr) const;

private:
    double a_, q_;
    std::vector<double> knots_;
    std::vector<double> slope_, intercept_;
};

// Expansion-point data for the convex subproblems, derived from the current
// iterate. A and B are kept in noise units (scaled by sigma0_sq) so the
// compiled programs stay well conditioned.
struct OperatingPoint {
    Eigen::VectorXd A0, B0;       // per user, noise units
    Eigen::VectorXd zeta0, C0;    // per element (zeta in watts)
    double sum_rate_surrogate = 0.0;
};

OperatingPoint make_operating_point(const ChannelView& ch, const SurfaceState& st,
                                    const BeamformerState& bm, const ScenarioConfig& cfg,
                                    const PwlLogistic& pwl);

// Adds Q_k <= R_lb(A_k, B_k) around (A0, B0); all in noise units.
void add_rate_surrogate_row(conic::Program& prog, const conic::Expr& q_expr,
                            const conic::Expr& a_expr, const conic::Expr& b_expr, double a0,
                            double b0);

double rate_lower_bound_scaled(double A, double B, double A0, double B0);

// zeta_hi for the logistic range: the largest per-element RF power any
// admissible beamformer can deliver.
double max_element_rf_power(const ChannelView& ch, const ScenarioConfig& cfg);

} // namespace mfris
