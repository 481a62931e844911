#include "mfris/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace mfris {

int SurfaceState::amplify_count() const {
    int n = 0;
    for (Eigen::Index m = 0; m < alpha.size(); ++m)
        if (alpha(m) > 0.5) ++n;
    return n;
}

Eigen::VectorXcd SurfaceState::coefficients() const {
    Eigen::VectorXcd c(alpha.size());
    for (Eigen::Index m = 0; m < alpha.size(); ++m)
        c(m) = alpha(m) * std::sqrt(beta(m)) * std::polar(1.0, theta(m));
    return c;
}

Eigen::MatrixXcd SurfaceState::coefficient_matrix() const {
    return coefficients().asDiagonal();
}

SurfaceState SurfaceState::zeros(Eigen::Index m) {
    SurfaceState s;
    s.alpha = Eigen::VectorXd::Zero(m);
    s.beta = Eigen::VectorXd::Zero(m);
    s.theta = Eigen::VectorXd::Zero(m);
    return s;
}

namespace {

Eigen::MatrixXcd sum_lifted(const std::vector<Eigen::MatrixXcd>& F, Eigen::Index n) {
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& Fk : F) {
        if (Fk.rows() != n || Fk.cols() != n)
            throw std::invalid_argument("lifted beamformer dimension mismatch");
        sum += Fk;
    }
    return sum;
}

} // namespace

double received_rf_power(const Eigen::MatrixXcd& H, const std::vector<Eigen::MatrixXcd>& F,
                         double sigma1_sq, const Eigen::VectorXd& alpha, Eigen::Index m) {
    if (m < 0 || m >= H.rows() || alpha.size() != H.rows())
        throw std::invalid_argument("received_rf_power: index/shape mismatch");
    if (alpha(m) > 0.5) return 0.0;
    const Eigen::MatrixXcd sumF = sum_lifted(F, H.cols());
    const Eigen::RowVectorXcd row = H.row(m);
    const double signal = std::real((row * sumF * row.adjoint())(0, 0));
    return (1.0 - alpha(m)) * (signal + sigma1_sq);
}

double harvested_power(double p_rf, const EnergyParams& params) {
    const double omega = params.omega_from_circuit();
    const double logistic = params.Z / (1.0 + std::exp(-params.a * (p_rf - params.q)));
    const double p = (logistic - params.Z * omega) / (1.0 - omega);
    // Model range is [0, Z); saturation rounds to Z in floating point.
    return std::min(std::max(p, 0.0), std::nextafter(params.Z, 0.0));
}

double output_power(const Eigen::MatrixXcd& Theta, const Eigen::MatrixXcd& H,
                    const std::vector<Eigen::MatrixXcd>& F, double sigma1_sq) {
    if (Theta.rows() != H.rows() || Theta.cols() != H.rows())
        throw std::invalid_argument("output_power: shape mismatch");
    const Eigen::MatrixXcd sumF = sum_lifted(F, H.cols());
    const Eigen::MatrixXcd inner =
        H * sumF * H.adjoint() + sigma1_sq * Eigen::MatrixXcd::Identity(H.rows(), H.rows());
    return std::real((Theta * inner * Theta.adjoint()).trace());
}

PowerReport power_report(const SurfaceState& state, const Eigen::MatrixXcd& H,
                         const std::vector<Eigen::MatrixXcd>& F, double sigma1_sq,
                         const EnergyParams& params) {
    const Eigen::Index M = state.size();
    PowerReport rep;
    rep.rf_per_element = Eigen::VectorXd::Zero(M);
    rep.harvest_per_element = Eigen::VectorXd::Zero(M);

    double harvested = 0.0;
    for (Eigen::Index m = 0; m < M; ++m) {
        rep.rf_per_element(m) = received_rf_power(H, F, sigma1_sq, state.alpha, m);
        rep.harvest_per_element(m) =
            state.alpha(m) > 0.5 ? 0.0 : harvested_power(rep.rf_per_element(m), params);
        harvested += rep.harvest_per_element(m);
    }

    const double m_a = state.alpha.sum();
    rep.output_power = output_power(state.coefficient_matrix(), H, F, sigma1_sq);
    rep.consumed = m_a * (params.P_b + params.P_DC) +
                   (static_cast<double>(M) - m_a) * params.P_C +
                   params.xi * rep.output_power;
    rep.margin = harvested - rep.consumed;
    return rep;
}

double sustainability_margin(const SurfaceState& state, const Eigen::MatrixXcd& H,
                             const std::vector<Eigen::MatrixXcd>& F, double sigma1_sq,
                             const EnergyParams& params) {
    if (state.size() == 0) return 0.0;
    return power_report(state, H, F, sigma1_sq, params).margin;
}

} // namespace mfris
