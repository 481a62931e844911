#include "mfris/channel.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mfris {

double path_loss(double distance, double exponent, double ref_loss_db) {
    if (!(distance >= 1.0))
        throw std::invalid_argument("path_loss: distance below 1 m reference");
    return std::pow(10.0, ref_loss_db / 10.0) * std::pow(distance, -exponent);
}

Eigen::VectorXcd steering_vector(Eigen::Index count, double azimuth, double elevation,
                                 double spacing) {
    Eigen::VectorXcd a(count);
    const double step = 2.0 * M_PI * spacing * std::sin(elevation) * std::cos(azimuth);
    for (Eigen::Index m = 0; m < count; ++m) a(m) = std::polar(1.0, step * static_cast<double>(m));
    return a;
}

namespace {

struct Angles {
    double azimuth;
    double elevation;
};

Angles angles_between(const std::array<double, 3>& from, const std::array<double, 3>& to) {
    const double dx = to[0] - from[0];
    const double dy = to[1] - from[1];
    const double dz = to[2] - from[2];
    const double horiz = std::hypot(dx, dy);
    return {std::atan2(dy, dx), std::atan2(horiz, dz)};
}

double distance_between(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                     (a[2] - b[2]) * (a[2] - b[2]));
}

// Rician mix of a LoS component and CN(0,1) scattering, scaled by sqrt(gain).
Eigen::VectorXcd rician_vector(double gain, double rician, const Eigen::VectorXcd& los,
                               RngStream& rng) {
    const double k = std::min(rician, 1e12);
    const Eigen::VectorXcd scatter = rng.cnormal_vector(los.size());
    return std::sqrt(gain) *
           (std::sqrt(k / (1.0 + k)) * los + std::sqrt(1.0 / (1.0 + k)) * scatter);
}

Eigen::MatrixXcd rician_matrix(double gain, double rician, const Eigen::MatrixXcd& los,
                               RngStream& rng) {
    const double k = std::min(rician, 1e12);
    const Eigen::MatrixXcd scatter = rng.cnormal_matrix(los.rows(), los.cols());
    return std::sqrt(gain) *
           (std::sqrt(k / (1.0 + k)) * los + std::sqrt(1.0 / (1.0 + k)) * scatter);
}

Eigen::MatrixXcd cascade(const Eigen::VectorXcd& g, const Eigen::MatrixXcd& H) {
    return g.conjugate().asDiagonal() * H;
}

} // namespace

ChannelSet generate_channel_set(const ScenarioConfig& config, RngStream& rng) {
    const GeometryParams& geo = config.geometry;
    const int K = config.K;
    const int N = config.N;
    const int M = config.M;
    constexpr double kSpacing = 0.5; // half-wavelength ULA at BS and RIS

    ChannelSet set;
    set.h.resize(K);
    set.g.resize(K);
    set.est_h.resize(K);
    set.est_g.resize(K);
    set.G.resize(K);
    set.est_G.resize(K);
    set.radius_h.resize(K);
    set.radius_g.resize(K);
    set.radius_G.resize(K);

    // User drops: uniform in area within the configured circle.
    std::vector<std::array<double, 3>> users(K);
    for (int k = 0; k < K; ++k) {
        const double r = geo.user_radius * std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        users[k] = {geo.user_center[0] + r * std::cos(phi),
                    geo.user_center[1] + r * std::sin(phi), geo.user_center[2]};
    }

    // BS -> RIS: rank-one LoS from the two array responses.
    {
        const double d = distance_between(geo.bs_position, geo.ris_position);
        const double gain = path_loss(d, geo.exponent_bs_ris, geo.path_loss_ref_db);
        const Angles at_ris = angles_between(geo.ris_position, geo.bs_position);
        const Angles at_bs = angles_between(geo.bs_position, geo.ris_position);
        const Eigen::MatrixXcd los =
            steering_vector(M, at_ris.azimuth, at_ris.elevation, kSpacing) *
            steering_vector(N, at_bs.azimuth, at_bs.elevation, kSpacing).adjoint();
        set.est_H = rician_matrix(gain, geo.rician_bs_ris, los, rng);
    }

    for (int k = 0; k < K; ++k) {
        const double d_bu = distance_between(geo.bs_position, users[k]);
        const double gain_bu = path_loss(d_bu, geo.exponent_bs_user, geo.path_loss_ref_db);
        const Angles bs_dep = angles_between(geo.bs_position, users[k]);
        set.est_h[k] = rician_vector(
            gain_bu, geo.rician_bs_user,
            steering_vector(N, bs_dep.azimuth, bs_dep.elevation, kSpacing), rng);

        const double d_ru = distance_between(geo.ris_position, users[k]);
        const double gain_ru = path_loss(d_ru, geo.exponent_ris_user, geo.path_loss_ref_db);
        const Angles ris_dep = angles_between(geo.ris_position, users[k]);
        set.est_g[k] = rician_vector(
            gain_ru, geo.rician_ris_user,
            steering_vector(M, ris_dep.azimuth, ris_dep.elevation, kSpacing), rng);
    }

    // Radii are tied to the estimate norms; the true channel is the estimate
    // plus a ball-bounded error, so the stated bounds hold by construction.
    const UncertaintyParams& u = config.uncertainty;
    set.radius_H = u.kappa_H * set.est_H.norm();
    set.H = set.est_H + rng.uniform_ball_matrix(M, N, set.radius_H);
    for (int k = 0; k < K; ++k) {
        set.radius_h[k] = u.kappa_h * set.est_h[k].norm();
        set.radius_g[k] = u.kappa_g * set.est_g[k].norm();
        set.h[k] = set.est_h[k] + rng.uniform_ball_vector(N, set.radius_h[k]);
        set.g[k] = set.est_g[k] + rng.uniform_ball_vector(M, set.radius_g[k]);

        set.G[k] = cascade(set.g[k], set.H);
        set.est_G[k] = cascade(set.est_g[k], set.est_H);
        // Cauchy-Schwarz composition of the cascaded radius.
        set.radius_G[k] = set.radius_H * set.est_g[k].norm() +
                          set.radius_g[k] * set.est_H.norm() +
                          set.radius_g[k] * set.radius_H;
    }
    return set;
}

UncertaintyDraw sample_uncertainty(const ChannelSet& set, RngStream& rng,
                                   CascadedErrorMode mode) {
    const int K = set.users();
    const Eigen::Index M = set.H.rows();
    const Eigen::Index N = set.H.cols();

    UncertaintyDraw draw;
    draw.dh.resize(K);
    draw.dg.resize(K);
    draw.dG.resize(K);
    draw.dH = rng.uniform_ball_matrix(M, N, set.radius_H);
    for (int k = 0; k < K; ++k) {
        draw.dh[k] = rng.uniform_ball_vector(N, set.radius_h[k]);
        draw.dg[k] = rng.uniform_ball_vector(M, set.radius_g[k]);
        if (mode == CascadedErrorMode::Derived) {
            draw.dG[k] = cascade(set.est_g[k] + draw.dg[k], set.est_H + draw.dH) - set.est_G[k];
        } else {
            draw.dG[k] = rng.uniform_ball_matrix(M, N, set.radius_G[k]);
        }
    }
    return draw;
}

ChannelSet apply_uncertainty(const ChannelSet& set, const UncertaintyDraw& draw) {
    ChannelSet out = set;
    out.H = set.est_H + draw.dH;
    for (int k = 0; k < set.users(); ++k) {
        out.h[k] = set.est_h[k] + draw.dh[k];
        out.g[k] = set.est_g[k] + draw.dg[k];
        out.G[k] = set.est_G[k] + draw.dG[k];
    }
    return out;
}

void dump_channels_csv(const ChannelSet& set, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open channel dump file: " + path);
    std::fprintf(f, "link,user,row,col,true_re,true_im,est_re,est_im\n");
    auto emit = [&](const char* link, int user, Eigen::Index r, Eigen::Index c,
                    std::complex<double> t, std::complex<double> e) {
        std::fprintf(f, "%s,%d,%ld,%ld,%.17g,%.17g,%.17g,%.17g\n", link, user,
                     static_cast<long>(r), static_cast<long>(c), t.real(), t.imag(), e.real(),
                     e.imag());
    };
    for (int k = 0; k < set.users(); ++k)
        for (Eigen::Index i = 0; i < set.h[k].size(); ++i)
            emit("h", k, i, 0, set.h[k](i), set.est_h[k](i));
    for (int k = 0; k < set.users(); ++k)
        for (Eigen::Index i = 0; i < set.g[k].size(); ++i)
            emit("g", k, i, 0, set.g[k](i), set.est_g[k](i));
    for (Eigen::Index i = 0; i < set.H.rows(); ++i)
        for (Eigen::Index j = 0; j < set.H.cols(); ++j)
            emit("H", -1, i, j, set.H(i, j), set.est_H(i, j));
    std::fclose(f);
}

} // namespace mfris
