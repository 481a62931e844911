#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace mfris {

// Deterministic random stream: xoshiro256++ seeded through splitmix64.
// Implemented in-repo so that identical (seed, stream ids) produce
// bit-identical realizations on every platform, which the standard
// library distributions do not guarantee.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_a = 0, std::uint64_t stream_b = 0) {
        std::uint64_t x = seed;
        x = mix(x ^ (0x9e3779b97f4a7c15ULL * (stream_a + 1)));
        x = mix(x ^ (0xbf58476d1ce4e5b9ULL * (stream_b + 1)));
        for (auto& si : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            si = mix(x);
        }
        has_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; pairs are cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // CN(0,1): independent real/imag parts with variance 1/2 each.
    std::complex<double> cnormal() {
        const double re = normal() * M_SQRT1_2;
        const double im = normal() * M_SQRT1_2;
        return {re, im};
    }

    Eigen::VectorXcd cnormal_vector(Eigen::Index n) {
        Eigen::VectorXcd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = cnormal();
        return v;
    }

    Eigen::MatrixXcd cnormal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXcd m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cnormal();
        return m;
    }

    // Uniform draw from the complex Euclidean ball of given radius:
    // direction from the rotation-invariant Gaussian, length from the
    // dimension-corrected radius law r = R * u^(1/(2n)).
    Eigen::VectorXcd uniform_ball_vector(Eigen::Index n, double radius) {
        if (n == 0 || radius <= 0.0) return Eigen::VectorXcd::Zero(n);
        Eigen::VectorXcd dir = cnormal_vector(n);
        double nrm = dir.norm();
        while (nrm == 0.0) {
            dir = cnormal_vector(n);
            nrm = dir.norm();
        }
        const double r = radius * std::pow(uniform(), 1.0 / (2.0 * static_cast<double>(n)));
        return dir * (r / nrm);
    }

    Eigen::MatrixXcd uniform_ball_matrix(Eigen::Index rows, Eigen::Index cols, double radius) {
        const Eigen::VectorXcd v = uniform_ball_vector(rows * cols, radius);
        return Eigen::Map<const Eigen::MatrixXcd>(v.data(), rows, cols);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t s_[4];
    bool has_spare_;
    double spare_;
};

} // namespace mfris
