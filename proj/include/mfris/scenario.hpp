#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mfris {

struct EnergyParams {
    double Z = 24e-3;     // maximum harvested power [W]
    double a = 150.0;     // circuit steepness [1/W]
    double q = 14e-3;     // turn-on threshold [W]
    double Omega = 0.0;   // 1/(1+e^{aq}), recomputed by validate()
    double xi = 1.1;      // inverse amplifier efficiency
    double P_b = 1.5e-3;  // per phase shifter [W]
    double P_DC = 0.3e-3; // amplifier DC bias [W]
    double P_C = 2.1e-6;  // RF-to-DC conversion circuit [W]

    double omega_from_circuit() const;
};

struct UncertaintyParams {
    // Maximum normalized estimation errors; zero collapses to perfect CSI.
    double kappa_h = 0.0;
    double kappa_g = 0.0;
    double kappa_H = 0.0;
};

struct GeometryParams {
    std::array<double, 3> bs_position = {5.0, 0.0, 5.0};
    std::array<double, 3> ris_position = {0.0, 5.0, 10.0};
    std::array<double, 3> user_center = {5.0, 40.0, 0.0};
    double user_radius = 4.0;

    double path_loss_ref_db = -20.0; // at 1 m reference distance
    double exponent_bs_ris = 2.2;
    double exponent_bs_user = 2.8;
    double exponent_ris_user = 2.6;

    // Rician factors, linear.
    double rician_bs_ris = 1.9952623149688795;
    double rician_bs_user = 1.9952623149688795;
    double rician_ris_user = 1.9952623149688795;
};

struct ScenarioConfig {
    int N = 4; // BS antennas
    int K = 3; // users
    int M = 8; // RIS elements

    double P_BS_max = 3.9810717055349722; // 36 dBm [W]
    double sigma0_sq = 1e-10;             // -70 dBm [W]
    double sigma1_sq = 1e-10;             // -70 dBm [W]
    double beta_max = 39.810717055349734; // 16 dB, linear

    GeometryParams geometry;
    EnergyParams energy;
    UncertaintyParams uncertainty;

    std::uint64_t rng_seed = 1;
};

struct ValidationReport {
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
    std::string joined() const;
};

// Checks every invariant and recomputes derived constants (Omega).
// Returns the aggregated report; config is normalized in place when valid.
ValidationReport validate(ScenarioConfig& config);

// Parses the versioned JSON configuration document. Unknown keys are
// errors. Missing sections keep their defaults (Table-driven scenario).
// Throws std::runtime_error with an aggregated message on failure.
ScenarioConfig load_config_json(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);

// Current schema identifier; the document's schema_version must match.
extern const char* const kConfigSchemaVersion;

} // namespace mfris
