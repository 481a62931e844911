#include "mfris/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mfris/units.hpp"

namespace mfris {

const char* const kConfigSchemaVersion = "mfris-config/1";

double EnergyParams::omega_from_circuit() const { return 1.0 / (1.0 + std::exp(a * q)); }

std::string ValidationReport::joined() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (i) os << "; ";
        os << errors[i];
    }
    return os.str();
}

ValidationReport validate(ScenarioConfig& config) {
    ValidationReport report;
    auto require = [&](bool cond, const std::string& msg) {
        if (!cond) report.errors.push_back(msg);
    };

    require(config.K >= 1, "K >= 1");
    require(config.N >= 1, "N >= 1");
    require(config.M >= 0, "M >= 0");
    require(std::isfinite(config.P_BS_max) && config.P_BS_max > 0.0, "P_BS_max > 0 W");
    require(std::isfinite(config.sigma0_sq) && config.sigma0_sq > 0.0, "sigma0_sq > 0 W");
    require(std::isfinite(config.sigma1_sq) && config.sigma1_sq > 0.0, "sigma1_sq > 0 W");
    require(config.beta_max >= 1.0, "beta_max >= 1");

    const EnergyParams& e = config.energy;
    require(e.Z > 0.0, "Z > 0");
    require(e.a > 0.0, "a > 0");
    require(e.q > 0.0, "q > 0");
    require(e.xi >= 1.0, "xi >= 1");
    require(e.P_b > 0.0, "P_b > 0");
    require(e.P_DC > 0.0, "P_DC > 0");
    require(e.P_C > 0.0, "P_C > 0");

    const UncertaintyParams& u = config.uncertainty;
    require(u.kappa_h >= 0.0, "kappa_h >= 0");
    require(u.kappa_g >= 0.0, "kappa_g >= 0");
    require(u.kappa_H >= 0.0, "kappa_H >= 0");

    const GeometryParams& g = config.geometry;
    require(g.user_radius >= 0.0, "user_radius >= 0");
    require(g.exponent_bs_ris >= 0.0, "path loss exponents >= 0");
    require(g.rician_bs_ris >= 0.0 && g.rician_bs_user >= 0.0 && g.rician_ris_user >= 0.0,
            "Rician factors >= 0");

    if (report.ok()) {
        // Derived constant is always recomputed; any supplied value is overwritten.
        config.energy.Omega = config.energy.omega_from_circuit();
    }
    return report;
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where, std::vector<std::string>& errors) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key()))
            errors.push_back("unknown key '" + where + it.key() + "'");
    }
}

double get_num(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

std::array<double, 3> get_vec3(const json& j, const char* key, std::array<double, 3> fallback,
                               std::vector<std::string>& errors) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 3) {
        errors.push_back(std::string("'") + key + "' must be a 3-element array");
        return fallback;
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

} // namespace

ScenarioConfig load_config_json(const std::string& text) {
    std::vector<std::string> errors;
    json root = json::parse(text);

    reject_unknown_keys(root,
                        {"schema_version", "system", "geometry", "energy", "uncertainty",
                         "sweep", "seed"},
                        "", errors);

    if (!root.contains("schema_version")) {
        errors.push_back("missing mandatory 'schema_version'");
    } else if (root.at("schema_version").get<std::string>() != kConfigSchemaVersion) {
        errors.push_back("unsupported schema_version '" +
                         root.at("schema_version").get<std::string>() + "' (expected " +
                         kConfigSchemaVersion + ")");
    }

    ScenarioConfig cfg;

    if (root.contains("system")) {
        const auto& s = root.at("system");
        reject_unknown_keys(s,
                            {"n_antennas", "n_users", "n_elements", "p_bs_max_dbm",
                             "noise_user_dbm", "noise_ris_dbm", "beta_max_db"},
                            "system.", errors);
        cfg.N = static_cast<int>(get_num(s, "n_antennas", cfg.N));
        cfg.K = static_cast<int>(get_num(s, "n_users", cfg.K));
        cfg.M = static_cast<int>(get_num(s, "n_elements", cfg.M));
        cfg.P_BS_max = dbm_to_watts(get_num(s, "p_bs_max_dbm", watts_to_dbm(cfg.P_BS_max)));
        cfg.sigma0_sq = dbm_to_watts(get_num(s, "noise_user_dbm", watts_to_dbm(cfg.sigma0_sq)));
        cfg.sigma1_sq = dbm_to_watts(get_num(s, "noise_ris_dbm", watts_to_dbm(cfg.sigma1_sq)));
        cfg.beta_max = db_to_linear(get_num(s, "beta_max_db", linear_to_db(cfg.beta_max)));
    }

    if (root.contains("geometry")) {
        const auto& g = root.at("geometry");
        reject_unknown_keys(g,
                            {"bs", "ris", "user_center", "user_radius_m", "path_loss_ref_db",
                             "exponent_bs_ris", "exponent_bs_user", "exponent_ris_user",
                             "rician_db"},
                            "geometry.", errors);
        cfg.geometry.bs_position = get_vec3(g, "bs", cfg.geometry.bs_position, errors);
        cfg.geometry.ris_position = get_vec3(g, "ris", cfg.geometry.ris_position, errors);
        cfg.geometry.user_center = get_vec3(g, "user_center", cfg.geometry.user_center, errors);
        cfg.geometry.user_radius = get_num(g, "user_radius_m", cfg.geometry.user_radius);
        cfg.geometry.path_loss_ref_db = get_num(g, "path_loss_ref_db", cfg.geometry.path_loss_ref_db);
        cfg.geometry.exponent_bs_ris = get_num(g, "exponent_bs_ris", cfg.geometry.exponent_bs_ris);
        cfg.geometry.exponent_bs_user = get_num(g, "exponent_bs_user", cfg.geometry.exponent_bs_user);
        cfg.geometry.exponent_ris_user = get_num(g, "exponent_ris_user", cfg.geometry.exponent_ris_user);
        if (g.contains("rician_db")) {
            const auto& r = g.at("rician_db");
            reject_unknown_keys(r, {"bs_ris", "bs_user", "ris_user"}, "geometry.rician_db.", errors);
            cfg.geometry.rician_bs_ris = db_to_linear(get_num(r, "bs_ris", linear_to_db(cfg.geometry.rician_bs_ris)));
            cfg.geometry.rician_bs_user = db_to_linear(get_num(r, "bs_user", linear_to_db(cfg.geometry.rician_bs_user)));
            cfg.geometry.rician_ris_user = db_to_linear(get_num(r, "ris_user", linear_to_db(cfg.geometry.rician_ris_user)));
        }
    }

    if (root.contains("energy")) {
        const auto& e = root.at("energy");
        reject_unknown_keys(e, {"z_w", "a_per_w", "q_w", "xi", "p_b_w", "p_dc_w", "p_c_w"},
                            "energy.", errors);
        cfg.energy.Z = get_num(e, "z_w", cfg.energy.Z);
        cfg.energy.a = get_num(e, "a_per_w", cfg.energy.a);
        cfg.energy.q = get_num(e, "q_w", cfg.energy.q);
        cfg.energy.xi = get_num(e, "xi", cfg.energy.xi);
        cfg.energy.P_b = get_num(e, "p_b_w", cfg.energy.P_b);
        cfg.energy.P_DC = get_num(e, "p_dc_w", cfg.energy.P_DC);
        cfg.energy.P_C = get_num(e, "p_c_w", cfg.energy.P_C);
    }

    if (root.contains("uncertainty")) {
        const auto& u = root.at("uncertainty");
        reject_unknown_keys(u, {"kappa_h", "kappa_g", "kappa_H"}, "uncertainty.", errors);
        cfg.uncertainty.kappa_h = get_num(u, "kappa_h", cfg.uncertainty.kappa_h);
        cfg.uncertainty.kappa_g = get_num(u, "kappa_g", cfg.uncertainty.kappa_g);
        cfg.uncertainty.kappa_H = get_num(u, "kappa_H", cfg.uncertainty.kappa_H);
    }

    if (root.contains("seed")) cfg.rng_seed = root.at("seed").get<std::uint64_t>();

    // "sweep" is owned by the harness; its content is parsed there.

    if (!errors.empty()) {
        std::string msg = "config errors: ";
        for (std::size_t i = 0; i < errors.size(); ++i) {
            if (i) msg += "; ";
            msg += errors[i];
        }
        throw std::runtime_error(msg);
    }

    ValidationReport rep = validate(cfg);
    if (!rep.ok()) throw std::runtime_error("config errors: " + rep.joined());
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_config_json(ss.str());
}

} // namespace mfris
