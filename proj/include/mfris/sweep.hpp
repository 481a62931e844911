#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfris/analysis.hpp"
#include "mfris/optimizer.hpp"
#include "mfris/robust.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

enum class Scheme { MfRis, SelfSustainable, ReflectingOnly, NoRis, NonRobust };
enum class CsiMode { Perfect, Robust, NonRobust };
enum class SweepVariable { AmplifyCount, TransmitPower, Elements, RisY, TotalPower };

const char* scheme_name(Scheme s);
const char* csi_name(CsiMode m);
const char* variable_name(SweepVariable v);
bool parse_scheme(const std::string& name, Scheme& out);
bool parse_csi(const std::string& name, CsiMode& out);
bool parse_variable(const std::string& name, SweepVariable& out);

struct SweepSpec {
    SweepVariable variable = SweepVariable::TransmitPower;
    std::vector<double> grid; // dBm for power axes, meters for position, counts otherwise
    int trials = 1;
    std::vector<Scheme> schemes = {Scheme::MfRis};
    CsiMode csi = CsiMode::Perfect;
    bool parallel = true; // OpenMP pool; the serial path is the reference
};

struct ResultRow {
    std::string scheme;
    std::string csi;
    std::string swept_var;
    double swept_value = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::string metric; // "sr_bits" or "snr_db"
    double value = 0.0;
    std::string status;
    int iters = 0;
    double wall_ms = 0.0;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    bool any_failure = false;
};

// Grid x trials x schemes; rows arrive in deterministic (point, trial,
// scheme) order regardless of the worker pool. Timing stays zero unless
// capture_timing is set, so identical (config, seed) reruns are
// byte-identical.
SweepResult run_sweep(const ScenarioConfig& config, const SweepSpec& spec,
                      const AlgorithmOptions& opts, bool capture_timing = false);

// Closed-form single-user sweep over the amplifying count.
SweepResult run_analysis_sweep(const AnalysisParams& params, const std::vector<double>& ma_grid);

std::string csv_string(const std::vector<ResultRow>& rows);
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

// One scheme at one grid point; exposed for the single-instance commands.
ResultRow run_point(const ScenarioConfig& config, SweepVariable variable, double value,
                    Scheme scheme, CsiMode csi, int trial, const AlgorithmOptions& opts,
                    bool capture_timing);

} // namespace mfris
