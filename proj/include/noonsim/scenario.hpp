// Scenario runner behind the CLI: JSON config parsing/validation, dispatch to
// the simulation modules, and deterministic result emission (JSON document
// plus a CSV sidecar table). Floating-point values are serialized with 17
// significant digits so identical config+seed reruns are byte-identical.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noonsim/fock.hpp"

namespace noonsim::scenario {

inline constexpr int kSchemaVersion = 1;

struct ScenarioConfig {
    std::string scheme; // qfg | bootstrap | noon-gun | ghz-scan | ramsey | feasibility

    // qfg / bootstrap / ramsey signal size
    int n = 0;
    // qfg
    double chi = 0.0;
    // bootstrap
    int k = 0;
    double phi0 = 0.0;
    double detector_efficiency = 1.0;
    // noon-gun
    int n_atoms = 0;
    double g_l = 1.0;
    double g_r = 1.0;
    double omega_peak = 0.0;
    double duration = 0.0;
    int samples = 1000;
    std::string ramp = "tanh";            // linear | tanh | constant
    std::string ghz_time = "scan-optimum"; // scan-optimum | reference-pi
    // ghz-scan
    std::vector<int> scan_atoms;
    double scan_step = 1e-3;
    // ramsey
    double g = 0.0;
    double tau_c = 0.0;
    double delta = 0.0;
    // feasibility
    double omega_c = 0.0;
    double kappa = 0.0;
    double transfer_duration = 0.0;

    // common
    std::string out_path; // empty: caller decides (CLI prints to stdout)
    std::uint64_t seed = 0;
    MeasureMode mode = MeasureMode::exact;
};

// Parses and fully validates a JSON config document. Throws ConfigError with
// a diagnostic naming the first offending field and the violated constraint.
ScenarioConfig parse_config(const std::string& text);

struct ScenarioResult {
    std::string json; // complete result document
    std::string csv;  // plot-ready table (header + rows, LF endings)
};

// Dispatches to the owning module and assembles the result document. Errors
// from the modules propagate (ConfigError, NumericalError, ResourceError,
// PostselectionError); nothing is written to disk here.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Writes result.json to out_path and result.csv next to it (same stem, .csv
// extension), each through a temp file and an atomic rename so failed runs
// leave no partial files.
void write_result(const ScenarioResult& result, const std::string& out_path);

// Thread count for independent sweep points: NOONSIM_THREADS (positive
// integer); unset means 1 (serial). Invalid values raise ConfigError.
int sweep_thread_count();

} // namespace noonsim::scenario
