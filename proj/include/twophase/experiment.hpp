#pragma once

// Configuration-driven experiments: single runs, eps/delta sweeps,
// initial-data checks and plain-text reports over run summaries.
//
// Configuration files are JSON objects with "schema_version": 1. Unknown
// keys are errors. See README.md for the full schema.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twophase/diagnostics.hpp"
#include "twophase/init_data.hpp"
#include "twophase/integrator.hpp"
#include "twophase/model.hpp"

namespace twophase {

inline constexpr int kSchemaVersion = 1;

/// Frozen tolerance constants of tol(dt, h) = c1 dt + c2 h^2, from the
/// refinement study described in README.md.
inline constexpr double kEnergyTolDt = 0.1;
inline constexpr double kEnergyTolH2 = 0.1;

struct CheckSettings {
    double c1 = kEnergyTolDt;
    double c2 = kEnergyTolH2;
    double mass_tolerance = 1e-11;
    double momentum_tolerance = 1e-10;
    double mv_cap = 1e6;
    /// Floor for min n and min rho on eps > 0 runs.
    double positivity_floor = 1e-12;
    /// Mass-budget slack is budget_factor * (largest dt used).
    double budget_factor = 5.0;
    /// dist_eq(t_end) <= decay_factor * dist_eq(0) when > 0.
    double decay_factor = 0.0;
};

struct InitialSpec {
    GeneratorSpec generator;
    /// Non-empty: load the initial state from this snapshot instead.
    std::string snapshot;
    /// Mollify and lift the data before the run; needs params.delta > 0.
    bool regularize = false;
};

struct SweepSpec {
    std::string axis; ///< eps | delta
    std::vector<double> values;
};

struct ExperimentConfig {
    PeriodicGrid grid{1, 64};
    ModelParams params;
    StepConfig step;
    InitialSpec initial;
    std::optional<SweepSpec> sweep;
    std::string outputs = "out";
    std::uint64_t seed = 0;
    double p_exp = 2.0;
    CheckSettings checks;
};

/// Parses and validates a configuration. Each override has the form
/// key.path=value; value is read as JSON and falls back to a plain string.
/// base_dir resolves relative snapshot paths. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                              const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});
/// Fully resolved configuration, defaults included.
std::string config_to_json(const ExperimentConfig& cfg);

/// Initial state and the reference data for the diagnostics.
struct PreparedRun {
    State initial;
    RawInitialData reference;
};
PreparedRun prepare_initial(const ExperimentConfig& cfg);

struct InvariantResult {
    std::string name;
    std::string anchor; ///< the property the check realizes
    bool enabled = true;
    bool passed = true;
    double value = 0.0;
    double limit = 0.0;
    std::string detail;
};

std::vector<InvariantResult> evaluate_invariants(const RunResult& r, const ExperimentConfig& cfg,
                                                 const State& initial);

struct RunOutcome {
    RunResult result;
    std::vector<InvariantResult> invariants;
    int exit_code = 0;
};

/// Runs one experiment and, if out_dir is non-empty, writes diagnostics.csv,
/// integrals.csv, summary.json and checkpoints/ there.
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, bool quiet = true);
/// Same, starting from a prepared initial state.
RunOutcome run_experiment(const ExperimentConfig& cfg, const PreparedRun& prepared, const std::string& out_dir,
                          bool quiet = true);

/// 0 pass, 1 runtime or invariant failure.
int run_single(const ExperimentConfig& cfg, const std::string& out_dir, bool quiet = true);

struct SweepOutcome {
    std::vector<double> values;
    std::vector<RunOutcome> members;
    /// Column name and the trend check on it.
    std::vector<InvariantResult> trends;
    int exit_code = 0;
};

/// Integral columns whose trend is checked along each sweep axis.
std::vector<Integral> sweep_trend_columns(const std::string& axis);

SweepOutcome run_sweep_experiment(const ExperimentConfig& cfg, const std::string& out_dir, bool quiet = true);
int run_sweep(const ExperimentConfig& cfg, const std::string& out_dir, bool quiet = true);

/// Markdown report over summary.json / sweep_summary.json files. Missing or
/// unreadable files are listed as SKIPPED. exit_code is the worst member's.
struct Report {
    std::string text;
    int exit_code = 0;
};
Report make_report(const std::vector<std::string>& paths);

/// Initial-data verifications only: mollifier constraints, vacuum
/// compatibility, regularized energy and the delta-halving distance trends.
/// Writes init_check.json when out_dir is non-empty.
int check_init(const ExperimentConfig& cfg, const std::string& out_dir, bool quiet = true);

} // namespace twophase
