#pragma once

// Time stepping for both right-hand sides: explicit Heun and classical RK4
// on the conservative variables (n, n v, rho, rho u), and a second-order
// IMEX scheme with the linear diffusion treated implicitly.

#include <functional>
#include <string>
#include <vector>

#include "twophase/diagnostics.hpp"
#include "twophase/model.hpp"

namespace twophase {

enum class Scheme { ExplicitRK2, ExplicitRK4, Imex };

const char* to_string(Scheme s);
/// Throws ConfigError for anything but explicit-rk2, explicit-rk4, imex.
Scheme scheme_from_string(const std::string& name);

struct StepConfig {
    Scheme scheme = Scheme::ExplicitRK2;
    double cfl = 0.4;
    double dt_max = 1e-2;
    double density_floor = 1e-10;
    double t_end = 1.0;
    double sample_every = 0.1;
    /// 0 disables checkpoints.
    double checkpoint_every = 0.0;
    /// Relative residual target of the IMEX conjugate-gradient solves.
    double solver_tolerance = 1e-10;
    int solver_max_iterations = 2000;
    RhsOptions rhs;

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;
};

/// cfl * min(h / max(|v|+1, |u|+c_s), h^2 / (2 dim nu_max)), clamped by
/// dt_max. Returns 0 if any field is non-finite.
double stable_dt(const State& s, const ModelParams& p, const StepConfig& c);

/// One step of the configured scheme. Throws PositivityError when min n or
/// min rho ends below density_floor and NumericalBlowup on non-finite values.
State step(const State& s, double dt, const ModelParams& p, const StepConfig& c);

enum class RunStatus { Completed, Blowup, PositivityLost };
const char* to_string(RunStatus s);

struct RunResult {
    State final;
    std::vector<DiagnosticsRecord> records;
    /// Running time integrals of every Integral entry, one per record.
    std::vector<IntegralArray> integrals;
    RunStatus status = RunStatus::Completed;
    std::string message;
    long steps = 0;
    double dt_min = 0.0;
    double dt_max = 0.0;
};

using CheckpointSink = std::function<void(const State&)>;

/// Integrates to c.t_end, sampling at t = 0, every sample_every, and at the
/// final time. Step errors end the run with the matching status; records up
/// to the failure are kept.
RunResult run(const State& s0, const ModelParams& p, const StepConfig& c, const DiagnosticsSuite& diag,
              const CheckpointSink& checkpoint = {});

} // namespace twophase
