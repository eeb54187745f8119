#include "twophase/twophase.h"

#include <cstring>
#include <string>
#include <vector>

#include "twophase/errors.hpp"
#include "twophase/experiment.hpp"
#include "twophase/snapshot.hpp"

struct tp_config {
    twophase::ExperimentConfig cfg;
};

struct tp_state {
    twophase::State state;
    twophase::RawInitialData reference;
};

namespace {

thread_local std::string g_last_error;

tp_status status_of(twophase::ErrorCode code) {
    using twophase::ErrorCode;
    switch (code) {
    case ErrorCode::InvalidArgument: return TP_ERR_INVALID_ARGUMENT;
    case ErrorCode::Positivity: return TP_ERR_POSITIVITY;
    case ErrorCode::NumericalBlowup: return TP_ERR_NUMERICAL_BLOWUP;
    case ErrorCode::DegenerateDensity: return TP_ERR_DEGENERATE_DENSITY;
    case ErrorCode::ConstraintViolation: return TP_ERR_CONSTRAINT_VIOLATION;
    case ErrorCode::VacuumMismatch: return TP_ERR_VACUUM_MISMATCH;
    case ErrorCode::ZeroMass: return TP_ERR_ZERO_MASS;
    case ErrorCode::Config: return TP_ERR_CONFIG;
    case ErrorCode::Io: return TP_ERR_IO;
    }
    return TP_ERR_INTERNAL;
}

tp_status fail(tp_status st, const std::string& msg) {
    g_last_error = msg;
    return st;
}

template <typename F>
tp_status guarded(F&& f) {
    try {
        g_last_error.clear();
        return f();
    } catch (const twophase::Error& e) {
        return fail(status_of(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(TP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(TP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(TP_ERR_INTERNAL, "unknown error");
    }
}

tp_status copy_out(const std::string& s, char* buf, size_t cap, size_t* len) {
    if (len) *len = s.size();
    if (!buf || cap <= s.size())
        return fail(TP_ERR_BUFFER_TOO_SMALL, "buffer of " + std::to_string(cap) + " bytes is too small for " +
                                                 std::to_string(s.size() + 1));
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return TP_OK;
}

std::vector<std::string> collect(const char* const* items, size_t n) {
    std::vector<std::string> out;
    for (size_t k = 0; k < n; ++k) {
        if (!items || !items[k]) throw twophase::Error(twophase::ErrorCode::InvalidArgument, "null string in list");
        out.emplace_back(items[k]);
    }
    return out;
}

// Runs an experiment entry point, mapping configuration errors to exit 2 and
// every other failure to exit 1.
template <typename F>
tp_status experiment(int* exit_code, F&& f) {
    if (!exit_code) return fail(TP_ERR_INVALID_ARGUMENT, "exit_code must not be null");
    *exit_code = 1;
    const tp_status st = guarded([&] {
        *exit_code = f();
        return TP_OK;
    });
    if (st == TP_ERR_CONFIG) *exit_code = 2;
    return st;
}

} // namespace

extern "C" {

const char* tp_version(void) { return "1.0.0"; }

const char* tp_status_name(tp_status status) {
    switch (status) {
    case TP_OK: return "ok";
    case TP_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case TP_ERR_POSITIVITY: return "positivity";
    case TP_ERR_NUMERICAL_BLOWUP: return "numerical-blowup";
    case TP_ERR_DEGENERATE_DENSITY: return "degenerate-density";
    case TP_ERR_CONSTRAINT_VIOLATION: return "constraint-violation";
    case TP_ERR_VACUUM_MISMATCH: return "vacuum-mismatch";
    case TP_ERR_ZERO_MASS: return "zero-mass";
    case TP_ERR_CONFIG: return "config";
    case TP_ERR_IO: return "io";
    case TP_ERR_BUFFER_TOO_SMALL: return "buffer-too-small";
    case TP_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* tp_last_error_message(void) { return g_last_error.c_str(); }

tp_status tp_config_from_file(const char* path, const char* const* overrides, size_t n_overrides, tp_config** out) {
    if (!path || !out) return fail(TP_ERR_INVALID_ARGUMENT, "path and out must not be null");
    *out = nullptr;
    return guarded([&] {
        *out = new tp_config{twophase::load_config(path, collect(overrides, n_overrides))};
        return TP_OK;
    });
}

tp_status tp_config_from_string(const char* text, const char* const* overrides, size_t n_overrides,
                                tp_config** out) {
    if (!text || !out) return fail(TP_ERR_INVALID_ARGUMENT, "text and out must not be null");
    *out = nullptr;
    return guarded([&] {
        *out = new tp_config{twophase::parse_config(text, collect(overrides, n_overrides))};
        return TP_OK;
    });
}

void tp_config_destroy(tp_config* cfg) { delete cfg; }

tp_status tp_config_resolved_json(const tp_config* cfg, char* buf, size_t cap, size_t* len) {
    if (!cfg) return fail(TP_ERR_INVALID_ARGUMENT, "cfg must not be null");
    return guarded([&] { return copy_out(twophase::config_to_json(cfg->cfg), buf, cap, len); });
}

tp_status tp_config_output_dir(const tp_config* cfg, char* buf, size_t cap, size_t* len) {
    if (!cfg) return fail(TP_ERR_INVALID_ARGUMENT, "cfg must not be null");
    return guarded([&] { return copy_out(cfg->cfg.outputs, buf, cap, len); });
}

int tp_config_has_sweep(const tp_config* cfg) { return cfg && cfg->cfg.sweep ? 1 : 0; }

tp_status tp_run_single(const tp_config* cfg, const char* out_dir, int quiet, int* exit_code) {
    if (!cfg) return fail(TP_ERR_INVALID_ARGUMENT, "cfg must not be null");
    return experiment(exit_code, [&] { return twophase::run_single(cfg->cfg, out_dir ? out_dir : "", quiet != 0); });
}

tp_status tp_run_sweep(const tp_config* cfg, const char* out_dir, int quiet, int* exit_code) {
    if (!cfg) return fail(TP_ERR_INVALID_ARGUMENT, "cfg must not be null");
    return experiment(exit_code, [&] { return twophase::run_sweep(cfg->cfg, out_dir ? out_dir : "", quiet != 0); });
}

tp_status tp_check_init(const tp_config* cfg, const char* out_dir, int quiet, int* exit_code) {
    if (!cfg) return fail(TP_ERR_INVALID_ARGUMENT, "cfg must not be null");
    return experiment(exit_code, [&] { return twophase::check_init(cfg->cfg, out_dir ? out_dir : "", quiet != 0); });
}

tp_status tp_report(const char* const* paths, size_t count, char* buf, size_t cap, size_t* len, int* exit_code) {
    if (!exit_code) return fail(TP_ERR_INVALID_ARGUMENT, "exit_code must not be null");
    return guarded([&] {
        const twophase::Report rep = twophase::make_report(collect(paths, count));
        *exit_code = rep.exit_code;
        return copy_out(rep.text, buf, cap, len);
    });
}

tp_status tp_state_from_config(const tp_config* cfg, tp_state** out) {
    if (!cfg || !out) return fail(TP_ERR_INVALID_ARGUMENT, "cfg and out must not be null");
    *out = nullptr;
    return guarded([&] {
        twophase::PreparedRun p = twophase::prepare_initial(cfg->cfg);
        *out = new tp_state{std::move(p.initial), std::move(p.reference)};
        return TP_OK;
    });
}

tp_status tp_state_read_snapshot(const char* path, tp_state** out) {
    if (!path || !out) return fail(TP_ERR_INVALID_ARGUMENT, "path and out must not be null");
    *out = nullptr;
    return guarded([&] {
        twophase::State s = twophase::read_snapshot(std::string(path));
        twophase::RawInitialData ref = twophase::raw_from_state(s);
        *out = new tp_state{std::move(s), std::move(ref)};
        return TP_OK;
    });
}

tp_status tp_state_write_snapshot(const tp_state* s, const char* path) {
    if (!s || !path) return fail(TP_ERR_INVALID_ARGUMENT, "s and path must not be null");
    return guarded([&] {
        twophase::write_snapshot(std::string(path), s->state);
        return TP_OK;
    });
}

void tp_state_destroy(tp_state* s) { delete s; }

int tp_state_dim(const tp_state* s) { return s ? s->state.grid().dim() : 0; }

int tp_state_points_per_axis(const tp_state* s) { return s ? s->state.grid().points_per_axis() : 0; }

double tp_state_time(const tp_state* s) { return s ? s->state.t : 0.0; }

tp_status tp_state_field(const tp_state* s, const char* name, double* out, size_t cap, size_t* len) {
    if (!s || !name) return fail(TP_ERR_INVALID_ARGUMENT, "s and name must not be null");
    return guarded([&]() -> tp_status {
        const twophase::State& st = s->state;
        const std::string key(name);
        const twophase::ScalarField* f = nullptr;
        if (key == "n") f = &st.n;
        if (key == "rho") f = &st.rho;
        for (int i = 0; i < st.grid().dim(); ++i) {
            if (key == "v." + std::to_string(i)) f = &st.v[i];
            if (key == "u." + std::to_string(i)) f = &st.u[i];
        }
        if (!f) return fail(TP_ERR_INVALID_ARGUMENT, "unknown field \"" + key + "\"");
        if (len) *len = f->size();
        if (!out || cap < f->size()) return fail(TP_ERR_BUFFER_TOO_SMALL, "output array too small");
        std::copy(f->values().begin(), f->values().end(), out);
        return TP_OK;
    });
}

tp_status tp_state_stable_dt(const tp_state* s, const tp_config* cfg, double* dt) {
    if (!s || !cfg || !dt) return fail(TP_ERR_INVALID_ARGUMENT, "s, cfg and dt must not be null");
    return guarded([&] {
        *dt = twophase::stable_dt(s->state, cfg->cfg.params, cfg->cfg.step);
        return TP_OK;
    });
}

tp_status tp_state_step(tp_state* s, const tp_config* cfg, double dt) {
    if (!s || !cfg) return fail(TP_ERR_INVALID_ARGUMENT, "s and cfg must not be null");
    return guarded([&] {
        s->state = twophase::step(s->state, dt, cfg->cfg.params, cfg->cfg.step);
        return TP_OK;
    });
}

tp_status tp_state_diagnostics(const tp_state* s, const tp_config* cfg, tp_diagnostics* out) {
    if (!s || !cfg || !out) return fail(TP_ERR_INVALID_ARGUMENT, "s, cfg and out must not be null");
    return guarded([&] {
        const twophase::DiagnosticsSuite diag(cfg->cfg.params, s->reference, cfg->cfg.p_exp);
        const twophase::DiagnosticsRecord r = diag.sample(s->state);
        *out = tp_diagnostics{};
        out->t = r.t;
        out->E = r.E;
        out->E_tilde = r.E_tilde;
        out->D = r.D;
        out->BD = r.BD;
        out->MV = r.MV;
        out->mass_n = r.mass_n;
        out->mass_rho = r.mass_rho;
        for (std::size_t i = 0; i < r.momentum_total.size() && i < 3; ++i) out->momentum[i] = r.momentum_total[i];
        out->n_min = r.n_min;
        out->n_max = r.n_max;
        out->rho_min = r.rho_min;
        out->rho_max = r.rho_max;
        out->dist_eq = r.dist_eq;
        out->rho_gamma_plus1 = r.rho_gamma_plus1;
        out->rho_hi = r.rho_hi;
        return TP_OK;
    });
}

} // extern "C"
