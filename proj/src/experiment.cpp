#include "twophase/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "twophase/errors.hpp"
#include "twophase/snapshot.hpp"

namespace twophase {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- config

std::string where(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(where(path_, key) + ": expected a number");
        return v.get<double>();
    }

    long long integer(const std::string& key, long long fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (v.is_number_integer()) return v.get<long long>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
        }
        throw ConfigError(where(path_, key) + ": expected an integer");
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(where(path_, key) + ": expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(where(path_, key) + ": expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(where(path_, key) + ": expected an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(where(path_, key) + ": expected an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        return Section(j_.at(key), where(path_, key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where(path_, it.key()) + ": unknown key");
    }

    const std::string& path() const { return path_; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::ostringstream os;
        os << what << ": parse error at line " << line << ", column " << col << ": " << e.what();
        throw ConfigError(os.str());
    }
}

void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override \"" + assignment + "\": expected key.path=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override \"" + assignment + "\": empty key segment");
        if (!node->is_object()) throw ConfigError("override \"" + assignment + "\": " + key.substr(0, start) + " is not an object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        if (!node->contains(part)) (*node)[part] = json::object();
        node = &(*node)[part];
        start = dot + 1;
    }
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

ExperimentConfig config_from_json(const json& root, const std::string& base_dir) {
    ExperimentConfig cfg;
    Section top(root, "");
    const long long version = top.integer("schema_version", -1);
    require(version == kSchemaVersion, "schema_version: expected " + std::to_string(kSchemaVersion));

    if (top.has("grid")) {
        Section s = top.child("grid");
        const long long dim = s.integer("dim", 1);
        const long long n = s.integer("N", 64);
        require(dim >= 1 && dim <= 3, "grid.dim: must be 1, 2 or 3");
        require(n >= 8 && n <= 4096, "grid.N: must lie in [8, 4096]");
        s.finish();
        cfg.grid = PeriodicGrid(static_cast<int>(dim), static_cast<int>(n));
    }

    if (top.has("params")) {
        Section s = top.child("params");
        ModelParams& p = cfg.params;
        p.kappa = s.number("kappa", p.kappa);
        p.eta = s.number("eta", p.eta);
        p.mu = s.number("mu", p.mu);
        p.lambda = s.number("lambda", p.lambda);
        p.A = s.number("A", p.A);
        p.gamma = s.number("gamma", p.gamma);
        p.gamma0 = s.number("gamma0", p.gamma0);
        p.eps = s.number("eps", p.eps);
        p.delta = s.number("delta", p.delta);
        s.finish();
    }
    try {
        cfg.params.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }

    if (top.has("step")) {
        Section s = top.child("step");
        StepConfig& c = cfg.step;
        c.scheme = scheme_from_string(s.string("scheme", to_string(c.scheme)));
        c.cfl = s.number("cfl", c.cfl);
        c.dt_max = s.number("dt_max", c.dt_max);
        c.density_floor = s.number("density_floor", c.density_floor);
        c.t_end = s.number("t_end", c.t_end);
        c.sample_every = s.number("sample_every", c.sample_every);
        c.checkpoint_every = s.number("checkpoint_every", c.checkpoint_every);
        c.solver_tolerance = s.number("solver_tolerance", c.solver_tolerance);
        c.solver_max_iterations = static_cast<int>(s.integer("solver_max_iterations", c.solver_max_iterations));
        c.rhs.degenerate_floor = s.number("degenerate_floor", c.rhs.degenerate_floor);
        s.finish();
    }
    cfg.step.validate();

    cfg.seed = static_cast<std::uint64_t>(top.integer("seed", 0));
    require(top.integer("seed", 0) >= 0, "seed: must be nonnegative");

    if (top.has("initial")) {
        Section s = top.child("initial");
        GeneratorSpec& g = cfg.initial.generator;
        const bool has_gen = s.has("generator");
        cfg.initial.snapshot = s.string("snapshot", "");
        require(!(has_gen && !cfg.initial.snapshot.empty()), "initial: give either generator or snapshot, not both");
        g.name = s.string("generator", g.name);
        g.amplitude = s.number("amplitude", g.amplitude);
        g.mode = static_cast<int>(s.integer("mode", g.mode));
        g.n_bar = s.number("n_bar", g.n_bar);
        g.rho_bar = s.number("rho_bar", g.rho_bar);
        for (const char* key : {"v_bar", "u_bar"}) {
            const auto vals = s.numbers(key, {});
            if (vals.empty()) continue;
            require(vals.size() == static_cast<std::size_t>(cfg.grid.dim()),
                    std::string("initial.") + key + ": expected grid.dim entries");
            auto& dst = std::string(key) == "v_bar" ? g.v_bar : g.u_bar;
            std::copy(vals.begin(), vals.end(), dst.begin());
        }
        g.vacuum = s.boolean("vacuum", g.vacuum);
        g.width = s.number("width", g.width);
        g.cutoff_mode = static_cast<int>(s.integer("cutoff_mode", g.cutoff_mode));
        g.eta0 = s.number("eta0", g.eta0);
        cfg.initial.regularize = s.boolean("regularize", false);
        s.finish();
    }
    cfg.initial.generator.seed = cfg.seed;
    {
        const auto& g = cfg.initial.generator;
        static const std::set<std::string> names{"equilibrium", "sine-perturbation", "two-bump", "random-smooth"};
        require(names.count(g.name) == 1,
                "initial.generator: unknown generator \"" + g.name +
                    "\" (expected equilibrium, sine-perturbation, two-bump or random-smooth)");
        require(g.eta0 > 0.0, "initial.eta0: must be positive");
    }
    if (!cfg.initial.snapshot.empty()) {
        fs::path p(cfg.initial.snapshot);
        if (p.is_relative()) p = fs::path(base_dir) / p;
        require(fs::exists(p), "initial.snapshot: file " + p.string() + " does not exist");
        cfg.initial.snapshot = p.string();
    }
    require(!cfg.initial.regularize || cfg.params.delta > 0.0, "initial.regularize: needs params.delta > 0");

    if (top.has("sweep")) {
        Section s = top.child("sweep");
        SweepSpec sw;
        sw.axis = s.string("axis", "");
        require(sw.axis == "eps" || sw.axis == "delta", "sweep.axis: must be eps or delta");
        sw.values = s.numbers("values", {});
        require(!sw.values.empty(), "sweep.values: must be a non-empty array");
        for (std::size_t k = 0; k < sw.values.size(); ++k) {
            require(sw.values[k] >= 0.0, "sweep.values: entries must be nonnegative");
            if (k > 0) require(sw.values[k] < sw.values[k - 1], "sweep.values: must be strictly decreasing");
            ModelParams p = cfg.params;
            (sw.axis == "eps" ? p.eps : p.delta) = sw.values[k];
            try {
                p.validate();
            } catch (const ConfigError& e) {
                throw ConfigError(std::string("sweep.values: ") + e.what());
            }
        }
        s.finish();
        cfg.sweep = sw;
    }

    if (top.has("outputs")) {
        Section s = top.child("outputs");
        cfg.outputs = s.string("directory", cfg.outputs);
        s.finish();
    }

    if (top.has("diagnostics")) {
        Section s = top.child("diagnostics");
        cfg.p_exp = s.number("p_exp", cfg.p_exp);
        s.finish();
    }
    require(cfg.p_exp >= 1.0 && cfg.p_exp < 3.0, "diagnostics.p_exp: must lie in [1, 3)");

    if (top.has("checks")) {
        Section s = top.child("checks");
        CheckSettings& k = cfg.checks;
        k.c1 = s.number("c1", k.c1);
        k.c2 = s.number("c2", k.c2);
        k.mass_tolerance = s.number("mass_tolerance", k.mass_tolerance);
        k.momentum_tolerance = s.number("momentum_tolerance", k.momentum_tolerance);
        k.mv_cap = s.number("mv_cap", k.mv_cap);
        k.positivity_floor = s.number("positivity_floor", k.positivity_floor);
        k.budget_factor = s.number("budget_factor", k.budget_factor);
        k.decay_factor = s.number("decay_factor", k.decay_factor);
        s.finish();
        for (double x : {k.c1, k.c2, k.mass_tolerance, k.momentum_tolerance, k.mv_cap, k.positivity_floor,
                         k.budget_factor, k.decay_factor})
            require(x >= 0.0 && std::isfinite(x), "checks: every entry must be finite and nonnegative");
    }

    top.finish();
    return cfg;
}

json params_json(const ModelParams& p) {
    return json{{"kappa", p.kappa}, {"eta", p.eta},       {"mu", p.mu},   {"lambda", p.lambda}, {"A", p.A},
                {"gamma", p.gamma}, {"gamma0", p.gamma0}, {"eps", p.eps}, {"delta", p.delta}};
}

json config_json(const ExperimentConfig& cfg) {
    const int d = cfg.grid.dim();
    const auto& g = cfg.initial.generator;
    json initial;
    if (cfg.initial.snapshot.empty()) {
        initial["generator"] = g.name;
    } else {
        initial["snapshot"] = cfg.initial.snapshot;
    }
    initial["amplitude"] = g.amplitude;
    initial["mode"] = g.mode;
    initial["n_bar"] = g.n_bar;
    initial["rho_bar"] = g.rho_bar;
    initial["v_bar"] = std::vector<double>(g.v_bar.begin(), g.v_bar.begin() + d);
    initial["u_bar"] = std::vector<double>(g.u_bar.begin(), g.u_bar.begin() + d);
    initial["vacuum"] = g.vacuum;
    initial["width"] = g.width;
    initial["cutoff_mode"] = g.cutoff_mode;
    initial["eta0"] = g.eta0;
    initial["regularize"] = cfg.initial.regularize;

    const StepConfig& c = cfg.step;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["grid"] = {{"dim", d}, {"N", cfg.grid.points_per_axis()}};
    j["params"] = params_json(cfg.params);
    j["step"] = {{"scheme", to_string(c.scheme)},
                 {"cfl", c.cfl},
                 {"dt_max", c.dt_max},
                 {"density_floor", c.density_floor},
                 {"t_end", c.t_end},
                 {"sample_every", c.sample_every},
                 {"checkpoint_every", c.checkpoint_every},
                 {"solver_tolerance", c.solver_tolerance},
                 {"solver_max_iterations", c.solver_max_iterations},
                 {"degenerate_floor", c.rhs.degenerate_floor}};
    j["initial"] = initial;
    if (cfg.sweep) j["sweep"] = {{"axis", cfg.sweep->axis}, {"values", cfg.sweep->values}};
    j["outputs"] = {{"directory", cfg.outputs}};
    j["seed"] = cfg.seed;
    j["diagnostics"] = {{"p_exp", cfg.p_exp}};
    const CheckSettings& k = cfg.checks;
    j["checks"] = {{"c1", k.c1},
                   {"c2", k.c2},
                   {"mass_tolerance", k.mass_tolerance},
                   {"momentum_tolerance", k.momentum_tolerance},
                   {"mv_cap", k.mv_cap},
                   {"positivity_floor", k.positivity_floor},
                   {"budget_factor", k.budget_factor},
                   {"decay_factor", k.decay_factor}};
    return j;
}

// ---------------------------------------------------------------- output

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Short form for names and messages.
std::string label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

std::vector<double> record_values(const DiagnosticsRecord& r) {
    std::vector<double> v{r.t, r.E, r.E_tilde, r.D, r.BD, r.MV, r.mass_n, r.mass_rho};
    v.insert(v.end(), r.momentum_total.begin(), r.momentum_total.end());
    for (double x : {r.n_min, r.n_max, r.rho_min, r.rho_max, r.dist_eq, r.rho_gamma_plus1, r.rho_hi}) v.push_back(x);
    return v;
}

json record_json(const DiagnosticsRecord& r) {
    const auto names = csv_header(static_cast<int>(r.momentum_total.size()));
    const auto vals = record_values(r);
    json j = json::object();
    for (std::size_t k = 0; k < names.size(); ++k) j[names[k]] = vals[k];
    return j;
}

json integrals_json(const IntegralArray& a) {
    json j = json::object();
    for (std::size_t k = 0; k < kIntegralCount; ++k) j[integral_name(static_cast<Integral>(k))] = a[k];
    return j;
}

json invariants_json(const std::vector<InvariantResult>& inv) {
    json arr = json::array();
    for (const auto& r : inv) {
        arr.push_back({{"name", r.name},
                       {"anchor", r.anchor},
                       {"enabled", r.enabled},
                       {"passed", r.passed},
                       {"value", r.value},
                       {"limit", r.limit},
                       {"detail", r.detail}});
    }
    return arr;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw IoError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string diagnostics_csv(const RunResult& r, int dim) {
    std::string out;
    const auto header = csv_header(dim);
    for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
    out += '\n';
    for (const auto& rec : r.records) out += csv_row(rec) + '\n';
    return out;
}

std::string integrals_csv(const RunResult& r) {
    std::string out = "t";
    for (std::size_t k = 0; k < kIntegralCount; ++k) out += std::string(",") + integral_name(static_cast<Integral>(k));
    out += '\n';
    for (std::size_t i = 0; i < r.records.size(); ++i) {
        out += fmt(r.records[i].t);
        for (double x : r.integrals[i]) out += "," + fmt(x);
        out += '\n';
    }
    return out;
}

InvariantResult make(const std::string& name, const std::string& anchor, bool enabled, double value, double limit,
                     std::string detail = {}) {
    InvariantResult r;
    r.name = name;
    r.anchor = anchor;
    r.enabled = enabled;
    r.value = value;
    r.limit = limit;
    r.passed = !enabled || (std::isfinite(value) && value <= limit);
    r.detail = std::move(detail);
    return r;
}

int exit_code_for(const RunResult& r, const std::vector<InvariantResult>& inv) {
    if (r.status != RunStatus::Completed) return 1;
    for (const auto& x : inv)
        if (x.enabled && !x.passed) return 1;
    return 0;
}

std::string axis_label(const std::string& axis) { return axis == "eps" ? "eps" : "delta"; }

} // namespace

// ---------------------------------------------------------------- public

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                              const std::string& base_dir) {
    json root = parse_json(text, "config");
    for (const auto& o : overrides) apply_override(root, o);
    try {
        return config_from_json(root, base_dir);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    const fs::path parent = fs::path(path).parent_path();
    try {
        return parse_config(ss.str(), overrides, parent.empty() ? "." : parent.string());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

PreparedRun prepare_initial(const ExperimentConfig& cfg) {
    const double eta0 = cfg.initial.generator.eta0;
    RawInitialData raw;
    double t0 = 0.0;
    if (!cfg.initial.snapshot.empty()) {
        const State s = read_snapshot(cfg.initial.snapshot);
        if (!(s.grid() == cfg.grid))
            throw ConfigError("initial.snapshot: grid of " + cfg.initial.snapshot + " does not match grid");
        raw = raw_from_state(s, eta0);
        t0 = s.t;
    } else {
        raw = generate(cfg.initial.generator, cfg.grid);
    }
    check_vacuum_compatibility(raw);

    PreparedRun out;
    if (cfg.initial.regularize) {
        const MollifierKernel j = build_mollifier(cfg.params.delta, cfg.grid, cfg.params.gamma0);
        out.initial = state_from_regularized(regularize(raw, cfg.params.delta, j));
    } else {
        out.initial = state_from_raw(raw);
    }
    out.initial.t = t0;
    out.reference = raw_from_state(out.initial, eta0);
    return out;
}

std::vector<InvariantResult> evaluate_invariants(const RunResult& r, const ExperimentConfig& cfg,
                                                 const State& initial) {
    std::vector<InvariantResult> out;
    const ModelParams& p = cfg.params;
    const CheckSettings& k = cfg.checks;
    const double h = cfg.grid.spacing();
    const double tol = k.c1 * r.dt_max + k.c2 * h * h;
    const bool original = p.original();
    const bool eps_zero = p.eps == 0.0;

    {
        InvariantResult st = make("run-completed", "solver reached t_end", true, 0.0, 0.0, r.message);
        st.passed = r.status == RunStatus::Completed;
        st.detail = std::string(to_string(r.status)) + (r.message.empty() ? "" : ": " + r.message);
        out.push_back(st);
    }
    if (r.records.empty()) return out;
    const DiagnosticsRecord& r0 = r.records.front();
    const std::size_t D = static_cast<std::size_t>(Integral::Dissipation);

    {
        bool finite = true;
        for (const auto& rec : r.records) finite = finite && rec.all_finite();
        InvariantResult f = make("finite-records", "every sampled functional finite", true, 0.0, 0.0);
        f.passed = finite;
        out.push_back(f);
    }

    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.records.size(); ++i)
        excess = std::max(excess, r.records[i].E + r.integrals[i][D] - r0.E);
    out.push_back(make("energy-inequality", "energy inequality E(t) + int D <= E(0)", original, excess, tol,
                       "max over samples of E + int D - E(0); tol = c1 dt + c2 h^2"));

    double rise = 0.0;
    for (std::size_t i = 1; i < r.records.size(); ++i)
        rise = std::max(rise, r.records[i].E_tilde - r.records[i - 1].E_tilde);
    out.push_back(make("modified-energy-monotone", "modified energy nonincreasing", original, rise, tol,
                       "max increase between consecutive samples"));

    auto drift = [&](auto get) {
        double m = 0.0;
        const double ref = std::abs(get(r0));
        for (const auto& rec : r.records) m = std::max(m, std::abs(get(rec) - get(r0)));
        return ref > 0.0 ? m / ref : m;
    };
    out.push_back(make("mass-n", "conservation of particle mass", eps_zero,
                       drift([](const DiagnosticsRecord& x) { return x.mass_n; }), k.mass_tolerance,
                       "relative drift of int n"));
    out.push_back(make("mass-rho", "conservation of fluid mass", true,
                       drift([](const DiagnosticsRecord& x) { return x.mass_rho; }), k.mass_tolerance,
                       "relative drift of int rho"));

    {
        // Scale: the larger of max |P_i(0)| and int (n|v| + rho|u|) at t = 0.
        double scale = 0.0;
        for (double x : r0.momentum_total) scale = std::max(scale, std::abs(x));
        const ScalarField v = norm_squared(initial.v);
        const ScalarField u = norm_squared(initial.u);
        ScalarField flux(initial.grid());
        for (std::size_t c = 0; c < flux.size(); ++c)
            flux[c] = initial.n[c] * std::sqrt(v[c]) + initial.rho[c] * std::sqrt(u[c]);
        scale = std::max(scale, integrate(flux));
        double m = 0.0;
        for (const auto& rec : r.records)
            for (std::size_t i = 0; i < rec.momentum_total.size(); ++i)
                m = std::max(m, std::abs(rec.momentum_total[i] - r0.momentum_total[i]));
        const double value = scale > 0.0 ? m / scale : m;
        out.push_back(make("momentum", "conservation of total momentum", eps_zero, value, k.momentum_tolerance,
                           "max drift of int (n v + rho u) relative to max(|P(0)|, int (n|v| + rho|u|)(0))"));
    }

    {
        double bd_max = 0.0;
        bool finite = true;
        for (const auto& rec : r.records) {
            finite = finite && std::isfinite(rec.BD);
            bd_max = std::max(bd_max, rec.BD);
        }
        InvariantResult b = make("bd-bounded", "BD entropy bounded", true, bd_max - r0.BD,
                                 std::numeric_limits<double>::max(), "C_run = max BD - BD(0)");
        b.passed = finite && std::isfinite(bd_max);
        out.push_back(b);
    }
    {
        double mv_max = 0.0;
        for (const auto& rec : r.records) mv_max = std::max(mv_max, std::isfinite(rec.MV) ? rec.MV : HUGE_VAL);
        out.push_back(make("mv-bounded", "Mellet-Vasseur functional bounded", true, mv_max, k.mv_cap,
                           "max MV over samples"));
    }
    {
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& rec : r.records) dmin = std::min(dmin, rec.D);
        out.push_back(make("dissipation-nonnegative", "dissipation rate nonnegative", p.lambda >= -p.mu, -dmin, 0.0,
                           "-min D over samples"));
    }
    {
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto& rec : r.records) lowest = std::min({lowest, rec.n_min, rec.rho_min});
        InvariantResult f = make("positivity-floor", "density lower bounds", !eps_zero, 0.0, 0.0,
                                 "min over samples of min n and min rho = " + fmt(lowest));
        f.value = lowest;
        f.limit = k.positivity_floor;
        f.passed = !f.enabled || lowest >= k.positivity_floor;
        out.push_back(f);
    }
    {
        const std::size_t S = static_cast<std::size_t>(Integral::MassSource);
        double worst = 0.0;
        for (std::size_t i = 0; i < r.records.size(); ++i)
            worst = std::max(worst, std::abs((r.records[i].mass_n - r0.mass_n) - r.integrals[i][S]));
        out.push_back(make("mass-budget", "regularized particle mass balance", !eps_zero, worst,
                           k.budget_factor * r.dt_max, "max |delta int n - int source| over samples"));
    }
    {
        const double ratio = r0.dist_eq > 0.0 ? r.records.back().dist_eq / r0.dist_eq : 0.0;
        out.push_back(make("equilibrium-decay", "convergence to the equilibrium state", k.decay_factor > 0.0, ratio,
                           k.decay_factor, "dist_eq(t_end) / dist_eq(0)"));
    }
    return out;
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const PreparedRun& prepared, const std::string& out_dir,
                          bool quiet) {
    const DiagnosticsSuite diag(cfg.params, prepared.reference, cfg.p_exp);
    fs::path dir;
    CheckpointSink sink;
    int checkpoint_count = 0;
    if (!out_dir.empty()) {
        dir = out_dir;
        ensure_dir(dir);
        if (cfg.step.checkpoint_every > 0.0) {
            ensure_dir(dir / "checkpoints");
            sink = [&](const State& s) {
                char name[48];
                std::snprintf(name, sizeof name, "checkpoint_%04d.snap", ++checkpoint_count);
                write_snapshot((dir / "checkpoints" / name).string(), s);
            };
        }
    }

    RunOutcome o;
    o.result = run(prepared.initial, cfg.params, cfg.step, diag, sink);
    o.invariants = evaluate_invariants(o.result, cfg, prepared.initial);
    o.exit_code = exit_code_for(o.result, o.invariants);

    if (!quiet) {
        std::cout << "status " << to_string(o.result.status) << ", " << o.result.steps << " steps, t = "
                  << fmt(o.result.final.t) << '\n';
        for (const auto& x : o.invariants)
            std::cout << "  " << (x.enabled ? (x.passed ? "PASS" : "FAIL") : "n/a ") << "  " << x.name << '\n';
    }

    if (!out_dir.empty()) {
        const RunResult& r = o.result;
        write_text(dir / "diagnostics.csv", diagnostics_csv(r, cfg.grid.dim()));
        write_text(dir / "integrals.csv", integrals_csv(r));
        json s;
        s["schema_version"] = kSchemaVersion;
        s["kind"] = "run";
        s["config"] = config_json(cfg);
        s["status"] = to_string(r.status);
        s["message"] = r.message;
        s["exit_code"] = o.exit_code;
        s["steps"] = r.steps;
        s["dt_min"] = r.dt_min;
        s["dt_max"] = r.dt_max;
        const double h = cfg.grid.spacing();
        s["tolerance"] = {{"c1", cfg.checks.c1},
                          {"c2", cfg.checks.c2},
                          {"tol", cfg.checks.c1 * r.dt_max + cfg.checks.c2 * h * h}};
        const EquilibriumState& eq = diag.equilibrium_state();
        s["equilibrium"] = {{"n_c", eq.n_c}, {"rho_c", eq.rho_c}, {"u_c", eq.u_c}};
        if (!r.records.empty()) {
            s["initial_record"] = record_json(r.records.front());
            s["final_record"] = record_json(r.records.back());
            s["integrals"] = integrals_json(r.integrals.back());
        }
        s["checkpoints"] = checkpoint_count;
        s["invariants"] = invariants_json(o.invariants);
        write_text(dir / "summary.json", s.dump(2) + "\n");
    }
    return o;
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, bool quiet) {
    return run_experiment(cfg, prepare_initial(cfg), out_dir, quiet);
}

int run_single(const ExperimentConfig& cfg, const std::string& out_dir, bool quiet) {
    return run_experiment(cfg, out_dir, quiet).exit_code;
}

std::vector<Integral> sweep_trend_columns(const std::string& axis) {
    if (axis == "eps")
        return {Integral::EpsNGradV2, Integral::EpsNV5,  Integral::EpsRootTerms, Integral::EpsN12V2,
                Integral::Eps2N25,    Integral::EpsU10, Integral::EpsGradRho2,  Integral::EpsPressureGradRho};
    return {Integral::DeltaRhoGamma0, Integral::DeltaRhoGamma0Plus1, Integral::DeltaRhoHi};
}

SweepOutcome run_sweep_experiment(const ExperimentConfig& cfg, const std::string& out_dir, bool quiet) {
    if (!cfg.sweep) throw ConfigError("sweep: the configuration has no sweep section");
    const SweepSpec& sw = *cfg.sweep;
    const PreparedRun prepared = prepare_initial(cfg);

    SweepOutcome o;
    o.values = sw.values;
    for (std::size_t k = 0; k < sw.values.size(); ++k) {
        ExperimentConfig member = cfg;
        member.sweep.reset();
        (sw.axis == "eps" ? member.params.eps : member.params.delta) = sw.values[k];
        std::string dir;
        if (!out_dir.empty()) {
            char name[48];
            std::snprintf(name, sizeof name, "%s_%02zu", axis_label(sw.axis).c_str(), k);
            dir = (fs::path(out_dir) / name).string();
        }
        if (!quiet) std::cout << sw.axis << " = " << label(sw.values[k]) << '\n';
        o.members.push_back(run_experiment(member, prepared, dir, quiet));
    }

    const std::string anchor =
        sw.axis == "eps" ? "vanishing artificial viscosity" : "vanishing artificial pressure";
    for (Integral col : sweep_trend_columns(sw.axis)) {
        const std::size_t c = static_cast<std::size_t>(col);
        InvariantResult t;
        t.name = std::string("trend:") + integral_name(col);
        t.anchor = anchor;
        t.limit = 0.0;
        double worst = -std::numeric_limits<double>::infinity();
        bool ok = true;
        for (std::size_t k = 1; k < o.members.size(); ++k) {
            const double a = o.members[k - 1].result.integrals.back()[c];
            const double b = o.members[k].result.integrals.back()[c];
            worst = std::max(worst, b - a);
            const bool both_zero = a == 0.0 && b == 0.0;
            ok = ok && std::isfinite(a) && std::isfinite(b) && (b < a || both_zero);
        }
        t.value = o.members.size() > 1 ? worst : 0.0;
        t.passed = ok;
        t.detail = "largest successive difference along decreasing " + sw.axis;
        o.trends.push_back(t);
    }

    o.exit_code = 0;
    for (const auto& m : o.members) o.exit_code = std::max(o.exit_code, m.exit_code);
    for (const auto& t : o.trends)
        if (!t.passed) o.exit_code = 1;

    if (!quiet)
        for (const auto& t : o.trends) std::cout << "  " << (t.passed ? "PASS" : "FAIL") << "  " << t.name << '\n';

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        std::string csv = axis_label(sw.axis) + ",status,exit_code";
        for (const auto& h : csv_header(cfg.grid.dim())) csv += "," + h;
        for (std::size_t k = 0; k < kIntegralCount; ++k) csv += std::string(",int_") + integral_name(static_cast<Integral>(k));
        csv += '\n';
        for (std::size_t k = 0; k < o.members.size(); ++k) {
            const RunResult& r = o.members[k].result;
            csv += fmt(o.values[k]) + "," + to_string(r.status) + "," + std::to_string(o.members[k].exit_code);
            for (double x : record_values(r.records.back())) csv += "," + fmt(x);
            for (double x : r.integrals.back()) csv += "," + fmt(x);
            csv += '\n';
        }
        write_text(fs::path(out_dir) / "sweep.csv", csv);

        json s;
        s["schema_version"] = kSchemaVersion;
        s["kind"] = "sweep";
        s["config"] = config_json(cfg);
        s["axis"] = sw.axis;
        s["values"] = sw.values;
        json members = json::array();
        for (const auto& m : o.members)
            members.push_back({{"status", to_string(m.result.status)}, {"exit_code", m.exit_code}});
        s["members"] = members;
        s["exit_code"] = o.exit_code;
        std::vector<InvariantResult> all = o.trends;
        for (std::size_t k = 0; k < o.members.size(); ++k) {
            InvariantResult m;
            m.name = "member:" + axis_label(sw.axis) + "=" + label(o.values[k]);
            m.anchor = "member run passes its own invariants";
            m.passed = o.members[k].exit_code == 0;
            all.push_back(m);
        }
        s["invariants"] = invariants_json(all);
        write_text(fs::path(out_dir) / "sweep_summary.json", s.dump(2) + "\n");
    }
    return o;
}

int run_sweep(const ExperimentConfig& cfg, const std::string& out_dir, bool quiet) {
    return run_sweep_experiment(cfg, out_dir, quiet).exit_code;
}

Report make_report(const std::vector<std::string>& paths) {
    struct Row {
        std::string path;
        std::string status;
        std::map<std::string, std::string> cells;
    };
    std::vector<Row> rows;
    std::vector<std::string> columns;
    std::map<std::string, std::string> anchors;
    Report rep;

    for (const auto& path : paths) {
        Row row{path, "SKIPPED", {}};
        std::ifstream is(path, std::ios::binary);
        json s;
        bool ok = static_cast<bool>(is);
        if (ok) {
            try {
                is >> s;
                ok = s.is_object() && s.contains("invariants") && s["invariants"].is_array();
            } catch (const json::exception&) {
                ok = false;
            }
        }
        if (ok) {
            const int code = s.value("exit_code", 1);
            rep.exit_code = std::max(rep.exit_code, code);
            row.status = code == 0 ? "PASS" : "FAIL";
            for (const auto& inv : s["invariants"]) {
                const std::string name = inv.value("name", "?");
                if (!anchors.count(name)) {
                    anchors[name] = inv.value("anchor", "");
                    columns.push_back(name);
                }
                const bool enabled = inv.value("enabled", true);
                row.cells[name] = !enabled ? "n/a" : (inv.value("passed", false) ? "PASS" : "FAIL");
            }
        }
        rows.push_back(std::move(row));
    }

    std::ostringstream os;
    os << "# Invariant report\n\n";
    os << "| summary | result |";
    for (const auto& c : columns) os << ' ' << c << " |";
    os << "\n|---|---|";
    for (std::size_t k = 0; k < columns.size(); ++k) os << "---|";
    os << '\n';
    for (const auto& r : rows) {
        os << "| " << r.path << " | " << r.status << " |";
        for (const auto& c : columns) {
            auto it = r.cells.find(c);
            os << ' ' << (it == r.cells.end() ? (r.status == "SKIPPED" ? "SKIPPED" : "-") : it->second) << " |";
        }
        os << '\n';
    }
    if (!columns.empty()) {
        os << "\n| invariant | property |\n|---|---|\n";
        for (const auto& c : columns) os << "| " << c << " | " << anchors[c] << " |\n";
    }
    rep.text = os.str();
    return rep;
}

int check_init(const ExperimentConfig& cfg, const std::string& out_dir, bool quiet) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["kind"] = "check-init";
    out["config"] = config_json(cfg);
    std::vector<InvariantResult> inv;

    RawInitialData raw;
    if (!cfg.initial.snapshot.empty()) {
        const State s = read_snapshot(cfg.initial.snapshot);
        if (!(s.grid() == cfg.grid))
            throw ConfigError("initial.snapshot: grid of " + cfg.initial.snapshot + " does not match grid");
        raw = raw_from_state(s, cfg.initial.generator.eta0);
    } else {
        raw = generate(cfg.initial.generator, cfg.grid);
    }

    {
        InvariantResult v;
        v.name = "vacuum-compatibility";
        v.anchor = "momenta vanish on the vacuum set";
        try {
            check_vacuum_compatibility(raw);
        } catch (const VacuumMismatch& e) {
            v.passed = false;
            v.detail = e.what();
        }
        inv.push_back(v);
    }

    json kernels = json::array();
    for (double delta : {0.5, 0.1, 0.01, 0.001}) {
        InvariantResult m;
        m.name = "mollifier:delta=" + label(delta);
        m.anchor = "mollifier constraints";
        json k{{"delta", delta}};
        try {
            const MollifierKernel j = build_mollifier(delta, cfg.grid, cfg.params.gamma0);
            k["width"] = j.width;
            k["max"] = j.values.max();
            k["sup_bound"] = j.sup_bound;
            k["mass_error"] = j.mass_error;
            k["gradient_constant"] = j.witnessed_gradient_constant;
            m.value = j.witnessed_gradient_constant;
            m.limit = kMollifierGradientConstant;
        } catch (const ConstraintViolation& e) {
            m.passed = false;
            m.detail = e.what();
            k["error"] = e.what();
        }
        kernels.push_back(k);
        inv.push_back(m);
    }
    out["mollifiers"] = kernels;

    const bool smooth_positive = raw.n0.min() > 0.0 && raw.rho0.min() > 0.0;
    std::vector<InitialDataDistances> dist;
    json seq = json::array();
    bool energies_finite = true;
    for (double delta : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
        json e{{"delta", delta}};
        try {
            const MollifierKernel j = build_mollifier(delta, cfg.grid, cfg.params.gamma0);
            const RegularizedInitialData reg = regularize(raw, delta, j);
            ModelParams p = cfg.params;
            p.delta = delta;
            const InitialDataDistances d = initial_data_distances(raw, reg, p.gamma);
            const double energy0 = initial_energy(reg, p);
            energies_finite = energies_finite && std::isfinite(energy0);
            e["initial_energy"] = energy0;
            e["n_L1"] = d.n_L1;
            e["grad_sqrt_n_L2"] = d.grad_sqrt_n_L2;
            e["n_v2_L1"] = d.n_v2_L1;
            e["rho_Lgamma"] = d.rho_Lgamma;
            e["rho_u2_L1"] = d.rho_u2_L1;
            e["n_v_high_L1"] = d.n_v_high_L1;
            e["min_n0d"] = reg.n0d.min();
            e["min_rho0d"] = reg.rho0d.min();
            dist.push_back(d);
        } catch (const Error& err) {
            e["error"] = err.what();
            energies_finite = false;
        }
        seq.push_back(e);
    }
    out["delta_sequence"] = seq;

    {
        InvariantResult e;
        e.name = "initial-energy-bounded";
        e.anchor = "regularized initial energy bounded";
        e.passed = energies_finite && dist.size() == 5;
        inv.push_back(e);
    }
    using Getter = double (*)(const InitialDataDistances&);
    const std::pair<const char*, Getter> tracked[] = {
        {"n_L1", [](const InitialDataDistances& d) { return d.n_L1; }},
        {"grad_sqrt_n_L2", [](const InitialDataDistances& d) { return d.grad_sqrt_n_L2; }},
        {"n_v2_L1", [](const InitialDataDistances& d) { return d.n_v2_L1; }},
        {"rho_Lgamma", [](const InitialDataDistances& d) { return d.rho_Lgamma; }},
        {"rho_u2_L1", [](const InitialDataDistances& d) { return d.rho_u2_L1; }},
    };
    for (const auto& [name, get] : tracked) {
        InvariantResult t;
        t.name = std::string("distance-trend:") + name;
        t.anchor = "regularized data converge to the raw data";
        t.enabled = smooth_positive;
        bool ok = dist.size() == 5;
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < dist.size(); ++k) {
            worst = std::max(worst, get(dist[k]) - get(dist[k - 1]));
            const bool both_zero = get(dist[k]) == 0.0 && get(dist[k - 1]) == 0.0;
            ok = ok && (get(dist[k]) < get(dist[k - 1]) || both_zero);
        }
        t.value = worst;
        t.passed = !t.enabled || ok;
        t.detail = smooth_positive ? "largest successive change along delta halvings"
                                   : "reported only: raw data not strictly positive";
        inv.push_back(t);
    }

    int code = 0;
    for (const auto& x : inv)
        if (x.enabled && !x.passed) code = 1;
    out["exit_code"] = code;
    out["invariants"] = invariants_json(inv);

    if (!quiet)
        for (const auto& x : inv)
            std::cout << "  " << (x.enabled ? (x.passed ? "PASS" : "FAIL") : "n/a ") << "  " << x.name << '\n';
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_text(fs::path(out_dir) / "init_check.json", out.dump(2) + "\n");
    }
    return code;
}

} // namespace twophase
