#include <doctest.h>

#include <cstring>

#include "support.hpp"
#include "twophase/errors.hpp"
#include "twophase/init_data.hpp"
#include "twophase/integrator.hpp"

using namespace twophase;
using testing::kTwoPi;

namespace {

State constant_state(const PeriodicGrid& g, double n, double rho, double vel) {
    return State{ScalarField(g, n), VectorField(g, vel), ScalarField(g, rho), VectorField(g, vel), 0.0};
}

double state_diff(const State& a, const State& b) {
    double m = std::max(testing::max_diff(a.n, b.n), testing::max_diff(a.rho, b.rho));
    for (int i = 0; i < a.grid().dim(); ++i)
        m = std::max({m, testing::max_diff(a.v[i], b.v[i]), testing::max_diff(a.u[i], b.u[i])});
    return m;
}

State advance(State s, double dt, double t_end, const ModelParams& p, const StepConfig& c) {
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int k = 0; k < steps; ++k) s = step(s, dt, p, c);
    return s;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

TEST_CASE("scheme names") {
    for (Scheme s : {Scheme::ExplicitRK2, Scheme::ExplicitRK4, Scheme::Imex})
        CHECK(scheme_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(scheme_from_string("euler"), ConfigError);
}

TEST_CASE("step configuration validation") {
    StepConfig c;
    CHECK_NOTHROW(c.validate());
    c.cfl = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.dt_max = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.density_floor = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.sample_every = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("stable time step") {
    const PeriodicGrid g(1, 64);
    ModelParams p;
    p.mu = 1.0;
    p.lambda = 0.0;
    p.eta = 0.1;
    StepConfig c;
    c.cfl = 0.5;
    const double h = g.spacing();
    CHECK(stable_dt(constant_state(g, 1.0, 1.0, 0.0), p, c) == doctest::Approx(h * h / 4.0).epsilon(1e-14));

    c.dt_max = 1e-6;
    CHECK(stable_dt(constant_state(g, 1.0, 1.0, 0.0), p, c) == 1e-6);

    State bad = constant_state(g, 1.0, 1.0, 0.0);
    bad.rho[5] = std::nan("");
    CHECK(stable_dt(bad, p, c) == 0.0);
    bad.rho[5] = -1.0;
    CHECK(stable_dt(bad, p, c) == 0.0);
}

TEST_CASE("constant equilibrium is unchanged by a step") {
    const PeriodicGrid g(2, 16);
    ModelParams p;
    for (Scheme sc : {Scheme::ExplicitRK2, Scheme::ExplicitRK4, Scheme::Imex}) {
        StepConfig c;
        c.scheme = sc;
        const State s = constant_state(g, 1.5, 0.8, 0.25);
        const State t = step(s, 1e-3, p, c);
        CHECK(state_diff(s, t) <= 1e-14);
        CHECK(t.t == doctest::Approx(1e-3));
    }
}

TEST_CASE("density diffusion decays the Fourier mode") {
    const PeriodicGrid g(1, 128);
    ModelParams p;
    p.A = 1e-10;
    p.eps = 0.1;
    p.mu = 0.1;
    for (Scheme sc : {Scheme::ExplicitRK2, Scheme::Imex}) {
        StepConfig c;
        c.scheme = sc;
        c.t_end = 0.1;
        c.sample_every = 0.1;
        State s = constant_state(g, 1.0, 1.0, 0.0);
        s.rho = ScalarField::sample(g, [](const std::array<double, 3>& x) { return 1.0 + 0.1 * std::sin(kTwoPi * x[0]); });
        const DiagnosticsSuite diag(p, raw_from_state(s));
        const RunResult r = run(s, p, c, diag);
        REQUIRE(r.status == RunStatus::Completed);
        const ScalarField basis = ScalarField::sample(g, [](const std::array<double, 3>& x) { return std::sin(kTwoPi * x[0]); });
        ScalarField proj(g);
        for (std::size_t k = 0; k < g.cell_count(); ++k) proj[k] = 2.0 * (r.final.rho[k] - 1.0) * basis[k];
        const double exact = 0.1 * std::exp(-4.0 * std::numbers::pi * std::numbers::pi * p.eps * 0.1);
        CHECK(std::abs(integrate(proj) - exact) <= 1e-4);
        CHECK(std::abs(integrate(r.final.rho) - 1.0) <= 1e-14);
    }
}

TEST_CASE("temporal order") {
    const PeriodicGrid g(1, 32);
    const State s0 = testing::smooth_state(g, 0.2);
    ModelParams p;
    StepConfig rk2, rk4, imex;
    rk4.scheme = Scheme::ExplicitRK4;
    imex.scheme = Scheme::Imex;
    imex.solver_tolerance = 1e-13;
    const double T = 0.02;
    const State ref = advance(s0, 1.25e-5, T, p, rk4);
    std::vector<double> e2, ei;
    for (double dt : {4e-4, 2e-4, 1e-4}) {
        e2.push_back(state_diff(advance(s0, dt, T, p, rk2), ref));
        ei.push_back(state_diff(advance(s0, dt, T, p, imex), ref));
    }
    CHECK(e2[0] / e2[1] > 3.5);
    CHECK(e2[1] / e2[2] > 3.5);
    CHECK(ei[0] / ei[1] > 3.5);
    CHECK(ei[1] / ei[2] > 3.5);
    const double diff = state_diff(advance(s0, 2e-4, T, p, rk2), advance(s0, 2e-4, T, p, rk4));
    CHECK(diff <= 4.0 * e2[1]);
}

TEST_CASE("run with t_end = 0 records only the initial state") {
    const PeriodicGrid g(1, 16);
    const State s = testing::smooth_state(g);
    ModelParams p;
    StepConfig c;
    c.t_end = 0.0;
    const RunResult r = run(s, p, c, DiagnosticsSuite(p, raw_from_state(s)));
    CHECK(r.records.size() == 1);
    CHECK(r.steps == 0);
    CHECK(state_diff(r.final, s) == 0.0);
    CHECK(r.status == RunStatus::Completed);
}

TEST_CASE("equilibrium run keeps every diagnostic constant") {
    const PeriodicGrid g(2, 16);
    const State s = constant_state(g, 1.3, 0.7, 0.4);
    ModelParams p;
    StepConfig c;
    c.t_end = 0.5;
    c.sample_every = 0.1;
    const RunResult r = run(s, p, c, DiagnosticsSuite(p, raw_from_state(s)));
    REQUIRE(r.status == RunStatus::Completed);
    CHECK(r.records.size() == 6);
    const DiagnosticsRecord& a = r.records.front();
    for (const auto& b : r.records) {
        CHECK(std::abs(b.E - a.E) <= 1e-10);
        CHECK(std::abs(b.E_tilde - a.E_tilde) <= 1e-10);
        CHECK(std::abs(b.D) <= 1e-10);
        CHECK(std::abs(b.mass_n - a.mass_n) <= 1e-10);
        CHECK(std::abs(b.mass_rho - a.mass_rho) <= 1e-10);
        CHECK(std::abs(b.dist_eq) <= 1e-10);
        CHECK(std::abs(b.momentum_total[0] - a.momentum_total[0]) <= 1e-10);
    }
}

TEST_CASE("samples land on their times") {
    const PeriodicGrid g(1, 32);
    const State s = testing::smooth_state(g, 0.1);
    ModelParams p;
    StepConfig c;
    c.t_end = 0.25;
    c.sample_every = 0.1;
    c.checkpoint_every = 0.05;
    int checkpoints = 0;
    const RunResult r = run(s, p, c, DiagnosticsSuite(p, raw_from_state(s)), [&](const State&) { ++checkpoints; });
    REQUIRE(r.records.size() == 4);
    CHECK(r.records[0].t == 0.0);
    CHECK(r.records[1].t == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(r.records[2].t == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(r.records[3].t == 0.25);
    CHECK(r.integrals.size() == r.records.size());
    CHECK(checkpoints == 5);
    CHECK(r.final.t == 0.25);
}

TEST_CASE("energy decays and mass is conserved on a perturbed run") {
    const PeriodicGrid g(1, 64);
    GeneratorSpec spec;
    spec.name = "sine-perturbation";
    const State s = state_from_raw(generate(spec, g));
    ModelParams p;
    StepConfig c;
    c.t_end = 0.5;
    const DiagnosticsSuite diag(p, raw_from_state(s));
    const RunResult r = run(s, p, c, diag);
    REQUIRE(r.status == RunStatus::Completed);
    const double E0 = r.records.front().E;
    const double tol = 0.1 * r.dt_max + 0.1 * g.spacing() * g.spacing();
    for (std::size_t k = 0; k < r.records.size(); ++k) {
        const double dissipated = r.integrals[k][static_cast<std::size_t>(Integral::Dissipation)] +
                                  r.integrals[k][static_cast<std::size_t>(Integral::ParticleViscous)];
        CHECK(r.integrals[k][static_cast<std::size_t>(Integral::Dissipation)] >= 0.0);
        CHECK(r.records[k].E + dissipated <= E0 + tol);
        CHECK(std::abs(r.records[k].mass_n - r.records[0].mass_n) <= 1e-12);
    }
    CHECK(r.records.back().E < E0);
}

TEST_CASE("runs are deterministic") {
    const PeriodicGrid g(1, 32);
    GeneratorSpec spec;
    spec.name = "random-smooth";
    spec.amplitude = 0.3;
    spec.seed = 9;
    const State s = state_from_raw(generate(spec, g));
    ModelParams p;
    p.eps = 0.01;
    StepConfig c;
    c.scheme = Scheme::Imex;
    c.t_end = 0.05;
    c.sample_every = 0.01;
    const DiagnosticsSuite diag(p, raw_from_state(s));
    const RunResult a = run(s, p, c, diag);
    const RunResult b = run(s, p, c, diag);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) CHECK(csv_row(a.records[k]) == csv_row(b.records[k]));
    for (std::size_t k = 0; k < g.cell_count(); ++k) CHECK(same_bits(a.final.n[k], b.final.n[k]));
}

TEST_CASE("failures end the run with partial records") {
    const PeriodicGrid g(1, 32);
    State s = constant_state(g, 1.0, 1.0, 0.0);
    s.n = ScalarField::sample(g, [](const std::array<double, 3>& x) { return 1.0 + 0.5 * std::sin(kTwoPi * x[0]); });
    s.v[0] = ScalarField::sample(g, [](const std::array<double, 3>& x) { return -2.0 * std::sin(kTwoPi * x[0]); });
    ModelParams p;
    StepConfig c;
    c.density_floor = 0.49;
    c.t_end = 1.0;
    c.sample_every = 0.01;
    const RunResult r = run(s, p, c, DiagnosticsSuite(p, raw_from_state(s)));
    CHECK(r.status == RunStatus::PositivityLost);
    CHECK_FALSE(r.records.empty());
    CHECK(r.message.find("below") != std::string::npos);

    State nan = s;
    nan.u[0][3] = std::nan("");
    const RunResult q = run(nan, p, c, DiagnosticsSuite(p, raw_from_state(s)));
    CHECK(q.status == RunStatus::Blowup);
}
