#include <doctest.h>

#include <numbers>

#include "support.hpp"
#include "twophase/diagnostics.hpp"
#include "twophase/errors.hpp"

using namespace twophase;
using testing::kTwoPi;

namespace {

State uniform(const PeriodicGrid& g, double n, std::array<double, 3> v, double rho, std::array<double, 3> u) {
    return State{ScalarField(g, n), VectorField(g, std::span<const double>(v)), ScalarField(g, rho), VectorField(g, std::span<const double>(u)), 0.0};
}

ModelParams unit_params() {
    ModelParams p;
    p.A = 1.0;
    p.gamma = 2.0;
    return p;
}

} // namespace

TEST_CASE("entropy density") {
    CHECK(entropy_density(1.0) == 0.0);
    CHECK(entropy_density(0.0) == 1.0);
    CHECK(entropy_density(2.0) == doctest::Approx(2.0 * std::log(2.0) - 1.0));
    const double x = 1.0 + 1e-9;
    CHECK(entropy_density(x) == doctest::Approx(0.5e-18).epsilon(1e-6));
    CHECK(entropy_density(x) >= 0.0);
}

TEST_CASE("energy") {
    const PeriodicGrid g(1, 32);
    const ModelParams p = unit_params();
    CHECK(energy(uniform(g, 1.0, {0, 0, 0}, 1.0, {0, 0, 0}), p) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(energy(uniform(g, 1.0, {1, 0, 0}, 1.0, {0, 0, 0}), p) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("dissipation rate") {
    const PeriodicGrid g(1, 64);
    ModelParams p = unit_params();
    p.mu = 0.0;
    p.lambda = 0.0;
    CHECK(dissipation_rate(uniform(g, 1.0, {0.3, 0, 0}, 1.0, {0.3, 0, 0}), p) == 0.0);
    p.kappa = 2.0;
    CHECK(dissipation_rate(uniform(g, 1.0, {1, 0, 0}, 1.0, {0, 0, 0}), p) == doctest::Approx(2.0).epsilon(1e-14));

    const PeriodicGrid fine(1, 1024);
    State s = uniform(fine, 1.0, {0, 0, 0}, 1.0, {0, 0, 0});
    s.u[0] = ScalarField::sample(fine, [](const std::array<double, 3>& x) { return std::sin(kTwoPi * x[0]); });
    s.v[0] = s.u[0];
    p.kappa = 0.0;
    p.mu = 1.0;
    CHECK(std::abs(dissipation_rate(s, p) - 4.0 * std::numbers::pi * std::numbers::pi) <= 1e-3);
    // The discrete value converges at second order; the residual at N=1024 is 1.5e-4.
    const PeriodicGrid finer(1, 8192);
    State t = uniform(finer, 1.0, {0, 0, 0}, 1.0, {0, 0, 0});
    t.u[0] = ScalarField::sample(finer, [](const std::array<double, 3>& x) { return std::sin(kTwoPi * x[0]); });
    t.v[0] = t.u[0];
    CHECK(std::abs(dissipation_rate(t, p) - 4.0 * std::numbers::pi * std::numbers::pi) <= 1e-5);
}

TEST_CASE("particle viscous dissipation") {
    const PeriodicGrid g(1, 16);
    ModelParams p = unit_params();
    CHECK(particle_viscous_dissipation(uniform(g, 1.0, {2, 0, 0}, 1.0, {0, 0, 0}), p) == 0.0);
    const State s = testing::smooth_state(PeriodicGrid(2, 16));
    CHECK(particle_viscous_dissipation(s, p) > 0.0);
}

TEST_CASE("BD entropy") {
    const PeriodicGrid g(1, 32);
    CHECK(bd_entropy(uniform(g, 3.0, {0, 0, 0}, 1.0, {0, 0, 0})) == 0.0);
    auto value = [](int n) {
        const PeriodicGrid gg(1, n);
        State s = uniform(gg, 1.0, {0, 0, 0}, 1.0, {0, 0, 0});
        s.n = ScalarField::sample(gg, [](const std::array<double, 3>& x) {
            return std::pow(1.0 + 0.5 * std::sin(kTwoPi * x[0]), 2);
        });
        return bd_entropy(s);
    };
    const double exact = std::numbers::pi * std::numbers::pi / 2.0;
    CHECK(std::abs(value(8192) - exact) <= 1e-6);
    CHECK(std::abs(value(256) - exact) / std::abs(value(512) - exact) > 3.9);
}

TEST_CASE("Mellet-Vasseur quantity") {
    const PeriodicGrid g(2, 8);
    CHECK(mellet_vasseur(uniform(g, 2.0, {0, 0, 0}, 1.0, {0, 0, 0})) == 0.0);
    const double c = 1.0 / std::sqrt(2.0);
    CHECK(mellet_vasseur(uniform(g, 1.0, {c, c, 0}, 1.0, {0, 0, 0})) == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("conserved quantities") {
    const PeriodicGrid g(3, 8);
    const ConservedQuantities a = conserved(uniform(g, 2.0, {0, 0, 0}, 3.0, {0, 0, 0}));
    CHECK(a.mass_n == doctest::Approx(2.0));
    CHECK(a.mass_rho == doctest::Approx(3.0));
    const ConservedQuantities b = conserved(uniform(g, 1.0, {1, 0, 0}, 1.0, {-1, 0, 0}));
    REQUIRE(b.momentum.size() == 3);
    for (double m : b.momentum) CHECK(m == 0.0);
}

TEST_CASE("equilibrium constants") {
    const PeriodicGrid g(1, 16);
    auto raw = [&](double n, double rho, double m, double mt) {
        const double mv[3] = {m, 0, 0};
        const double mtv[3] = {mt, 0, 0};
        return RawInitialData{ScalarField(g, n), VectorField(g, mv), ScalarField(g, rho), VectorField(g, mtv), 0.01};
    };
    EquilibriumState e = equilibrium(raw(2.0, 3.0, 0.0, 0.0));
    CHECK(e.n_c == doctest::Approx(2.0));
    CHECK(e.rho_c == doctest::Approx(3.0));
    CHECK(e.u_c[0] == 0.0);
    CHECK(equilibrium(raw(1.0, 1.0, 2.0, 2.0)).u_c[0] == doctest::Approx(2.0));
    CHECK(equilibrium(raw(1.0, 3.0, 1.0, 0.0)).u_c[0] == doctest::Approx(0.25));
    CHECK_THROWS_AS(equilibrium(raw(0.0, 1.0, 0.0, 0.0)), ZeroMass);
}

TEST_CASE("distance to equilibrium") {
    const PeriodicGrid g(1, 16);
    const ModelParams p = unit_params();
    const EquilibriumState eq{2.0, 3.0, {0.5}};
    CHECK(distance_to_equilibrium(uniform(g, 2.0, {0.5, 0, 0}, 3.0, {0.5, 0, 0}), eq, 2.0, p) == 0.0);
    CHECK(distance_to_equilibrium(uniform(g, 2.0, {1.5, 0, 0}, 3.0, {1.5, 0, 0}), eq, 2.0, p) ==
          doctest::Approx(5.0));

    // A Galilean boost moves u_c with the data, so the distance is unchanged.
    const State s = testing::smooth_state(g, 0.3);
    State boosted = s;
    for (std::size_t k = 0; k < g.cell_count(); ++k) {
        boosted.v[0][k] += 0.75;
        boosted.u[0][k] += 0.75;
    }
    const double d0 = distance_to_equilibrium(s, equilibrium(raw_from_state(s)), 2.0, p);
    const double d1 = distance_to_equilibrium(boosted, equilibrium(raw_from_state(boosted)), 2.0, p);
    CHECK(d0 > 0.0);
    CHECK(d1 == doctest::Approx(d0).epsilon(1e-12));
}

TEST_CASE("modified energy and phase means") {
    const PeriodicGrid g(1, 16);
    ModelParams p = unit_params();
    p.A = 1.7;
    SUBCASE("equilibrium constants") {
        const State s = uniform(g, 2.0, {0.5, 0, 0}, 3.0, {0.5, 0, 0});
        const double expected = 2.0 * std::log(2.0) - 2.0 + 1.0 + p.A * 9.0 / (p.gamma - 1.0);
        CHECK(modified_energy(s, raw_from_state(s), p) == doctest::Approx(expected).epsilon(1e-13));
    }
    SUBCASE("relative motion of the phases") {
        const State s = uniform(g, 1.0, {1, 0, 0}, 1.0, {0, 0, 0});
        const PhaseMeans m = phase_means(s, raw_from_state(s));
        CHECK(m.m1[0] == doctest::Approx(1.0));
        CHECK(m.m2[0] == 0.0);
        CHECK(m.coupling == doctest::Approx(0.5));
        CHECK(modified_energy(s, raw_from_state(s), p) == doctest::Approx(p.A / (p.gamma - 1.0) + 0.25));
    }
}

TEST_CASE("effective velocity") {
    ModelParams p = unit_params();
    p.eta = 1.0;
    const PeriodicGrid g(1, 16);
    State s = uniform(g, 2.0, {0.3, 0, 0}, 1.0, {0, 0, 0});
    CHECK(testing::max_diff(effective_velocity(s, p)[0], s.v[0]) == 0.0);

    auto err = [&](int n) {
        const PeriodicGrid gg(1, n);
        State t = uniform(gg, 1.0, {0, 0, 0}, 1.0, {0, 0, 0});
        t.n = ScalarField::sample(gg, [](const std::array<double, 3>& x) { return std::exp(std::sin(kTwoPi * x[0])); });
        const ScalarField exact =
            ScalarField::sample(gg, [](const std::array<double, 3>& x) { return kTwoPi * std::cos(kTwoPi * x[0]); });
        return testing::max_diff(effective_velocity(t, p)[0], exact);
    };
    CHECK(testing::fitted_order({64, 128, 256}, {err(64), err(128), err(256)}) > 1.9);

    s.n[3] = 0.0;
    CHECK_THROWS_AS(effective_velocity(s, p), PositivityError);
}

TEST_CASE("integrability") {
    const PeriodicGrid g(1, 16);
    const ModelParams p = unit_params();
    State a = uniform(g, 1.0, {0, 0, 0}, 2.0, {0, 0, 0});
    State b = a;
    b.t = 1.0;
    const std::vector<State> one{a};
    const Integrability z = integrability(one, p);
    CHECK(z.rho_gamma_plus1 == 0.0);
    CHECK(z.rho_hi == 0.0);
    const std::vector<State> two{a, b};
    const Integrability r = integrability(two, p);
    CHECK(r.rho_gamma_plus1 == doctest::Approx(8.0));
    CHECK(r.rho_hi == doctest::Approx(std::pow(2.0, 7.0 / 3.0)));
    CHECK(r.delta_rho_gamma0_plus1 == 0.0);
}

TEST_CASE("diagnostics suite records") {
    const PeriodicGrid g(2, 16);
    const State s = testing::smooth_state(g, 0.2);
    ModelParams p = unit_params();
    const DiagnosticsSuite diag(p, raw_from_state(s));
    const DiagnosticsRecord r = diag.sample(s);
    CHECK(r.all_finite());
    CHECK(r.E == doctest::Approx(energy(s, p)));
    CHECK(r.BD == doctest::Approx(bd_entropy(s)));
    CHECK(r.momentum_total.size() == 2);
    CHECK(r.n_min <= r.n_max);
    CHECK(csv_header(2).size() == 17);
    CHECK(csv_header(1).front() == "t");

    const IntegralArray in = diag.integrands(s);
    CHECK(in[static_cast<std::size_t>(Integral::Dissipation)] == doctest::Approx(dissipation_rate(s, p)));
    CHECK(in[static_cast<std::size_t>(Integral::BD)] == doctest::Approx(bd_entropy(s)));
    CHECK(in[static_cast<std::size_t>(Integral::EpsNV5)] == 0.0);
    CHECK(std::string(integral_name(Integral::DeltaRhoGamma0)) == "delta_rho_gamma0");

    DiagnosticsRecord bad = r;
    bad.D = std::nan("");
    CHECK_FALSE(bad.all_finite());

    RawInitialData empty = raw_from_state(s);
    empty.n0 = ScalarField(g, 0.0);
    for (int i = 0; i < 2; ++i) empty.m0[i] = ScalarField(g, 0.0);
    CHECK_THROWS_AS(DiagnosticsSuite(p, empty), ZeroMass);
}
