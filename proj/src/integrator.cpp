#include "twophase/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "twophase/errors.hpp"

namespace twophase {

namespace {

using Flat = std::vector<double>;

// Packed layout [a | b_0 .. b_{d-1} | c | e_0 .. e_{d-1}], cells entries each.
struct Layout {
    std::size_t cells;
    int dim;
    std::size_t block(int k) const { return static_cast<std::size_t>(k) * cells; }
    std::size_t n() const { return block(0); }
    std::size_t v(int i) const { return block(1 + i); }
    std::size_t rho() const { return block(1 + dim); }
    std::size_t u(int i) const { return block(2 + dim + i); }
    std::size_t size() const { return block(2 + 2 * dim); }
};

Layout layout_of(const PeriodicGrid& g) { return Layout{g.cell_count(), g.dim()}; }

void put(Flat& x, std::size_t off, const ScalarField& f) {
    std::copy(f.values().begin(), f.values().end(), x.begin() + static_cast<std::ptrdiff_t>(off));
}

ScalarField take(const Flat& x, std::size_t off, const PeriodicGrid& g) {
    const auto first = x.begin() + static_cast<std::ptrdiff_t>(off);
    return ScalarField(g, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(g.cell_count())));
}

Flat pack_primitive(const State& s) {
    const Layout L = layout_of(s.grid());
    Flat x(L.size());
    put(x, L.n(), s.n);
    put(x, L.rho(), s.rho);
    for (int i = 0; i < L.dim; ++i) {
        put(x, L.v(i), s.v[i]);
        put(x, L.u(i), s.u[i]);
    }
    return x;
}

State unpack_primitive(const Flat& x, const PeriodicGrid& g, double t) {
    const Layout L = layout_of(g);
    std::vector<ScalarField> v, u;
    for (int i = 0; i < L.dim; ++i) {
        v.push_back(take(x, L.v(i), g));
        u.push_back(take(x, L.u(i), g));
    }
    return State{take(x, L.n(), g), VectorField(std::move(v)), take(x, L.rho(), g), VectorField(std::move(u)), t};
}

Flat pack_conservative(const State& s) {
    const Layout L = layout_of(s.grid());
    Flat x = pack_primitive(s);
    for (int i = 0; i < L.dim; ++i)
        for (std::size_t k = 0; k < L.cells; ++k) {
            x[L.v(i) + k] *= s.n[k];
            x[L.u(i) + k] *= s.rho[k];
        }
    return x;
}

// v = m / n and u = M / rho; nonpositive densities leave a zero velocity and
// are rejected by the right-hand side or the floor check.
State unpack_conservative(const Flat& x, const PeriodicGrid& g, double t) {
    const Layout L = layout_of(g);
    Flat y = x;
    for (int i = 0; i < L.dim; ++i)
        for (std::size_t k = 0; k < L.cells; ++k) {
            const double n = x[L.n() + k];
            const double r = x[L.rho() + k];
            y[L.v(i) + k] = n > 0.0 ? x[L.v(i) + k] / n : 0.0;
            y[L.u(i) + k] = r > 0.0 ? x[L.u(i) + k] / r : 0.0;
        }
    return unpack_primitive(y, g, t);
}

Flat pack_derivative(const StateDerivative& d) {
    const PeriodicGrid& g = d.dn.grid();
    const Layout L = layout_of(g);
    Flat x(L.size());
    put(x, L.n(), d.dn);
    put(x, L.rho(), d.drho);
    for (int i = 0; i < L.dim; ++i) {
        put(x, L.v(i), d.dv[i]);
        put(x, L.u(i), d.du[i]);
    }
    return x;
}

// Time derivative of (n, n v, rho, rho u) from the primitive one.
Flat conservative_derivative(const State& s, const StateDerivative& d) {
    const Layout L = layout_of(s.grid());
    Flat x = pack_derivative(d);
    for (int i = 0; i < L.dim; ++i)
        for (std::size_t k = 0; k < L.cells; ++k) {
            x[L.v(i) + k] = s.n[k] * d.dv[i][k] + s.v[i][k] * d.dn[k];
            x[L.u(i) + k] = s.rho[k] * d.du[i][k] + s.u[i][k] * d.drho[k];
        }
    return x;
}

// out = x + sum_j a_j y_j
Flat combine(const Flat& x, std::initializer_list<std::pair<double, const Flat*>> terms) {
    Flat out = x;
    for (const auto& [a, y] : terms)
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += a * (*y)[k];
    return out;
}

void check_result(const State& s, const StepConfig& c) {
    if (!s.all_finite()) {
        std::ostringstream os;
        os << "non-finite state after step ending at t = " << s.t;
        throw NumericalBlowup(os.str());
    }
    for (const auto* f : {&s.n, &s.rho}) {
        if (auto bad = f->first_below(c.density_floor)) {
            std::ostringstream os;
            os << (f == &s.n ? "n" : "rho") << " fell below the density floor " << c.density_floor << " at cell "
               << *bad << " (value " << (*f)[*bad] << ", t = " << s.t << ")";
            throw PositivityError(os.str());
        }
    }
}

State step_explicit(const State& s, double dt, const ModelParams& p, const StepConfig& c, bool rk4) {
    const PeriodicGrid& g = s.grid();
    auto L = [&](const State& y) { return conservative_derivative(y, rhs(y, p, c.rhs)); };
    const Flat U0 = pack_conservative(s);
    if (!rk4) {
        const Flat k1 = L(s);
        const Flat U1 = combine(U0, {{dt, &k1}});
        const Flat k2 = L(unpack_conservative(U1, g, s.t + dt));
        return unpack_conservative(combine(U0, {{0.5 * dt, &k1}, {0.5 * dt, &k2}}), g, s.t + dt);
    }
    const Flat k1 = L(s);
    const Flat k2 = L(unpack_conservative(combine(U0, {{0.5 * dt, &k1}}), g, s.t + 0.5 * dt));
    const Flat k3 = L(unpack_conservative(combine(U0, {{0.5 * dt, &k2}}), g, s.t + 0.5 * dt));
    const Flat k4 = L(unpack_conservative(combine(U0, {{dt, &k3}}), g, s.t + dt));
    const double w = dt / 6.0;
    return unpack_conservative(combine(U0, {{w, &k1}, {2 * w, &k2}, {2 * w, &k3}, {w, &k4}}), g, s.t + dt);
}

// Conjugate gradients for the SPD operator A, starting from x.
template <typename Op>
void conjugate_gradient(Op&& A, const Flat& b, Flat& x, const StepConfig& c, const char* what) {
    auto dotp = [](const Flat& a, const Flat& y) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * y[k];
        return s;
    };
    const double bnorm = std::sqrt(dotp(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return;
    }
    Flat Ax = A(x);
    Flat r(b.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = b[k] - Ax[k];
    Flat d = r;
    double rr = dotp(r, r);
    for (int it = 0; it < c.solver_max_iterations; ++it) {
        if (std::sqrt(rr) <= c.solver_tolerance * bnorm) return;
        const Flat Ad = A(d);
        const double alpha = rr / dotp(d, Ad);
        for (std::size_t k = 0; k < x.size(); ++k) {
            x[k] += alpha * d[k];
            r[k] -= alpha * Ad[k];
        }
        const double rr_new = dotp(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = r[k] + beta * d[k];
    }
    if (std::sqrt(rr) <= c.solver_tolerance * bnorm) return;
    std::ostringstream os;
    os << what << " solve did not reach relative residual " << c.solver_tolerance << " in "
       << c.solver_max_iterations << " iterations";
    throw NumericalBlowup(os.str());
}

// Solves the implicit part of one IMEX stage in place on the conservative
// vector y, which holds the explicit predictor b on entry. The implicit
// terms are eps lap(rho) and, in the fluid momentum, L u + u eps lap(rho)
// with L = mu lap + (mu+lambda) grad div. With the new rho this reduces to
//   (I - a eps lap) rho = b_rho,   (b_rho I - a L) u = b_M,   M = rho u.
// Both operators are SPD. The mean of each CG residual is removed by a
// constant shift (L and lap annihilate constants), so the integrals of rho
// and M come out exact.
void implicit_solve(Flat& y, double a, const PeriodicGrid& g, const ModelParams& p, const StepConfig& c) {
    const Layout L = layout_of(g);
    const std::size_t cells = L.cells;
    auto mean_shift = [&](const auto& op, const Flat& b, Flat& x, double weight_sum) {
        const Flat Ax = op(x);
        for (std::size_t blk = 0; blk * cells < x.size(); ++blk) {
            double r = 0.0;
            for (std::size_t k = 0; k < cells; ++k) r += b[blk * cells + k] - Ax[blk * cells + k];
            const double shift = r / weight_sum;
            for (std::size_t k = 0; k < cells; ++k) x[blk * cells + k] += shift;
        }
    };

    const Flat b_rho(y.begin() + static_cast<std::ptrdiff_t>(L.rho()),
                     y.begin() + static_cast<std::ptrdiff_t>(L.rho() + cells));
    for (std::size_t k = 0; k < cells; ++k)
        if (!(b_rho[k] > 0.0)) {
            std::ostringstream os;
            os << "IMEX stage predictor has rho = " << b_rho[k] << " at cell " << k;
            throw PositivityError(os.str());
        }
    double b_rho_sum = 0.0;
    for (double x : b_rho) b_rho_sum += x;

    Flat rho = b_rho;
    if (p.eps > 0.0) {
        auto op = [&](const Flat& z) {
            const ScalarField lap = laplacian(ScalarField(g, z));
            Flat out(cells);
            for (std::size_t k = 0; k < cells; ++k) out[k] = z[k] - a * p.eps * lap[k];
            return out;
        };
        conjugate_gradient(op, b_rho, rho, c, "density diffusion");
        mean_shift(op, b_rho, rho, static_cast<double>(cells));
        std::copy(rho.begin(), rho.end(), y.begin() + static_cast<std::ptrdiff_t>(L.rho()));
    }

    const std::size_t vec = cells * static_cast<std::size_t>(L.dim);
    const Flat b_M(y.begin() + static_cast<std::ptrdiff_t>(L.u(0)),
                   y.begin() + static_cast<std::ptrdiff_t>(L.u(0) + vec));
    Flat u(vec);
    for (std::size_t k = 0; k < vec; ++k) u[k] = b_M[k] / b_rho[k % cells];
    auto op = [&](const Flat& z) {
        std::vector<ScalarField> comps;
        for (int i = 0; i < L.dim; ++i) {
            const auto first = z.begin() + static_cast<std::ptrdiff_t>(i * cells);
            comps.emplace_back(g, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(cells)));
        }
        const VectorField Lz = momentum_diffusion(VectorField(std::move(comps)), p);
        Flat out(vec);
        for (int i = 0; i < L.dim; ++i)
            for (std::size_t k = 0; k < cells; ++k)
                out[i * cells + k] = b_rho[k] * z[i * cells + k] - a * Lz[i][k];
        return out;
    };
    conjugate_gradient(op, b_M, u, c, "momentum diffusion");
    mean_shift(op, b_M, u, b_rho_sum);
    for (std::size_t k = 0; k < vec; ++k) y[L.u(0) + k] = rho[k % cells] * u[k];
}

// ARS(2,2,2): L-stable, stiffly accurate, second order.
State step_imex(const State& s, double dt, const ModelParams& p, const StepConfig& c) {
    const PeriodicGrid& g = s.grid();
    const double gam = 1.0 - 1.0 / std::sqrt(2.0);
    const double del = 1.0 - 1.0 / (2.0 * gam);
    RhsOptions opt = c.rhs;
    opt.exclude_linear_diffusion = true;
    auto E = [&](const State& y) { return conservative_derivative(y, rhs(y, p, opt)); };

    const Flat U0 = pack_conservative(s);
    const Flat E1 = E(s);

    const Flat b2 = combine(U0, {{gam * dt, &E1}});
    Flat Y2 = b2;
    implicit_solve(Y2, gam * dt, g, p, c);
    Flat I2(Y2.size());
    for (std::size_t k = 0; k < I2.size(); ++k) I2[k] = (Y2[k] - b2[k]) / (gam * dt);
    const Flat E2 = E(unpack_conservative(Y2, g, s.t + gam * dt));

    Flat Y3 = combine(U0, {{del * dt, &E1}, {(1.0 - del) * dt, &E2}, {(1.0 - gam) * dt, &I2}});
    implicit_solve(Y3, gam * dt, g, p, c);
    return unpack_conservative(Y3, g, s.t + dt);
}

} // namespace

const char* to_string(Scheme s) {
    switch (s) {
    case Scheme::ExplicitRK2: return "explicit-rk2";
    case Scheme::ExplicitRK4: return "explicit-rk4";
    case Scheme::Imex: return "imex";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "explicit-rk2") return Scheme::ExplicitRK2;
    if (name == "explicit-rk4") return Scheme::ExplicitRK4;
    if (name == "imex") return Scheme::Imex;
    throw ConfigError("step.scheme must be one of explicit-rk2, explicit-rk4, imex (got \"" + name + "\")");
}

const char* to_string(RunStatus s) {
    switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Blowup: return "blowup";
    case RunStatus::PositivityLost: return "positivity-lost";
    }
    return "unknown";
}

void StepConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(cfl > 0.0 && cfl <= 1.0)) fail("step.cfl must lie in (0, 1]");
    if (!(dt_max > 0.0) || !std::isfinite(dt_max)) fail("step.dt_max must satisfy dt_max>0");
    if (!(density_floor >= 0.0)) fail("step.density_floor must satisfy density_floor>=0");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail("step.t_end must satisfy t_end>=0");
    if (!(sample_every > 0.0)) fail("step.sample_every must satisfy sample_every>0");
    if (!(checkpoint_every >= 0.0)) fail("step.checkpoint_every must satisfy checkpoint_every>=0");
    if (!(solver_tolerance > 0.0)) fail("step.solver_tolerance must be positive");
    if (solver_max_iterations < 1) fail("step.solver_max_iterations must be at least 1");
}

double stable_dt(const State& s, const ModelParams& p, const StepConfig& c) {
    if (!s.all_finite()) return 0.0;
    const PeriodicGrid& g = s.grid();
    const double h = g.spacing();
    const double n_min = s.n.min();
    const double rho_min = s.rho.min();
    if (!(n_min > 0.0) || !(rho_min > 0.0)) return 0.0;
    const double n_max = s.n.max();
    const double vmax = s.v.max_norm();
    const double umax = s.u.max_norm();
    double cs = 0.0;
    for (std::size_t k = 0; k < g.cell_count(); ++k) cs = std::max(cs, std::sqrt(pressure_derivative(s.rho[k], p)));

    // The particle phase carries the pressure n, hence sound speed 1.
    const double advective = h / std::max(vmax + 1.0, umax + cs);

    double nu = p.eta * n_max;
    double reaction = 0.0;
    if (c.scheme != Scheme::Imex) nu = std::max({nu, p.mu, p.mu + p.lambda});
    if (p.eps > 0.0) {
        ScalarField root(g);
        for (std::size_t k = 0; k < g.cell_count(); ++k) root[k] = std::sqrt(s.n[k]);
        const double q = norm_squared(gradient(root)).max();
        nu = std::max({nu, std::sqrt(p.eps) * n_max, p.eps * (1.0 + q)});
        const double u8 = std::pow(umax, 8.0);
        reaction = p.eps * (vmax * vmax * vmax + std::pow(n_min, -13.0) + u8);
    }
    nu /= std::min(rho_min, n_min);
    double dt = std::min(advective, h * h / (2.0 * g.dim() * nu));
    if (reaction > 0.0) dt = std::min(dt, 1.0 / reaction);
    dt *= c.cfl;
    if (!std::isfinite(dt)) return 0.0;
    return std::min(dt, c.dt_max);
}

State step(const State& s, double dt, const ModelParams& p, const StepConfig& c) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "step: dt must be positive");
    State out;
    switch (c.scheme) {
    case Scheme::ExplicitRK2: out = step_explicit(s, dt, p, c, false); break;
    case Scheme::ExplicitRK4: out = step_explicit(s, dt, p, c, true); break;
    case Scheme::Imex: out = step_imex(s, dt, p, c); break;
    }
    check_result(out, c);
    return out;
}

RunResult run(const State& s0, const ModelParams& p, const StepConfig& c, const DiagnosticsSuite& diag,
              const CheckpointSink& checkpoint) {
    RunResult r;
    r.final = s0;
    State s = s0;
    IntegralArray acc{};
    IntegralArray prev{};

    auto fail = [&](RunStatus st, const std::exception& e) {
        r.status = st;
        r.message = e.what();
        r.final = s;
        return r;
    };

    try {
        prev = diag.integrands(s);
        r.records.push_back(diag.sample(s));
        r.integrals.push_back(acc);
    } catch (const NumericalBlowup& e) {
        return fail(RunStatus::Blowup, e);
    } catch (const PositivityError& e) {
        return fail(RunStatus::PositivityLost, e);
    } catch (const DegenerateDensity& e) {
        return fail(RunStatus::PositivityLost, e);
    }

    const double t0 = s0.t;
    long sample_index = 1;
    long checkpoint_index = 1;
    auto next_sample = [&] { return t0 + static_cast<double>(sample_index) * c.sample_every; };
    auto next_checkpoint = [&] {
        return c.checkpoint_every > 0.0 ? t0 + static_cast<double>(checkpoint_index) * c.checkpoint_every
                                        : std::numeric_limits<double>::infinity();
    };

    try {
        while (s.t < c.t_end) {
            const double target = std::min({next_sample(), next_checkpoint(), c.t_end});
            double dt = stable_dt(s, p, c);
            if (!(dt > 0.0)) {
                std::ostringstream os;
                os << "no admissible time step at t = " << s.t;
                throw NumericalBlowup(os.str());
            }
            bool landing = false;
            if (s.t + dt >= target) {
                dt = target - s.t;
                landing = true;
            }
            State next = step(s, dt, p, c);
            if (landing) next.t = target;
            const IntegralArray cur = diag.integrands(next);
            for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += 0.5 * dt * (prev[k] + cur[k]);
            prev = cur;
            s = std::move(next);
            ++r.steps;
            r.dt_min = r.steps == 1 ? dt : std::min(r.dt_min, dt);
            r.dt_max = std::max(r.dt_max, dt);

            if (!landing) continue;
            bool record = s.t >= c.t_end;
            while (next_sample() <= s.t) {
                record = true;
                ++sample_index;
            }
            if (record) {
                r.records.push_back(diag.sample(s));
                r.integrals.push_back(acc);
            }
            if (next_checkpoint() <= s.t) {
                while (next_checkpoint() <= s.t) ++checkpoint_index;
                if (checkpoint) checkpoint(s);
            }
        }
    } catch (const NumericalBlowup& e) {
        return fail(RunStatus::Blowup, e);
    } catch (const PositivityError& e) {
        return fail(RunStatus::PositivityLost, e);
    } catch (const DegenerateDensity& e) {
        return fail(RunStatus::PositivityLost, e);
    }
    r.final = s;
    return r;
}

} // namespace twophase
