#include "twophase/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "twophase/errors.hpp"

namespace twophase {

namespace {

double total(const ScalarField& f) { return integrate(f); }

ScalarField sqrt_field(const ScalarField& n) {
    ScalarField out(n.grid());
    for (std::size_t k = 0; k < n.size(); ++k) out[k] = std::sqrt(std::max(n[k], 0.0));
    return out;
}

} // namespace

double entropy_density(double n) {
    if (n == 0.0) return 1.0;
    const double x = n - 1.0;
    if (std::abs(x) < 0.1) {
        // sum_{k>=2} (-1)^k x^k / (k (k-1))
        double term = x * x;
        double s = 0.0;
        for (int k = 2; k <= 24; ++k) {
            s += ((k % 2 == 0) ? 1.0 : -1.0) * term / (k * (k - 1.0));
            term *= x;
        }
        return s;
    }
    return n * std::log(n) - n + 1.0;
}

double energy(const State& s, const ModelParams& p) {
    const ScalarField v2 = norm_squared(s.v);
    const ScalarField u2 = norm_squared(s.u);
    ScalarField e(s.grid());
    for (std::size_t k = 0; k < e.size(); ++k) {
        const double r = s.rho[k];
        double x = 0.5 * s.n[k] * v2[k] + entropy_density(s.n[k]) + 0.5 * r * u2[k] +
                   p.A * std::pow(r, p.gamma) / (p.gamma - 1.0);
        if (p.delta > 0.0) x += p.delta * std::pow(r, p.gamma0) / (p.gamma0 - 1.0);
        e[k] = x;
    }
    return total(e);
}

double dissipation_rate(const State& s, const ModelParams& p) {
    const TensorField Ju = jacobian(s.u);
    const ScalarField grad2 = Ju.frobenius_squared();
    const ScalarField div = trace(Ju);
    ScalarField e(s.grid());
    for (std::size_t k = 0; k < e.size(); ++k) {
        double rel = 0.0;
        for (int i = 0; i < s.grid().dim(); ++i) {
            const double d = s.v[i][k] - s.u[i][k];
            rel += d * d;
        }
        e[k] = p.kappa * s.n[k] * rel + p.mu * grad2[k] + (p.mu + p.lambda) * div[k] * div[k];
    }
    return total(e);
}

double particle_viscous_dissipation(const State& s, const ModelParams& p) {
    const ScalarField D2 = deformation(s.v).frobenius_squared();
    ScalarField e(s.grid());
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = p.eta * s.n[k] * D2[k];
    return total(e);
}

double bd_entropy(const State& s) { return total(norm_squared(gradient(sqrt_field(s.n)))); }

double mellet_vasseur(const State& s) {
    const ScalarField v2 = norm_squared(s.v);
    ScalarField e(s.grid());
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = s.n[k] * (1.0 + v2[k]) * std::log1p(v2[k]);
    return total(e);
}

ConservedQuantities conserved(const State& s) {
    ConservedQuantities q;
    q.mass_n = total(s.n);
    q.mass_rho = total(s.rho);
    for (int i = 0; i < s.grid().dim(); ++i) {
        ScalarField m(s.grid());
        for (std::size_t k = 0; k < m.size(); ++k) m[k] = s.n[k] * s.v[i][k] + s.rho[k] * s.u[i][k];
        q.momentum.push_back(total(m));
    }
    return q;
}

EquilibriumState equilibrium(const RawInitialData& raw) {
    EquilibriumState eq;
    eq.n_c = total(raw.n0);
    eq.rho_c = total(raw.rho0);
    if (!(eq.n_c > 0.0)) throw ZeroMass("particle phase has zero total mass");
    if (!(eq.rho_c > 0.0)) throw ZeroMass("fluid phase has zero total mass");
    const auto m = integrate(raw.m0);
    const auto mt = integrate(raw.m0_tilde);
    for (std::size_t i = 0; i < m.size(); ++i) eq.u_c.push_back((m[i] + mt[i]) / (eq.n_c + eq.rho_c));
    return eq;
}

double distance_to_equilibrium(const State& s, const EquilibriumState& eq, double p_exp, const ModelParams& p) {
    if (!(p_exp >= 1.0 && p_exp < 3.0))
        throw Error(ErrorCode::InvalidArgument, "distance_to_equilibrium: p_exp must lie in [1, 3)");
    ScalarField e(s.grid());
    const int d = s.grid().dim();
    for (std::size_t k = 0; k < e.size(); ++k) {
        double kv = 0.0, ku = 0.0;
        for (int i = 0; i < d; ++i) {
            const double a = s.v[i][k] - eq.u_c[static_cast<std::size_t>(i)];
            const double b = s.u[i][k] - eq.u_c[static_cast<std::size_t>(i)];
            kv += a * a;
            ku += b * b;
        }
        e[k] = s.n[k] * kv + std::pow(std::abs(s.n[k] - eq.n_c), p_exp) + s.rho[k] * ku +
               std::pow(std::abs(s.rho[k] - eq.rho_c), p.gamma);
    }
    return total(e);
}

PhaseMeans phase_means(const State& s, const RawInitialData& raw) {
    const double mass_n = total(s.n);
    const double mass_rho = total(s.rho);
    if (!(mass_n > 0.0)) throw ZeroMass("particle phase has zero total mass");
    if (!(mass_rho > 0.0)) throw ZeroMass("fluid phase has zero total mass");
    const double n0 = total(raw.n0);
    const double r0 = total(raw.rho0);
    if (!(n0 > 0.0) || !(r0 > 0.0)) throw ZeroMass("initial data has a phase with zero total mass");

    PhaseMeans pm;
    pm.coupling = n0 * r0 / (n0 + r0);
    for (int i = 0; i < s.grid().dim(); ++i) {
        ScalarField a(s.grid()), b(s.grid());
        for (std::size_t k = 0; k < a.size(); ++k) {
            a[k] = s.n[k] * s.v[i][k];
            b[k] = s.rho[k] * s.u[i][k];
        }
        pm.m1.push_back(total(a) / mass_n);
        pm.m2.push_back(total(b) / mass_rho);
    }
    return pm;
}

double modified_energy(const State& s, const RawInitialData& raw, const ModelParams& p) {
    const PhaseMeans pm = phase_means(s, raw);
    const int d = s.grid().dim();
    ScalarField e(s.grid());
    for (std::size_t k = 0; k < e.size(); ++k) {
        double kv = 0.0, ku = 0.0;
        for (int i = 0; i < d; ++i) {
            const double a = s.v[i][k] - pm.m1[static_cast<std::size_t>(i)];
            const double b = s.u[i][k] - pm.m2[static_cast<std::size_t>(i)];
            kv += a * a;
            ku += b * b;
        }
        e[k] = 0.5 * s.n[k] * kv + entropy_density(s.n[k]) + 0.5 * s.rho[k] * ku +
               p.A * std::pow(s.rho[k], p.gamma) / (p.gamma - 1.0);
    }
    double rel = 0.0;
    for (int i = 0; i < d; ++i) {
        const double dm = pm.m1[static_cast<std::size_t>(i)] - pm.m2[static_cast<std::size_t>(i)];
        rel += dm * dm;
    }
    return total(e) + 0.5 * pm.coupling * rel;
}

VectorField effective_velocity(const State& s, const ModelParams& p) {
    if (auto bad = s.n.first_below(std::numeric_limits<double>::min())) {
        std::ostringstream os;
        os << "effective_velocity needs n > 0; cell " << *bad << " has " << s.n[*bad];
        throw PositivityError(os.str());
    }
    ScalarField log_n(s.grid());
    for (std::size_t k = 0; k < log_n.size(); ++k) log_n[k] = std::log(s.n[k]);
    const VectorField g = gradient(log_n);
    const double c0 = p.eta + std::sqrt(p.eps);
    VectorField w = s.v;
    for (int i = 0; i < w.dim(); ++i)
        for (std::size_t k = 0; k < log_n.size(); ++k) w[i][k] += c0 * g[i][k];
    return w;
}

Integrability integrability(std::span<const State> samples, const ModelParams& p) {
    Integrability out;
    auto eval = [&](const State& s) {
        ScalarField a(s.grid()), b(s.grid()), c(s.grid()), d(s.grid());
        const double hi = 5.0 * p.gamma / 3.0 - 1.0;
        const double dhi = p.gamma0 + 2.0 * p.gamma / 3.0 - 1.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double r = s.rho[k];
            a[k] = std::pow(r, p.gamma + 1.0);
            b[k] = std::pow(r, hi);
            if (p.delta > 0.0) {
                c[k] = p.delta * std::pow(r, p.gamma0 + 1.0);
                d[k] = p.delta * std::pow(r, dhi);
            }
        }
        return std::array<double, 4>{total(a), total(b), total(c), total(d)};
    };
    if (samples.size() < 2) return out;
    auto prev = eval(samples[0]);
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const auto cur = eval(samples[i]);
        const double dt = samples[i].t - samples[i - 1].t;
        out.rho_gamma_plus1 += 0.5 * dt * (prev[0] + cur[0]);
        out.rho_hi += 0.5 * dt * (prev[1] + cur[1]);
        out.delta_rho_gamma0_plus1 += 0.5 * dt * (prev[2] + cur[2]);
        out.delta_rho_hi += 0.5 * dt * (prev[3] + cur[3]);
        prev = cur;
    }
    return out;
}

bool DiagnosticsRecord::all_finite() const {
    for (double x : {t, E, E_tilde, D, BD, MV, mass_n, mass_rho, n_min, n_max, rho_min, rho_max, dist_eq,
                     rho_gamma_plus1, rho_hi})
        if (!std::isfinite(x)) return false;
    for (double x : momentum_total)
        if (!std::isfinite(x)) return false;
    return true;
}

std::vector<std::string> csv_header(int dim) {
    std::vector<std::string> h{"t", "E", "E_tilde", "D", "BD", "MV", "mass_n", "mass_rho"};
    static const char* axes[] = {"x", "y", "z"};
    for (int i = 0; i < dim; ++i) h.push_back(std::string("momentum_") + axes[i]);
    for (const char* c : {"n_min", "n_max", "rho_min", "rho_max", "dist_eq", "rho_gamma_plus1", "rho_hi"})
        h.emplace_back(c);
    return h;
}

std::string csv_row(const DiagnosticsRecord& r) {
    std::string out;
    char buf[32];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        if (!out.empty()) out += ',';
        out += buf;
    };
    for (double x : {r.t, r.E, r.E_tilde, r.D, r.BD, r.MV, r.mass_n, r.mass_rho}) put(x);
    for (double x : r.momentum_total) put(x);
    for (double x : {r.n_min, r.n_max, r.rho_min, r.rho_max, r.dist_eq, r.rho_gamma_plus1, r.rho_hi}) put(x);
    return out;
}

const char* integral_name(Integral which) {
    switch (which) {
    case Integral::Dissipation: return "dissipation";
    case Integral::ParticleViscous: return "particle_viscous";
    case Integral::BD: return "bd";
    case Integral::MassSource: return "mass_source";
    case Integral::EpsNGradV2: return "eps_n_grad_v2";
    case Integral::EpsNV5: return "eps_n_v5";
    case Integral::EpsRootTerms: return "eps_root_terms";
    case Integral::EpsN12V2: return "eps_n12_v2";
    case Integral::Eps2N25: return "eps2_n25";
    case Integral::EpsU10: return "eps_u10";
    case Integral::EpsGradRho2: return "eps_grad_rho2";
    case Integral::EpsPressureGradRho: return "eps_pressure_grad_rho";
    case Integral::RhoGammaPlus1: return "rho_gamma_plus1";
    case Integral::RhoHi: return "rho_hi";
    case Integral::DeltaRhoGamma0: return "delta_rho_gamma0";
    case Integral::DeltaRhoGamma0Plus1: return "delta_rho_gamma0_plus1";
    case Integral::DeltaRhoHi: return "delta_rho_hi";
    case Integral::EffectiveKinetic: return "effective_kinetic";
    case Integral::Count: break;
    }
    return "unknown";
}

DiagnosticsSuite::DiagnosticsSuite(ModelParams params, RawInitialData reference, double p_exp)
    : params_(params), reference_(std::move(reference)), equilibrium_(twophase::equilibrium(reference_)),
      p_exp_(p_exp) {}

DiagnosticsRecord DiagnosticsSuite::sample(const State& s) const {
    DiagnosticsRecord r;
    r.t = s.t;
    r.E = energy(s, params_);
    r.E_tilde = modified_energy(s, reference_, params_);
    r.D = dissipation_rate(s, params_);
    r.BD = bd_entropy(s);
    r.MV = mellet_vasseur(s);
    const ConservedQuantities q = conserved(s);
    r.mass_n = q.mass_n;
    r.mass_rho = q.mass_rho;
    r.momentum_total = q.momentum;
    r.n_min = s.n.min();
    r.n_max = s.n.max();
    r.rho_min = s.rho.min();
    r.rho_max = s.rho.max();
    r.dist_eq = distance_to_equilibrium(s, equilibrium_, p_exp_, params_);
    ScalarField a(s.grid()), b(s.grid());
    for (std::size_t k = 0; k < a.size(); ++k) {
        a[k] = std::pow(s.rho[k], params_.gamma + 1.0);
        b[k] = std::pow(s.rho[k], 5.0 * params_.gamma / 3.0 - 1.0);
    }
    r.rho_gamma_plus1 = total(a);
    r.rho_hi = total(b);
    return r;
}

IntegralArray DiagnosticsSuite::integrands(const State& s) const {
    const ModelParams& p = params_;
    const PeriodicGrid& g = s.grid();
    const std::size_t cells = g.cell_count();
    IntegralArray out{};
    auto set = [&](Integral which, double x) { out[static_cast<std::size_t>(which)] = x; };

    set(Integral::Dissipation, dissipation_rate(s, p));
    set(Integral::ParticleViscous, particle_viscous_dissipation(s, p));

    const ScalarField root = sqrt_field(s.n);
    const ScalarField q = norm_squared(gradient(root));
    set(Integral::BD, total(q));

    ScalarField a(g), b(g);
    for (std::size_t k = 0; k < cells; ++k) {
        a[k] = std::pow(s.rho[k], p.gamma + 1.0);
        b[k] = std::pow(s.rho[k], 5.0 * p.gamma / 3.0 - 1.0);
    }
    set(Integral::RhoGammaPlus1, total(a));
    set(Integral::RhoHi, total(b));

    if (p.delta > 0.0) {
        ScalarField c(g);
        for (std::size_t k = 0; k < cells; ++k) {
            const double r = s.rho[k];
            a[k] = p.delta * std::pow(r, p.gamma0);
            b[k] = p.delta * std::pow(r, p.gamma0 + 1.0);
            c[k] = p.delta * std::pow(r, p.gamma0 + 2.0 * p.gamma / 3.0 - 1.0);
        }
        set(Integral::DeltaRhoGamma0, total(a));
        set(Integral::DeltaRhoGamma0Plus1, total(b));
        set(Integral::DeltaRhoHi, total(c));
    }

    if (s.n.min() > 0.0) {
        const ScalarField w2 = norm_squared(effective_velocity(s, p));
        for (std::size_t k = 0; k < cells; ++k) a[k] = s.n[k] * w2[k];
        set(Integral::EffectiveKinetic, total(a));
    }

    if (p.eps > 0.0) {
        const double eps = p.eps;
        const ScalarField v2 = norm_squared(s.v);
        const ScalarField u2 = norm_squared(s.u);
        const ScalarField gv2 = jacobian(s.v).frobenius_squared();
        const ScalarField gr2 = norm_squared(gradient(s.rho));
        std::array<ScalarField, 9> f;
        for (auto& x : f) x = ScalarField(g);
        for (std::size_t k = 0; k < cells; ++k) {
            const double n = s.n[k];
            const double r = s.rho[k];
            const double inv12 = std::pow(n, -12.0);
            const double q2 = q[k] * q[k];
            f[0][k] = eps * inv12 - eps * (q[k] + q2);
            f[1][k] = std::sqrt(eps) * n * gv2[k];
            f[2][k] = eps * n * v2[k] * v2[k] * std::sqrt(v2[k]);
            f[3][k] = eps * (1.0 + v2[k]) * (q[k] + q2);
            f[4][k] = eps * inv12 * v2[k];
            f[5][k] = eps * eps * std::pow(n, -25.0);
            f[6][k] = eps * std::pow(u2[k], 5.0);
            f[7][k] = eps * gr2[k];
            double pw = p.gamma * std::pow(r, p.gamma - 2.0);
            if (p.delta > 0.0) pw += p.delta * p.gamma0 * std::pow(r, p.gamma0 - 2.0);
            f[8][k] = eps * pw * gr2[k];
        }
        const Integral order[9] = {Integral::MassSource, Integral::EpsNGradV2, Integral::EpsNV5,
                                   Integral::EpsRootTerms, Integral::EpsN12V2, Integral::Eps2N25,
                                   Integral::EpsU10, Integral::EpsGradRho2, Integral::EpsPressureGradRho};
        for (std::size_t i = 0; i < 9; ++i) set(order[i], total(f[i]));
    }
    return out;
}

} // namespace twophase
