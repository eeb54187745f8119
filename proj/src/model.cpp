#include "twophase/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "twophase/errors.hpp"

namespace twophase {

namespace {

std::string cell_message(const char* what, const PeriodicGrid& g, std::size_t cell, double value, double t) {
    std::ostringstream os;
    os << what << " at cell " << cell << " (";
    for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << g.coordinate_index(cell, a);
    os << "), value " << value << ", t = " << t;
    return os.str();
}

void require_positive(const ScalarField& f, const char* name, double t) {
    if (auto bad = f.first_below(std::numeric_limits<double>::min())) {
        const std::string what = std::string("nonpositive density ") + name;
        if (!std::isfinite(f[*bad])) throw NumericalBlowup(cell_message(what.c_str(), f.grid(), *bad, f[*bad], t));
        throw PositivityError(cell_message(what.c_str(), f.grid(), *bad, f[*bad], t));
    }
}

void require_finite(const StateDerivative& d, double t) {
    bool ok = d.dn.all_finite() && d.drho.all_finite() && d.dv.all_finite() && d.du.all_finite();
    if (!ok) {
        std::ostringstream os;
        os << "non-finite time derivative at t = " << t;
        throw NumericalBlowup(os.str());
    }
}

// out_i = sum_j a_j J(j, i), i.e. (a . grad) w for J = jacobian(w).
VectorField directional(const VectorField& a, const TensorField& J) {
    VectorField out(a.grid());
    const int d = a.dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (std::size_t k = 0; k < out[i].size(); ++k) out[i][k] += a[j][k] * J(j, i)[k];
    return out;
}

StateDerivative rhs_impl(const State& s, const ModelParams& p, const RhsOptions& opt, bool regularized) {
    s.check_consistent();
    require_positive(s.n, "n", s.t);
    require_positive(s.rho, "rho", s.t);
    const bool eps_on = regularized && p.eps > 0.0;
    if (eps_on && s.n.min() < opt.degenerate_floor) {
        auto cell = *s.n.first_below(opt.degenerate_floor);
        throw DegenerateDensity(cell_message("n below degenerate floor", s.grid(), cell, s.n[cell], s.t));
    }

    const PeriodicGrid& g = s.grid();
    const int d = g.dim();
    const std::size_t cells = g.cell_count();

    StateDerivative out{ScalarField(g), VectorField(g), ScalarField(g), VectorField(g)};

    // Mass equations in flux form.
    VectorField flux_n(g), flux_rho(g);
    for (int i = 0; i < d; ++i)
        for (std::size_t k = 0; k < cells; ++k) {
            flux_n[i][k] = s.n[k] * s.v[i][k];
            flux_rho[i][k] = s.rho[k] * s.u[i][k];
        }
    out.dn = divergence(flux_n);
    out.dn *= -1.0;
    out.drho = divergence(flux_rho);
    out.drho *= -1.0;

    const VectorField F = drag(s.n, s.v, s.u, p.kappa);

    // Particle momentum.
    const TensorField Jv = jacobian(s.v);
    const VectorField adv_v = directional(s.v, Jv);
    const VectorField grad_n = gradient(s.n);
    TensorField nD(g, true);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (std::size_t k = 0; k < cells; ++k) nD(i, j)[k] = s.n[k] * 0.5 * (Jv(i, j)[k] + Jv(j, i)[k]);
    const VectorField visc_v = divergence(nD);
    for (int i = 0; i < d; ++i)
        for (std::size_t k = 0; k < cells; ++k)
            out.dv[i][k] = -adv_v[i][k] + (-grad_n[i][k] - F[i][k] + p.eta * visc_v[i][k]) / s.n[k];

    // Fluid momentum.
    const TensorField Ju = jacobian(s.u);
    const VectorField adv_u = directional(s.u, Ju);
    const VectorField grad_p = gradient(pressure(s.rho, p, s.t));
    VectorField visc_u(g);
    if (!opt.exclude_linear_diffusion) visc_u = momentum_diffusion(s.u, p);
    for (int i = 0; i < d; ++i)
        for (std::size_t k = 0; k < cells; ++k)
            out.du[i][k] = -adv_u[i][k] + (-grad_p[i][k] + F[i][k] + visc_u[i][k]) / s.rho[k];

    if (eps_on) {
        const double eps = p.eps;
        const double sqrt_eps = std::sqrt(eps);

        ScalarField root(g);
        for (std::size_t k = 0; k < cells; ++k) root[k] = std::sqrt(s.n[k]);
        const VectorField grad_root = gradient(root);
        const ScalarField q = norm_squared(grad_root);
        VectorField q_grad_root(g);
        for (int i = 0; i < d; ++i)
            for (std::size_t k = 0; k < cells; ++k) q_grad_root[i][k] = q[k] * grad_root[i][k];
        const ScalarField lap_root = divergence(grad_root);
        const ScalarField div_q = divergence(q_grad_root);

        ScalarField inv12(g);
        for (std::size_t k = 0; k < cells; ++k) inv12[k] = std::pow(s.n[k], -12.0);

        for (std::size_t k = 0; k < cells; ++k)
            out.dn[k] += eps * (root[k] * lap_root[k] + root[k] * div_q[k] + inv12[k]);

        // eps n |v|^3 v + eps n^-12 v on the left; sqrt(eps) div(n grad v) and
        // eps sqrt(n) |grad sqrt n|^2 (grad sqrt n . grad) v on the right.
        const ScalarField v2 = norm_squared(s.v);
        const VectorField cross = directional(grad_root, Jv);
        ScalarField tmp(g);
        for (int i = 0; i < d; ++i) {
            ScalarField visc_eps(g);
            for (int j = 0; j < d; ++j) {
                ScalarField flux(g);
                for (std::size_t k = 0; k < cells; ++k) flux[k] = s.n[k] * Jv(j, i)[k];
                partial_into(flux, j, tmp);
                visc_eps += tmp;
            }
            for (std::size_t k = 0; k < cells; ++k) {
                const double speed3 = v2[k] * std::sqrt(v2[k]);
                const double extra = -eps * s.n[k] * speed3 * s.v[i][k] - eps * inv12[k] * s.v[i][k] +
                                     sqrt_eps * visc_eps[k] + eps * root[k] * q[k] * cross[i][k];
                out.dv[i][k] += extra / s.n[k];
            }
        }

        if (!opt.exclude_linear_diffusion) {
            const ScalarField lap_rho = laplacian(s.rho);
            for (std::size_t k = 0; k < cells; ++k) out.drho[k] += eps * lap_rho[k];
        }

        // -eps |u|^8 u + eps (grad rho . grad) u
        const ScalarField u2 = norm_squared(s.u);
        const VectorField grad_rho = gradient(s.rho);
        const VectorField rho_cross = directional(grad_rho, Ju);
        for (int i = 0; i < d; ++i)
            for (std::size_t k = 0; k < cells; ++k) {
                const double u8 = (u2[k] * u2[k]) * (u2[k] * u2[k]);
                out.du[i][k] += (-eps * u8 * s.u[i][k] + eps * rho_cross[i][k]) / s.rho[k];
            }
    }

    require_finite(out, s.t);
    return out;
}

} // namespace

void ModelParams::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    auto finite = [&](double x, const char* name) {
        if (!std::isfinite(x)) fail(std::string(name) + " must be finite");
    };
    finite(kappa, "kappa");
    finite(eta, "eta");
    finite(mu, "mu");
    finite(lambda, "lambda");
    finite(A, "A");
    finite(gamma, "gamma");
    finite(gamma0, "gamma0");
    finite(eps, "eps");
    finite(delta, "delta");
    if (!(kappa > 0)) fail("kappa must satisfy kappa>0");
    if (!(eta > 0)) fail("eta must satisfy eta>0");
    if (!(mu > 0)) fail("mu must satisfy mu>0");
    if (!(2 * mu + lambda > 0)) fail("lambda must satisfy 2mu+lambda>0");
    if (!(A > 0)) fail("A must satisfy A>0");
    if (!(gamma > 1.5)) fail("gamma must satisfy gamma>3/2");
    if (!(eps >= 0 && eps < 0.25)) fail("eps must lie in [0, 1/4)");
    if (!(delta >= 0 && delta < 1)) fail("delta must lie in [0, 1)");
    if (delta > 0 && !(gamma0 > gamma + 4)) fail("gamma0 must satisfy gamma0>gamma+4 when delta>0");
}

void State::check_consistent() const {
    const PeriodicGrid& g = n.grid();
    bool ok = rho.grid() == g && v.grid() == g && u.grid() == g && n.size() == g.cell_count() &&
              rho.size() == g.cell_count() && v.dim() == g.dim() && u.dim() == g.dim();
    if (!ok) throw Error(ErrorCode::InvalidArgument, "state fields do not share one grid");
}

bool State::all_finite() const {
    return n.all_finite() && rho.all_finite() && v.all_finite() && u.all_finite() && std::isfinite(t);
}

ScalarField pressure(const ScalarField& rho, const ModelParams& p, double t) {
    if (auto bad = rho.first_below(0.0))
        throw PositivityError(cell_message("negative density rho", rho.grid(), *bad, rho[*bad], t));
    ScalarField out(rho.grid());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = p.A * std::pow(rho[k], p.gamma);
        if (p.delta > 0.0) out[k] += p.delta * std::pow(rho[k], p.gamma0);
    }
    return out;
}

double pressure_derivative(double rho, const ModelParams& p) {
    double dp = p.A * p.gamma * std::pow(rho, p.gamma - 1.0);
    if (p.delta > 0.0) dp += p.delta * p.gamma0 * std::pow(rho, p.gamma0 - 1.0);
    return dp;
}

VectorField drag(const ScalarField& n, const VectorField& v, const VectorField& u, double kappa) {
    VectorField out(n.grid());
    for (int i = 0; i < out.dim(); ++i)
        for (std::size_t k = 0; k < n.size(); ++k) out[i][k] = kappa * n[k] * (v[i][k] - u[i][k]);
    return out;
}

VectorField momentum_diffusion(const VectorField& u, const ModelParams& p) {
    const PeriodicGrid& g = u.grid();
    VectorField out(g);
    const VectorField grad_div = gradient(divergence(u));
    for (int i = 0; i < u.dim(); ++i) {
        const ScalarField lap = laplacian(u[i]);
        for (std::size_t k = 0; k < g.cell_count(); ++k)
            out[i][k] = p.mu * lap[k] + (p.mu + p.lambda) * grad_div[i][k];
    }
    return out;
}

StateDerivative rhs_original(const State& s, const ModelParams& p, const RhsOptions& opt) {
    if (!p.original())
        throw Error(ErrorCode::InvalidArgument, "rhs_original requires eps == delta == 0");
    return rhs_impl(s, p, opt, false);
}

StateDerivative rhs_regularized(const State& s, const ModelParams& p, const RhsOptions& opt) {
    return rhs_impl(s, p, opt, true);
}

StateDerivative rhs(const State& s, const ModelParams& p, const RhsOptions& opt) {
    return p.original() ? rhs_original(s, p, opt) : rhs_regularized(s, p, opt);
}

} // namespace twophase
