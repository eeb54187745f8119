#pragma once

// Physical parameters, pressure law, drag coupling and the semi-discrete
// right-hand sides of the two-phase system and of its regularized
// approximation.
//
// Unknowns: (n, v) particle phase with degenerate viscosity eta*div(n D(v)),
// (rho, u) fluid phase with constant viscosities mu, lambda, exchanging
// momentum through the drag kappa*n*(v - u).

#include <string>

#include "twophase/grid.hpp"

namespace twophase {

struct ModelParams {
    double kappa = 1.0;  ///< drag coefficient
    double eta = 0.1;    ///< degenerate viscosity
    double mu = 0.1;     ///< shear viscosity
    double lambda = 0.0; ///< second viscosity
    double A = 1.0;      ///< pressure constant
    double gamma = 2.0;  ///< adiabatic exponent
    double gamma0 = 7.0; ///< artificial pressure exponent
    double eps = 0.0;    ///< artificial viscosity
    double delta = 0.0;  ///< artificial pressure weight

    /// eps == delta == 0, i.e. the unregularized system.
    bool original() const noexcept { return eps == 0.0 && delta == 0.0; }

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;
};

struct State {
    ScalarField n;
    VectorField v;
    ScalarField rho;
    VectorField u;
    double t = 0.0;

    const PeriodicGrid& grid() const noexcept { return n.grid(); }
    /// Throws InvalidArgument unless all four fields share one grid.
    void check_consistent() const;
    bool all_finite() const;
};

struct StateDerivative {
    ScalarField dn;
    VectorField dv;
    ScalarField drho;
    VectorField du;
};

struct RhsOptions {
    /// rhs_regularized refuses states with min n below this (n^-12 overflows).
    double degenerate_floor = 1e-12;
    /// Drop mu*lap(u), (mu+lambda)*grad(div u) and eps*lap(rho); the IMEX
    /// scheme treats those implicitly.
    bool exclude_linear_diffusion = false;
};

/// A rho^gamma + delta rho^gamma0. Throws PositivityError on a negative cell.
ScalarField pressure(const ScalarField& rho, const ModelParams& p, double t = 0.0);
/// dP/drho, used for the sound speed.
double pressure_derivative(double rho, const ModelParams& p);

/// kappa n (v - u). The fluid momentum gains it, the particle momentum loses it.
VectorField drag(const ScalarField& n, const VectorField& v, const VectorField& u, double kappa);

/// Primitive-variable time derivatives of the original system. Requires
/// eps == delta == 0 and strictly positive densities.
StateDerivative rhs_original(const State& s, const ModelParams& p, const RhsOptions& opt = {});

/// Time derivatives of the regularized system, every artificial term
/// included. With eps == delta == 0 this is bitwise rhs_original.
StateDerivative rhs_regularized(const State& s, const ModelParams& p, const RhsOptions& opt = {});

/// Dispatches on p.original().
StateDerivative rhs(const State& s, const ModelParams& p, const RhsOptions& opt = {});

/// (mu lap(u) + (mu+lambda) grad div u); the fluid-momentum diffusion operator.
VectorField momentum_diffusion(const VectorField& u, const ModelParams& p);

} // namespace twophase
