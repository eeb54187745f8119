#pragma once

// Mollifier family, regularized initial data and built-in initial-data
// generators.

#include <array>
#include <cstdint>
#include <string>

#include "twophase/grid.hpp"
#include "twophase/model.hpp"

namespace twophase {

/// Fixed constant C in |grad j| <= C delta^(-1/8) j, checked at construction.
inline constexpr double kMollifierGradientConstant = 1.0;

/// Periodized Gaussian of width max(delta^(1/(2 gamma0 dim)), delta^(1/16)),
/// centered at cell 0 and discretely normalized to unit mass.
struct MollifierKernel {
    double delta = 0.0;
    double gamma0 = 0.0;
    double width = 0.0;
    ScalarField values;
    /// delta^(-1/(2 gamma0)).
    double sup_bound = 0.0;
    /// max over cells of |grad_h j| / (delta^(-1/8) j).
    double witnessed_gradient_constant = 0.0;
    /// |sum(j) h^dim - 1| after renormalization.
    double mass_error = 0.0;
};

MollifierKernel build_mollifier(double delta, const PeriodicGrid& grid, double gamma0,
                                double gradient_constant = kMollifierGradientConstant);

/// Periodic discrete convolution (j * f)(x_i) = sum_m j(x_i - x_m) f(x_m) h^dim.
ScalarField convolve(const ScalarField& f, const MollifierKernel& j);
VectorField convolve(const VectorField& f, const MollifierKernel& j);

struct RawInitialData {
    ScalarField n0;
    VectorField m0;
    ScalarField rho0;
    VectorField m0_tilde;
    double eta0 = 0.01;

    const PeriodicGrid& grid() const noexcept { return n0.grid(); }
};

struct RegularizedInitialData {
    ScalarField n0d;
    VectorField v0d;
    ScalarField rho0d;
    VectorField u0d;
};

/// Throws VacuumMismatch if a momentum is nonzero where its density vanishes.
void check_vacuum_compatibility(const RawInitialData& raw);

RegularizedInitialData regularize(const RawInitialData& raw, double delta, const MollifierKernel& j);

/// Regularized initial energy, including the delta rho^gamma0/(gamma0-1) and
/// eps n^-12 terms.
double initial_energy(const RegularizedInitialData& reg, const ModelParams& p);

/// Distances between regularized and raw data that vanish as delta -> 0.
struct InitialDataDistances {
    double n_L1 = 0.0;               ///< |n0d - n0|_L1
    double grad_sqrt_n_L2 = 0.0;     ///< |grad sqrt(n0d) - grad sqrt(n0)|_L2
    double n_v2_L1 = 0.0;            ///< |n0d |v0d|^2 - |m0|^2/n0|_L1
    double rho_Lgamma = 0.0;         ///< |rho0d - rho0|_L^gamma
    double rho_u2_L1 = 0.0;          ///< |rho0d |u0d|^2 - |m0~|^2/rho0|_L1
    double n_v_high_L1 = 0.0;        ///< |n0d |v0d|^(2+eta0) - |m0|^(2+eta0)/n0^(1+eta0)|_L1
};

InitialDataDistances initial_data_distances(const RawInitialData& raw, const RegularizedInitialData& reg,
                                            double gamma);

/// State with v = m0/n0 and u = m0~/rho0 (0 on vacuum), t = 0.
State state_from_raw(const RawInitialData& raw);
State state_from_regularized(const RegularizedInitialData& reg);
/// Inverse of state_from_raw: momenta n v and rho u.
RawInitialData raw_from_state(const State& s, double eta0 = 0.01);

struct GeneratorSpec {
    std::string name = "equilibrium"; ///< equilibrium | sine-perturbation | two-bump | random-smooth
    double amplitude = 0.1;
    int mode = 1;
    double n_bar = 1.0;
    double rho_bar = 1.0;
    std::array<double, 3> v_bar{0.0, 0.0, 0.0};
    std::array<double, 3> u_bar{0.0, 0.0, 0.0};
    bool vacuum = false;
    double width = 0.15;
    std::uint64_t seed = 0;
    int cutoff_mode = 4;
    double eta0 = 0.01;
};

/// Throws ConfigError for unknown names or inadmissible parameters.
RawInitialData generate(const GeneratorSpec& spec, const PeriodicGrid& grid);

} // namespace twophase
