#pragma once

// Functionals monitored along a run: energy and its dissipation, the
// Bresch-Desjardins and Mellet-Vasseur quantities, conservation integrals,
// the equilibrium constants and the distance to them, the modified energy
// built on the phase-mean velocities, and density integrability.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "twophase/grid.hpp"
#include "twophase/init_data.hpp"
#include "twophase/model.hpp"

namespace twophase {

/// n log n - n + 1 with 0 log 0 = 0; series expansion near n = 1.
double entropy_density(double n);

double energy(const State& s, const ModelParams& p);
/// int kappa n|v-u|^2 + mu |grad u|^2 + (mu+lambda)(div u)^2, signed.
double dissipation_rate(const State& s, const ModelParams& p);
/// int eta n |D(v)|^2, reported separately from dissipation_rate.
double particle_viscous_dissipation(const State& s, const ModelParams& p);
/// int |grad sqrt(n)|^2.
double bd_entropy(const State& s);
/// int n (1+|v|^2) log(1+|v|^2).
double mellet_vasseur(const State& s);

struct ConservedQuantities {
    double mass_n = 0.0;
    double mass_rho = 0.0;
    std::vector<double> momentum; ///< int (n v + rho u)
};
ConservedQuantities conserved(const State& s);

struct EquilibriumState {
    double n_c = 0.0;
    double rho_c = 0.0;
    std::vector<double> u_c;
};
/// Throws ZeroMass if either phase has zero total mass.
EquilibriumState equilibrium(const RawInitialData& raw);

/// int n|v-u_c|^2 + |n-n_c|^p_exp + rho|u-u_c|^2 + |rho-rho_c|^gamma.
double distance_to_equilibrium(const State& s, const EquilibriumState& eq, double p_exp, const ModelParams& p);

/// Phase-mean velocities m1 = int nv / int n, m2 = int rho u / int rho and
/// the coupling constant C = int n0 int rho0 / int (n0 + rho0).
struct PhaseMeans {
    std::vector<double> m1;
    std::vector<double> m2;
    double coupling = 0.0;
};
PhaseMeans phase_means(const State& s, const RawInitialData& raw);
double modified_energy(const State& s, const RawInitialData& raw, const ModelParams& p);

/// w = v + (eta + sqrt(eps)) grad log n. Throws PositivityError if n <= 0.
VectorField effective_velocity(const State& s, const ModelParams& p);

struct Integrability {
    double rho_gamma_plus1 = 0.0;      ///< int int rho^(gamma+1)
    double rho_hi = 0.0;               ///< int int rho^(5 gamma/3 - 1)
    double delta_rho_gamma0_plus1 = 0.0; ///< delta int int rho^(gamma0+1)
    double delta_rho_hi = 0.0;         ///< delta int int rho^(gamma0 + 2 gamma/3 - 1)
};
/// Trapezoid-in-time over time-ordered samples.
Integrability integrability(std::span<const State> samples, const ModelParams& p);

/// One sampled row. CSV column order follows the member order; momentum
/// expands to one column per axis.
struct DiagnosticsRecord {
    double t = 0.0;
    double E = 0.0;
    double E_tilde = 0.0;
    double D = 0.0;
    double BD = 0.0;
    double MV = 0.0;
    double mass_n = 0.0;
    double mass_rho = 0.0;
    std::vector<double> momentum_total;
    double n_min = 0.0;
    double n_max = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    double dist_eq = 0.0;
    double rho_gamma_plus1 = 0.0;
    double rho_hi = 0.0;

    bool all_finite() const;
};

std::vector<std::string> csv_header(int dim);
std::string csv_row(const DiagnosticsRecord& r);

/// Spatial integrands accumulated in time along a run.
enum class Integral : std::size_t {
    Dissipation,        ///< kappa n|v-u|^2 + mu|grad u|^2 + (mu+lambda)(div u)^2
    ParticleViscous,    ///< eta n |D(v)|^2
    BD,                 ///< |grad sqrt n|^2
    MassSource,         ///< eps n^-12 - eps (|grad sqrt n|^2 + |grad sqrt n|^4)
    EpsNGradV2,         ///< sqrt(eps) n |grad v|^2
    EpsNV5,             ///< eps n |v|^5
    EpsRootTerms,       ///< eps (1+|v|^2)(|grad sqrt n|^2 + |grad sqrt n|^4)
    EpsN12V2,           ///< eps n^-12 |v|^2
    Eps2N25,            ///< eps^2 n^-25
    EpsU10,             ///< eps |u|^10
    EpsGradRho2,        ///< eps |grad rho|^2
    EpsPressureGradRho, ///< eps (gamma rho^(gamma-2) + delta gamma0 rho^(gamma0-2)) |grad rho|^2
    RhoGammaPlus1,      ///< rho^(gamma+1)
    RhoHi,              ///< rho^(5 gamma/3 - 1)
    DeltaRhoGamma0,     ///< delta rho^gamma0
    DeltaRhoGamma0Plus1,///< delta rho^(gamma0+1)
    DeltaRhoHi,         ///< delta rho^(gamma0 + 2 gamma/3 - 1)
    EffectiveKinetic,   ///< n |w|^2 with w the effective velocity
    Count
};
inline constexpr std::size_t kIntegralCount = static_cast<std::size_t>(Integral::Count);
using IntegralArray = std::array<double, kIntegralCount>;
const char* integral_name(Integral which);

class DiagnosticsSuite {
public:
    /// reference: data at t = 0, used for the equilibrium constants and the
    /// coupling constant of the modified energy.
    DiagnosticsSuite(ModelParams params, RawInitialData reference, double p_exp = 2.0);

    DiagnosticsRecord sample(const State& s) const;
    /// Instantaneous spatial integrals of every Integral entry.
    IntegralArray integrands(const State& s) const;

    const ModelParams& params() const noexcept { return params_; }
    const RawInitialData& reference() const noexcept { return reference_; }
    const EquilibriumState& equilibrium_state() const noexcept { return equilibrium_; }
    double p_exp() const noexcept { return p_exp_; }

private:
    ModelParams params_;
    RawInitialData reference_;
    EquilibriumState equilibrium_;
    double p_exp_;
};

} // namespace twophase
