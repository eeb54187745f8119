#pragma once

// Independent single-phase compressible Navier-Stokes right-hand side on a
// periodic grid, written without the library operators.

#include <cmath>
#include <vector>

#include "twophase/model.hpp"

namespace testing {

// Periodic centered difference written out independently of the library.
inline double d0(const std::vector<double>& f, int N, int dim, int axis, int idx) {
    int stride = 1;
    for (int a = 0; a < axis; ++a) stride *= N;
    const int coord = (idx / stride) % N;
    const int up = idx + (((coord + 1) % N) - coord) * stride;
    const int dn = idx + (((coord - 1 + N) % N) - coord) * stride;
    (void)dim;
    return (f[static_cast<std::size_t>(up)] - f[static_cast<std::size_t>(dn)]) * (0.5 * N);
}

// Single-phase compressible Navier-Stokes oracle:
//   rho_t = -div(rho u)
//   u_t   = -(u.grad) u + (-grad(A rho^gamma) + mu lap u + (mu+lambda) grad div u) / rho
// with lap = div grad and every derivative the centered difference.
inline void single_phase_oracle(int N, int dim, const std::vector<double>& rho, const std::vector<std::vector<double>>& u,
                                const twophase::ModelParams& p, std::vector<double>& drho, std::vector<std::vector<double>>& du) {
    const int cells = static_cast<int>(rho.size());
    std::vector<double> P(rho.size());
    for (int k = 0; k < cells; ++k) P[static_cast<std::size_t>(k)] = p.A * std::pow(rho[static_cast<std::size_t>(k)], p.gamma);

    drho.assign(rho.size(), 0.0);
    for (int a = 0; a < dim; ++a) {
        std::vector<double> flux(rho.size());
        for (int k = 0; k < cells; ++k)
            flux[static_cast<std::size_t>(k)] = rho[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
        for (int k = 0; k < cells; ++k) drho[static_cast<std::size_t>(k)] -= d0(flux, N, dim, a, k);
    }

    std::vector<double> div(rho.size(), 0.0);
    for (int a = 0; a < dim; ++a)
        for (int k = 0; k < cells; ++k) div[static_cast<std::size_t>(k)] += d0(u[static_cast<std::size_t>(a)], N, dim, a, k);

    du.assign(static_cast<std::size_t>(dim), std::vector<double>(rho.size(), 0.0));
    for (int i = 0; i < dim; ++i) {
        const auto& ui = u[static_cast<std::size_t>(i)];
        std::vector<double> lap(rho.size(), 0.0);
        for (int a = 0; a < dim; ++a) {
            std::vector<double> g(rho.size());
            for (int k = 0; k < cells; ++k) g[static_cast<std::size_t>(k)] = d0(ui, N, dim, a, k);
            for (int k = 0; k < cells; ++k) lap[static_cast<std::size_t>(k)] += d0(g, N, dim, a, k);
        }
        for (int k = 0; k < cells; ++k) {
            const std::size_t s = static_cast<std::size_t>(k);
            double adv = 0.0;
            for (int a = 0; a < dim; ++a) adv += u[static_cast<std::size_t>(a)][s] * d0(ui, N, dim, a, k);
            const double force = -d0(P, N, dim, i, k) + p.mu * lap[s] + (p.mu + p.lambda) * d0(div, N, dim, i, k);
            du[static_cast<std::size_t>(i)][s] = -adv + force / rho[s];
        }
    }
}

} // namespace testing
