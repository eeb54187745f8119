#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "twophase/grid.hpp"
#include "twophase/model.hpp"

namespace testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Least-squares slope of log(err) against log(h).
inline double fitted_order(const std::vector<int>& ns, const std::vector<double>& errs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(ns.size());
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const double x = std::log(1.0 / ns[k]);
        const double y = std::log(errs[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline double max_diff(const twophase::ScalarField& a, const twophase::ScalarField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

inline twophase::ScalarField random_field(const twophase::PeriodicGrid& g, std::uint64_t seed, double lo = -1.0,
                                          double hi = 1.0) {
    std::mt19937_64 rng(seed);
    twophase::ScalarField f(g);
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return f;
}

inline twophase::VectorField random_vector(const twophase::PeriodicGrid& g, std::uint64_t seed) {
    std::vector<twophase::ScalarField> c;
    for (int i = 0; i < g.dim(); ++i) c.push_back(random_field(g, seed + 7919 * (i + 1)));
    return twophase::VectorField(std::move(c));
}

// Smooth strictly positive state built from low modes.
inline twophase::State smooth_state(const twophase::PeriodicGrid& g, double amp = 0.2) {
    using twophase::ScalarField;
    auto wave = [&](double phase, double scale) {
        return ScalarField::sample(g, [&](const std::array<double, 3>& x) {
            double s = 0.0;
            for (int a = 0; a < g.dim(); ++a) s += std::sin(kTwoPi * x[static_cast<std::size_t>(a)] + phase * (a + 1));
            return scale * s;
        });
    };
    twophase::State s;
    s.n = wave(0.3, amp);
    s.rho = wave(1.1, amp);
    for (std::size_t k = 0; k < s.n.size(); ++k) {
        s.n[k] += 1.0;
        s.rho[k] += 1.2;
    }
    std::vector<ScalarField> v, u;
    for (int i = 0; i < g.dim(); ++i) {
        v.push_back(wave(0.7 + i, amp));
        u.push_back(wave(2.0 + i, -amp));
    }
    s.v = twophase::VectorField(std::move(v));
    s.u = twophase::VectorField(std::move(u));
    s.t = 0.0;
    return s;
}

} // namespace testing
