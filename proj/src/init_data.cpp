#include "twophase/init_data.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <limits>
#include <sstream>

#include "twophase/errors.hpp"
#include "twophase/diagnostics.hpp"

namespace twophase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Periodized Gaussian profile at distance r in [0, 1/2].
double periodized_gaussian(double r, double sigma) {
    const int images = static_cast<int>(std::ceil(10.0 * sigma)) + 2;
    double s = 0.0;
    // Pair +k and -k so the result is exactly even in r.
    for (int k = images; k >= 1; --k) {
        const double a = (r - k) / sigma;
        const double b = (r + k) / sigma;
        s += std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b);
    }
    const double c = r / sigma;
    return s + std::exp(-0.5 * c * c);
}

std::vector<std::array<int, 3>> cell_coordinates(const PeriodicGrid& g) {
    std::vector<std::array<int, 3>> out(g.cell_count());
    for (std::size_t c = 0; c < g.cell_count(); ++c)
        for (int a = 0; a < g.dim(); ++a) out[c][static_cast<std::size_t>(a)] = g.coordinate_index(c, a);
    return out;
}

double periodic_distance(double x, double c) {
    double d = std::abs(x - c);
    return std::min(d, 1.0 - d);
}

double bump(const std::array<double, 3>& x, const std::array<double, 3>& center, int dim, double width) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double d = periodic_distance(x[static_cast<std::size_t>(a)], center[static_cast<std::size_t>(a)]);
        r2 += d * d;
    }
    const double s = r2 / (width * width);
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s));
}

// Uniform in [-1, 1) from the top 53 bits; independent of the standard
// library's distribution implementation.
double unit_symmetric(std::mt19937_64& rng) {
    return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

ScalarField random_smooth_field(const PeriodicGrid& g, std::mt19937_64& rng, int cutoff) {
    struct Mode {
        int axis;
        int k;
        double a;
        double b;
    };
    std::vector<Mode> modes;
    double total = 0.0;
    for (int a = 0; a < g.dim(); ++a)
        for (int k = 1; k <= cutoff; ++k) {
            Mode m{a, k, unit_symmetric(rng), unit_symmetric(rng)};
            total += std::abs(m.a) + std::abs(m.b);
            modes.push_back(m);
        }
    ScalarField out(g);
    if (total == 0.0) return out;
    for (std::size_t c = 0; c < out.size(); ++c) {
        const auto x = g.position(c);
        double s = 0.0;
        for (const Mode& m : modes) {
            const double ph = kTwoPi * m.k * x[static_cast<std::size_t>(m.axis)];
            s += m.a * std::cos(ph) + m.b * std::sin(ph);
        }
        out[c] = s / total;
    }
    return out;
}

} // namespace

MollifierKernel build_mollifier(double delta, const PeriodicGrid& grid, double gamma0, double gradient_constant) {
    if (!(delta > 0.0 && delta < 1.0))
        throw Error(ErrorCode::InvalidArgument, "mollifier delta must lie in (0, 1)");
    if (!(gamma0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "mollifier gamma0 must be positive");

    const int dim = grid.dim();
    const int n = grid.points_per_axis();
    const double h = grid.spacing();

    MollifierKernel j;
    j.delta = delta;
    j.gamma0 = gamma0;
    j.width = std::max(std::pow(delta, 1.0 / (2.0 * gamma0 * dim)), std::pow(delta, 1.0 / 16.0));
    j.sup_bound = std::pow(delta, -1.0 / (2.0 * gamma0));

    if (j.width < 2.0 * h) {
        std::ostringstream os;
        os << "mollifier width " << j.width << " is not resolved by h = " << h;
        throw ConstraintViolation(os.str());
    }

    std::vector<double> profile(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) profile[static_cast<std::size_t>(i)] = periodized_gaussian(std::min(i, n - i) * h, j.width);

    j.values = ScalarField(grid);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= profile[static_cast<std::size_t>(grid.coordinate_index(c, a))];
        j.values[c] = v;
    }
    const double mass = integrate(j.values);
    j.values *= 1.0 / mass;
    j.mass_error = std::abs(integrate(j.values) - 1.0);

    if (j.mass_error > 1e-12) {
        std::ostringstream os;
        os << "mollifier mass error " << j.mass_error << " exceeds 1e-12";
        throw ConstraintViolation(os.str());
    }
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        if (!(j.values[c] >= 0.0) || j.values[c] > j.sup_bound) {
            std::ostringstream os;
            os << "mollifier value " << j.values[c] << " at cell " << c << " outside [0, " << j.sup_bound
               << "] for delta = " << delta;
            throw ConstraintViolation(os.str());
        }
    }
    const double scale = std::pow(delta, -1.0 / 8.0);
    const VectorField grad = gradient(j.values);
    const ScalarField grad2 = norm_squared(grad);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const double ratio = std::sqrt(grad2[c]) / (scale * j.values[c]);
        j.witnessed_gradient_constant = std::max(j.witnessed_gradient_constant, ratio);
    }
    if (!(j.witnessed_gradient_constant <= gradient_constant)) {
        std::ostringstream os;
        os << "mollifier gradient ratio " << j.witnessed_gradient_constant << " exceeds C = " << gradient_constant
           << " for delta = " << delta;
        throw ConstraintViolation(os.str());
    }
    return j;
}

ScalarField convolve(const ScalarField& f, const MollifierKernel& j) {
    const PeriodicGrid& g = f.grid();
    if (!(g == j.values.grid())) throw Error(ErrorCode::InvalidArgument, "convolve: grid mismatch");
    const auto coords = cell_coordinates(g);
    const int n = g.points_per_axis();
    std::array<std::size_t, 3> stride{g.stride(0), g.dim() > 1 ? g.stride(1) : 0, g.dim() > 2 ? g.stride(2) : 0};
    const double vol = g.cell_volume();
    ScalarField out(g);
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
        double s = 0.0;
        for (std::size_t m = 0; m < g.cell_count(); ++m) {
            std::size_t idx = 0;
            for (int a = 0; a < g.dim(); ++a) {
                const auto sa = static_cast<std::size_t>(a);
                idx += static_cast<std::size_t>((coords[i][sa] - coords[m][sa] + n) % n) * stride[sa];
            }
            s += j.values[idx] * f[m];
        }
        out[i] = s * vol;
    }
    return out;
}

VectorField convolve(const VectorField& f, const MollifierKernel& j) {
    std::vector<ScalarField> comps;
    for (int i = 0; i < f.dim(); ++i) comps.push_back(convolve(f[i], j));
    return VectorField(std::move(comps));
}

void check_vacuum_compatibility(const RawInitialData& raw) {
    const PeriodicGrid& g = raw.grid();
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        for (int i = 0; i < g.dim(); ++i) {
            if (raw.n0[c] == 0.0 && raw.m0[i][c] != 0.0) {
                std::ostringstream os;
                os << "particle momentum " << raw.m0[i][c] << " is nonzero on the vacuum set of n0 at cell " << c;
                throw VacuumMismatch(os.str());
            }
            if (raw.rho0[c] == 0.0 && raw.m0_tilde[i][c] != 0.0) {
                std::ostringstream os;
                os << "fluid momentum " << raw.m0_tilde[i][c] << " is nonzero on the vacuum set of rho0 at cell " << c;
                throw VacuumMismatch(os.str());
            }
        }
    }
}

RegularizedInitialData regularize(const RawInitialData& raw, double delta, const MollifierKernel& j) {
    const PeriodicGrid& g = raw.grid();
    if (raw.n0.first_below(0.0) || raw.rho0.first_below(0.0))
        throw PositivityError("raw initial densities must be nonnegative");
    check_vacuum_compatibility(raw);
    const int d = g.dim();
    const std::size_t cells = g.cell_count();
    const double eta0 = raw.eta0;

    ScalarField root(g);
    for (std::size_t c = 0; c < cells; ++c) root[c] = std::sqrt(raw.n0[c]);
    const ScalarField root_smooth = convolve(root, j);
    const double lift_n = std::pow(delta, 0.01);

    RegularizedInitialData reg;
    reg.n0d = ScalarField(g);
    for (std::size_t c = 0; c < cells; ++c) reg.n0d[c] = root_smooth[c] * root_smooth[c] + lift_n;

    // n0^(-(1+eta0)/(2+eta0)) m0, zero on the vacuum set.
    const double weight_exp = -(1.0 + eta0) / (2.0 + eta0);
    VectorField weighted(g);
    for (int i = 0; i < d; ++i)
        for (std::size_t c = 0; c < cells; ++c)
            weighted[i][c] = raw.n0[c] > 0.0 ? std::pow(raw.n0[c], weight_exp) * raw.m0[i][c] : 0.0;
    const VectorField weighted_smooth = convolve(weighted, j);
    reg.v0d = VectorField(g);
    for (int i = 0; i < d; ++i)
        for (std::size_t c = 0; c < cells; ++c)
            reg.v0d[i][c] = weighted_smooth[i][c] / std::pow(reg.n0d[c], 1.0 / (2.0 + eta0));

    reg.rho0d = convolve(raw.rho0, j);
    for (std::size_t c = 0; c < cells; ++c) reg.rho0d[c] += delta;

    VectorField fluid(g);
    for (int i = 0; i < d; ++i)
        for (std::size_t c = 0; c < cells; ++c)
            fluid[i][c] = raw.rho0[c] > 0.0 ? raw.m0_tilde[i][c] / std::sqrt(raw.rho0[c]) : 0.0;
    const VectorField fluid_smooth = convolve(fluid, j);
    reg.u0d = VectorField(g);
    for (int i = 0; i < d; ++i)
        for (std::size_t c = 0; c < cells; ++c) reg.u0d[i][c] = fluid_smooth[i][c] / std::sqrt(reg.rho0d[c]);
    return reg;
}

double initial_energy(const RegularizedInitialData& reg, const ModelParams& p) {
    const PeriodicGrid& g = reg.n0d.grid();
    if (reg.n0d.first_below(std::numeric_limits<double>::min()) || reg.rho0d.first_below(std::numeric_limits<double>::min()))
        throw PositivityError("initial_energy requires strictly positive regularized densities");
    const ScalarField v2 = norm_squared(reg.v0d);
    const ScalarField u2 = norm_squared(reg.u0d);
    ScalarField e(g);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const double n = reg.n0d[c];
        const double r = reg.rho0d[c];
        double x = 0.5 * n * v2[c] + entropy_density(n) + 0.5 * r * u2[c] + p.A * std::pow(r, p.gamma) / (p.gamma - 1.0);
        if (p.delta > 0.0) x += p.delta * std::pow(r, p.gamma0) / (p.gamma0 - 1.0);
        if (p.eps > 0.0) x += p.eps * std::pow(n, -12.0);
        e[c] = x;
    }
    return integrate(e);
}

InitialDataDistances initial_data_distances(const RawInitialData& raw, const RegularizedInitialData& reg,
                                            double gamma) {
    const PeriodicGrid& g = raw.grid();
    const std::size_t cells = g.cell_count();
    const double eta0 = raw.eta0;
    InitialDataDistances out;

    ScalarField diff(g);
    for (std::size_t c = 0; c < cells; ++c) diff[c] = std::abs(reg.n0d[c] - raw.n0[c]);
    out.n_L1 = integrate(diff);

    ScalarField root_raw(g), root_reg(g);
    for (std::size_t c = 0; c < cells; ++c) {
        root_raw[c] = std::sqrt(raw.n0[c]);
        root_reg[c] = std::sqrt(reg.n0d[c]);
    }
    const VectorField grad_raw = gradient(root_raw);
    const VectorField grad_reg = gradient(root_reg);
    for (std::size_t c = 0; c < cells; ++c) {
        double s = 0.0;
        for (int i = 0; i < g.dim(); ++i) {
            const double dd = grad_reg[i][c] - grad_raw[i][c];
            s += dd * dd;
        }
        diff[c] = s;
    }
    out.grad_sqrt_n_L2 = std::sqrt(integrate(diff));

    const ScalarField v2 = norm_squared(reg.v0d);
    const ScalarField m2 = norm_squared(raw.m0);
    for (std::size_t c = 0; c < cells; ++c) {
        const double target = raw.n0[c] > 0.0 ? m2[c] / raw.n0[c] : 0.0;
        diff[c] = std::abs(reg.n0d[c] * v2[c] - target);
    }
    out.n_v2_L1 = integrate(diff);

    for (std::size_t c = 0; c < cells; ++c) {
        const double target =
            raw.n0[c] > 0.0 ? std::pow(std::sqrt(m2[c]), 2.0 + eta0) / std::pow(raw.n0[c], 1.0 + eta0) : 0.0;
        diff[c] = std::abs(reg.n0d[c] * std::pow(std::sqrt(v2[c]), 2.0 + eta0) - target);
    }
    out.n_v_high_L1 = integrate(diff);

    for (std::size_t c = 0; c < cells; ++c) diff[c] = std::pow(std::abs(reg.rho0d[c] - raw.rho0[c]), gamma);
    out.rho_Lgamma = std::pow(integrate(diff), 1.0 / gamma);

    const ScalarField u2 = norm_squared(reg.u0d);
    const ScalarField mt2 = norm_squared(raw.m0_tilde);
    for (std::size_t c = 0; c < cells; ++c) {
        const double target = raw.rho0[c] > 0.0 ? mt2[c] / raw.rho0[c] : 0.0;
        diff[c] = std::abs(reg.rho0d[c] * u2[c] - target);
    }
    out.rho_u2_L1 = integrate(diff);
    return out;
}

State state_from_raw(const RawInitialData& raw) {
    const PeriodicGrid& g = raw.grid();
    State s{raw.n0, VectorField(g), raw.rho0, VectorField(g), 0.0};
    for (int i = 0; i < g.dim(); ++i)
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            s.v[i][c] = raw.n0[c] > 0.0 ? raw.m0[i][c] / raw.n0[c] : 0.0;
            s.u[i][c] = raw.rho0[c] > 0.0 ? raw.m0_tilde[i][c] / raw.rho0[c] : 0.0;
        }
    return s;
}

State state_from_regularized(const RegularizedInitialData& reg) {
    return State{reg.n0d, reg.v0d, reg.rho0d, reg.u0d, 0.0};
}

RawInitialData raw_from_state(const State& s, double eta0) {
    const PeriodicGrid& g = s.grid();
    RawInitialData raw{s.n, VectorField(g), s.rho, VectorField(g), eta0};
    for (int i = 0; i < g.dim(); ++i)
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            raw.m0[i][c] = s.n[c] * s.v[i][c];
            raw.m0_tilde[i][c] = s.rho[c] * s.u[i][c];
        }
    return raw;
}

RawInitialData generate(const GeneratorSpec& spec, const PeriodicGrid& g) {
    const int d = g.dim();
    const std::size_t cells = g.cell_count();
    if (!(spec.n_bar > 0.0) || !(spec.rho_bar > 0.0))
        throw ConfigError("initial.n_bar and initial.rho_bar must be positive");
    if (!(spec.eta0 > 0.0)) throw ConfigError("initial.eta0 must be positive");

    RawInitialData raw{ScalarField(g), VectorField(g), ScalarField(g), VectorField(g), spec.eta0};
    const double a = spec.amplitude;

    if (spec.name == "equilibrium") {
        for (std::size_t c = 0; c < cells; ++c) {
            raw.n0[c] = spec.n_bar;
            raw.rho0[c] = spec.rho_bar;
            for (int i = 0; i < d; ++i) {
                raw.m0[i][c] = spec.n_bar * spec.v_bar[static_cast<std::size_t>(i)];
                raw.m0_tilde[i][c] = spec.rho_bar * spec.u_bar[static_cast<std::size_t>(i)];
            }
        }
    } else if (spec.name == "sine-perturbation") {
        if (!(a >= 0.0 && a < 1.0)) throw ConfigError("initial.amplitude must lie in [0, 1) for sine-perturbation");
        if (spec.mode < 1) throw ConfigError("initial.mode must be >= 1");
        for (std::size_t c = 0; c < cells; ++c) {
            const auto x = g.position(c);
            double sin_mean = 0.0, cos_mean = 0.0;
            for (int i = 0; i < d; ++i) {
                const double ph = kTwoPi * spec.mode * x[static_cast<std::size_t>(i)];
                sin_mean += std::sin(ph) / d;
                cos_mean += std::cos(ph) / d;
            }
            raw.n0[c] = spec.n_bar * (1.0 + a * sin_mean);
            raw.rho0[c] = spec.rho_bar * (1.0 + a * cos_mean);
            for (int i = 0; i < d; ++i) {
                const auto si = static_cast<std::size_t>(i);
                const double ph = kTwoPi * spec.mode * x[si];
                raw.m0[i][c] = raw.n0[c] * (spec.v_bar[si] + a * std::sin(ph));
                raw.m0_tilde[i][c] = raw.rho0[c] * (spec.u_bar[si] - a * std::cos(ph));
            }
        }
    } else if (spec.name == "two-bump") {
        if (!(spec.width > 0.0 && spec.width < 0.25)) throw ConfigError("initial.width must lie in (0, 0.25)");
        const std::array<double, 3> left{0.3, 0.5, 0.5};
        const std::array<double, 3> right{0.7, 0.5, 0.5};
        const double base = spec.vacuum ? 0.0 : 0.5;
        for (std::size_t c = 0; c < cells; ++c) {
            const auto x = g.position(c);
            const double b1 = bump(x, left, d, spec.width);
            const double b2 = bump(x, right, d, spec.width);
            raw.n0[c] = spec.n_bar * (base + b1 + b2);
            raw.rho0[c] = spec.rho_bar * (base + b1 + b2);
            for (int i = 0; i < d; ++i) {
                const auto si = static_cast<std::size_t>(i);
                const double toward = i == 0 ? a * (b1 - b2) : 0.0;
                raw.m0[i][c] = spec.n_bar * toward + raw.n0[c] * spec.v_bar[si];
                raw.m0_tilde[i][c] = -spec.rho_bar * toward + raw.rho0[c] * spec.u_bar[si];
            }
        }
    } else if (spec.name == "random-smooth") {
        if (!(a >= 0.0 && a < 1.0)) throw ConfigError("initial.amplitude must lie in [0, 1) for random-smooth");
        if (spec.cutoff_mode < 1) throw ConfigError("initial.cutoff_mode must be >= 1");
        std::mt19937_64 rng(spec.seed);
        const ScalarField rn = random_smooth_field(g, rng, spec.cutoff_mode);
        const ScalarField rr = random_smooth_field(g, rng, spec.cutoff_mode);
        for (std::size_t c = 0; c < cells; ++c) {
            raw.n0[c] = spec.n_bar * (1.0 + a * rn[c]);
            raw.rho0[c] = spec.rho_bar * (1.0 + a * rr[c]);
        }
        for (int i = 0; i < d; ++i) {
            const auto si = static_cast<std::size_t>(i);
            const ScalarField rv = random_smooth_field(g, rng, spec.cutoff_mode);
            const ScalarField ru = random_smooth_field(g, rng, spec.cutoff_mode);
            for (std::size_t c = 0; c < cells; ++c) {
                raw.m0[i][c] = raw.n0[c] * (spec.v_bar[si] + a * rv[c]);
                raw.m0_tilde[i][c] = raw.rho0[c] * (spec.u_bar[si] + a * ru[c]);
            }
        }
    } else {
        throw ConfigError("unknown initial generator '" + spec.name +
                          "' (expected equilibrium, sine-perturbation, two-bump, random-smooth)");
    }
    return raw;
}

} // namespace twophase
