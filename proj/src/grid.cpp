#include "twophase/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twophase/errors.hpp"

namespace twophase {

namespace {

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* where) {
    if (!(a == b)) throw Error(ErrorCode::InvalidArgument, std::string(where) + ": grid mismatch");
}

} // namespace

PeriodicGrid::PeriodicGrid(int dim, int points_per_axis) : dim_(dim), n_(points_per_axis) {
    if (dim < 1 || dim > 3)
        throw Error(ErrorCode::InvalidArgument, "grid dim must be 1, 2 or 3, got " + std::to_string(dim));
    if (points_per_axis < 8)
        throw Error(ErrorCode::InvalidArgument,
                    "grid needs at least 8 points per axis, got " + std::to_string(points_per_axis));
    count_ = 1;
    for (int a = 0; a < dim; ++a) count_ *= static_cast<std::size_t>(n_);
}

double PeriodicGrid::cell_volume() const noexcept {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing();
    return v;
}

std::size_t PeriodicGrid::stride(int axis) const noexcept {
    std::size_t s = 1;
    for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(n_);
    return s;
}

int PeriodicGrid::coordinate_index(std::size_t cell, int axis) const noexcept {
    return static_cast<int>((cell / stride(axis)) % static_cast<std::size_t>(n_));
}

std::array<double, 3> PeriodicGrid::position(std::size_t cell) const noexcept {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) x[static_cast<std::size_t>(a)] = coordinate_index(cell, a) * spacing();
    return x;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const PeriodicGrid& grid, double fill)
    : grid_(grid), values_(grid.cell_count(), fill) {}

ScalarField::ScalarField(const PeriodicGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.cell_count())
        throw Error(ErrorCode::InvalidArgument,
                    "scalar field has " + std::to_string(values_.size()) + " values, grid needs " +
                        std::to_string(grid_.cell_count()));
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

std::optional<std::size_t> ScalarField::first_below(double threshold) const {
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!(values_[i] >= threshold)) return i;
    return std::nullopt;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double a) {
    for (double& x : values_) x *= a;
    return *this;
}

// ---------------------------------------------------------------------------

VectorField::VectorField(const PeriodicGrid& grid, double fill)
    : grid_(grid), components_(static_cast<std::size_t>(grid.dim()), ScalarField(grid, fill)) {}

VectorField::VectorField(const PeriodicGrid& grid, std::span<const double> constant) : grid_(grid) {
    if (constant.size() < static_cast<std::size_t>(grid.dim()))
        throw Error(ErrorCode::InvalidArgument, "constant vector shorter than grid dim");
    for (int i = 0; i < grid.dim(); ++i)
        components_.emplace_back(grid, constant[static_cast<std::size_t>(i)]);
}

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
    if (components_.empty()) throw Error(ErrorCode::InvalidArgument, "vector field needs components");
    grid_ = components_.front().grid();
    if (components_.size() != static_cast<std::size_t>(grid_.dim()))
        throw Error(ErrorCode::InvalidArgument, "vector field component count must equal grid dim");
    for (const auto& c : components_) require_same_grid(grid_, c.grid(), "VectorField");
}

double VectorField::max_norm() const {
    double m = 0.0;
    const ScalarField n2 = norm_squared(*this);
    for (double x : n2.values()) m = std::max(m, x);
    return std::sqrt(m);
}

bool VectorField::all_finite() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const ScalarField& c) { return c.all_finite(); });
}

TensorField::TensorField(const PeriodicGrid& grid, bool symmetric)
    : grid_(grid), symmetric_(symmetric),
      components_(static_cast<std::size_t>(grid.dim() * grid.dim()), ScalarField(grid)) {}

ScalarField TensorField::frobenius_squared() const {
    ScalarField out(grid_);
    for (const auto& c : components_)
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += c[k] * c[k];
    return out;
}

// ---------------------------------------------------------------------------

void partial_into(const ScalarField& f, int axis, ScalarField& out) {
    const PeriodicGrid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw Error(ErrorCode::InvalidArgument, "partial: bad axis");
    if (!(out.grid() == g) || out.size() != f.size()) out = ScalarField(g);
    const std::size_t n = static_cast<std::size_t>(g.points_per_axis());
    const std::size_t s = g.stride(axis);
    const std::size_t block = s * n;
    const double inv2h = 0.5 * n;
    const double* in = f.values().data();
    double* res = out.values().data();
    for (std::size_t base = 0; base < g.cell_count(); base += block) {
        for (std::size_t inner = 0; inner < s; ++inner) {
            const std::size_t o = base + inner;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t ip = (i + 1 == n) ? 0 : i + 1;
                const std::size_t im = (i == 0) ? n - 1 : i - 1;
                res[o + i * s] = (in[o + ip * s] - in[o + im * s]) * inv2h;
            }
        }
    }
}

ScalarField partial(const ScalarField& f, int axis) {
    ScalarField out(f.grid());
    partial_into(f, axis, out);
    return out;
}

VectorField gradient(const ScalarField& f) {
    std::vector<ScalarField> comps;
    comps.reserve(static_cast<std::size_t>(f.grid().dim()));
    for (int a = 0; a < f.grid().dim(); ++a) comps.push_back(partial(f, a));
    return VectorField(std::move(comps));
}

ScalarField divergence(const VectorField& F) {
    ScalarField out(F.grid());
    ScalarField tmp(F.grid());
    for (int a = 0; a < F.dim(); ++a) {
        partial_into(F[a], a, tmp);
        out += tmp;
    }
    return out;
}

ScalarField laplacian(const ScalarField& f) { return divergence(gradient(f)); }

TensorField jacobian(const VectorField& v) {
    TensorField J(v.grid(), false);
    for (int i = 0; i < v.dim(); ++i)
        for (int j = 0; j < v.dim(); ++j) partial_into(v[j], i, J(i, j));
    return J;
}

TensorField deformation(const VectorField& v) {
    const TensorField J = jacobian(v);
    TensorField D(v.grid(), true);
    const int d = v.dim();
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            ScalarField& out = D(i, j);
            for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.5 * (J(i, j)[k] + J(j, i)[k]);
            if (j != i) D(j, i) = out;
        }
    }
    return D;
}

TensorField antisym(const VectorField& v) {
    const TensorField J = jacobian(v);
    TensorField A(v.grid(), false);
    const int d = v.dim();
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            ScalarField& up = A(i, j);
            ScalarField& lo = A(j, i);
            for (std::size_t k = 0; k < up.size(); ++k) {
                up[k] = 0.5 * (J(i, j)[k] - J(j, i)[k]);
                lo[k] = -up[k];
            }
        }
    }
    return A;
}

VectorField divergence(const TensorField& T) {
    VectorField out(T.grid());
    ScalarField tmp(T.grid());
    for (int i = 0; i < T.dim(); ++i)
        for (int j = 0; j < T.dim(); ++j) {
            partial_into(T(i, j), j, tmp);
            out[i] += tmp;
        }
    return out;
}

double integrate(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.values()) s += x;
    return s * f.grid().cell_volume();
}

std::vector<double> integrate(const VectorField& F) {
    std::vector<double> out;
    for (int i = 0; i < F.dim(); ++i) out.push_back(integrate(F[i]));
    return out;
}

ScalarField dot(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid(), b.grid(), "dot");
    ScalarField out(a.grid());
    for (int i = 0; i < a.dim(); ++i)
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += a[i][k] * b[i][k];
    return out;
}

ScalarField norm_squared(const VectorField& a) { return dot(a, a); }

ScalarField trace(const TensorField& T) {
    ScalarField out(T.grid());
    for (int i = 0; i < T.dim(); ++i) out += T(i, i);
    return out;
}

ScalarField shift(const ScalarField& f, int axis, int k) {
    const PeriodicGrid& g = f.grid();
    const int n = g.points_per_axis();
    const std::size_t s = g.stride(axis);
    ScalarField out(g);
    const int kk = ((k % n) + n) % n;
    for (std::size_t c = 0; c < f.size(); ++c) {
        const int i = g.coordinate_index(c, axis);
        const int src = (i - kk + n) % n;
        out[c] = f[c - static_cast<std::size_t>(i) * s + static_cast<std::size_t>(src) * s];
    }
    return out;
}

VectorField shift(const VectorField& F, int axis, int k) {
    std::vector<ScalarField> comps;
    for (int i = 0; i < F.dim(); ++i) comps.push_back(shift(F[i], axis, k));
    return VectorField(std::move(comps));
}

} // namespace twophase
