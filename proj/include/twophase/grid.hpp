#pragma once

// Periodic uniform grid on the unit torus and the centered-difference
// calculus used by every other module.
//
// Cells are collocated at x_i = i * h, h = 1 / N, on every axis. Axis 0 is
// the fastest-varying index of the flat storage.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace twophase {

class PeriodicGrid {
public:
    PeriodicGrid() = default;
    /// Throws InvalidArgument unless dim is in {1,2,3} and points_per_axis >= 8.
    PeriodicGrid(int dim, int points_per_axis);

    int dim() const noexcept { return dim_; }
    int points_per_axis() const noexcept { return n_; }
    double spacing() const noexcept { return 1.0 / n_; }
    double cell_volume() const noexcept;
    std::size_t cell_count() const noexcept { return count_; }
    std::size_t stride(int axis) const noexcept;

    int coordinate_index(std::size_t cell, int axis) const noexcept;
    std::array<double, 3> position(std::size_t cell) const noexcept;

    friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) noexcept {
        return a.dim_ == b.dim_ && a.n_ == b.n_;
    }

private:
    int dim_ = 1;
    int n_ = 8;
    std::size_t count_ = 8;
};

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const PeriodicGrid& grid, double fill = 0.0);
    ScalarField(const PeriodicGrid& grid, std::vector<double> values);

    /// Samples f(position) at every cell.
    template <typename F>
    static ScalarField sample(const PeriodicGrid& grid, F&& f) {
        ScalarField out(grid);
        for (std::size_t c = 0; c < grid.cell_count(); ++c) out.values_[c] = f(grid.position(c));
        return out;
    }

    const PeriodicGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    double min() const;
    double max() const;
    double max_abs() const;
    bool all_finite() const;
    /// First cell whose value is < threshold, if any.
    std::optional<std::size_t> first_below(double threshold) const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double a);

private:
    PeriodicGrid grid_;
    std::vector<double> values_;
};

class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const PeriodicGrid& grid, double fill = 0.0);
    /// Every cell gets the same vector (only the first dim entries are used).
    VectorField(const PeriodicGrid& grid, std::span<const double> constant);
    explicit VectorField(std::vector<ScalarField> components);

    const PeriodicGrid& grid() const noexcept { return grid_; }
    int dim() const noexcept { return grid_.dim(); }
    ScalarField& operator[](int i) noexcept { return components_[static_cast<std::size_t>(i)]; }
    const ScalarField& operator[](int i) const noexcept {
        return components_[static_cast<std::size_t>(i)];
    }

    double max_norm() const;
    bool all_finite() const;

private:
    PeriodicGrid grid_;
    std::vector<ScalarField> components_;
};

/// dim x dim field; component (i, j).
class TensorField {
public:
    TensorField() = default;
    TensorField(const PeriodicGrid& grid, bool symmetric);

    const PeriodicGrid& grid() const noexcept { return grid_; }
    int dim() const noexcept { return grid_.dim(); }
    bool symmetric() const noexcept { return symmetric_; }
    ScalarField& operator()(int i, int j) noexcept { return components_[index(i, j)]; }
    const ScalarField& operator()(int i, int j) const noexcept { return components_[index(i, j)]; }

    /// Cellwise sum over (i,j) of component^2.
    ScalarField frobenius_squared() const;

private:
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(i * grid_.dim() + j);
    }
    PeriodicGrid grid_;
    bool symmetric_ = false;
    std::vector<ScalarField> components_;
};

// Centered second-order periodic differences. divergence is the negative
// adjoint of gradient, and laplacian is divergence(gradient(f)).
void partial_into(const ScalarField& f, int axis, ScalarField& out);
ScalarField partial(const ScalarField& f, int axis);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& F);
ScalarField laplacian(const ScalarField& f);
/// J(i, j) = d_i v_j.
TensorField jacobian(const VectorField& v);
/// (d_i v_j + d_j v_i) / 2, flagged symmetric.
TensorField deformation(const VectorField& v);
/// (d_i v_j - d_j v_i) / 2.
TensorField antisym(const VectorField& v);
/// Row divergence: out_i = sum_j d_j T(i, j).
VectorField divergence(const TensorField& T);

/// Cell sum times h^dim.
double integrate(const ScalarField& f);
std::vector<double> integrate(const VectorField& F);

ScalarField dot(const VectorField& a, const VectorField& b);
ScalarField norm_squared(const VectorField& a);
ScalarField trace(const TensorField& T);

/// Periodic translation by k cells along an axis: out(i) = f(i - k).
ScalarField shift(const ScalarField& f, int axis, int k);
VectorField shift(const VectorField& F, int axis, int k);

} // namespace twophase
