#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sso {

/// Uniform lattice of interior nodes on the unit square (0,1)^2.
/// Boundary nodes carry the homogeneous Dirichlet value and are never stored.
/// Node (i, j), 0-based, sits at ((i+1)*hx, (j+1)*hy); the linear index is
/// k = j*nx + i throughout the project.
struct Grid {
    int nx = 0;
    int ny = 0;
    double hx = 0.0;
    double hy = 0.0;

    int size() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    double x(int i) const { return (i + 1) * hx; }
    double y(int j) const { return (j + 1) * hy; }

    bool operator==(const Grid& other) const {
        return nx == other.nx && ny == other.ny;
    }
};

/// Throws std::invalid_argument unless nx >= 2 and ny >= 2 (the five-point
/// stencil needs at least one interior neighbor per direction).
Grid make_grid(int nx, int ny);

/// Real nodal values on the interior lattice of a Grid.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(const Grid& grid, double fill = 0.0);
    GridFunction(const Grid& grid, std::vector<double> values);

    static GridFunction sample(const Grid& grid,
                               const std::function<double(double, double)>& f);

    const Grid& grid() const { return grid_; }
    int size() const { return static_cast<int>(values_.size()); }

    double& operator[](int k) { return values_[static_cast<size_t>(k)]; }
    double operator[](int k) const { return values_[static_cast<size_t>(k)]; }
    double& at(int i, int j) { return values_[static_cast<size_t>(grid_.index(i, j))]; }
    double at(int i, int j) const { return values_[static_cast<size_t>(grid_.index(i, j))]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Midpoint-type quadrature: hx*hy * sum of nodal values. Exact for nodal
/// samples; boundary cells contribute nothing because u = 0 there.
double integrate(const GridFunction& f);

/// Discrete L^p norm (hx*hy * sum |f_k|^p)^(1/p); requires p >= 1.
double lp_norm(const GridFunction& f, double p);

/// Discrete L^2 scalar product hx*hy * sum f_k * g_k; grids must match.
double inner_product(const GridFunction& f, const GridFunction& g);

/// A nonnegative potential together with its constraint data: the budget M
/// for the L^p norm and the conjugate exponent q = p/(p-1).
struct Potential {
    GridFunction data;
    double p = 2.0;
    double M = 1.0;
    double q = 2.0;

    Potential() = default;
    /// Throws if p <= 1, M <= 0, or any nodal value is negative.
    Potential(GridFunction values, double p, double M);

    /// True when lp_norm(data, p) <= M * (1 + 1e-12).
    bool feasible() const;
};

} // namespace sso
