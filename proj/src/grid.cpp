#include "sso/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sso {

Grid make_grid(int nx, int ny) {
    if (nx < 2 || ny < 2) {
        throw std::invalid_argument("make_grid: nx and ny must be >= 2, got nx=" +
                                    std::to_string(nx) + " ny=" + std::to_string(ny));
    }
    Grid g;
    g.nx = nx;
    g.ny = ny;
    g.hx = 1.0 / (nx + 1);
    g.hy = 1.0 / (ny + 1);
    return g;
}

GridFunction::GridFunction(const Grid& grid, double fill)
    : grid_(grid), values_(static_cast<size_t>(grid.size()), fill) {}

GridFunction::GridFunction(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid.size()) {
        throw std::invalid_argument("GridFunction: value count " +
                                    std::to_string(values_.size()) +
                                    " does not match grid size " +
                                    std::to_string(grid.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("GridFunction: non-finite nodal value");
        }
    }
}

GridFunction GridFunction::sample(const Grid& grid,
                                  const std::function<double(double, double)>& f) {
    GridFunction out(grid);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            out.at(i, j) = f(grid.x(i), grid.y(j));
        }
    }
    return out;
}

double integrate(const GridFunction& f) {
    double sum = 0.0;
    for (double v : f.values()) sum += v;
    return f.grid().hx * f.grid().hy * sum;
}

double lp_norm(const GridFunction& f, double p) {
    if (p < 1.0) {
        throw std::invalid_argument("lp_norm: p must be >= 1, got " + std::to_string(p));
    }
    double sum = 0.0;
    if (p == 2.0) {
        for (double v : f.values()) sum += v * v;
        return std::sqrt(f.grid().hx * f.grid().hy * sum);
    }
    if (p == 1.0) {
        for (double v : f.values()) sum += std::abs(v);
        return f.grid().hx * f.grid().hy * sum;
    }
    for (double v : f.values()) sum += std::pow(std::abs(v), p);
    return std::pow(f.grid().hx * f.grid().hy * sum, 1.0 / p);
}

double inner_product(const GridFunction& f, const GridFunction& g) {
    if (!(f.grid() == g.grid())) {
        throw std::invalid_argument("inner_product: grid mismatch");
    }
    double sum = 0.0;
    auto fv = f.values();
    auto gv = g.values();
    for (size_t k = 0; k < fv.size(); ++k) sum += fv[k] * gv[k];
    return f.grid().hx * f.grid().hy * sum;
}

Potential::Potential(GridFunction values, double p_in, double M_in)
    : data(std::move(values)), p(p_in), M(M_in), q(p_in / (p_in - 1.0)) {
    if (!(p > 1.0)) {
        throw std::invalid_argument("Potential: p must be > 1, got " + std::to_string(p));
    }
    if (!(M > 0.0)) {
        throw std::invalid_argument("Potential: M must be > 0, got " + std::to_string(M));
    }
    for (double v : data.values()) {
        if (v < 0.0) {
            throw std::invalid_argument("Potential: nodal values must be >= 0");
        }
    }
}

bool Potential::feasible() const {
    return lp_norm(data, p) <= M * (1.0 + 1e-12);
}

} // namespace sso
