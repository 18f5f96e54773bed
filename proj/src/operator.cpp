#include "sso/operator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sso {

OperatorParams::OperatorParams(double a1, double a2) : alpha1(a1), alpha2(a2) {
    if (!(a1 >= 0.0 && a1 < 0.5) || !(a2 >= 0.0 && a2 < 0.5)) {
        throw std::invalid_argument("OperatorParams: alpha1, alpha2 must lie in [0, 0.5)");
    }
}

SparseSym assemble(const Grid& grid, const OperatorParams& params, const GridFunction& V) {
    if (!(V.grid() == grid)) {
        throw std::invalid_argument("assemble: potential grid mismatch");
    }
    for (double v : V.values()) {
        if (v < 0.0) {
            throw std::invalid_argument("assemble: potential must be nonnegative");
        }
    }

    const int nx = grid.nx;
    const int ny = grid.ny;
    const double inv_hx2 = 1.0 / (grid.hx * grid.hx);
    const double inv_hy2 = 1.0 / (grid.hy * grid.hy);

    // Coefficient in the x-direction depends only on y_j, and vice versa, so
    // the stencil is symmetric without averaging.
    std::vector<double> wx(static_cast<size_t>(ny));
    std::vector<double> wy(static_cast<size_t>(nx));
    for (int j = 0; j < ny; ++j) wx[static_cast<size_t>(j)] = std::pow(grid.y(j), 2.0 * params.alpha1) * inv_hx2;
    for (int i = 0; i < nx; ++i) wy[static_cast<size_t>(i)] = std::pow(grid.x(i), 2.0 * params.alpha2) * inv_hy2;

    std::vector<Triplet> entries;
    entries.reserve(5 * static_cast<size_t>(nx) * static_cast<size_t>(ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int k = grid.index(i, j);
            entries.push_back({k, k, 2.0 * wx[static_cast<size_t>(j)] + 2.0 * wy[static_cast<size_t>(i)] + V[k]});
            if (i > 0) entries.push_back({k, grid.index(i - 1, j), -wx[static_cast<size_t>(j)]});
            if (i + 1 < nx) entries.push_back({k, grid.index(i + 1, j), -wx[static_cast<size_t>(j)]});
            if (j > 0) entries.push_back({k, grid.index(i, j - 1), -wy[static_cast<size_t>(i)]});
            if (j + 1 < ny) entries.push_back({k, grid.index(i, j + 1), -wy[static_cast<size_t>(i)]});
        }
    }
    return SparseSym::from_triplets(nx * ny, entries);
}

SparseSym assemble(const Grid& grid, const OperatorParams& params, const Potential& V) {
    return assemble(grid, params, V.data);
}

double bilinear_a1(const Grid& grid, const OperatorParams& params,
                   const GridFunction& u, const GridFunction& v) {
    if (!(u.grid() == grid) || !(v.grid() == grid)) {
        throw std::invalid_argument("bilinear_a1: grid mismatch");
    }
    const int nx = grid.nx;
    const int ny = grid.ny;
    const double cell = grid.hx * grid.hy;
    double sum = 0.0;

    // x-edges, including the two edges touching the zero boundary per row.
    for (int j = 0; j < ny; ++j) {
        const double w = std::pow(grid.y(j), 2.0 * params.alpha1) / (grid.hx * grid.hx);
        for (int i = 0; i <= nx; ++i) {
            const double du = (i < nx ? u.at(i, j) : 0.0) - (i > 0 ? u.at(i - 1, j) : 0.0);
            const double dv = (i < nx ? v.at(i, j) : 0.0) - (i > 0 ? v.at(i - 1, j) : 0.0);
            sum += w * du * dv;
        }
    }
    // y-edges.
    for (int i = 0; i < nx; ++i) {
        const double w = std::pow(grid.x(i), 2.0 * params.alpha2) / (grid.hy * grid.hy);
        for (int j = 0; j <= ny; ++j) {
            const double du = (j < ny ? u.at(i, j) : 0.0) - (j > 0 ? u.at(i, j - 1) : 0.0);
            const double dv = (j < ny ? v.at(i, j) : 0.0) - (j > 0 ? v.at(i, j - 1) : 0.0);
            sum += w * du * dv;
        }
    }
    return cell * sum;
}

double bilinear_a(const Grid& grid, const OperatorParams& params, const Potential& V,
                  const GridFunction& u, const GridFunction& v) {
    if (!(V.data.grid() == grid)) {
        throw std::invalid_argument("bilinear_a: potential grid mismatch");
    }
    double weighted = 0.0;
    for (int k = 0; k < grid.size(); ++k) weighted += V.data[k] * u[k] * v[k];
    return bilinear_a1(grid, params, u, v) + grid.hx * grid.hy * weighted;
}

namespace {

struct JParts {
    double l2_sq = 0.0;      // ||u||_{L^2}^2
    double u2q_sum = 0.0;    // hx*hy * sum |u|^{2q}
    double a1_uu = 0.0;
    double j = 0.0;
    double u2_q_norm = 0.0;  // ||u^2||_{L^q} = (u2q_sum)^{1/q}
};

JParts j_parts(const Grid& grid, const OperatorParams& params, double M, double q,
               const GridFunction& u) {
    if (!(q > 1.0)) {
        throw std::invalid_argument("j_functional: q must be > 1");
    }
    JParts parts;
    const double cell = grid.hx * grid.hy;
    double s2 = 0.0;
    double s2q = 0.0;
    for (double v : u.values()) {
        s2 += v * v;
        s2q += std::pow(std::abs(v), 2.0 * q);
    }
    parts.l2_sq = cell * s2;
    if (parts.l2_sq == 0.0) {
        throw std::invalid_argument("j_functional: u must not be identically zero");
    }
    parts.u2q_sum = cell * s2q;
    parts.u2_q_norm = std::pow(parts.u2q_sum, 1.0 / q);
    parts.a1_uu = bilinear_a1(grid, params, u, u);
    parts.j = (parts.a1_uu + M * parts.u2_q_norm) / parts.l2_sq;
    return parts;
}

} // namespace

double j_functional(const Grid& grid, const OperatorParams& params, double M, double q,
                    const GridFunction& u) {
    return j_parts(grid, params, M, q, u).j;
}

GridFunction j_gradient(const Grid& grid, const OperatorParams& params, double M, double q,
                        const GridFunction& u) {
    return j_gradient(grid, params, M, q, u, assemble(grid, params, GridFunction(grid, 0.0)));
}

GridFunction j_gradient(const Grid& grid, const OperatorParams& params, double M, double q,
                        const GridFunction& u, const SparseSym& A0) {
    const JParts parts = j_parts(grid, params, M, q, u);
    std::vector<double> Lu = A0.matvec(u.values());

    // ||u^2||_q^{1-q}; with u normalized this is O(1), but guard the M = 0
    // case where the factor is irrelevant.
    const double weight = (M != 0.0) ? M * std::pow(parts.u2q_sum, (1.0 - q) / q) : 0.0;

    GridFunction g(grid);
    for (int k = 0; k < grid.size(); ++k) {
        const double uk = u[k];
        const double nonlinear = (weight != 0.0)
                                     ? weight * std::pow(std::abs(uk), 2.0 * q - 2.0) * uk
                                     : 0.0;
        g[k] = (2.0 / parts.l2_sq) * (Lu[static_cast<size_t>(k)] + nonlinear - parts.j * uk);
    }
    return g;
}

double j_gateaux(const Grid& grid, const OperatorParams& params, double M, double q,
                 const GridFunction& u, const GridFunction& psi) {
    if (!(psi.grid() == grid)) {
        throw std::invalid_argument("j_gateaux: direction grid mismatch");
    }
    const JParts parts = j_parts(grid, params, M, q, u);
    const double cell = grid.hx * grid.hy;

    double cross_2q = 0.0; // int |u|^{2q-2} u psi
    double cross_2 = 0.0;  // int u psi
    for (int k = 0; k < grid.size(); ++k) {
        const double uk = u[k];
        cross_2 += uk * psi[k];
        cross_2q += std::pow(std::abs(uk), 2.0 * q - 2.0) * uk * psi[k];
    }
    cross_2 *= cell;
    cross_2q *= cell;

    const double m_term =
        (M != 0.0) ? M * std::pow(parts.u2q_sum, (1.0 - q) / q) * cross_2q : 0.0;
    return (2.0 / parts.l2_sq) *
           (bilinear_a1(grid, params, u, psi) + m_term - parts.j * cross_2);
}

Spectrum eigenpairs(const Grid& grid, const OperatorParams& params, const Potential& V,
                    int k, const LobpcgOptions& opts) {
    const SparseSym A = assemble(grid, params, V);
    Spectrum spec = lobpcg_smallest(A, k, opts);
    // Unit Euclidean vectors become unit discrete-L^2 grid functions.
    const double scale = 1.0 / std::sqrt(grid.hx * grid.hy);
    for (EigenPair& pair : spec.pairs) {
        for (double& v : pair.vector) v *= scale;
    }
    return spec;
}

GridFunction eigenvector_function(const Grid& grid, const EigenPair& pair) {
    return GridFunction(grid, pair.vector);
}

} // namespace sso
