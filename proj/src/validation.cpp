#include "sso/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace sso {

std::vector<double> discrete_laplacian_spectrum(int nx, int ny) {
    const Grid grid = make_grid(nx, ny);
    std::vector<double> lambdas;
    lambdas.reserve(static_cast<size_t>(nx) * ny);
    for (int i = 1; i <= nx; ++i) {
        const double sx = std::sin(0.5 * i * std::numbers::pi * grid.hx);
        const double lx = 4.0 / (grid.hx * grid.hx) * sx * sx;
        for (int j = 1; j <= ny; ++j) {
            const double sy = std::sin(0.5 * j * std::numbers::pi * grid.hy);
            lambdas.push_back(lx + 4.0 / (grid.hy * grid.hy) * sy * sy);
        }
    }
    std::sort(lambdas.begin(), lambdas.end());
    return lambdas;
}

FdEstimate fd_directional_derivative(
    const std::function<double(const GridFunction&)>& functional,
    const GridFunction& point, const GridFunction& direction,
    const std::vector<double>& steps) {
    if (steps.empty()) {
        throw std::invalid_argument("fd_directional_derivative: empty step list");
    }
    const double pnorm = lp_norm(point, 2.0);
    const double dnorm = lp_norm(direction, 2.0);
    if (dnorm == 0.0) return {0.0, 0.0, true};
    const double scale = (pnorm > 0.0 ? pnorm : 1.0) / dnorm;

    const Grid& grid = point.grid();
    std::vector<double> estimates;
    std::vector<double> used;
    GridFunction shifted(grid);
    for (double rel : steps) {
        const double t = rel * scale;
        for (int k = 0; k < grid.size(); ++k) shifted[k] = point[k] + t * direction[k];
        const double fp = functional(shifted);
        for (int k = 0; k < grid.size(); ++k) shifted[k] = point[k] - t * direction[k];
        const double fm = functional(shifted);
        estimates.push_back((fp - fm) / (2.0 * t));
        used.push_back(t);
    }
    if (estimates.size() == 1) return {estimates[0], used[0], true};

    // Pick the estimate whose neighbor agrees best (truncation and roundoff
    // both inflate the successive discrepancy away from the sweet spot).
    size_t best = 1;
    double best_gap = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < estimates.size(); ++i) {
        const double gap = std::abs(estimates[i] - estimates[i - 1]);
        if (gap < best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    const double magnitude = std::max(std::abs(estimates[best]), 1e-300);
    return {estimates[best], used[best], best_gap <= 1e-2 * magnitude + 1e-14};
}

double poincare_probe(const Grid& grid, const OperatorParams& params,
                      const LobpcgOptions& opts) {
    const SparseSym A = assemble(grid, params, GridFunction(grid, 0.0));
    return lobpcg_smallest(A, 1, opts).pairs[0].lambda;
}

namespace {

GridFunction random_feasible_potential(const Grid& grid, double p, double M,
                                       std::mt19937_64& rng, double fill = 1.0) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    GridFunction V(grid);
    for (int k = 0; k < grid.size(); ++k) V[k] = unif(rng);
    const double norm = lp_norm(V, p);
    const double target = fill * M;
    for (int k = 0; k < grid.size(); ++k) V[k] *= target / norm;
    return V;
}

Grid capped_grid(const Grid& grid, int cap) {
    return make_grid(std::min(grid.nx, cap), std::min(grid.ny, cap));
}

} // namespace

std::vector<ProbeResult> run_probe_suite(const Grid& grid, const OperatorParams& params,
                                         double p, double M, const LobpcgOptions& opts) {
    std::vector<ProbeResult> probes;
    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ull);

    { // Closed-form full-spectrum oracle at the classical limit.
        const Grid g = make_grid(10, 10);
        const SparseSym A = assemble(g, OperatorParams(0.0, 0.0), GridFunction(g, 0.0));
        const Spectrum dense = dense_jacobi_eigen(A);
        const std::vector<double> exact = discrete_laplacian_spectrum(g.nx, g.ny);
        double worst = 0.0;
        for (size_t i = 0; i < exact.size(); ++i) {
            worst = std::max(worst, std::abs(dense.pairs[i].lambda - exact[i]));
        }
        probes.push_back({"laplacian_closed_form", worst <= 1e-10, worst, 1e-10,
                          "max |dense - closed form| over the full 10x10 spectrum"});
    }

    { // Iterative solver against the dense oracle with a random potential.
        const Grid g = make_grid(10, 10);
        const GridFunction V = random_feasible_potential(g, p, M, rng);
        const SparseSym A = assemble(g, params, V);
        const Spectrum dense = dense_jacobi_eigen(A);
        const Spectrum sparse = lobpcg_smallest(A, 3, opts);
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double exact = dense.pairs[static_cast<size_t>(i)].lambda;
            worst = std::max(worst,
                             std::abs(sparse.pairs[static_cast<size_t>(i)].lambda - exact) /
                                 std::abs(exact));
        }
        probes.push_back({"lobpcg_vs_dense", worst <= 1e-8, worst, 1e-8,
                          "max relative error of the 3 smallest eigenvalues"});
    }

    { // Discrete Poincare probe at the configured exponents.
        const double lambda = poincare_probe(grid, params, opts);
        probes.push_back({"poincare", lambda >= 1.0, lambda, 1.0,
                          "smallest eigenvalue with V = 0 (pass when >= 1)"});
    }

    { // CG consistency: recover a random solution.
        const SparseSym A = assemble(grid, params, GridFunction(grid, 0.0));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> x0(static_cast<size_t>(grid.size()));
        for (double& v : x0) v = gauss(rng);
        const std::vector<double> b = A.matvec(x0);
        const CgResult cg = cg_solve(A, b, 1e-12, 20000);
        double err = 0.0, ref = 0.0;
        for (size_t i = 0; i < x0.size(); ++i) {
            err += (cg.x[i] - x0[i]) * (cg.x[i] - x0[i]);
            ref += x0[i] * x0[i];
        }
        const double rel = std::sqrt(err / ref);
        probes.push_back({"cg_recovers_solution", rel <= 1e-6, rel, 1e-6,
                          "relative error recovering a random solution"});
    }

    { // Matvec adjoint symmetry.
        const SparseSym A = assemble(grid, params, GridFunction(grid, 0.0));
        std::normal_distribution<double> gauss(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(static_cast<size_t>(grid.size()));
            std::vector<double> z(static_cast<size_t>(grid.size()));
            for (double& v : x) v = gauss(rng);
            for (double& v : z) v = gauss(rng);
            const std::vector<double> Ax = A.matvec(x);
            const std::vector<double> Az = A.matvec(z);
            double xAz = 0.0, zAx = 0.0, scale = 0.0;
            for (size_t i = 0; i < x.size(); ++i) {
                xAz += x[i] * Az[i];
                zAx += z[i] * Ax[i];
                scale += std::abs(x[i] * Az[i]);
            }
            worst = std::max(worst, std::abs(xAz - zAx) / std::max(scale, 1e-300));
        }
        probes.push_back({"matvec_adjoint", worst <= 1e-12, worst, 1e-12,
                          "max relative asymmetry of x.Az - z.Ax over 20 probes"});
    }

    { // Spectrum shifts exactly with a constant potential.
        const Grid g = capped_grid(grid, 16);
        const GridFunction V = random_feasible_potential(g, p, M, rng);
        const Potential pot(V, p, M);
        GridFunction shifted_values = V;
        for (int k = 0; k < g.size(); ++k) shifted_values[k] += 1.0;
        const Spectrum base = eigenpairs(g, params, pot, 3, opts);
        const Spectrum shifted =
            eigenpairs(g, params, Potential(shifted_values, p, 2.0 * M + 2.0), 3, opts);
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            worst = std::max(worst, std::abs(shifted.pairs[static_cast<size_t>(i)].lambda -
                                             base.pairs[static_cast<size_t>(i)].lambda - 1.0));
        }
        probes.push_back({"shift_identity", worst <= 1e-6, worst, 1e-6,
                          "max |lambda(V+1) - lambda(V) - 1| for the 3 smallest"});
    }

    { // Spectral structure: positivity, simplicity, orthogonality.
        const GridFunction V = random_feasible_potential(grid, p, M, rng);
        const Spectrum spec = eigenpairs(grid, params, Potential(V, p, M), 3, opts);
        const double lambda1 = spec.pairs[0].lambda;
        const double gap = spec.pairs[1].lambda - lambda1;
        double u1_min = spec.pairs[0].vector[0];
        for (double v : spec.pairs[0].vector) u1_min = std::min(u1_min, v);
        double ortho = 0.0;
        for (size_t i = 0; i < spec.pairs.size(); ++i) {
            for (size_t j = i + 1; j < spec.pairs.size(); ++j) {
                double dot = 0.0;
                for (size_t k = 0; k < spec.pairs[i].vector.size(); ++k) {
                    dot += spec.pairs[i].vector[k] * spec.pairs[j].vector[k];
                }
                ortho = std::max(ortho, std::abs(dot * grid.hx * grid.hy));
            }
        }
        const bool pass = lambda1 > 0.0 && gap > 0.0 && u1_min > 0.0 && ortho <= 1e-10;
        probes.push_back({"spectral_structure", pass, u1_min, 0.0,
                          "lambda1 > 0, gap > 0, u1 > 0 at all nodes, orthogonality <= 1e-10"});
    }

    { // Rayleigh quotient reproduces each eigenvalue.
        const GridFunction V = random_feasible_potential(grid, p, M, rng);
        const Potential pot(V, p, M);
        const Spectrum spec = eigenpairs(grid, params, pot, 3, opts);
        double worst = 0.0;
        for (const EigenPair& pair : spec.pairs) {
            const GridFunction u(grid, pair.vector);
            const double rq = bilinear_a(grid, params, pot, u, u) / inner_product(u, u);
            const double allowed = 10.0 * pair.residual + 1e-12 * std::abs(pair.lambda);
            worst = std::max(worst, std::abs(rq - pair.lambda) - allowed);
        }
        probes.push_back({"rayleigh_consistency", worst <= 0.0, worst, 0.0,
                          "slack of |a(u,u)/||u||^2 - lambda| <= 10 residual"});
    }

    { // Dense Jacobi preserves the trace.
        const int n = 30;
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<Triplet> entries;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double v = 0.1 * gauss(rng);
                entries.push_back({i, j, v});
                entries.push_back({j, i, v});
            }
            entries.push_back({i, i, 10.0 + gauss(rng) * 0.5});
        }
        const SparseSym A = SparseSym::from_triplets(n, entries);
        const Spectrum spec = dense_jacobi_eigen(A);
        double trace = 0.0, sum = 0.0;
        const std::vector<double> d = A.diagonal();
        for (double v : d) trace += v;
        for (const auto& pair : spec.pairs) sum += pair.lambda;
        const double rel = std::abs(sum - trace) / std::abs(trace);
        probes.push_back({"jacobi_trace", rel <= 1e-12, rel, 1e-12,
                          "relative trace defect of the dense eigensolver"});
    }

    { // Directional derivative of J against central differences.
        const Grid g = capped_grid(grid, 16);
        std::normal_distribution<double> gauss(0.0, 1.0);
        GridFunction u(g);
        GridFunction psi(g);
        for (int k = 0; k < g.size(); ++k) {
            u[k] = 1.0 + 0.3 * gauss(rng);
            psi[k] = gauss(rng);
        }
        const double q = 2.0;
        const double analytic = j_gateaux(g, params, M, q, u, psi);
        const FdEstimate fd = fd_directional_derivative(
            [&](const GridFunction& w) { return j_functional(g, params, M, q, w); }, u, psi);
        const double rel = std::abs(analytic - fd.value) / std::max(std::abs(fd.value), 1e-300);
        probes.push_back({"gateaux_vs_fd", rel <= 1e-5, rel, 1e-5,
                          "relative gap between the derivative formula and central differences"});
    }

    return probes;
}

} // namespace sso
