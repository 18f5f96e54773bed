#include "sso/gap_min.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sso {

namespace {

// Number of consecutive pairs clustered with pairs[1], starting there.
// Throws ClusterTooLarge when the cluster runs into the end of the computed
// spectrum (its true size is then unknown).
int cluster_size(const Spectrum& spectrum, double degeneracy_tol) {
    if (spectrum.pairs.size() < 2) {
        throw std::invalid_argument("gap spectrum needs at least two pairs");
    }
    const double lambda2 = spectrum.pairs[1].lambda;
    const double tol = degeneracy_tol * (1.0 + std::abs(lambda2));
    int r = 1;
    for (size_t i = 2; i < spectrum.pairs.size(); ++i) {
        if (spectrum.pairs[i].lambda - lambda2 < tol) {
            ++r;
        } else {
            return r;
        }
    }
    throw ClusterTooLarge("lambda2 cluster reaches the last computed pair; request more pairs");
}

GridFunction density_difference(const Grid& grid, const EigenPair& second,
                                const EigenPair& first) {
    GridFunction g(grid);
    for (int k = 0; k < grid.size(); ++k) {
        const double u2 = second.vector[static_cast<size_t>(k)];
        const double u1 = first.vector[static_cast<size_t>(k)];
        g[k] = u2 * u2 - u1 * u1;
    }
    return g;
}

} // namespace

GridFunction gap_gradient(const Grid& grid, const Spectrum& spectrum, double degeneracy_tol) {
    const int r = cluster_size(spectrum, degeneracy_tol);
    if (r > 1) {
        throw std::invalid_argument(
            "gap_gradient: lambda2 is degenerate; use degenerate_subgradient");
    }
    return density_difference(grid, spectrum.pairs[1], spectrum.pairs[0]);
}

GridFunction degenerate_subgradient(const Grid& grid, const Spectrum& spectrum,
                                    const GridFunction& direction, double degeneracy_tol) {
    const int r = cluster_size(spectrum, degeneracy_tol);
    if (r == 1) {
        return density_difference(grid, spectrum.pairs[1], spectrum.pairs[0]);
    }

    // D_jm = integrate(u_{2,j} * d * u_{2,m}) over the cluster.
    std::vector<double> D(static_cast<size_t>(r) * r, 0.0);
    const double cell = grid.hx * grid.hy;
    for (int jj = 0; jj < r; ++jj) {
        const auto& uj = spectrum.pairs[static_cast<size_t>(1 + jj)].vector;
        for (int mm = jj; mm < r; ++mm) {
            const auto& um = spectrum.pairs[static_cast<size_t>(1 + mm)].vector;
            double s = 0.0;
            for (int k = 0; k < grid.size(); ++k) {
                s += uj[static_cast<size_t>(k)] * direction[k] * um[static_cast<size_t>(k)];
            }
            D[static_cast<size_t>(jj) * r + mm] = cell * s;
            D[static_cast<size_t>(mm) * r + jj] = cell * s;
        }
    }
    DenseEigh rot = jacobi_eigh(std::move(D), r);

    // Branch with the smallest diagonal entry: the one that stays lambda2
    // for t > 0 along the given direction.
    GridFunction chosen(grid);
    for (int jj = 0; jj < r; ++jj) {
        const double coef = rot.vectors[static_cast<size_t>(jj)]; // column 0
        const auto& uj = spectrum.pairs[static_cast<size_t>(1 + jj)].vector;
        for (int k = 0; k < grid.size(); ++k) chosen[k] += coef * uj[static_cast<size_t>(k)];
    }

    GridFunction g(grid);
    const auto& u1 = spectrum.pairs[0].vector;
    for (int k = 0; k < grid.size(); ++k) {
        g[k] = chosen[k] * chosen[k] - u1[static_cast<size_t>(k)] * u1[static_cast<size_t>(k)];
    }
    return g;
}

Potential project_to_Sp(const GridFunction& V, double p, double M) {
    if (!(p > 1.0)) throw std::invalid_argument("project_to_Sp: p must be > 1");
    if (!(M > 0.0)) throw std::invalid_argument("project_to_Sp: M must be > 0");
    const Grid& grid = V.grid();
    GridFunction clipped(grid);
    for (int k = 0; k < grid.size(); ++k) clipped[k] = std::max(V[k], 0.0);
    const double norm = lp_norm(clipped, p);
    if (norm > M) {
        const double scale = M / norm;
        for (int k = 0; k < grid.size(); ++k) clipped[k] *= scale;
    }
    return Potential(std::move(clipped), p, M);
}

GridFunction tangential_component(const GridFunction& P, const Potential& V, double p) {
    const Grid& grid = P.grid();
    if (!(V.data.grid() == grid)) {
        throw std::invalid_argument("tangential_component: grid mismatch");
    }
    GridFunction W(grid);
    double wmax = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
        W[k] = std::pow(V.data[k], p - 1.0);
        wmax = std::max(wmax, W[k]);
    }
    if (wmax == 0.0) {
        throw std::invalid_argument("tangential_component: V must not be identically zero");
    }
    const double coef = inner_product(W, P) / inner_product(W, W);
    GridFunction out(grid);
    for (int k = 0; k < grid.size(); ++k) out[k] = P[k] - coef * W[k];
    return out;
}

namespace {

struct GapState {
    Potential V;
    Spectrum spectrum;
    double gamma = 0.0;
};

LobpcgOptions warm_options(const LobpcgOptions& base, const Spectrum& previous) {
    LobpcgOptions opts = base;
    if (!previous.pairs.empty()) {
        const int n = static_cast<int>(previous.pairs[0].vector.size());
        opts.initial.reserve(previous.pairs.size() * static_cast<size_t>(n));
        for (const auto& pair : previous.pairs) {
            opts.initial.insert(opts.initial.end(), pair.vector.begin(), pair.vector.end());
        }
        opts.initial_cols = static_cast<int>(previous.pairs.size());
    }
    return opts;
}

} // namespace

GapResult projected_gradient_minimize(const GapConfig& cfg) {
    if (!(cfg.p > 2.0)) {
        throw std::invalid_argument("GapConfig: the gap problem requires p > 2");
    }
    if (!(cfg.M > 0.0)) throw std::invalid_argument("GapConfig: M must be > 0");
    if (!(cfg.tol_gamma > 0.0)) throw std::invalid_argument("GapConfig: tol_gamma must be > 0");
    const Grid& grid = cfg.grid;

    int k_solve = 4;
    const int k_cap = std::max(4, std::min(10, grid.size() / 4));

    auto solve = [&](const Potential& V, const Spectrum* warm) {
        LobpcgOptions opts = warm ? warm_options(cfg.eig, *warm) : cfg.eig;
        return eigenpairs(grid, cfg.params, V, k_solve, opts);
    };

    GapState state;
    state.V = project_to_Sp(GridFunction(grid, 0.0), cfg.p, cfg.M);
    state.spectrum = solve(state.V, nullptr);
    state.gamma = state.spectrum.pairs[1].lambda - state.spectrum.pairs[0].lambda;

    GapResult result;
    result.history.push_back({0, state.gamma, state.spectrum.pairs[0].lambda,
                              state.spectrum.pairs[1].lambda, 0.0,
                              lp_norm(state.V.data, cfg.p) / cfg.M});

    double step = cfg.step.initial;
    int streak = 0;

    for (int it = 1; it <= cfg.max_outer; ++it) {
        // Descent density; under degeneracy rotate the cluster against the
        // tentative direction built from its first representative.
        GridFunction g(grid);
        while (true) {
            try {
                const int r = cluster_size(state.spectrum, cfg.degeneracy_tol);
                if (r == 1) {
                    g = gap_gradient(grid, state.spectrum, cfg.degeneracy_tol);
                } else {
                    GridFunction naive =
                        density_difference(grid, state.spectrum.pairs[1], state.spectrum.pairs[0]);
                    for (int k = 0; k < grid.size(); ++k) naive[k] = -naive[k];
                    g = degenerate_subgradient(grid, state.spectrum, naive, cfg.degeneracy_tol);
                }
                break;
            } catch (const ClusterTooLarge&) {
                if (k_solve >= k_cap) throw;
                k_solve = std::min(k_cap, k_solve + 2);
                state.spectrum = solve(state.V, &state.spectrum);
            }
        }

        // With the norm constraint active the raw gradient is mostly normal
        // to the feasible sphere and clip-then-scale would park the iterate
        // away from stationarity; stepping along the tangential component
        // makes first-order stationary points fixed points of the update.
        GridFunction direction = g;
        const double norm_ratio_now = lp_norm(state.V.data, cfg.p) / cfg.M;
        if (norm_ratio_now >= 1.0 - 1e-10) {
            direction = tangential_component(g, state.V, cfg.p);
        }

        bool accepted = false;
        bool first_try = true;
        double s = step;
        GapState trial;
        while (s >= cfg.step.min_step) {
            GridFunction moved(grid);
            for (int k = 0; k < grid.size(); ++k) moved[k] = state.V.data[k] - s * direction[k];
            trial.V = project_to_Sp(moved, cfg.p, cfg.M);

            GridFunction displacement(grid);
            for (int k = 0; k < grid.size(); ++k) displacement[k] = trial.V.data[k] - state.V.data[k];
            const double predicted = inner_product(g, displacement);
            if (predicted >= 0.0) {
                // No feasible first-order decrease along this direction.
                s *= cfg.step.backtrack;
                first_try = false;
                continue;
            }

            trial.spectrum = solve(trial.V, &state.spectrum);
            trial.gamma = trial.spectrum.pairs[1].lambda - trial.spectrum.pairs[0].lambda;
            if (trial.gamma <= state.gamma + cfg.step.armijo_c * predicted) {
                accepted = true;
                break;
            }
            s *= cfg.step.backtrack;
            first_try = false;
        }

        if (!accepted) {
            result.stalled = true;
            break;
        }

        state = std::move(trial);
        result.history.push_back({it, state.gamma, state.spectrum.pairs[0].lambda,
                                  state.spectrum.pairs[1].lambda, s,
                                  lp_norm(state.V.data, cfg.p) / cfg.M});
        result.outer_iterations = it;

        if (first_try) {
            if (++streak >= cfg.step.grow_after) {
                step = s * 2.0;
                streak = 0;
            } else {
                step = s;
            }
        } else {
            step = s;
            streak = 0;
        }

        const size_t h = result.history.size();
        if (h > static_cast<size_t>(cfg.window)) {
            const double old_gamma = result.history[h - 1 - static_cast<size_t>(cfg.window)].gamma;
            if (std::abs(old_gamma - state.gamma) <= cfg.tol_gamma * std::max(std::abs(state.gamma), 1e-300)) {
                result.converged = true;
                break;
            }
        }
    }

    result.V_opt = std::move(state.V);
    result.lambda1 = state.spectrum.pairs[0].lambda;
    result.lambda2 = state.spectrum.pairs[1].lambda;
    result.gamma = state.gamma;
    result.u1 = eigenvector_function(grid, state.spectrum.pairs[0]);
    result.u2 = eigenvector_function(grid, state.spectrum.pairs[1]);
    if (state.spectrum.pairs.size() > 2) {
        const double l2 = result.lambda2;
        result.degenerate =
            state.spectrum.pairs[2].lambda - l2 < cfg.degeneracy_tol * (1.0 + std::abs(l2));
    }
    result.diagnostics = structural_diagnostics(result, cfg.p);
    return result;
}

GapDiagnostics structural_diagnostics(const GapResult& result, double p) {
    const Grid& grid = result.V_opt.data.grid();
    const GridFunction& V = result.V_opt.data;

    GapDiagnostics diag;
    diag.norm_ratio = lp_norm(V, p) / result.V_opt.M;

    double vmax = 0.0;
    for (double v : V.values()) vmax = std::max(vmax, v);
    const double threshold = 1e-8 * vmax;

    GridFunction y(grid);
    for (int k = 0; k < grid.size(); ++k) {
        y[k] = result.u2[k] * result.u2[k] - result.u1[k] * result.u1[k];
    }

    int support = 0;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    double sxx_alt = 0.0, sxy_alt = 0.0;
    double off_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid.size(); ++k) {
        if (vmax > 0.0 && V[k] > threshold) {
            ++support;
            const double x = std::pow(V[k], p - 1.0);
            const double xa = std::pow(V[k], p);
            sxx += x * x;
            sxy += x * y[k];
            syy += y[k] * y[k];
            sxx_alt += xa * xa;
            sxy_alt += xa * y[k];
        } else {
            off_min = std::min(off_min, y[k]);
        }
    }
    diag.support_fraction = static_cast<double>(support) / grid.size();
    diag.off_support_min = off_min; // +inf when the support covers everything

    if (support == 0) {
        diag.empty_support = true;
        return diag;
    }

    diag.c_fit = sxy / sxx;
    diag.c_fit_alt = sxy_alt / sxx_alt;
    if (syy > 0.0) {
        double rss = 0.0, rss_alt = 0.0;
        for (int k = 0; k < grid.size(); ++k) {
            if (V[k] > threshold) {
                const double e = y[k] - diag.c_fit * std::pow(V[k], p - 1.0);
                const double ea = y[k] - diag.c_fit_alt * std::pow(V[k], p);
                rss += e * e;
                rss_alt += ea * ea;
            }
        }
        diag.fit_residual = std::sqrt(rss / syy);
        diag.fit_residual_alt = std::sqrt(rss_alt / syy);
    }

    // Soft stationarity: size of the tangential gradient component on the
    // support, relative to the full gradient.
    const double gnorm = lp_norm(y, 2.0);
    if (gnorm > 0.0) {
        GridFunction tang = tangential_component(y, result.V_opt, p);
        for (int k = 0; k < grid.size(); ++k) {
            if (!(V[k] > threshold)) tang[k] = 0.0;
        }
        diag.tangential_stationarity = lp_norm(tang, 2.0) / gnorm;
    }
    return diag;
}

} // namespace sso
