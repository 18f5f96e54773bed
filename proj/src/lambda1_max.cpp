#include "sso/lambda1_max.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sso {

namespace {

void validate(const MaximizeConfig& cfg) {
    if (!(cfg.p > 1.0)) throw std::invalid_argument("MaximizeConfig: p must be > 1");
    if (!(cfg.M > 0.0)) throw std::invalid_argument("MaximizeConfig: M must be > 0");
    if (!(cfg.tol_fixed_point > 0.0)) {
        throw std::invalid_argument("MaximizeConfig: tol_fixed_point must be > 0");
    }
    if (cfg.max_outer < 1) throw std::invalid_argument("MaximizeConfig: max_outer must be >= 1");
}

LobpcgOptions warm_options(const LobpcgOptions& base, const GridFunction& u) {
    LobpcgOptions opts = base;
    opts.initial.assign(u.values().begin(), u.values().end());
    opts.initial_cols = 1;
    return opts;
}

} // namespace

Potential optimal_potential_from_u(const GridFunction& u, double p, double M) {
    if (!(p > 1.0)) throw std::invalid_argument("optimal_potential_from_u: p must be > 1");
    if (!(M > 0.0)) throw std::invalid_argument("optimal_potential_from_u: M must be > 0");
    const double q = p / (p - 1.0);

    double umax = 0.0;
    for (double v : u.values()) umax = std::max(umax, std::abs(v));
    if (umax == 0.0) {
        throw std::invalid_argument("optimal_potential_from_u: u must not be identically zero");
    }

    // Work with u/max|u|: the formula is scale-invariant and the normalized
    // powers can neither overflow nor produce denormal cascades.
    const Grid& grid = u.grid();
    const double cell = grid.hx * grid.hy;
    GridFunction powers(grid);
    double sum_2q = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
        const double w = std::abs(u[k]) / umax;
        double t = std::pow(w, 2.0 * (q - 1.0));
        if (t < 1e-300) t = 0.0;
        powers[k] = t;
        sum_2q += std::pow(w, 2.0 * q);
    }
    const double norm_factor = M * std::pow(cell * sum_2q, (1.0 - q) / q);

    GridFunction V(grid);
    for (int k = 0; k < grid.size(); ++k) V[k] = norm_factor * powers[k];
    return Potential(std::move(V), p, M);
}

MaximizeResult fixed_point_maximize(const MaximizeConfig& cfg) {
    validate(cfg);
    const Grid& grid = cfg.grid;

    // Constant feasible start saturating the norm budget.
    Potential V = optimal_potential_from_u(GridFunction(grid, 1.0), cfg.p, cfg.M);

    MaximizeResult result;
    Spectrum spec = eigenpairs(grid, cfg.params, V, 1, cfg.eig);
    double lambda = spec.pairs[0].lambda;
    GridFunction u = eigenvector_function(grid, spec.pairs[0]);

    double omega = 1.0;
    const double omega_floor = std::ldexp(1.0, -20);

    for (int it = 0; it <= cfg.max_outer; ++it) {
        const Potential formula = optimal_potential_from_u(u, cfg.p, cfg.M);
        GridFunction diff(grid);
        for (int k = 0; k < grid.size(); ++k) diff[k] = formula.data[k] - V.data[k];
        const double diff_sum = lp_norm(diff, cfg.p) / cfg.M;

        result.history.push_back({it, lambda, diff_sum});
        result.final_residual = diff_sum;
        result.outer_iterations = it;
        if (diff_sum <= cfg.tol_fixed_point) {
            result.converged = true;
            break;
        }
        if (it == cfg.max_outer) break;

        const double slack = 1e-12 * std::max(1.0, std::abs(lambda));
        Potential V_next = V;
        Spectrum spec_next;
        double lambda_next = lambda;
        while (true) {
            GridFunction mixed(grid);
            for (int k = 0; k < grid.size(); ++k) {
                mixed[k] = (1.0 - omega) * V.data[k] + omega * formula.data[k];
            }
            V_next = Potential(std::move(mixed), cfg.p, cfg.M);
            spec_next = eigenpairs(grid, cfg.params, V_next, 1, warm_options(cfg.eig, u));
            lambda_next = spec_next.pairs[0].lambda;
            if (lambda_next >= lambda - slack || omega <= omega_floor) break;
            omega *= 0.5;
        }
        if (lambda_next < lambda - 1e-10 * std::max(1.0, std::abs(lambda))) {
            result.monotone = false;
        }

        V = std::move(V_next);
        lambda = lambda_next;
        u = eigenvector_function(grid, spec_next.pairs[0]);
    }

    result.V_opt = std::move(V);
    result.u1 = std::move(u);
    result.lambda1 = lambda;
    result.certificates = check_certificates(result, cfg.p, cfg.M);
    return result;
}

MaximizeResult j_descent_minimize(const MaximizeConfig& cfg) {
    validate(cfg);
    const Grid& grid = cfg.grid;
    const double q = cfg.p / (cfg.p - 1.0);
    const SparseSym A0 = assemble(grid, cfg.params, GridFunction(grid, 0.0));

    // Start from the first eigenfunction of the V = 0 operator.
    GridFunction u;
    {
        Spectrum spec0 = lobpcg_smallest(A0, 1, cfg.eig);
        const double scale = 1.0 / std::sqrt(grid.hx * grid.hy);
        GridFunction u0(grid);
        for (int k = 0; k < grid.size(); ++k) u0[k] = scale * spec0.pairs[0].vector[static_cast<size_t>(k)];
        u = std::move(u0);
    }

    auto normalize = [&](GridFunction& w) {
        const double nrm = lp_norm(w, 2.0);
        for (int k = 0; k < grid.size(); ++k) w[k] /= nrm;
    };
    normalize(u);

    MaximizeResult result;
    double J = j_functional(grid, cfg.params, cfg.M, q, u);
    GridFunction g = j_gradient(grid, cfg.params, cfg.M, q, u, A0);
    double gnorm = lp_norm(g, 2.0);
    // Roundoff floors the achievable gradient norm near sqrt(eps); below
    // grad_floor a stagnating line search still counts as converged.
    const double grad_tol = cfg.tol_fixed_point * std::max(1.0, std::abs(J));
    const double grad_floor = 1e-5 * std::max(1.0, std::abs(J));

    GridFunction u_prev = u;
    GridFunction g_prev = g;
    double step = 1.0 / std::max(gnorm, 1e-12);
    int it = 0;
    int stagnant = 0;

    result.history.push_back({0, J, gnorm});
    for (it = 1; it <= cfg.max_descent_iter; ++it) {
        if (gnorm <= grad_tol) {
            result.converged = true;
            break;
        }

        // Monotone descent with a spectral trial step, halved until the
        // Armijo condition holds.
        const double directional = -gnorm * gnorm;
        double s = step;
        GridFunction u_trial(grid);
        double J_trial = J;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (int k = 0; k < grid.size(); ++k) u_trial[k] = u[k] - s * g[k];
            normalize(u_trial);
            J_trial = j_functional(grid, cfg.params, cfg.M, q, u_trial);
            if (J_trial <= J + 1e-4 * s * directional) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            result.converged = gnorm <= grad_floor;
            break;
        }

        u_prev = std::move(u);
        g_prev = std::move(g);
        u = std::move(u_trial);
        g = j_gradient(grid, cfg.params, cfg.M, q, u, A0);
        gnorm = lp_norm(g, 2.0);

        if (J - J_trial <= 1e-16 * std::max(1.0, std::abs(J))) {
            if (++stagnant >= 50) {
                J = J_trial;
                result.converged = gnorm <= grad_floor;
                result.history.push_back({it, J, gnorm});
                break;
            }
        } else {
            stagnant = 0;
        }
        J = J_trial;
        if (it % 25 == 0) {
            result.history.push_back({it, J, gnorm});
        }

        // Barzilai-Borwein step from the last displacement pair.
        GridFunction du(grid);
        GridFunction dg(grid);
        for (int k = 0; k < grid.size(); ++k) {
            du[k] = u[k] - u_prev[k];
            dg[k] = g[k] - g_prev[k];
        }
        const double dudg = inner_product(du, dg);
        const double dgdg = inner_product(dg, dg);
        if (dudg > 0.0 && dgdg > 0.0) {
            step = std::clamp(dudg / dgdg, 1e-12, 1e6);
        } else {
            step = std::max(2.0 * s, 1e-12);
        }
    }
    result.outer_iterations = std::min(it, cfg.max_descent_iter);
    result.final_residual = gnorm;
    if (result.history.empty() || result.history.back().iteration != result.outer_iterations) {
        result.history.push_back({result.outer_iterations, J, gnorm});
    }

    // Fixed sign, then the potential formula at the minimizer; report the
    // eigen-data of the resulting potential.
    if (integrate(u) < 0.0) {
        for (int k = 0; k < grid.size(); ++k) u[k] = -u[k];
    }
    Potential V = optimal_potential_from_u(u, cfg.p, cfg.M);
    Spectrum spec = eigenpairs(grid, cfg.params, V, 1, warm_options(cfg.eig, u));
    result.lambda1 = spec.pairs[0].lambda;
    result.u1 = eigenvector_function(grid, spec.pairs[0]);
    result.V_opt = std::move(V);
    result.certificates = check_certificates(result, cfg.p, cfg.M);
    return result;
}

Certificates check_certificates(const MaximizeResult& result, double p, double M) {
    if (!(p > 1.0) || !(M > 0.0)) {
        throw std::invalid_argument("check_certificates: require p > 1 and M > 0");
    }
    const double q = p / (p - 1.0);
    Certificates cert;
    cert.norm_saturation = lp_norm(result.V_opt.data, p) / M;

    double u_max = 0.0;
    for (double v : result.u1.values()) u_max = std::max(u_max, std::abs(v));
    const double u_bound = std::pow(result.lambda1 / M, 0.5 * (p - 1.0)) *
                           lp_norm(result.u1, 2.0 * q);
    cert.linf_u_margin = u_bound - u_max;

    double v_max = 0.0;
    for (double v : result.V_opt.data.values()) v_max = std::max(v_max, v);
    cert.linf_V_margin = result.lambda1 - v_max;
    return cert;
}

} // namespace sso
