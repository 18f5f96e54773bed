#pragma once

#include <vector>

#include "sso/eigen.hpp"
#include "sso/grid.hpp"
#include "sso/operator.hpp"

namespace sso {

struct MaximizeConfig {
    Grid grid;
    OperatorParams params;
    double p = 2.0;
    double M = 1.0;
    double tol_fixed_point = 1e-8;
    int max_outer = 200;
    LobpcgOptions eig;

    // J-descent knobs; the descent shares tol_fixed_point as its gradient
    // tolerance scale.
    int max_descent_iter = 200000;
};

/// Optimality certificates from the L^infinity bounds on the maximizing pair:
/// max u <= (lambda1/M)^((p-1)/2) ||u||_{2q} and max V <= lambda1.
struct Certificates {
    double norm_saturation = 0.0; // lp_norm(V, p) / M
    double linf_u_margin = 0.0;   // bound minus attained max of u1
    double linf_V_margin = 0.0;   // lambda1 minus max of V
};

struct MaximizeHistoryRow {
    int iteration = 0;
    double lambda1 = 0.0;  // objective value (J value for the descent path)
    double residual = 0.0; // self-consistency residual (gradient norm for descent)
};

struct MaximizeResult {
    Potential V_opt;
    GridFunction u1;
    double lambda1 = 0.0;
    std::vector<MaximizeHistoryRow> history;
    bool converged = false;
    // Fixed point: lambda1 history non-decreasing. Descent: J non-increasing.
    bool monotone = true;
    double final_residual = 0.0;
    int outer_iterations = 0;
    Certificates certificates;
};

/// The self-consistent optimal potential of a trial state:
/// V = M ||u^2||_{L^q}^{1-q} |u|^{2(q-1)}, which saturates lp_norm(V, p) = M
/// identically and is invariant under rescaling u.
Potential optimal_potential_from_u(const GridFunction& u, double p, double M);

/// Alternates eigen-solve and potential update until the potential reproduces
/// itself: u_k = first eigenfunction of V_k, V_{k+1} = (1-w) V_k + w formula.
/// w starts at 1 and halves whenever lambda1 would decrease. Exhausting
/// max_outer is reported (converged = false), not thrown.
MaximizeResult fixed_point_maximize(const MaximizeConfig& cfg);

/// Independent route to the same maximizer: monotone projected gradient
/// descent of J over the unit L^2 sphere, then the potential formula at the
/// minimizer. Step sizes are spectral (Barzilai-Borwein) trials backtracked
/// until descent holds.
MaximizeResult j_descent_minimize(const MaximizeConfig& cfg);

/// Margins of the L^infinity bounds for a computed result (report-only).
Certificates check_certificates(const MaximizeResult& result, double p, double M);

} // namespace sso
