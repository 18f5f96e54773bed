#pragma once

#include <vector>

#include "sso/eigen.hpp"
#include "sso/grid.hpp"
#include "sso/operator.hpp"

namespace sso {

/// Thrown when the eigenvalue cluster at lambda2 reaches the last computed
/// pair, so its true size is unknown; solve for more pairs and retry.
struct ClusterTooLarge : std::runtime_error {
    explicit ClusterTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct StepPolicy {
    double initial = 1.0;
    double backtrack = 0.5;
    double armijo_c = 1e-4;
    int grow_after = 3;   // consecutive first-try accepts before doubling
    double min_step = 1e-18;
};

struct GapConfig {
    Grid grid;
    OperatorParams params;
    double p = 3.0; // the gap problem lives in p > 2
    double M = 1.0;
    StepPolicy step;
    double tol_gamma = 1e-8;
    int max_outer = 500;
    double degeneracy_tol = 1e-6;
    int window = 5;
    LobpcgOptions eig;
};

struct GapHistoryRow {
    int iteration = 0;
    double gamma = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double step = 0.0;
    double norm_ratio = 0.0; // lp_norm(V, p) / M
};

struct GapDiagnostics {
    // Least-squares fit of u2^2 - u1^2 against V^(p-1) on the support, and
    // against V^p for comparison.
    double c_fit = 0.0;
    double fit_residual = 0.0;
    double c_fit_alt = 0.0;
    double fit_residual_alt = 0.0;
    double off_support_min = 0.0;
    double support_fraction = 0.0;
    double norm_ratio = 0.0;
    double tangential_stationarity = 0.0; // soft diagnostic, reported only
    bool empty_support = false;
};

struct GapResult {
    Potential V_opt;
    GridFunction u1;
    GridFunction u2;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double gamma = 0.0;
    std::vector<GapHistoryRow> history;
    bool converged = false;
    bool degenerate = false; // lambda3 - lambda2 < degeneracy_tol * (1 + |lambda2|)
    bool stalled = false;    // line search underflowed; best iterate returned
    int outer_iterations = 0;
    GapDiagnostics diagnostics;
};

/// First-order gap derivative density g = u2^2 - u1^2: the derivative of
/// Gamma along a potential perturbation P is integrate(P * g). Requires a
/// simple lambda2; throws std::invalid_argument when the spectrum shows a
/// cluster within degeneracy_tol.
GridFunction gap_gradient(const Grid& grid, const Spectrum& spectrum,
                          double degeneracy_tol = 1e-6);

/// Degenerate-lambda2 variant: diagonalizes D_jm = integrate(u_2j d u_2m)
/// over the cluster and returns u_chosen^2 - u1^2 for the rotated vector
/// with the smallest diagonal entry (the branch that remains lambda2 for
/// t > 0 along d). Reduces to gap_gradient when the cluster is trivial.
GridFunction degenerate_subgradient(const Grid& grid, const Spectrum& spectrum,
                                    const GridFunction& direction,
                                    double degeneracy_tol = 1e-6);

/// Feasibility map onto {V >= 0, lp_norm(V, p) <= M}: negatives clip to zero,
/// then the whole function scales radially if the norm exceeds M. This is the
/// exact metric projection only for p = 2; for other p it is a feasibility
/// map, not the nearest point.
Potential project_to_Sp(const GridFunction& V, double p, double M);

/// Removes the component of P along V^(p-1), leaving a perturbation with
/// integrate(V^(p-1) * result) = 0 (first-order norm preservation).
GridFunction tangential_component(const GridFunction& P, const Potential& V, double p);

/// Projected gradient descent on Gamma(V) = lambda2 - lambda1 with Armijo
/// backtracking; every accepted iterate is feasible and Gamma never
/// increases. Stops on a flat window or max_outer; a line-search stall
/// returns the best iterate with the stall flag set.
GapResult projected_gradient_minimize(const GapConfig& cfg);

/// Support-restricted proportionality fit and sign checks for a converged
/// minimizer. The discrete support is {V > 1e-8 * max V}.
GapDiagnostics structural_diagnostics(const GapResult& result, double p);

} // namespace sso
