#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sso/grid.hpp"
#include "sso/operator.hpp"

namespace sso {

/// Closed-form eigenvalues of the standard five-point Laplacian on the
/// interior lattice (the alpha1 = alpha2 = 0, V = 0 limit of the assembled
/// operator): lambda_(i,j) = (4/hx^2) sin^2(i pi hx / 2) + (4/hy^2) sin^2(j pi hy / 2),
/// i = 1..nx, j = 1..ny, sorted ascending.
std::vector<double> discrete_laplacian_spectrum(int nx, int ny);

struct FdEstimate {
    double value = 0.0;  // best central-difference estimate
    double step = 0.0;   // absolute step that produced it
    bool stable = false; // false when all steps disagreed wildly
};

/// Central-difference directional derivative of a scalar functional over grid
/// functions, swept over relative steps (default 1e-3..1e-6, scaled by
/// ||point|| / ||direction||). Returns the estimate with the smallest
/// discrepancy against its neighboring step.
FdEstimate fd_directional_derivative(
    const std::function<double(const GridFunction&)>& functional,
    const GridFunction& point, const GridFunction& direction,
    const std::vector<double>& steps = {1e-3, 1e-4, 1e-5, 1e-6});

/// Smallest eigenvalue of the V = 0 operator; the discrete Poincare probe
/// passes when the value is >= 1.
double poincare_probe(const Grid& grid, const OperatorParams& params,
                      const LobpcgOptions& opts = {});

struct ProbeResult {
    std::string name;
    bool pass = false;
    double value = 0.0;     // measured quantity
    double threshold = 0.0; // bound it was checked against
    std::string detail;
};

/// The cross-module probe suite behind the `verify` subcommand: closed-form
/// and dense oracles, solver consistency checks, and spectral-structure
/// invariants, all deterministic for a fixed seed. Large grids are capped
/// internally where a dense oracle is involved.
std::vector<ProbeResult> run_probe_suite(const Grid& grid, const OperatorParams& params,
                                         double p, double M, const LobpcgOptions& opts);

} // namespace sso
