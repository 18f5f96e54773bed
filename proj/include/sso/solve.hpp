#pragma once

#include "sso/grid.hpp"
#include "sso/operator.hpp"

namespace sso {

struct DirichletSolution {
    GridFunction u;
    int cg_iterations = 0;
    double relative_residual = 0.0;
};

/// Solves the discrete source problem A u = f with homogeneous Dirichlet
/// data, where A = assemble(grid, params, V). The right-hand side enters as
/// nodal values (lumped identity mass), so the discrete weak identity
/// a(u, v) = inner_product(f, v) holds for every nodal basis function v.
DirichletSolution solve_dirichlet(const Grid& grid, const OperatorParams& params,
                                  const GridFunction& V, const GridFunction& f,
                                  double tol = 1e-10, int max_iter = 100000);

} // namespace sso
