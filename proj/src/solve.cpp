#include "sso/solve.hpp"

namespace sso {

DirichletSolution solve_dirichlet(const Grid& grid, const OperatorParams& params,
                                  const GridFunction& V, const GridFunction& f,
                                  double tol, int max_iter) {
    if (!(f.grid() == grid)) {
        throw std::invalid_argument("solve_dirichlet: right-hand side grid mismatch");
    }
    const SparseSym A = assemble(grid, params, V);
    CgResult cg = cg_solve(A, f.values(), tol, max_iter);
    DirichletSolution out;
    out.u = GridFunction(grid, std::move(cg.x));
    out.cg_iterations = cg.iterations;
    out.relative_residual = cg.relative_residual;
    return out;
}

} // namespace sso
