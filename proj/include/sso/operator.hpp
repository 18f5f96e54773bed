#pragma once

#include "sso/eigen.hpp"
#include "sso/grid.hpp"
#include "sso/sparse.hpp"

namespace sso {

/// Degeneracy exponents of the principal coefficients y^(2*alpha1) and
/// x^(2*alpha2). The admissible range is [0, 1/2); alpha = 0 is the classical
/// Laplacian limit used for validation anchors.
struct OperatorParams {
    double alpha1 = 0.0;
    double alpha2 = 0.0;

    OperatorParams() = default;
    OperatorParams(double a1, double a2);
};

/// Five-point discretization of -(y^(2a1) u_xx + x^(2a2) u_yy) + V u on the
/// interior lattice. Row (i,j): x-neighbors carry -y_j^(2a1)/hx^2, y-neighbors
/// -x_i^(2a2)/hy^2, and the diagonal 2y_j^(2a1)/hx^2 + 2x_i^(2a2)/hy^2 + V_ij.
/// Symmetric by construction; V must be nonnegative (feasibility not required).
SparseSym assemble(const Grid& grid, const OperatorParams& params, const GridFunction& V);
SparseSym assemble(const Grid& grid, const OperatorParams& params, const Potential& V);

/// Weighted Dirichlet form: sum over grid edges (including edges to the zero
/// boundary) of weight * forward-difference products * cell area. Satisfies
/// bilinear_a1(u, v) = hx*hy * u . (A0 v) with A0 = assemble(grid, params, 0).
double bilinear_a1(const Grid& grid, const OperatorParams& params,
                   const GridFunction& u, const GridFunction& v);

/// a(u, v) = a1(u, v) + integral(V u v).
double bilinear_a(const Grid& grid, const OperatorParams& params, const Potential& V,
                  const GridFunction& u, const GridFunction& v);

/// J(u) = (a1(u,u) + M ||u||_{L^{2q}}^2) / ||u||_{L^2}^2. Scale-invariant;
/// rejects u = 0. Its infimum over nonzero u equals sup over the potential
/// class of the first eigenvalue.
double j_functional(const Grid& grid, const OperatorParams& params, double M, double q,
                    const GridFunction& u);

/// Directional (Gateaux) derivative of J at u along psi:
/// (2/||u||^2) (a1(u,psi) + M ||u^2||_q^{1-q} int |u|^{2q-2} u psi - J(u) int u psi).
/// Exact for the discrete functional, so finite differences reproduce it.
double j_gateaux(const Grid& grid, const OperatorParams& params, double M, double q,
                 const GridFunction& u, const GridFunction& psi);

/// L^2 representer of the Gateaux derivative: j_gateaux(u, psi) equals
/// inner_product(j_gradient(u), psi) for every psi. The second overload
/// reuses a pre-assembled V = 0 operator.
GridFunction j_gradient(const Grid& grid, const OperatorParams& params, double M, double q,
                        const GridFunction& u);
GridFunction j_gradient(const Grid& grid, const OperatorParams& params, double M, double q,
                        const GridFunction& u, const SparseSym& A0);

/// k smallest eigenpairs of the assembled operator, with eigenvectors
/// rescaled to unit discrete L^2(Omega) norm (the hx*hy-weighted norm).
Spectrum eigenpairs(const Grid& grid, const OperatorParams& params, const Potential& V,
                    int k, const LobpcgOptions& opts = {});

/// Wraps a Spectrum pair as a GridFunction on the given grid.
GridFunction eigenvector_function(const Grid& grid, const EigenPair& pair);

} // namespace sso
