#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sso/sparse.hpp"

namespace sso {

/// Thrown when an iterative solver fails to reach its tolerance (or detects
/// an indefinite matrix). The message carries the final residual data.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct EigenPair {
    double lambda = 0.0;
    std::vector<double> vector; // unit Euclidean norm
    double residual = 0.0;      // ||A v - lambda v||_2
};

/// Eigenpairs ordered by non-decreasing eigenvalue. Ties are broken by the
/// ascending index of the vector's largest-magnitude component. The first
/// vector is signed so its component sum is positive; the others so their
/// largest-magnitude component is positive.
struct Spectrum {
    std::vector<EigenPair> pairs;
    int iterations = 0;                   // outer iterations of the solver
    std::vector<double> residual_history; // max residual over sought pairs
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients for SPD systems. Converges when
/// ||A x - b||_2 <= tol * ||b||_2. Throws SolverError on negative curvature
/// (indefinite matrix) or when max_iter is exhausted.
CgResult cg_solve(const SparseSym& A, std::span<const double> b, double tol,
                  int max_iter, bool jacobi_precond = true);

struct LobpcgOptions {
    double tol = 1e-9;
    int max_iter = 2000;
    std::uint64_t seed = 1;
    int extra = 2; // block size = k + extra

    // Optional warm start: column-major n x initial_cols matrix.
    std::vector<double> initial;
    int initial_cols = 0;
};

/// Locally optimal block preconditioned conjugate gradients for the k
/// smallest eigenpairs of an SPD matrix, with Jacobi (diagonal) scaling.
/// Requires 1 <= k <= n/4. Converged when each of the first k residuals is
/// <= tol * |lambda_i|. Deterministic for fixed inputs and seed.
Spectrum lobpcg_smallest(const SparseSym& A, int k, const LobpcgOptions& opts = {});

struct DenseEigh {
    std::vector<double> eigenvalues;     // ascending
    std::vector<double> vectors;         // column-major n x n, orthonormal
};

/// Cyclic Jacobi rotations on a dense symmetric matrix (row-major, n x n).
/// Runs until the off-diagonal Frobenius norm is <= 1e-12 * ||A||_F.
DenseEigh jacobi_eigh(std::vector<double> a, int n);

/// Full spectrum of a SparseSym via the dense Jacobi path; the independent
/// oracle for the iterative solver. Guarded to n <= 400.
Spectrum dense_jacobi_eigen(const SparseSym& A);

} // namespace sso
