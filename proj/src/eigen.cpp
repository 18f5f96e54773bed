#include "sso/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace sso {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// Column-major block of vectors.
struct Block {
    int n = 0;
    int cols = 0;
    std::vector<double> data;

    Block() = default;
    Block(int n_, int cols_) : n(n_), cols(cols_), data(static_cast<size_t>(n_) * cols_, 0.0) {}

    std::span<double> col(int j) { return {data.data() + static_cast<size_t>(j) * n, static_cast<size_t>(n)}; }
    std::span<const double> col(int j) const {
        return {data.data() + static_cast<size_t>(j) * n, static_cast<size_t>(n)};
    }
    void append(std::span<const double> v) {
        data.insert(data.end(), v.begin(), v.end());
        ++cols;
    }
};

// Modified Gram-Schmidt (two passes) of v against the columns of B, in place.
void project_out(const Block& B, std::span<double> v) {
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < B.cols; ++j) {
            const double c = dot(B.col(j), v);
            axpy(-c, B.col(j), v);
        }
    }
}

// Appends those columns of W to S that survive orthogonalization against the
// current contents of S. Columns losing more than ~8 digits are dropped.
void append_orthonormalized(Block& S, const Block& W) {
    std::vector<double> v(static_cast<size_t>(W.n));
    for (int j = 0; j < W.cols; ++j) {
        auto wj = W.col(j);
        std::copy(wj.begin(), wj.end(), v.begin());
        const double before = norm2(v);
        if (before == 0.0) continue;
        project_out(S, v);
        const double after = norm2(v);
        if (after <= 1e-8 * before) continue;
        for (double& x : v) x /= after;
        S.append(v);
    }
}

Block matmul_block(const SparseSym& A, const Block& X) {
    Block Y(X.n, X.cols);
    for (int j = 0; j < X.cols; ++j) A.matvec(X.col(j), Y.col(j));
    return Y;
}

// G = X^T Y, row-major cols x cols.
std::vector<double> gram(const Block& X, const Block& Y) {
    std::vector<double> G(static_cast<size_t>(X.cols) * Y.cols);
    for (int i = 0; i < X.cols; ++i)
        for (int j = 0; j < Y.cols; ++j)
            G[static_cast<size_t>(i) * Y.cols + j] = dot(X.col(i), Y.col(j));
    return G;
}

// Y = X * Q(:, sel) for a row-major s x s matrix Q and column selection.
Block rotate(const Block& X, const std::vector<double>& Q, int s,
             std::span<const int> sel, int row_begin = 0) {
    Block Y(X.n, static_cast<int>(sel.size()));
    for (size_t out = 0; out < sel.size(); ++out) {
        auto y = Y.col(static_cast<int>(out));
        const int qcol = sel[out];
        for (int i = row_begin; i < X.cols; ++i) {
            axpy(Q[static_cast<size_t>(i) * s + qcol], X.col(i), y);
        }
    }
    return Y;
}

int argmax_abs(std::span<const double> v) {
    int best = 0;
    double best_abs = std::abs(v[0]);
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        const double a = std::abs(v[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return best;
}

void apply_sign_convention(Spectrum& spec) {
    for (size_t idx = 0; idx < spec.pairs.size(); ++idx) {
        auto& v = spec.pairs[idx].vector;
        double s;
        if (idx == 0) {
            s = std::accumulate(v.begin(), v.end(), 0.0);
            if (s == 0.0) s = v[static_cast<size_t>(argmax_abs(v))];
        } else {
            s = v[static_cast<size_t>(argmax_abs(v))];
        }
        if (s < 0.0) {
            for (double& x : v) x = -x;
        }
    }
}

// Ascending eigenvalue order; near-equal values ordered by the ascending
// index of the largest-magnitude component, for a deterministic Spectrum on
// symmetric configurations.
void sort_pairs(std::vector<EigenPair>& pairs) {
    double scale = 0.0;
    for (const auto& p : pairs) scale = std::max(scale, std::abs(p.lambda));
    const double tie = 1e-10 * (1.0 + scale);
    std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
        return a.lambda < b.lambda;
    });
    for (size_t lo = 0; lo < pairs.size();) {
        size_t hi = lo + 1;
        while (hi < pairs.size() && pairs[hi].lambda - pairs[lo].lambda <= tie) ++hi;
        if (hi - lo > 1) {
            std::stable_sort(pairs.begin() + static_cast<long>(lo),
                             pairs.begin() + static_cast<long>(hi),
                             [](const EigenPair& a, const EigenPair& b) {
                                 return argmax_abs(a.vector) < argmax_abs(b.vector);
                             });
        }
        lo = hi;
    }
}

} // namespace

CgResult cg_solve(const SparseSym& A, std::span<const double> b, double tol,
                  int max_iter, bool jacobi_precond) {
    const int n = A.size();
    if (static_cast<int>(b.size()) != n) {
        throw std::invalid_argument("cg_solve: right-hand side length mismatch");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("cg_solve: tol must be positive");
    }

    CgResult out;
    out.x.assign(static_cast<size_t>(n), 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return out;

    std::vector<double> inv_diag;
    if (jacobi_precond) {
        inv_diag = A.diagonal();
        for (double& d : inv_diag) d = 1.0 / d;
    }

    std::vector<double> r(b.begin(), b.end());
    std::vector<double> z(static_cast<size_t>(n));
    auto precondition = [&](const std::vector<double>& rr, std::vector<double>& zz) {
        if (jacobi_precond) {
            for (int i = 0; i < n; ++i)
                zz[static_cast<size_t>(i)] = inv_diag[static_cast<size_t>(i)] * rr[static_cast<size_t>(i)];
        } else {
            zz = rr;
        }
    };
    precondition(r, z);
    std::vector<double> p = z;
    std::vector<double> Ap(static_cast<size_t>(n));
    double rho = dot(r, z);

    for (int it = 1; it <= max_iter; ++it) {
        A.matvec(p, Ap);
        const double curvature = dot(p, Ap);
        if (curvature <= 0.0) {
            throw SolverError("cg_solve: negative curvature encountered (matrix not positive definite)");
        }
        const double alpha = rho / curvature;
        axpy(alpha, p, out.x);
        axpy(-alpha, Ap, r);
        const double rnorm = norm2(r);
        out.iterations = it;
        out.relative_residual = rnorm / bnorm;
        if (rnorm <= tol * bnorm) return out;
        precondition(r, z);
        const double rho_next = dot(r, z);
        const double beta = rho_next / rho;
        rho = rho_next;
        for (int i = 0; i < n; ++i)
            p[static_cast<size_t>(i)] = z[static_cast<size_t>(i)] + beta * p[static_cast<size_t>(i)];
    }
    std::ostringstream msg;
    msg << "cg_solve: no convergence within " << max_iter
        << " iterations; relative residual " << out.relative_residual;
    throw SolverError(msg.str());
}

DenseEigh jacobi_eigh(std::vector<double> a, int n) {
    if (n <= 0 || static_cast<int>(a.size()) != n * n) {
        throw std::invalid_argument("jacobi_eigh: bad dimensions");
    }
    auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * n + j]; };

    DenseEigh out;
    out.vectors.assign(static_cast<size_t>(n) * n, 0.0);
    auto vec = [&](int i, int j) -> double& { return out.vectors[static_cast<size_t>(i) + static_cast<size_t>(j) * n]; };
    for (int i = 0; i < n; ++i) vec(i, i) = 1.0;

    double frob = 0.0;
    for (double v : a) frob += v * v;
    frob = std::sqrt(frob);
    const double target = 1e-12 * frob;
    // Below the contract threshold keep polishing until the off-diagonal
    // mass reaches roundoff level or stops shrinking; clustered eigenvalues
    // slow the quadratic phase and a single extra sweep is not enough.
    const double floor_off = 1e-15 * frob;

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += 2.0 * at(i, j) * at(i, j);
        return std::sqrt(s);
    };

    const int max_sweeps = 64;
    double prev_off = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const double off = off_norm();
        if (off <= floor_off) break;
        if (off <= target && off >= 0.25 * prev_off) break; // roundoff plateau
        prev_off = off;
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double app = at(p, p);
                const double aqq = at(q, q);
                if (std::abs(apq) <= 1e-300 * (std::abs(app) + std::abs(aqq))) continue;
                rotated = true;
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = at(i, p);
                    const double aiq = at(i, q);
                    at(i, p) = c * aip - s * aiq;
                    at(i, q) = s * aip + c * aiq;
                }
                for (int j = 0; j < n; ++j) {
                    const double apj = at(p, j);
                    const double aqj = at(q, j);
                    at(p, j) = c * apj - s * aqj;
                    at(q, j) = s * apj + c * aqj;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = vec(i, p);
                    const double viq = vec(i, q);
                    vec(i, p) = c * vip - s * viq;
                    vec(i, q) = s * vip + c * viq;
                }
            }
        }
        if (!rotated) break;
    }
    if (off_norm() > target) {
        throw SolverError("jacobi_eigh: off-diagonal norm failed to reach threshold");
    }

    out.eigenvalues.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.eigenvalues[static_cast<size_t>(i)] = at(i, i);

    // Sort ascending, carrying the vectors along.
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return out.eigenvalues[static_cast<size_t>(i)] < out.eigenvalues[static_cast<size_t>(j)];
    });
    DenseEigh sorted;
    sorted.eigenvalues.resize(static_cast<size_t>(n));
    sorted.vectors.resize(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        sorted.eigenvalues[static_cast<size_t>(j)] = out.eigenvalues[static_cast<size_t>(order[static_cast<size_t>(j)])];
        for (int i = 0; i < n; ++i) {
            sorted.vectors[static_cast<size_t>(i) + static_cast<size_t>(j) * n] =
                out.vectors[static_cast<size_t>(i) + static_cast<size_t>(order[static_cast<size_t>(j)]) * n];
        }
    }
    return sorted;
}

Spectrum dense_jacobi_eigen(const SparseSym& A) {
    const int n = A.size();
    if (n > 400) {
        throw std::invalid_argument("dense_jacobi_eigen: n = " + std::to_string(n) +
                                    " exceeds the dense guard (400)");
    }
    std::vector<double> dense(static_cast<size_t>(n) * n, 0.0);
    auto ro = A.row_offsets();
    auto ci = A.col_indices();
    auto va = A.values();
    for (int r = 0; r < n; ++r) {
        for (int k = ro[static_cast<size_t>(r)]; k < ro[static_cast<size_t>(r) + 1]; ++k) {
            dense[static_cast<size_t>(r) * n + ci[static_cast<size_t>(k)]] = va[static_cast<size_t>(k)];
        }
    }
    DenseEigh eigh = jacobi_eigh(std::move(dense), n);

    Spectrum spec;
    spec.pairs.resize(static_cast<size_t>(n));
    std::vector<double> Av(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        EigenPair& pair = spec.pairs[static_cast<size_t>(j)];
        pair.vector.assign(eigh.vectors.begin() + static_cast<long>(j) * n,
                           eigh.vectors.begin() + static_cast<long>(j + 1) * n);
        const double nrm = norm2(pair.vector);
        for (double& v : pair.vector) v /= nrm;
        // Rayleigh-quotient refinement against the original sparse matrix:
        // the quotient is stationary in the vector, so this strips the
        // rotation roundoff accumulated over the sweeps.
        A.matvec(pair.vector, Av);
        pair.lambda = dot(pair.vector, Av);
        axpy(-pair.lambda, pair.vector, Av);
        pair.residual = norm2(Av);
    }
    sort_pairs(spec.pairs);
    apply_sign_convention(spec);
    return spec;
}

Spectrum lobpcg_smallest(const SparseSym& A, int k, const LobpcgOptions& opts) {
    const int n = A.size();
    if (k < 1 || 4 * k > n) {
        throw std::invalid_argument("lobpcg_smallest: require 1 <= k <= n/4, got k=" +
                                    std::to_string(k) + " n=" + std::to_string(n));
    }
    if (!(opts.tol > 0.0)) {
        throw std::invalid_argument("lobpcg_smallest: tol must be positive");
    }
    const int m = std::min(k + std::max(opts.extra, 0), n);

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Block X(n, m);
    const int warm = std::min(opts.initial_cols, m);
    for (int j = 0; j < warm; ++j) {
        auto xj = X.col(j);
        std::copy(opts.initial.begin() + static_cast<long>(j) * n,
                  opts.initial.begin() + static_cast<long>(j + 1) * n, xj.begin());
    }
    for (int j = warm; j < m; ++j) {
        for (double& v : X.col(j)) v = gauss(rng);
    }

    // Orthonormal start; rank-deficient warm starts are refilled randomly.
    {
        Block ortho(n, 0);
        append_orthonormalized(ortho, X);
        int guard = 0;
        while (ortho.cols < m && guard++ < 8) {
            Block fill(n, m - ortho.cols);
            for (double& v : fill.data) v = gauss(rng);
            append_orthonormalized(ortho, fill);
        }
        if (ortho.cols < m) {
            throw SolverError("lobpcg_smallest: unable to build an orthonormal start block");
        }
        X = std::move(ortho);
    }

    std::vector<double> inv_diag = A.diagonal();
    for (double& d : inv_diag) d = 1.0 / d;

    std::vector<double> lambda(static_cast<size_t>(m), 0.0);
    Block AX = matmul_block(A, X);
    {
        std::vector<double> G = gram(X, AX);
        DenseEigh small = jacobi_eigh(std::move(G), m);
        std::vector<int> sel(static_cast<size_t>(m));
        std::iota(sel.begin(), sel.end(), 0);
        // jacobi_eigh vectors are column-major; rotate() expects row-major.
        std::vector<double> Q(static_cast<size_t>(m) * m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                Q[static_cast<size_t>(i) * m + j] = small.vectors[static_cast<size_t>(i) + static_cast<size_t>(j) * m];
        X = rotate(X, Q, m, sel);
        AX = rotate(AX, Q, m, sel);
        lambda = small.eigenvalues;
    }

    Block P(n, 0);
    Spectrum spec;
    std::vector<double> res(static_cast<size_t>(m), 0.0);
    bool converged = false;

    for (int it = 1; it <= opts.max_iter; ++it) {
        spec.iterations = it;

        Block R(n, m);
        for (int j = 0; j < m; ++j) {
            auto rj = R.col(j);
            auto axj = AX.col(j);
            auto xj = X.col(j);
            for (int i = 0; i < n; ++i)
                rj[static_cast<size_t>(i)] = axj[static_cast<size_t>(i)] - lambda[static_cast<size_t>(j)] * xj[static_cast<size_t>(i)];
            res[static_cast<size_t>(j)] = norm2(rj);
        }
        double worst = 0.0;
        converged = true;
        for (int j = 0; j < k; ++j) {
            worst = std::max(worst, res[static_cast<size_t>(j)]);
            if (res[static_cast<size_t>(j)] > opts.tol * std::max(std::abs(lambda[static_cast<size_t>(j)]), 1e-300)) {
                converged = false;
            }
        }
        spec.residual_history.push_back(worst);
        if (converged) break;

        // Preconditioned residuals.
        Block W(n, m);
        for (int j = 0; j < m; ++j) {
            auto wj = W.col(j);
            auto rj = R.col(j);
            for (int i = 0; i < n; ++i)
                wj[static_cast<size_t>(i)] = inv_diag[static_cast<size_t>(i)] * rj[static_cast<size_t>(i)];
        }

        Block S = X; // X is orthonormal
        append_orthonormalized(S, W);
        append_orthonormalized(S, P);
        const int s = S.cols;

        Block AS = matmul_block(A, S);
        std::vector<double> G = gram(S, AS);
        // Symmetrize roundoff before the dense solve.
        for (int i = 0; i < s; ++i)
            for (int j = i + 1; j < s; ++j) {
                const double avg = 0.5 * (G[static_cast<size_t>(i) * s + j] + G[static_cast<size_t>(j) * s + i]);
                G[static_cast<size_t>(i) * s + j] = avg;
                G[static_cast<size_t>(j) * s + i] = avg;
            }
        DenseEigh small = jacobi_eigh(std::move(G), s);
        std::vector<double> Q(static_cast<size_t>(s) * s);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                Q[static_cast<size_t>(i) * s + j] = small.vectors[static_cast<size_t>(i) + static_cast<size_t>(j) * s];

        const int m_eff = std::min(m, s);
        std::vector<int> sel(static_cast<size_t>(m_eff));
        std::iota(sel.begin(), sel.end(), 0);

        Block Xn = rotate(S, Q, s, sel);
        Block AXn = rotate(AS, Q, s, sel);
        // Direction block: the W/P contribution to the new Ritz vectors.
        Block Pn = rotate(S, Q, s, sel, /*row_begin=*/m);

        Block Pkeep(n, 0);
        {
            Block basis = Xn;
            append_orthonormalized(basis, Pn);
            for (int j = m_eff; j < basis.cols && Pkeep.cols < m; ++j) {
                Pkeep.append(basis.col(j));
            }
        }

        X = std::move(Xn);
        AX = std::move(AXn);
        P = std::move(Pkeep);
        for (int j = 0; j < m_eff; ++j) lambda[static_cast<size_t>(j)] = small.eigenvalues[static_cast<size_t>(j)];
    }

    if (!converged) {
        std::ostringstream msg;
        msg << "lobpcg_smallest: no convergence within " << opts.max_iter
            << " iterations; residuals:";
        for (int j = 0; j < k; ++j) msg << ' ' << res[static_cast<size_t>(j)];
        throw SolverError(msg.str());
    }

    spec.pairs.resize(static_cast<size_t>(k));
    std::vector<double> Av(static_cast<size_t>(n));
    for (int j = 0; j < k; ++j) {
        EigenPair& pair = spec.pairs[static_cast<size_t>(j)];
        pair.lambda = lambda[static_cast<size_t>(j)];
        auto xj = X.col(j);
        pair.vector.assign(xj.begin(), xj.end());
        const double nrm = norm2(pair.vector);
        for (double& v : pair.vector) v /= nrm;
        A.matvec(pair.vector, Av);
        axpy(-pair.lambda, pair.vector, Av);
        pair.residual = norm2(Av);
    }
    sort_pairs(spec.pairs);
    apply_sign_convention(spec);
    return spec;
}

} // namespace sso
