#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sso/gap_min.hpp"
#include "sso/validation.hpp"
#include "test_support.hpp"

using namespace sso;

namespace {

// Asymmetric grid and potential floor keep lambda2 simple and V + tP >= 0
// for the finite-difference sweeps.
struct FdSetup {
    Grid grid = make_grid(8, 7);
    OperatorParams params{0.25, 0.25};
    double p = 3.0;
    double M = 10.0;
    LobpcgOptions opts;

    FdSetup() {
        opts.tol = 1e-11;
        opts.seed = 5;
    }

    double gamma(const GridFunction& V) const {
        const Spectrum spec = eigenpairs(grid, params, Potential(V, p, 1e9), 3, opts);
        return spec.pairs[1].lambda - spec.pairs[0].lambda;
    }
};

} // namespace

TEST_CASE("gap gradient integrates to zero and matches finite differences") {
    FdSetup setup;
    std::mt19937_64 rng(139);
    std::uniform_real_distribution<double> unif(0.5, 1.5);

    for (int trial = 0; trial < 3; ++trial) {
        GridFunction V(setup.grid);
        for (int k = 0; k < setup.grid.size(); ++k) V[k] = unif(rng);
        GridFunction P(setup.grid);
        for (int k = 0; k < setup.grid.size(); ++k) P[k] = unif(rng) - 1.0;

        const Spectrum spec =
            eigenpairs(setup.grid, setup.params, Potential(V, setup.p, 1e9), 3, setup.opts);
        const GridFunction g = gap_gradient(setup.grid, spec);

        CHECK(std::abs(integrate(g)) <= 1e-9);

        const double analytic = inner_product(P, g);
        const FdEstimate fd = fd_directional_derivative(
            [&](const GridFunction& W) { return setup.gamma(W); }, V, P,
            {1e-3, 3e-4, 1e-4});
        CHECK(std::abs(analytic - fd.value) <= 1e-4 * std::abs(fd.value));
    }
}

TEST_CASE("gap gradient is shift-invariant in the potential") {
    FdSetup setup;
    const GridFunction zero(setup.grid, 0.0);
    const GridFunction shifted(setup.grid, 2.0);
    const Spectrum s0 =
        eigenpairs(setup.grid, setup.params, Potential(zero, setup.p, 1e9), 3, setup.opts);
    const Spectrum sc =
        eigenpairs(setup.grid, setup.params, Potential(shifted, setup.p, 1e9), 3, setup.opts);
    const GridFunction g0 = gap_gradient(setup.grid, s0);
    const GridFunction gc = gap_gradient(setup.grid, sc);
    for (int k = 0; k < setup.grid.size(); ++k) {
        CHECK(g0[k] == doctest::Approx(gc[k]).epsilon(1e-6));
    }
}

TEST_CASE("gap gradient refuses a degenerate second eigenvalue") {
    // The separable alpha = 0 limit on a square grid: lambda2 is exactly
    // twofold (the two first excited modes transpose into each other).
    const Grid g = make_grid(9, 9);
    const OperatorParams params(0.0, 0.0);
    LobpcgOptions opts;
    opts.tol = 1e-10;
    const Spectrum spec = eigenpairs(g, params, Potential(GridFunction(g, 0.0), 3.0, 1.0), 4, opts);
    CHECK(spec.pairs[2].lambda - spec.pairs[1].lambda < 1e-6 * (1.0 + spec.pairs[1].lambda));
    CHECK_THROWS_AS(gap_gradient(g, spec), std::invalid_argument);
}

TEST_CASE("degenerate subgradient rotates the cluster against the direction") {
    const Grid g = make_grid(9, 9);
    const OperatorParams params(0.0, 0.0);
    LobpcgOptions opts;
    opts.tol = 1e-11;
    const Spectrum spec = eigenpairs(g, params, Potential(GridFunction(g, 0.0), 3.0, 1.0), 4, opts);

    std::mt19937_64 rng(149);
    const GridFunction d = test_support::random_function(g, rng);
    const GridFunction sub = degenerate_subgradient(g, spec, d);

    // Rebuild the rotation and verify D diagonalizes in the rotated basis.
    const GridFunction u2a = eigenvector_function(g, spec.pairs[1]);
    const GridFunction u2b = eigenvector_function(g, spec.pairs[2]);
    const double d11 = integrate(GridFunction(g, [&] {
        std::vector<double> v(static_cast<size_t>(g.size()));
        for (int k = 0; k < g.size(); ++k) v[static_cast<size_t>(k)] = u2a[k] * d[k] * u2a[k];
        return v;
    }()));
    const double d12 = integrate(GridFunction(g, [&] {
        std::vector<double> v(static_cast<size_t>(g.size()));
        for (int k = 0; k < g.size(); ++k) v[static_cast<size_t>(k)] = u2a[k] * d[k] * u2b[k];
        return v;
    }()));
    const double d22 = integrate(GridFunction(g, [&] {
        std::vector<double> v(static_cast<size_t>(g.size()));
        for (int k = 0; k < g.size(); ++k) v[static_cast<size_t>(k)] = u2b[k] * d[k] * u2b[k];
        return v;
    }()));
    const DenseEigh rot = jacobi_eigh({d11, d12, d12, d22}, 2);

    // The chosen branch carries the smallest diagonal entry.
    GridFunction chosen(g);
    for (int k = 0; k < g.size(); ++k) {
        chosen[k] = rot.vectors[0] * u2a[k] + rot.vectors[1] * u2b[k];
    }
    const GridFunction u1 = eigenvector_function(g, spec.pairs[0]);
    for (int k = 0; k < g.size(); ++k) {
        CHECK(sub[k] == doctest::Approx(chosen[k] * chosen[k] - u1[k] * u1[k]).epsilon(1e-9));
    }

    // Rotated vectors diagonalize D: the off-diagonal entry vanishes.
    GridFunction w1(g), w2(g);
    for (int k = 0; k < g.size(); ++k) {
        w1[k] = rot.vectors[0] * u2a[k] + rot.vectors[1] * u2b[k];
        w2[k] = rot.vectors[2] * u2a[k] + rot.vectors[3] * u2b[k];
    }
    double off = 0.0;
    for (int k = 0; k < g.size(); ++k) off += w1[k] * d[k] * w2[k];
    off *= g.hx * g.hy;
    CHECK(std::abs(off) <= 1e-10 * (std::abs(d11) + std::abs(d22) + 1.0));
}

TEST_CASE("degenerate subgradient reduces to the simple gradient") {
    FdSetup setup;
    std::mt19937_64 rng(151);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    GridFunction V(setup.grid);
    for (int k = 0; k < setup.grid.size(); ++k) V[k] = unif(rng);
    const Spectrum spec =
        eigenpairs(setup.grid, setup.params, Potential(V, setup.p, 1e9), 3, setup.opts);

    const GridFunction d = test_support::random_function(setup.grid, rng);
    const GridFunction simple = gap_gradient(setup.grid, spec);
    const GridFunction reduced = degenerate_subgradient(setup.grid, spec, d);
    for (int k = 0; k < setup.grid.size(); ++k) {
        CHECK(simple[k] == reduced[k]);
    }
}

TEST_CASE("degenerate subgradient with zero direction picks the first branch") {
    const Grid g = make_grid(9, 9);
    const OperatorParams params(0.0, 0.0);
    LobpcgOptions opts;
    opts.tol = 1e-11;
    const Spectrum spec = eigenpairs(g, params, Potential(GridFunction(g, 0.0), 3.0, 1.0), 4, opts);
    const GridFunction sub = degenerate_subgradient(g, spec, GridFunction(g, 0.0));
    const GridFunction u1 = eigenvector_function(g, spec.pairs[0]);
    const GridFunction u2 = eigenvector_function(g, spec.pairs[1]);
    for (int k = 0; k < g.size(); ++k) {
        CHECK(sub[k] == doctest::Approx(u2[k] * u2[k] - u1[k] * u1[k]).epsilon(1e-12));
    }
}

TEST_CASE("project_to_Sp: idempotent, radial, clipping") {
    const Grid g = make_grid(5, 5);
    std::mt19937_64 rng(157);
    const double p = 3.0, M = 2.0;

    const GridFunction feasible = test_support::random_feasible(g, p, M, rng, 0.6);
    const Potential kept = project_to_Sp(feasible, p, M);
    for (int k = 0; k < g.size(); ++k) CHECK(kept.data[k] == feasible[k]);

    GridFunction big(g);
    for (int k = 0; k < g.size(); ++k) big[k] = 2.0 * feasible[k] / 0.6;
    const double big_norm = lp_norm(big, p);
    CHECK(big_norm > M);
    const Potential scaled = project_to_Sp(big, p, M);
    for (int k = 0; k < g.size(); ++k) {
        CHECK(scaled.data[k] == doctest::Approx(big[k] * M / big_norm).epsilon(1e-14));
    }

    const GridFunction mixed = test_support::random_function(g, rng, -5.0, 5.0);
    const Potential clipped = project_to_Sp(mixed, p, M);
    for (int k = 0; k < g.size(); ++k) CHECK(clipped.data[k] >= 0.0);
    CHECK(clipped.feasible());
}

TEST_CASE("tangential_component projector identities") {
    const Grid g = make_grid(6, 6);
    std::mt19937_64 rng(163);
    const double p = 3.0;
    const Potential V(test_support::random_feasible(g, p, 4.0, rng), p, 4.0);

    GridFunction W(g);
    for (int k = 0; k < g.size(); ++k) W[k] = std::pow(V.data[k], p - 1.0);

    SUBCASE("pure normal direction maps to zero") {
        const GridFunction out = tangential_component(W, V, p);
        for (int k = 0; k < g.size(); ++k) CHECK(std::abs(out[k]) <= 1e-12);
    }

    SUBCASE("random directions become tangential and the map is idempotent") {
        for (int trial = 0; trial < 10; ++trial) {
            const GridFunction P = test_support::random_function(g, rng);
            const GridFunction out = tangential_component(P, V, p);
            const double pairing = inner_product(W, out);
            CHECK(std::abs(pairing) <= 1e-12 * std::max(1.0, inner_product(W, W)));

            const GridFunction twice = tangential_component(out, V, p);
            for (int k = 0; k < g.size(); ++k) {
                CHECK(twice[k] == doctest::Approx(out[k]).epsilon(1e-10));
            }
        }
    }

    SUBCASE("vanishing potential is rejected") {
        const Potential zero(GridFunction(g, 0.0), p, 1.0);
        CHECK_THROWS_AS(tangential_component(W, zero, p), std::invalid_argument);
    }
}

TEST_CASE("projected gradient descent shrinks the gap on a small benchmark") {
    GapConfig cfg;
    cfg.grid = make_grid(12, 12);
    cfg.params = OperatorParams(0.25, 0.25);
    cfg.p = 3.0;
    cfg.M = 10.0;
    cfg.tol_gamma = 1e-7;
    cfg.max_outer = 200;
    cfg.eig.tol = 1e-10;
    cfg.eig.seed = 11;

    const GapResult result = projected_gradient_minimize(cfg);

    CHECK(result.gamma > 0.0);
    CHECK(result.gamma < result.history.front().gamma);
    CHECK(result.V_opt.feasible());
    for (size_t i = 0; i + 1 < result.history.size(); ++i) {
        CHECK(result.history[i + 1].gamma <= result.history[i].gamma);
        CHECK(result.history[i + 1].norm_ratio <= 1.0 + 1e-12);
    }
    CHECK((result.converged || result.stalled || result.outer_iterations == cfg.max_outer));

    // Normalization identity along the way: integrate(u2^2 - u1^2) = 0.
    GridFunction diff(cfg.grid);
    for (int k = 0; k < cfg.grid.size(); ++k) {
        diff[k] = result.u2[k] * result.u2[k] - result.u1[k] * result.u1[k];
    }
    CHECK(std::abs(integrate(diff)) <= 1e-8);
}

TEST_CASE("classical gap anchor under refinement") {
    // Gamma(0) -> 3 pi^2 for the alpha = 0 operator.
    LobpcgOptions opts;
    opts.tol = 1e-10;
    const double continuum = 3.0 * std::numbers::pi * std::numbers::pi;
    double prev_err = 0.0;
    for (int n : {16, 32}) {
        const Grid g = make_grid(n, n);
        const Spectrum spec =
            eigenpairs(g, OperatorParams(0.0, 0.0), Potential(GridFunction(g, 0.0), 3.0, 1.0), 3, opts);
        const double gamma = spec.pairs[1].lambda - spec.pairs[0].lambda;
        const double err = std::abs(gamma - continuum);
        if (prev_err > 0.0) CHECK(err < prev_err);
        prev_err = err;
    }
}

TEST_CASE("structural diagnostics recover manufactured proportionality") {
    const Grid g = make_grid(10, 10);
    const double p = 3.0, M = 5.0;

    // Support on the left half; u2^2 - u1^2 = -2 V^(p-1) there, positive off.
    GridFunction V(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            V.at(i, j) = (i < g.nx / 2) ? 1.0 + 0.1 * i + 0.05 * j : 0.0;
        }
    }
    const double scale = M / lp_norm(V, p);
    for (int k = 0; k < g.size(); ++k) V[k] *= scale;

    GapResult fake;
    fake.V_opt = Potential(V, p, M);
    fake.u1 = GridFunction(g, 0.0);
    GridFunction u2(g);
    for (int k = 0; k < g.size(); ++k) {
        u2[k] = (V[k] > 0.0) ? 0.0 : 0.3; // off-support positive part
    }
    fake.u2 = u2;
    // Encode y = u2^2 - u1^2 = -2 V^{p-1} on the support through u1.
    GridFunction u1(g);
    for (int k = 0; k < g.size(); ++k) {
        u1[k] = (V[k] > 0.0) ? std::sqrt(2.0 * std::pow(V[k], p - 1.0)) : 0.0;
    }
    fake.u1 = u1;

    const GapDiagnostics diag = structural_diagnostics(fake, p);
    CHECK_FALSE(diag.empty_support);
    CHECK(diag.c_fit == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(diag.fit_residual <= 1e-10);
    CHECK(diag.off_support_min >= 0.0);
    CHECK(diag.support_fraction == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(diag.norm_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("structural diagnostics flag an empty support") {
    const Grid g = make_grid(5, 5);
    GapResult fake;
    fake.V_opt = Potential(GridFunction(g, 0.0), 3.0, 1.0);
    fake.u1 = GridFunction(g, 0.1);
    fake.u2 = GridFunction(g, 0.2);
    const GapDiagnostics diag = structural_diagnostics(fake, 3.0);
    CHECK(diag.empty_support);
    CHECK(diag.support_fraction == 0.0);
}

TEST_CASE("gap config rejects p <= 2") {
    GapConfig cfg;
    cfg.grid = make_grid(6, 6);
    cfg.p = 2.0;
    CHECK_THROWS_AS(projected_gradient_minimize(cfg), std::invalid_argument);
}
