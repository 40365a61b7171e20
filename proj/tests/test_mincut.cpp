#include <catch2/catch_amalgamated.hpp>

#include "dbnot/graph.hpp"
#include "dbnot/mincut.hpp"
#include "dbnot/rng.hpp"
#include "dbnot/verify/oracles.hpp"

using namespace dbnot;

namespace {

SparseAffinity two_two_cliques() {
    // two disjoint edges (2-cliques) with unit weights
    return SparseAffinity::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
}

SparseAffinity random_geometric(Rng& rng, std::size_t n, std::size_t k) {
    FeatureMatrix z(2, n);
    for (std::size_t i = 0; i < n; ++i) {
        z.at(0, i) = rng.normal();
        z.at(1, i) = rng.normal();
    }
    return knn_gaussian_affinity(z, k);
}

}  // namespace

TEST_CASE("mincut value on structured plans") {
    Rng rng(51);
    SparseAffinity s = random_geometric(rng, 8, 3);
    const double total = s.total_weight();

    DenseMatrix one_col(8, 3);
    for (std::size_t i = 0; i < 8; ++i) one_col(i, 0) = 1.0;
    CHECK(mincut_value(s, one_col) == Catch::Approx(-total).epsilon(1e-12));

    DenseMatrix uniform(8, 3, 1.0 / 3.0);
    CHECK(mincut_value(s, uniform) == Catch::Approx(-total / 3.0).epsilon(1e-12));

    SparseAffinity cl = two_two_cliques();
    DenseMatrix block = DenseMatrix::from_rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
    CHECK(mincut_value(cl, block) == -4.0);
}

TEST_CASE("mincut gradient") {
    SparseAffinity zero = SparseAffinity::from_edges(3, {});
    CHECK(mincut_gradient(zero, DenseMatrix(3, 2, 1.0)).max_abs() == 0.0);

    SparseAffinity swap = SparseAffinity::from_edges(2, {{0, 1, 1.0}});
    DenseMatrix g = mincut_gradient(swap, DenseMatrix::identity(2));
    CHECK(g(0, 0) == 0.0);
    CHECK(g(0, 1) == -2.0);
    CHECK(g(1, 0) == -2.0);
    CHECK(g(1, 1) == 0.0);

    Rng rng(52);
    SparseAffinity s = random_geometric(rng, 6, 2);
    DenseMatrix f(6, 3);
    for (double& x : f.data()) x = rng.uniform(0.0, 1.0);
    DenseMatrix fd = oracle::finite_difference_gradient(
        [&](const DenseMatrix& x) { return mincut_value(s, x); }, f);
    DenseMatrix an = mincut_gradient(s, f);
    CHECK((an - fd).frobenius_norm() / an.frobenius_norm() < 1e-5);
}

TEST_CASE("line search hand instances") {
    SparseAffinity swap = SparseAffinity::from_edges(2, {{0, 1, 1.0}});
    DenseMatrix eye = DenseMatrix::identity(2);
    DenseMatrix perm = DenseMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});

    CHECK(line_search_mincut(swap, eye, eye) == 0.0);    // fg = F: stagnation signal
    CHECK(line_search_mincut(swap, eye, perm) == 0.5);   // x=0, y=0, z=2
    CHECK(line_search_mincut(swap, perm, perm) == 0.0);  // fixed point again
}

TEST_CASE("line search beats a fine grid") {
    Rng rng(53);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 5 + rng.index(3);
        SparseAffinity s = random_geometric(rng, n, 2);
        DenseMatrix f(n, 2), fg(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            f(i, 0) = rng.uniform(0.0, 1.0);
            f(i, 1) = 1.0 - f(i, 0);
            fg(i, 0) = rng.uniform(0.0, 1.0);
            fg(i, 1) = 1.0 - fg(i, 0);
        }
        const double mu = line_search_mincut(s, f, fg);
        const double v = mincut_value(s, blend(f, fg, mu));
        for (int k = 0; k <= 1000; ++k)
            CHECK(v <= mincut_value(s, blend(f, fg, k / 1000.0)) + 1e-9);
    }
}

TEST_CASE("gradient is Lipschitz with modulus 2||S||_F") {
    Rng rng(54);
    SparseAffinity s = random_geometric(rng, 7, 3);
    const double mod = 2.0 * frobenius_norm(s);
    for (int trial = 0; trial < 30; ++trial) {
        DenseMatrix f1(7, 2), f2(7, 2);
        for (double& x : f1.data()) x = rng.uniform(0.0, 1.0);
        for (double& x : f2.data()) x = rng.uniform(0.0, 1.0);
        const double lhs = (mincut_gradient(s, f1) - mincut_gradient(s, f2)).frobenius_norm();
        CHECK(lhs <= mod * (f1 - f2).frobenius_norm() + 1e-12);
    }
}

TEST_CASE("kept plus cut weight equals the total for hard assignments") {
    Rng rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        SparseAffinity s = random_geometric(rng, 6, 2);
        SparseSym lap = laplacian(s);
        DenseMatrix y(6, 2);
        for (std::size_t i = 0; i < 6; ++i) y(i, rng.index(2)) = 1.0;
        const double total = s.total_weight();
        const double kept = trace_quadratic(y, s, y);
        const double cut = trace_quadratic(y, lap, y);
        CHECK(std::abs(total - kept - cut) < 1e-8);
    }
}

TEST_CASE("convex cut objective on structured plans") {
    SparseAffinity cl = two_two_cliques();
    SparseSym lap = laplacian(cl);

    DenseMatrix uniform(4, 2, 0.5);
    CHECK(std::abs(convex_value(lap, uniform)) < 1e-12);  // Laplacian null space

    DenseMatrix block = DenseMatrix::from_rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
    CHECK(std::abs(convex_value(lap, block)) < 1e-12);  // no cut edges

    SparseAffinity edge = SparseAffinity::from_edges(2, {{0, 1, 1.0}});
    CHECK(convex_value(laplacian(edge), DenseMatrix::identity(2)) == 2.0);  // one unit edge cut
}

TEST_CASE("convex cut objective is convex along segments") {
    Rng rng(56);
    SparseAffinity s = random_geometric(rng, 8, 3);
    SparseSym lap = laplacian(s);
    for (int trial = 0; trial < 25; ++trial) {
        DenseMatrix a(8, 2), b(8, 2);
        for (double& x : a.data()) x = rng.uniform(0.0, 1.0);
        for (double& x : b.data()) x = rng.uniform(0.0, 1.0);
        const double mid = convex_value(lap, blend(a, b, 0.5));
        CHECK(mid <= 0.5 * (convex_value(lap, a) + convex_value(lap, b)) + 1e-10);
    }
}

TEST_CASE("laplacian oracle invariants") {
    Rng rng(57);
    SparseAffinity s = random_geometric(rng, 9, 3);
    ConvexLaplacianOracle oracle_cx(laplacian(s));
    const SparseSym& lap = oracle_cx.laplacian();
    for (std::size_t i = 0; i < lap.n; ++i) {
        double rowsum = 0.0;
        for (std::size_t k = lap.row_ptr[i]; k < lap.row_ptr[i + 1]; ++k) rowsum += lap.val[k];
        CHECK(std::abs(rowsum) < 1e-10);
    }
    // positive semidefinite: quadratic form nonnegative on random vectors
    for (int trial = 0; trial < 50; ++trial) {
        DenseMatrix x(9, 1);
        for (double& v : x.data()) v = rng.uniform(-2.0, 2.0);
        CHECK(trace_quadratic(x, lap, x) >= -1e-10);
    }
    CHECK(oracle_cx.smoothness() == 2.0 * frobenius_norm(lap));
}

TEST_CASE("mincut oracle caches the smoothness constant") {
    SparseAffinity s = two_two_cliques();
    MinCutOracle oracle_mc(s);
    CHECK(oracle_mc.smoothness() == 2.0 * frobenius_norm(s));
    CHECK(oracle_mc.smoothness() > 0.0);
}
