#include <catch2/catch_amalgamated.hpp>

#include "dbnot/constraints.hpp"
#include "dbnot/rng.hpp"
#include "dbnot/verify/oracles.hpp"

using namespace dbnot;

TEST_CASE("dual-bounded set rejects empty or malformed configurations") {
    CHECK_THROWS_AS(DualBoundedSet(4, 1, 0.0, 4.0), std::invalid_argument);   // c >= 2
    CHECK_THROWS_AS(DualBoundedSet(2, 3, 0.0, 2.0), std::invalid_argument);   // n >= c
    CHECK_THROWS_AS(DualBoundedSet(4, 2, 3.0, 2.0), std::invalid_argument);   // b_l <= b_u
    CHECK_THROWS_AS(DualBoundedSet(4, 2, 3.0, 5.0), std::invalid_argument);   // c*b_l <= n
    CHECK_THROWS_AS(DualBoundedSet(4, 2, 0.0, 1.0), std::invalid_argument);   // n <= c*b_u
    CHECK_THROWS_AS(DualBoundedSet(4, 2, -1.0, 4.0), std::invalid_argument);  // b_l >= 0
    CHECK_NOTHROW(DualBoundedSet(4, 2, 1.0, 3.0));
}

TEST_CASE("check_feasible on the uniform plan") {
    DualBoundedSet omega(4, 2, 1.0, 3.0);
    DenseMatrix f(4, 2, 0.5);
    auto rep = check_feasible(f, omega, 1e-8);
    CHECK(rep.feasible);
    CHECK(rep.max_deviation() == 0.0);
}

TEST_CASE("check_feasible reports lower-bound violations for a one-column plan") {
    DualBoundedSet omega(4, 2, 1.0, 4.0);
    DenseMatrix f(4, 2);
    for (std::size_t i = 0; i < 4; ++i) f(i, 0) = 1.0;
    auto rep = check_feasible(f, omega, 1e-8);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.bound_violations[0] == 0.0);
    CHECK(rep.bound_violations[1] == 1.0);  // empty column misses b_l by b_l
}

TEST_CASE("check_feasible accepts any row-normalized plan under vacuous bounds") {
    Rng rng(21);
    const std::size_t n = 6, c = 3;
    DualBoundedSet omega(n, c, 0.0, static_cast<double>(n));
    DenseMatrix f(n, c);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            f(i, j) = rng.uniform(0.0, 1.0);
            s += f(i, j);
        }
        for (std::size_t j = 0; j < c; ++j) f(i, j) /= s;
    }
    CHECK(check_feasible(f, omega, 1e-8).feasible);
    CHECK_THROWS_AS(check_feasible(DenseMatrix(3, 3), omega, 1e-8), std::invalid_argument);
}

TEST_CASE("simplex projection on hand instances") {
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
    };
    same(project_row_simplex({0.2, 0.3, 0.5}), {0.2, 0.3, 0.5});
    same(project_row_simplex({0.5, 0.5, 0.5}), {1.0 / 3, 1.0 / 3, 1.0 / 3});
    same(project_row_simplex({2.0, 0.0, -1.0}), {1.0, 0.0, 0.0});
}

TEST_CASE("simplex projection properties on random inputs") {
    Rng rng(22);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> v(1 + rng.index(12));
        for (double& x : v) x = rng.uniform(-10.0, 10.0);
        auto w = project_row_simplex(v);
        double s = 0.0;
        for (double x : w) {
            CHECK(x >= -1e-12);
            s += x;
        }
        CHECK(std::abs(s - 1.0) < 1e-10);
        auto w2 = project_row_simplex(w);  // idempotent
        for (std::size_t j = 0; j < w.size(); ++j) CHECK(std::abs(w2[j] - w[j]) < 1e-10);
    }
}

TEST_CASE("column lower projection") {
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-15);
    };
    same(project_col_lower({0.6, 0.6}, 1.0), {0.6, 0.6});  // inactive: exact identity
    same(project_col_lower({0.4, 0.4}, 1.0), {0.5, 0.5});
    same(project_col_lower({1.0, -1.0}, 1.0), {1.5, -0.5});

    // active case lands the sum exactly on the bound
    auto r = project_col_lower({0.1, 0.2, 0.3}, 2.0);
    CHECK(std::abs(r[0] + r[1] + r[2] - 2.0) < 1e-12);
}

TEST_CASE("column upper projection") {
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-15);
    };
    same(project_col_upper({0.4, 0.4}, 1.0), {0.4, 0.4});
    same(project_col_upper({0.6, 0.6}, 1.0), {0.5, 0.5});
    same(project_col_upper({2.0, 0.0}, 1.0), {1.5, -0.5});
    auto r = project_col_upper({3.0, 2.0, 1.0}, 4.0);
    CHECK(std::abs(r[0] + r[1] + r[2] - 4.0) < 1e-12);
}

TEST_CASE("dykstra fixes points already in the set") {
    DualBoundedSet omega(3, 2, 1.0, 2.0);
    DenseMatrix f = DenseMatrix::from_rows({{0.7, 0.3}, {0.4, 0.6}, {0.5, 0.5}});
    REQUIRE(check_feasible(f, omega, 1e-12).feasible);
    DenseMatrix p = dykstra_project(f, omega);
    CHECK((p - f).max_abs() == 0.0);
}

TEST_CASE("dykstra matches the hand-solved doubly constrained 2x2 projection") {
    DualBoundedSet omega(2, 2, 1.0, 1.0);
    DenseMatrix m = DenseMatrix::from_rows({{0.9, 0.1}, {0.9, 0.1}});
    DenseMatrix p = dykstra_project(m, omega, 1e-10, 5000);
    // symmetric quadratic in one free variable per column: optimum at 1/2
    for (double x : p.data()) CHECK(std::abs(x - 0.5) < 1e-6);
    DenseMatrix q = oracle::qp_project_active_set(m, omega);
    CHECK((p - q).frobenius_norm() < 1e-6);
}

TEST_CASE("dykstra agrees with the QP oracle and is no farther than oracle-feasible points") {
    Rng rng(23);
    DualBoundedSet omega(4, 2, 1.0, 3.0);
    for (int trial = 0; trial < 25; ++trial) {
        DenseMatrix m(4, 2);
        for (double& x : m.data()) x = rng.uniform(-1.0, 2.0);
        DenseMatrix p = dykstra_project(m, omega, 1e-10, 5000);
        CHECK(check_feasible(p, omega, 1e-6).feasible);
        DenseMatrix q = oracle::qp_project_active_set(m, omega);
        CHECK((p - q).frobenius_norm() < 1e-6);
        CHECK((p - m).frobenius_norm() <= (q - m).frobenius_norm() + 1e-6);
    }
}

TEST_CASE("dykstra is idempotent and does not move away from feasible points") {
    Rng rng(24);
    DualBoundedSet omega(5, 2, 1.0, 4.0);
    DenseMatrix uniform(5, 2, 0.5);
    const double tol = 1e-9;
    for (int trial = 0; trial < 10; ++trial) {
        DenseMatrix m(5, 2);
        for (double& x : m.data()) x = rng.uniform(-1.5, 1.5);
        DenseMatrix p = dykstra_project(m, omega, tol, 5000);
        DenseMatrix p2 = dykstra_project(p, omega, tol, 5000);
        CHECK((p2 - p).frobenius_norm() < 2.0 * tol);
        CHECK((p - uniform).frobenius_norm() <= (m - uniform).frobenius_norm() + tol);
    }
}

TEST_CASE("convex blends of feasible plans stay feasible") {
    Rng rng(25);
    DualBoundedSet omega(6, 3, 1.0, 3.0);
    DenseMatrix x1 = dykstra_project([&] {
        DenseMatrix m(6, 3);
        for (double& x : m.data()) x = rng.uniform(-1.0, 1.0);
        return m;
    }(), omega, 1e-11, 5000);
    DenseMatrix x2 = dykstra_project([&] {
        DenseMatrix m(6, 3);
        for (double& x : m.data()) x = rng.uniform(-1.0, 1.0);
        return m;
    }(), omega, 1e-11, 5000);
    for (int trial = 0; trial < 100; ++trial) {
        const double alpha = rng.uniform(0.0, 1.0);
        CHECK(check_feasible(blend(x1, x2, alpha), omega, 1e-10).feasible);
    }
}
