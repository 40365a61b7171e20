#include <catch2/catch_amalgamated.hpp>

#include "dbnot/eval.hpp"
#include "dbnot/graph.hpp"
#include "dbnot/rng.hpp"

using namespace dbnot;

namespace {

FeatureMatrix from_columns(const std::vector<std::vector<double>>& cols) {
    FeatureMatrix z(cols.front().size(), cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i)
        for (std::size_t k = 0; k < cols[i].size(); ++k) z.at(k, i) = cols[i][k];
    return z;
}

double affinity_at(const SparseAffinity& s, std::size_t i, std::size_t j) {
    const SparseSym& m = s.matrix();
    for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
        if (m.col[k] == j) return m.val[k];
    return 0.0;
}

}  // namespace

TEST_CASE("normalize_features centers and scales to unit population variance") {
    FeatureMatrix z = from_columns({{1.0}, {2.0}, {3.0}});
    FeatureMatrix out = normalize_features(z);
    CHECK(out.at(0, 0) == Catch::Approx(-1.224744871391589).margin(1e-12));
    CHECK(out.at(0, 1) == Catch::Approx(0.0).margin(1e-12));
    CHECK(out.at(0, 2) == Catch::Approx(1.224744871391589).margin(1e-12));

    // already standardized input passes through
    FeatureMatrix again = normalize_features(out);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(again.at(0, i) - out.at(0, i)) < 1e-10);

    // constant dimension: centered, variance left at zero
    FeatureMatrix flat = from_columns({{5.0}, {5.0}, {5.0}});
    FeatureMatrix zeroed = normalize_features(flat);
    for (std::size_t i = 0; i < 3; ++i) CHECK(zeroed.at(0, i) == 0.0);
}

TEST_CASE("normalize_features is idempotent on random data") {
    Rng rng(61);
    FeatureMatrix z(3, 20);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t k = 0; k < 3; ++k) z.at(k, i) = rng.uniform(-4.0, 9.0);
    FeatureMatrix once = normalize_features(z);
    FeatureMatrix twice = normalize_features(once);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(twice.at(k, i) - once.at(k, i)) < 1e-10);
}

TEST_CASE("two points with k=1 link with weight exp(-1/2)") {
    // the bandwidth is the mean pairwise distance, which for one pair is the
    // distance itself, so the weight is exp(-d^2/(2 d^2))
    FeatureMatrix z = from_columns({{0.0, 0.0}, {3.0, 4.0}});
    SparseAffinity s = knn_gaussian_affinity(z, 1);
    CHECK(affinity_at(s, 0, 1) == Catch::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(affinity_at(s, 1, 0) == Catch::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(affinity_at(s, 0, 0) == 0.0);
}

TEST_CASE("three collinear points with k=2 are fully connected") {
    FeatureMatrix z = from_columns({{0.0}, {1.0}, {2.0}});
    SparseAffinity s = knn_gaussian_affinity(z, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(affinity_at(s, i, i) == 0.0);
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) {
                CHECK(affinity_at(s, i, j) > 0.0);
                CHECK(affinity_at(s, i, j) == affinity_at(s, j, i));
            }
    }
}

TEST_CASE("well-separated blobs produce no cross-blob edges") {
    LabeledDataset ds = generate_blobs(10, {{0.0, 0.0}, {50.0, 0.0}}, 0.3, 3);
    SparseAffinity s = knn_gaussian_affinity(ds.features, 3);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 10; j < 20; ++j) CHECK(affinity_at(s, i, j) < 1e-6);
}

TEST_CASE("knn affinity validates k") {
    FeatureMatrix z = from_columns({{0.0}, {1.0}});
    CHECK_THROWS_AS(knn_gaussian_affinity(z, 2), std::invalid_argument);
    CHECK_THROWS_AS(knn_gaussian_affinity(z, 0), std::invalid_argument);
}

TEST_CASE("duplicate points get unit weight") {
    FeatureMatrix z = from_columns({{1.0, 1.0}, {1.0, 1.0}, {4.0, 5.0}});
    SparseAffinity s = knn_gaussian_affinity(z, 1);
    CHECK(affinity_at(s, 0, 1) == 1.0);  // exp(0)
}

TEST_CASE("laplacian of a single edge and of the empty graph") {
    SparseAffinity edge = SparseAffinity::from_edges(2, {{0, 1, 1.0}});
    SparseSym lap = laplacian(edge);
    auto at = [&](std::size_t i, std::size_t j) {
        for (std::size_t k = lap.row_ptr[i]; k < lap.row_ptr[i + 1]; ++k)
            if (lap.col[k] == j) return lap.val[k];
        return 0.0;
    };
    CHECK(at(0, 0) == 1.0);
    CHECK(at(0, 1) == -1.0);
    CHECK(at(1, 0) == -1.0);
    CHECK(at(1, 1) == 1.0);

    SparseSym empty = laplacian(SparseAffinity::from_edges(3, {}));
    for (double v : empty.val) CHECK(v == 0.0);
}

TEST_CASE("laplacian quadratic form identity on a random graph") {
    Rng rng(62);
    FeatureMatrix z(2, 6);
    for (std::size_t i = 0; i < 6; ++i) {
        z.at(0, i) = rng.normal();
        z.at(1, i) = rng.normal();
    }
    SparseAffinity s = knn_gaussian_affinity(z, 2);
    SparseSym lap = laplacian(s);

    DenseMatrix ones(6, 1, 1.0);
    CHECK(std::abs(trace_quadratic(ones, lap, ones)) < 1e-10);

    for (int trial = 0; trial < 20; ++trial) {
        DenseMatrix x(6, 1);
        for (double& v : x.data()) v = rng.uniform(-3.0, 3.0);
        double ref = 0.0;
        const SparseSym& m = s.matrix();
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
                const double d = x(i, 0) - x(m.col[k], 0);
                ref += m.val[k] * d * d;
            }
        ref *= 0.5;
        CHECK(std::abs(trace_quadratic(x, lap, x) - ref) < 1e-10);
        CHECK(trace_quadratic(x, lap, x) >= -1e-10);
    }
}

TEST_CASE("two rings: exact radii without noise, determinism, no cross-ring edges") {
    LabeledDataset clean = generate_two_rings(16, 0.0, 5);
    for (std::size_t i = 0; i < 32; ++i) {
        const double r = std::hypot(clean.features.at(0, i), clean.features.at(1, i));
        CHECK(r == Catch::Approx(i < 16 ? 1.0 : 2.5).margin(1e-12));
    }

    LabeledDataset a = generate_two_rings(40, 0.05, 9);
    LabeledDataset b = generate_two_rings(40, 0.05, 9);
    for (std::size_t i = 0; i < 80; ++i) {
        CHECK(a.features.at(0, i) == b.features.at(0, i));
        CHECK(a.features.at(1, i) == b.features.at(1, i));
    }

    LabeledDataset ds = generate_two_rings(100, 0.05, 7);
    SparseAffinity s = knn_gaussian_affinity(normalize_features(ds.features), 10);
    double max_cross = 0.0;
    for (std::size_t i = 0; i < 100; ++i)
        for (std::size_t j = 100; j < 200; ++j) max_cross = std::max(max_cross, affinity_at(s, i, j));
    CHECK(max_cross < 1e-4);

    CHECK_THROWS_AS(generate_two_rings(4, 0.0, 1), std::invalid_argument);
}

TEST_CASE("connected components") {
    SparseAffinity s = SparseAffinity::from_edges(5, {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}});
    auto [comp, count] = connected_components(s);
    CHECK(count == 2);
    CHECK(comp[0] == comp[1]);
    CHECK(comp[1] == comp[2]);
    CHECK(comp[3] == comp[4]);
    CHECK(comp[0] != comp[3]);
}

TEST_CASE("uniform jitter initial plan") {
    DualBoundedSet omega(6, 3, 1.0, 3.0);
    TransportPlan exact = initial_plan(omega, InitMode::UniformJitter, nullptr, nullptr, 1, 0.0);
    for (double x : exact.matrix.data()) CHECK(x == Catch::Approx(1.0 / 3.0).margin(1e-15));

    TransportPlan p1 = initial_plan(omega, InitMode::UniformJitter, nullptr, nullptr, 4);
    TransportPlan p2 = initial_plan(omega, InitMode::UniformJitter, nullptr, nullptr, 4);
    CHECK((p1.matrix - p2.matrix).max_abs() == 0.0);
    CHECK(check_feasible(p1.matrix, omega, 1e-8).feasible);
}

TEST_CASE("k-means warm start recovers blob structure before any solve") {
    LabeledDataset ds = generate_blobs(15, {{0.0, 0.0}, {40.0, 0.0}}, 0.5, 11);
    DualBoundedSet omega(30, 2, 5.0, 25.0);
    TransportPlan p = initial_plan(omega, InitMode::KMeansWarm, &ds.features, nullptr, 11);
    CHECK(check_feasible(p.matrix, omega, 1e-8).feasible);
    LabelVector lab = labels_from_plan(p);
    CHECK(accuracy(lab, *ds.labels) == 1.0);

    CHECK_THROWS_AS(initial_plan(omega, InitMode::KMeansWarm, nullptr, nullptr, 11),
                    std::invalid_argument);
}

TEST_CASE("graph-components warm start splits disconnected graphs") {
    LabeledDataset ds = generate_two_rings(60, 0.02, 2);
    SparseAffinity s = knn_gaussian_affinity(normalize_features(ds.features), 6);
    DualBoundedSet omega(120, 2, 40.0, 80.0);
    TransportPlan p = initial_plan(omega, InitMode::GraphComponents, nullptr, &s, 2);
    CHECK(check_feasible(p.matrix, omega, 1e-8).feasible);
    CHECK(accuracy(labels_from_plan(p), *ds.labels) == 1.0);

    // a connected graph has fewer components than clusters
    SparseAffinity chain = SparseAffinity::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
    DualBoundedSet omega2(4, 2, 1.0, 3.0);
    CHECK_THROWS_AS(initial_plan(omega2, InitMode::GraphComponents, nullptr, &chain, 0),
                    std::invalid_argument);
}

TEST_CASE("k-means labels are deterministic per seed") {
    Rng rng(63);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({rng.normal(), rng.normal()});
    auto a = kmeans_lloyd(pts, 3, 17);
    auto b = kmeans_lloyd(pts, 3, 17);
    CHECK(a == b);
}
