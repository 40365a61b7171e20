#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dbnot/constraints.hpp"
#include "dbnot/linalg.hpp"
#include "dbnot/rng.hpp"
#include "dbnot/solver.hpp"

namespace dbnot {

/// Column-major feature matrix: sample i is the i-th column, d rows of
/// feature dimensions.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t d, std::size_t n) : d_(d), n_(n), a_(d * n, 0.0) {}

    std::size_t dim() const { return d_; }
    std::size_t samples() const { return n_; }

    double& at(std::size_t k, std::size_t i) { return a_[i * d_ + k]; }
    double at(std::size_t k, std::size_t i) const { return a_[i * d_ + k]; }

    const double* sample(std::size_t i) const { return a_.data() + i * d_; }
    double* sample(std::size_t i) { return a_.data() + i * d_; }

    bool all_finite() const {
        for (double x : a_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    std::size_t d_ = 0, n_ = 0;
    std::vector<double> a_;  // sample-contiguous
};

struct LabeledDataset {
    FeatureMatrix features;
    std::optional<std::vector<int>> labels;
};

/// Center each feature dimension and scale it to unit population variance;
/// zero-variance dimensions are centered and left at zero.
inline FeatureMatrix normalize_features(const FeatureMatrix& z) {
    const std::size_t d = z.dim(), n = z.samples();
    if (n < 2) throw std::invalid_argument("normalize_features: need at least 2 samples");
    FeatureMatrix out(d, n);
    for (std::size_t k = 0; k < d; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += z.at(k, i);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = z.at(k, i) - mean;
            var += c * c;
        }
        var /= static_cast<double>(n);
        const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.at(k, i) = (z.at(k, i) - mean) * scale;
    }
    return out;
}

inline double euclidean_distance(const FeatureMatrix& z, std::size_t i, std::size_t j) {
    double s = 0.0;
    const double* a = z.sample(i);
    const double* b = z.sample(j);
    for (std::size_t k = 0; k < z.dim(); ++k) {
        const double dk = a[k] - b[k];
        s += dk * dk;
    }
    return std::sqrt(s);
}

/// Mean pairwise Euclidean distance. Exact below the cutoff; above it, the
/// mean of one million seeded random pairs.
inline double mean_pairwise_distance(const FeatureMatrix& z, std::size_t exact_cutoff = 2000) {
    const std::size_t n = z.samples();
    if (n < 2) throw std::invalid_argument("mean_pairwise_distance: need at least 2 samples");
    if (n <= exact_cutoff) {
        double s = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                s += euclidean_distance(z, i, j);
                ++cnt;
            }
        return s / static_cast<double>(cnt);
    }
    Rng rng(0x9E3779B97F4A7C15ull);
    const std::size_t pairs = 1000000;
    double s = 0.0;
    std::size_t cnt = 0;
    while (cnt < pairs) {
        const std::size_t i = rng.index(n), j = rng.index(n);
        if (i == j) continue;
        s += euclidean_distance(z, i, j);
        ++cnt;
    }
    return s / static_cast<double>(pairs);
}

/// k-nearest-neighbor Gaussian affinity: s_ij = exp(-d_ij^2 / (2 sigma^2)) for
/// j among the k nearest neighbors of i, symmetrized by max. The bandwidth
/// defaults to the mean pairwise distance of the dataset; pass sigma > 0 to
/// override.
inline SparseAffinity knn_gaussian_affinity(const FeatureMatrix& z, std::size_t k,
                                            double sigma = 0.0) {
    const std::size_t n = z.samples();
    if (k < 1 || k >= n) throw std::invalid_argument("knn_gaussian_affinity: need 1 <= k < n");
    if (!z.all_finite()) throw std::invalid_argument("knn_gaussian_affinity: non-finite features");
    if (sigma <= 0.0) sigma = mean_pairwise_distance(z);
    const double inv = sigma > 0.0 ? 1.0 / (2.0 * sigma * sigma) : 0.0;

    std::vector<Triplet> edges;
    edges.reserve(n * k);
    std::vector<std::pair<double, std::size_t>> dist(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dist[m++] = {euclidean_distance(z, i, j), j};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t t = 0; t < k; ++t) {
            const double w = sigma > 0.0 ? std::exp(-dist[t].first * dist[t].first * inv) : 1.0;
            edges.push_back({i, dist[t].second, w});
        }
    }
    return SparseAffinity::from_edges(n, edges);
}

/// Graph Laplacian D - S with d_ii the row sums of S. Row sums of the result
/// are zero.
inline SparseSym laplacian(const SparseAffinity& s) {
    const SparseSym& m = s.matrix();
    std::vector<Triplet> t;
    t.reserve(m.nnz() + m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        double deg = 0.0;
        for (std::size_t kk = m.row_ptr[i]; kk < m.row_ptr[i + 1]; ++kk) {
            deg += m.val[kk];
            t.push_back({i, m.col[kk], -m.val[kk]});
        }
        t.push_back({i, i, deg});
    }
    return detail::csr_from_triplets(m.n, std::move(t), [](double a, double b) { return a + b; });
}

/// Two concentric rings at radii 1 and 2.5: equally spaced angles with seeded
/// Gaussian radial noise, labeled by ring. Equal spacing keeps the k-NN graph
/// of each ring internal, so the rings stay disconnected from each other.
inline LabeledDataset generate_two_rings(std::size_t n_per_ring, double noise,
                                         std::uint64_t seed) {
    if (n_per_ring < 8) throw std::invalid_argument("generate_two_rings: need n_per_ring >= 8");
    Rng rng(seed);
    const std::size_t n = 2 * n_per_ring;
    LabeledDataset ds;
    ds.features = FeatureMatrix(2, n);
    ds.labels = std::vector<int>(n);
    const double radii[2] = {1.0, 2.5};
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t ring = 0; ring < 2; ++ring) {
        for (std::size_t i = 0; i < n_per_ring; ++i) {
            const double th = two_pi * static_cast<double>(i) / static_cast<double>(n_per_ring);
            const double r = radii[ring] + noise * rng.normal();
            const std::size_t idx = ring * n_per_ring + i;
            ds.features.at(0, idx) = r * std::cos(th);
            ds.features.at(1, idx) = r * std::sin(th);
            (*ds.labels)[idx] = static_cast<int>(ring);
        }
    }
    return ds;
}

/// Isotropic Gaussian blobs around the given centers, labeled by blob.
inline LabeledDataset generate_blobs(std::size_t n_per_blob,
                                     const std::vector<std::vector<double>>& centers,
                                     double spread, std::uint64_t seed) {
    if (centers.empty()) throw std::invalid_argument("generate_blobs: no centers");
    const std::size_t d = centers.front().size();
    for (const auto& ctr : centers)
        if (ctr.size() != d) throw std::invalid_argument("generate_blobs: ragged centers");
    Rng rng(seed);
    const std::size_t n = n_per_blob * centers.size();
    LabeledDataset ds;
    ds.features = FeatureMatrix(d, n);
    ds.labels = std::vector<int>(n);
    for (std::size_t b = 0; b < centers.size(); ++b) {
        for (std::size_t i = 0; i < n_per_blob; ++i) {
            const std::size_t idx = b * n_per_blob + i;
            for (std::size_t kdim = 0; kdim < d; ++kdim)
                ds.features.at(kdim, idx) = centers[b][kdim] + spread * rng.normal();
            (*ds.labels)[idx] = static_cast<int>(b);
        }
    }
    return ds;
}

/// Connected components of the affinity graph (weights > 0 are edges).
/// Returns component id per vertex plus the count.
inline std::pair<std::vector<std::size_t>, std::size_t> connected_components(
    const SparseAffinity& s) {
    const SparseSym& m = s.matrix();
    std::vector<std::size_t> comp(m.n, std::numeric_limits<std::size_t>::max());
    std::size_t count = 0;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < m.n; ++start) {
        if (comp[start] != std::numeric_limits<std::size_t>::max()) continue;
        comp[start] = count;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t kk = m.row_ptr[u]; kk < m.row_ptr[u + 1]; ++kk) {
                const std::size_t v = m.col[kk];
                if (m.val[kk] > 0.0 && comp[v] == std::numeric_limits<std::size_t>::max()) {
                    comp[v] = count;
                    stack.push_back(v);
                }
            }
        }
        ++count;
    }
    return {std::move(comp), count};
}

/// Seeded Lloyd's k-means with k-means++ seeding on row-contiguous points.
/// Returns per-point labels in [0, c).
inline std::vector<int> kmeans_lloyd(const std::vector<std::vector<double>>& pts, std::size_t c,
                                     std::uint64_t seed, std::size_t max_iter = 100) {
    const std::size_t n = pts.size();
    if (n < c) throw std::invalid_argument("kmeans_lloyd: fewer points than clusters");
    const std::size_t d = pts.front().size();
    Rng rng(seed);

    auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double dk = a[k] - b[k];
            s += dk * dk;
        }
        return s;
    };

    std::vector<std::vector<double>> centers;
    centers.push_back(pts[rng.index(n)]);
    std::vector<double> d2(n);
    while (centers.size() < c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& ctr : centers) best = std::min(best, dist2(pts[i], ctr));
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centers.push_back(pts[rng.index(n)]);
            continue;
        }
        double pick = rng.uniform() * total;
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            pick -= d2[i];
            if (pick <= 0.0) {
                chosen = i;
                break;
            }
        }
        centers.push_back(pts[chosen]);
    }

    std::vector<int> lab(n, 0);
    for (std::size_t it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bestd = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < c; ++j) {
                const double dj = dist2(pts[i], centers[j]);
                if (dj < bestd) {
                    bestd = dj;
                    best = static_cast<int>(j);
                }
            }
            if (lab[i] != best) {
                lab[i] = best;
                changed = true;
            }
        }
        if (!changed && it > 0) break;
        for (std::size_t j = 0; j < c; ++j) {
            std::vector<double> mean(d, 0.0);
            std::size_t cnt = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (lab[i] == static_cast<int>(j)) {
                    for (std::size_t k = 0; k < d; ++k) mean[k] += pts[i][k];
                    ++cnt;
                }
            if (cnt > 0) {
                for (std::size_t k = 0; k < d; ++k) mean[k] /= static_cast<double>(cnt);
                centers[j] = std::move(mean);
            }
        }
    }
    return lab;
}

enum class InitMode { UniformJitter, KMeansWarm, GraphComponents };

namespace detail {

inline DenseMatrix smoothed_onehot(const std::vector<int>& lab, std::size_t c) {
    const std::size_t n = lab.size();
    const double off = c > 1 ? 0.1 / static_cast<double>(c - 1) : 0.0;
    DenseMatrix f(n, c, off);
    for (std::size_t i = 0; i < n; ++i) f(i, static_cast<std::size_t>(lab[i])) = 0.9;
    return f;
}

}  // namespace detail

/// Build a feasible starting plan.
///
/// UniformJitter: 1/c plus uniform noise, projected into the set.
/// KMeansWarm: seeded Lloyd's k-means on the features, smoothed one-hot rows.
/// GraphComponents: group connected components of the affinity graph into c
/// size-balanced clusters (requires at least c components).
inline TransportPlan initial_plan(const DualBoundedSet& omega, InitMode mode,
                                  const FeatureMatrix* z, const SparseAffinity* s,
                                  std::uint64_t seed, double jitter = 0.01) {
    const std::size_t n = omega.n(), c = omega.c();
    DenseMatrix f;
    switch (mode) {
        case InitMode::UniformJitter: {
            Rng rng(seed);
            f = DenseMatrix(n, c, 1.0 / static_cast<double>(c));
            if (jitter > 0.0)
                for (double& x : f.data()) x += rng.uniform(-jitter, jitter);
            break;
        }
        case InitMode::KMeansWarm: {
            if (z == nullptr)
                throw std::invalid_argument("initial_plan: KMeansWarm requires features");
            if (z->samples() != n)
                throw std::invalid_argument("initial_plan: feature count mismatch");
            std::vector<std::vector<double>> pts(n, std::vector<double>(z->dim()));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < z->dim(); ++k) pts[i][k] = z->at(k, i);
            f = detail::smoothed_onehot(kmeans_lloyd(pts, c, seed), c);
            break;
        }
        case InitMode::GraphComponents: {
            if (s == nullptr)
                throw std::invalid_argument("initial_plan: GraphComponents requires the graph");
            if (s->n() != n) throw std::invalid_argument("initial_plan: graph size mismatch");
            auto [comp, count] = connected_components(*s);
            if (count < c)
                throw std::invalid_argument(
                    "initial_plan: fewer graph components than clusters; use another mode");
            // largest-first bin packing of components into c groups
            std::vector<std::size_t> size(count, 0);
            for (std::size_t cid : comp) ++size[cid];
            std::vector<std::size_t> order(count);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return size[a] > size[b]; });
            std::vector<std::size_t> group_of(count, 0);
            std::vector<std::size_t> load(c, 0);
            for (std::size_t cid : order) {
                const std::size_t g = static_cast<std::size_t>(
                    std::min_element(load.begin(), load.end()) - load.begin());
                group_of[cid] = g;
                load[g] += size[cid];
            }
            std::vector<int> lab(n);
            for (std::size_t i = 0; i < n; ++i) lab[i] = static_cast<int>(group_of[comp[i]]);
            f = detail::smoothed_onehot(lab, c);
            break;
        }
    }
    f = dykstra_project(f, omega, 1e-10, 2000);
    return TransportPlan{std::move(f)};
}

}  // namespace dbnot
