#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dbnot/solver.hpp"

namespace dbnot {

using LabelVector = std::vector<int>;

/// Per-row argmax of the plan; ties break toward the lowest column index.
inline LabelVector labels_from_plan(const TransportPlan& f) {
    const auto& m = f.matrix;
    LabelVector lab(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < m.cols(); ++j)
            if (m(i, j) > m(i, best)) best = j;
        lab[i] = static_cast<int>(best);
    }
    return lab;
}

inline std::vector<std::size_t> cluster_sizes(const LabelVector& labels, std::size_t c) {
    std::vector<std::size_t> h(c, 0);
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= c)
            throw std::invalid_argument("cluster_sizes: label out of range");
        ++h[static_cast<std::size_t>(l)];
    }
    return h;
}

namespace detail {

inline std::vector<std::vector<std::size_t>> contingency(const LabelVector& a,
                                                         const LabelVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("metrics: length mismatch");
    if (a.empty()) throw std::invalid_argument("metrics: empty labels");
    int ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0 || b[i] < 0) throw std::invalid_argument("metrics: negative label");
        ma = std::max(ma, a[i]);
        mb = std::max(mb, b[i]);
    }
    std::vector<std::vector<std::size_t>> t(static_cast<std::size_t>(ma) + 1,
                                            std::vector<std::size_t>(static_cast<std::size_t>(mb) + 1, 0));
    for (std::size_t i = 0; i < a.size(); ++i)
        ++t[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
    return t;
}

/// Minimum-cost square assignment via the potentials method. Returns the
/// column matched to each row.
inline std::vector<std::size_t> hungarian_min(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> match(n);
    for (std::size_t j = 1; j <= n; ++j)
        if (p[j] != 0) match[p[j] - 1] = j - 1;
    return match;
}

inline double comb2(double m) { return m * (m - 1.0) / 2.0; }

}  // namespace detail

/// Clustering accuracy: best fraction of agreeing points over all
/// cluster-to-class assignments (optimal matching on the contingency table).
inline double accuracy(const LabelVector& pred, const LabelVector& truth) {
    auto t = detail::contingency(pred, truth);
    const std::size_t side = std::max(t.size(), t.front().size());
    std::vector<std::vector<double>> cost(side, std::vector<double>(side, 0.0));
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < t[i].size(); ++j)
            cost[i][j] = -static_cast<double>(t[i][j]);
    auto match = detail::hungarian_min(cost);
    double agree = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (match[i] < t[i].size()) agree += static_cast<double>(t[i][match[i]]);
    return agree / static_cast<double>(pred.size());
}

/// Normalized mutual information with sqrt normalization and natural logs.
/// Degenerate rule: both partitions constant -> 1; exactly one constant -> 0.
inline double nmi(const LabelVector& pred, const LabelVector& truth) {
    auto t = detail::contingency(pred, truth);
    const double n = static_cast<double>(pred.size());
    std::vector<double> pa(t.size(), 0.0), pb(t.front().size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < t[i].size(); ++j) {
            pa[i] += static_cast<double>(t[i][j]);
            pb[j] += static_cast<double>(t[i][j]);
        }
    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (double x : pa)
        if (x > 0.0) ha -= (x / n) * std::log(x / n);
    for (double x : pb)
        if (x > 0.0) hb -= (x / n) * std::log(x / n);
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < t[i].size(); ++j)
            if (t[i][j] > 0) {
                const double pij = static_cast<double>(t[i][j]) / n;
                mi += pij * std::log(pij * n * n / (pa[i] * pb[j]));
            }
    if (ha <= 0.0 && hb <= 0.0) return 1.0;
    if (ha <= 0.0 || hb <= 0.0) return 0.0;
    return mi / std::sqrt(ha * hb);
}

/// Adjusted Rand index from the contingency pair counts. When the expected
/// index equals the maximum (both partitions trivial), identical partitions
/// score 1 and anything else 0.
inline double ari(const LabelVector& pred, const LabelVector& truth) {
    auto t = detail::contingency(pred, truth);
    const double n = static_cast<double>(pred.size());
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    std::vector<double> rowsum(t.size(), 0.0), colsum(t.front().size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < t[i].size(); ++j) {
            sum_ij += detail::comb2(static_cast<double>(t[i][j]));
            rowsum[i] += static_cast<double>(t[i][j]);
            colsum[j] += static_cast<double>(t[i][j]);
        }
    for (double x : rowsum) sum_a += detail::comb2(x);
    for (double x : colsum) sum_b += detail::comb2(x);
    const double expected = sum_a * sum_b / detail::comb2(n);
    const double maximum = 0.5 * (sum_a + sum_b);
    if (std::abs(maximum - expected) < 1e-15) {
        // trivial partitions: score by exact agreement of the partitions
        bool identical = true;
        for (std::size_t i = 0; i < t.size() && identical; ++i) {
            std::size_t nz = 0;
            for (std::size_t j = 0; j < t[i].size(); ++j)
                if (t[i][j] > 0) ++nz;
            if (nz > 1) identical = false;
        }
        for (std::size_t j = 0; j < t.front().size() && identical; ++j) {
            std::size_t nz = 0;
            for (std::size_t i = 0; i < t.size(); ++i)
                if (t[i][j] > 0) ++nz;
            if (nz > 1) identical = false;
        }
        return identical ? 1.0 : 0.0;
    }
    return (sum_ij - expected) / (maximum - expected);
}

}  // namespace dbnot
