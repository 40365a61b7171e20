#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "dbnot/linalg.hpp"
#include "dbnot/objective.hpp"

namespace dbnot {

/// J(F) = -tr(F' S F): total similarity kept inside clusters, negated.
inline double mincut_value(const SparseAffinity& s, const DenseMatrix& f) {
    return -trace_quadratic(f, s, f);
}

/// Gradient of the min-cut objective: -2 S F.
inline DenseMatrix mincut_gradient(const SparseAffinity& s, const DenseMatrix& f) {
    return spmm(s, f).scaled(-2.0);
}

/// Closed-form minimizer of J along the segment (1-mu) F + mu fg.
///
/// With x = tr(F'SF), y = tr(fg'S fg), z = tr(fg'SF) and alpha = 1-mu, the
/// kept similarity along the segment is
///   phi(alpha) = alpha^2 (x+y-2z) + 2 alpha (z-y) + y,
/// maximized over alpha in [0,1]: interior vertex for a downward parabola,
/// endpoint comparison otherwise.
inline double line_search_mincut(const SparseAffinity& s, const DenseMatrix& f,
                                 const DenseMatrix& fg) {
    const double x = trace_quadratic(f, s, f);
    const double y = trace_quadratic(fg, s, fg);
    const double z = trace_quadratic(fg, s, f);
    const double a = x + y - 2.0 * z;

    if (a == 0.0) {
        // phi is linear in alpha; endpoint values are y (mu=1) and x=2z-y (mu=0)
        return y > z ? 1.0 : 0.0;
    }
    if (a < 0.0) {
        const double r = (y - z) / a;  // vertex position in alpha
        if (r >= 1.0) return 0.0;
        if (r <= 0.0) return 1.0;
        return 1.0 - r;
    }
    // upward parabola: best endpoint; ties go to the feasible-gradient vertex
    return y >= x ? 1.0 : 0.0;
}

/// Min-cut objective oracle over a fixed affinity graph, with the smoothness
/// constant 2 ||S||_F cached at construction.
class MinCutOracle final : public ObjectiveOracle {
public:
    explicit MinCutOracle(SparseAffinity s)
        : s_(std::move(s)), l_smooth_(2.0 * dbnot::frobenius_norm(s_)) {}

    const SparseAffinity& affinity() const { return s_; }

    double value(const DenseMatrix& f) const override { return mincut_value(s_, f); }

    DenseMatrix gradient(const DenseMatrix& f) const override { return mincut_gradient(s_, f); }

    double smoothness() const override { return l_smooth_; }

    std::optional<double> line_search(const DenseMatrix& f,
                                      const DenseMatrix& target) const override {
        return line_search_mincut(s_, f, target);
    }

private:
    SparseAffinity s_;
    double l_smooth_;
};

/// tr(F' Lap F): the total weight of edges cut by a relaxed assignment.
inline double convex_value(const SparseSym& lap, const DenseMatrix& f) {
    return trace_quadratic(f, lap, f);
}

/// Convex sanity objective tr(F' Lap F) over a graph Laplacian; a positive
/// semidefinite quadratic whose minimizers have identical rows.
class ConvexLaplacianOracle final : public ObjectiveOracle {
public:
    explicit ConvexLaplacianOracle(SparseSym lap)
        : lap_(std::move(lap)), l_smooth_(2.0 * dbnot::frobenius_norm(lap_)) {}

    const SparseSym& laplacian() const { return lap_; }

    double value(const DenseMatrix& f) const override { return convex_value(lap_, f); }

    DenseMatrix gradient(const DenseMatrix& f) const override {
        return spmm(lap_, f).scaled(2.0);
    }

    double smoothness() const override { return l_smooth_; }

    std::optional<double> line_search(const DenseMatrix& f,
                                      const DenseMatrix& target) const override {
        DenseMatrix d = target - f;
        const double den = trace_quadratic(d, lap_, d);
        if (den <= 0.0) return 0.0;
        const double num = -trace_quadratic(d, lap_, f);
        return std::min(std::max(num / den, 0.0), 1.0);
    }

private:
    SparseSym lap_;
    double l_smooth_;
};

}  // namespace dbnot
