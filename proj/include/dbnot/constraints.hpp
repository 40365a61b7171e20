#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dbnot/linalg.hpp"

namespace dbnot {

/// The feasible set for transport plans: rows on the probability simplex,
/// column sums between b_l and b_u. Construction rejects empty sets.
class DualBoundedSet {
public:
    DualBoundedSet(std::size_t n, std::size_t c, double b_l, double b_u)
        : n_(n), c_(c), b_l_(b_l), b_u_(b_u) {
        if (c < 2) throw std::invalid_argument("DualBoundedSet: need at least 2 clusters");
        if (n < c) throw std::invalid_argument("DualBoundedSet: need n >= c");
        if (!(b_l >= 0.0)) throw std::invalid_argument("DualBoundedSet: b_l must be >= 0");
        if (!(b_l <= b_u)) throw std::invalid_argument("DualBoundedSet: b_l must be <= b_u");
        if (static_cast<double>(c) * b_l > static_cast<double>(n) ||
            static_cast<double>(n) > static_cast<double>(c) * b_u)
            throw std::invalid_argument("DualBoundedSet: empty set, need c*b_l <= n <= c*b_u");
    }

    std::size_t n() const { return n_; }
    std::size_t c() const { return c_; }
    double lower() const { return b_l_; }
    double upper() const { return b_u_; }

private:
    std::size_t n_, c_;
    double b_l_, b_u_;
};

struct FeasibilityReport {
    double max_row_deviation = 0.0;      // max_i |sum_j F_ij - 1|
    double max_negativity = 0.0;         // max_ij max(-F_ij, 0)
    std::vector<double> column_sums;     // length c
    std::vector<double> bound_violations;  // per column, distance outside [b_l, b_u]
    bool feasible = false;

    double max_deviation() const {
        double m = std::max(max_row_deviation, max_negativity);
        for (double v : bound_violations) m = std::max(m, v);
        return m;
    }
};

inline FeasibilityReport check_feasible(const DenseMatrix& f, const DualBoundedSet& omega,
                                        double tol = 1e-8) {
    if (f.rows() != omega.n() || f.cols() != omega.c())
        throw std::invalid_argument("check_feasible: dimension mismatch");
    FeasibilityReport r;
    r.column_sums.assign(omega.c(), 0.0);
    for (std::size_t i = 0; i < f.rows(); ++i) {
        double rowsum = 0.0;
        for (std::size_t j = 0; j < f.cols(); ++j) {
            const double x = f(i, j);
            rowsum += x;
            r.column_sums[j] += x;
            if (x < 0.0) r.max_negativity = std::max(r.max_negativity, -x);
        }
        r.max_row_deviation = std::max(r.max_row_deviation, std::abs(rowsum - 1.0));
    }
    r.bound_violations.resize(omega.c());
    for (std::size_t j = 0; j < omega.c(); ++j) {
        const double s = r.column_sums[j];
        r.bound_violations[j] = std::max({omega.lower() - s, s - omega.upper(), 0.0});
    }
    r.feasible = r.max_deviation() <= tol;
    return r;
}

/// Exact Euclidean projection onto the probability simplex via the sorting
/// rule. Kept as the fallback and as the verification oracle for the Newton
/// path.
inline std::vector<double> project_simplex_sort(const std::vector<double>& v) {
    const std::size_t c = v.size();
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, eta = 0.0;
    std::size_t rho = 0;
    for (std::size_t j = 0; j < c; ++j) {
        css += u[j];
        const double cand = (1.0 - css) / static_cast<double>(j + 1);
        if (u[j] + cand > 0.0) {
            rho = j + 1;
            eta = cand;
        }
    }
    (void)rho;
    std::vector<double> w(c);
    for (std::size_t j = 0; j < c; ++j) w[j] = std::max(v[j] + eta, 0.0);
    return w;
}

/// Simplex projection by Newton iteration on the shift eta: the root of
/// l(eta) = sum_j (v_j + eta)_+ - 1, a monotone piecewise-linear function.
/// Falls back to the sort rule if the iteration has not pinned the root
/// after 100 steps.
inline std::vector<double> project_row_simplex(const std::vector<double>& v) {
    const std::size_t c = v.size();
    if (c == 0) throw std::invalid_argument("project_row_simplex: empty vector");
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("project_row_simplex: non-finite input");

    double sum = std::accumulate(v.begin(), v.end(), 0.0);
    double eta = (1.0 - sum) / static_cast<double>(c);  // mean-shift warm start
    double vmin = *std::min_element(v.begin(), v.end());

    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        double l = -1.0;
        std::size_t npos = 0;
        for (double x : v) {
            const double y = x + eta;
            if (y > 0.0) {
                l += y;
                ++npos;
            }
        }
        if (std::abs(l) <= 1e-14) {
            converged = true;
            break;
        }
        if (npos == 0) {
            // flat region: jump to where at least one coordinate activates
            eta = -vmin + 1.0 / static_cast<double>(c);
            continue;
        }
        eta -= l / static_cast<double>(npos);
    }
    if (!converged) return project_simplex_sort(v);

    std::vector<double> w(c);
    for (std::size_t j = 0; j < c; ++j) w[j] = std::max(v[j] + eta, 0.0);
    return w;
}

/// Project every row of M onto the simplex in place.
inline void project_rows_simplex(DenseMatrix& m) {
    std::vector<double> row(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::copy(m.row(i), m.row(i) + m.cols(), row.begin());
        auto w = project_row_simplex(row);
        std::copy(w.begin(), w.end(), m.row(i));
    }
}

/// Projection onto {q : sum q >= b_l}: a uniform lift when the constraint is
/// active, identity otherwise.
inline std::vector<double> project_col_lower(const std::vector<double>& q, double b_l) {
    double s = std::accumulate(q.begin(), q.end(), 0.0);
    if (s >= b_l) return q;
    const double shift = (b_l - s) / static_cast<double>(q.size());
    std::vector<double> r(q);
    for (double& x : r) x += shift;
    return r;
}

/// Mirror case: projection onto {q : sum q <= b_u}.
inline std::vector<double> project_col_upper(const std::vector<double>& q, double b_u) {
    double s = std::accumulate(q.begin(), q.end(), 0.0);
    if (s <= b_u) return q;
    const double shift = (s - b_u) / static_cast<double>(q.size());
    std::vector<double> r(q);
    for (double& x : r) x -= shift;
    return r;
}

struct DykstraResult {
    DenseMatrix point;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Euclidean projection onto the dual-bounded set by Dykstra's alternating
/// projections with correction terms. Cycle order is fixed: row simplex,
/// then column lower bound, then column upper bound.
inline DykstraResult dykstra_project_full(const DenseMatrix& m, const DualBoundedSet& omega,
                                          double tol = 1e-8, std::size_t max_iter = 1000) {
    if (m.rows() != omega.n() || m.cols() != omega.c())
        throw std::invalid_argument("dykstra_project: dimension mismatch");
    const std::size_t n = omega.n(), c = omega.c();

    DenseMatrix x = m;
    DenseMatrix z1(n, c), z2(n, c), z3(n, c);
    std::vector<double> colbuf(n);

    DykstraResult res;
    for (std::size_t it = 0; it < max_iter; ++it) {
        // the primal iterate can repeat from cycle to cycle while the
        // corrections still drift, so convergence is measured on both
        DenseMatrix prev = x;
        DenseMatrix pz1 = z1, pz2 = z2, pz3 = z3;

        DenseMatrix t = x + z1;
        x = t;
        project_rows_simplex(x);
        z1 = t - x;

        t = x + z2;
        x = t;
        for (std::size_t j = 0; j < c; ++j) {
            for (std::size_t i = 0; i < n; ++i) colbuf[i] = x(i, j);
            auto p = project_col_lower(colbuf, omega.lower());
            for (std::size_t i = 0; i < n; ++i) x(i, j) = p[i];
        }
        z2 = t - x;

        t = x + z3;
        x = t;
        for (std::size_t j = 0; j < c; ++j) {
            for (std::size_t i = 0; i < n; ++i) colbuf[i] = x(i, j);
            auto p = project_col_upper(colbuf, omega.upper());
            for (std::size_t i = 0; i < n; ++i) x(i, j) = p[i];
        }
        z3 = t - x;

        res.iterations = it + 1;
        const double change = (x - prev).frobenius_norm() + (z1 - pz1).frobenius_norm() +
                              (z2 - pz2).frobenius_norm() + (z3 - pz3).frobenius_norm();
        if (change < tol) {
            res.converged = true;
            break;
        }
    }
    res.point = std::move(x);
    return res;
}

inline DenseMatrix dykstra_project(const DenseMatrix& m, const DualBoundedSet& omega,
                                   double tol = 1e-8, std::size_t max_iter = 1000) {
    return dykstra_project_full(m, omega, tol, max_iter).point;
}

}  // namespace dbnot
