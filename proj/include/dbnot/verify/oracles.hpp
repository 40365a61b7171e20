#pragma once

// Independent reference implementations used only for verification. Nothing
// here is called by the solver path; each oracle recomputes its answer by a
// different route (dense algebra, exhaustive enumeration, an active-set QP)
// so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dbnot/constraints.hpp"
#include "dbnot/eval.hpp"
#include "dbnot/linalg.hpp"

namespace dbnot::oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const SparseSym& s) {
    Dense d(s.n, std::vector<double>(s.n, 0.0));
    for (std::size_t i = 0; i < s.n; ++i)
        for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) d[i][s.col[k]] = s.val[k];
    return d;
}

inline Dense to_dense(const SparseAffinity& s) { return to_dense(s.matrix()); }

inline Dense to_dense(const DenseMatrix& m) {
    Dense d(m.rows(), std::vector<double>(m.cols(), 0.0));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
    return d;
}

inline Dense dense_matmul(const Dense& a, const Dense& b) {
    const std::size_t n = a.size(), m = b.front().size(), k = b.size();
    Dense r(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < m; ++j) r[i][j] += a[i][l] * b[l][j];
    return r;
}

inline double dense_frobenius(const Dense& a) {
    double s = 0.0;
    for (const auto& row : a)
        for (double x : row) s += x * x;
    return std::sqrt(s);
}

/// tr(A' S B) by forming the full products.
inline double dense_trace_quadratic(const Dense& a, const Dense& s, const Dense& b) {
    Dense sb = dense_matmul(s, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) acc += a[i][j] * sb[i][j];
    return acc;
}

// ---------------------------------------------------------------------------
// Active-set solver for min 1/2 ||X - M||^2 over the dual-bounded set.
// ---------------------------------------------------------------------------

namespace detail {

/// Solve A y = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(Dense a, std::vector<double> b) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-12)
            throw std::runtime_error("qp oracle: singular working-set system");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t cc = col; cc < n; ++cc) a[r][cc] -= f * a[col][cc];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> y(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t cc = r + 1; cc < n; ++cc) s -= a[r][cc] * y[cc];
        y[r] = s / a[r][r];
    }
    return y;
}

struct Constraint {
    // a' x >= rhs ; sparse row over the nc variables
    std::vector<std::pair<std::size_t, double>> a;
    double rhs;
    bool is_equality;
};

}  // namespace detail

/// Euclidean projection onto the dual-bounded set by a primal active-set
/// method with an identity Hessian. Exact up to linear-solve round-off;
/// verifies its own KKT conditions before returning.
inline DenseMatrix qp_project_active_set(const DenseMatrix& m, const DualBoundedSet& omega) {
    const std::size_t n = omega.n(), c = omega.c(), nv = n * c;
    const bool col_equality = omega.lower() == omega.upper();

    std::vector<detail::Constraint> eq;
    for (std::size_t i = 0; i < n; ++i) {
        detail::Constraint ce;
        for (std::size_t j = 0; j < c; ++j) ce.a.push_back({i * c + j, 1.0});
        ce.rhs = 1.0;
        ce.is_equality = true;
        eq.push_back(std::move(ce));
    }
    if (col_equality) {
        // column sums pinned; the last one is implied by the row sums
        for (std::size_t j = 0; j + 1 < c; ++j) {
            detail::Constraint ce;
            for (std::size_t i = 0; i < n; ++i) ce.a.push_back({i * c + j, 1.0});
            ce.rhs = omega.lower();
            ce.is_equality = true;
            eq.push_back(std::move(ce));
        }
    }

    // inequality catalogue: [0,c) lower bounds, [c,2c) upper bounds,
    // [2c, 2c+nv) nonnegativity
    auto ineq_row = [&](std::size_t id) {
        detail::Constraint ci;
        ci.is_equality = false;
        if (id < c) {
            for (std::size_t i = 0; i < n; ++i) ci.a.push_back({i * c + id, 1.0});
            ci.rhs = omega.lower();
        } else if (id < 2 * c) {
            const std::size_t j = id - c;
            for (std::size_t i = 0; i < n; ++i) ci.a.push_back({i * c + j, -1.0});
            ci.rhs = -omega.upper();
        } else {
            ci.a.push_back({id - 2 * c, 1.0});
            ci.rhs = 0.0;
        }
        return ci;
    };
    const std::size_t n_ineq = col_equality ? nv : 2 * c + nv;

    std::vector<double> x(nv, 1.0 / static_cast<double>(c));
    std::vector<double> target(nv);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) target[i * c + j] = m(i, j);

    std::vector<std::size_t> working;  // catalogue ids of active inequalities
    auto catalogue = [&](std::size_t wid) {
        return ineq_row(col_equality ? wid + 2 * c : wid);
    };

    for (std::size_t iter = 0; iter < 200 * (nv + 1); ++iter) {
        // assemble C x = d for equalities + working set
        std::vector<detail::Constraint> rows = eq;
        for (std::size_t wid : working) rows.push_back(catalogue(wid));
        const std::size_t nr = rows.size();

        Dense gram(nr, std::vector<double>(nr, 0.0));
        std::vector<double> rhs(nr, 0.0);
        std::vector<double> cm(nr, 0.0);
        for (std::size_t r = 0; r < nr; ++r) {
            for (const auto& [k, v] : rows[r].a) cm[r] += v * target[k];
            rhs[r] = rows[r].rhs - cm[r];
            for (std::size_t r2 = r; r2 < nr; ++r2) {
                double dot = 0.0;
                std::size_t p = 0, q = 0;
                while (p < rows[r].a.size() && q < rows[r2].a.size()) {
                    if (rows[r].a[p].first == rows[r2].a[q].first) {
                        dot += rows[r].a[p].second * rows[r2].a[q].second;
                        ++p;
                        ++q;
                    } else if (rows[r].a[p].first < rows[r2].a[q].first) {
                        ++p;
                    } else {
                        ++q;
                    }
                }
                gram[r][r2] = gram[r2][r] = dot;
            }
        }
        std::vector<double> lambda = detail::gauss_solve(gram, rhs);

        std::vector<double> xstar = target;
        for (std::size_t r = 0; r < nr; ++r)
            for (const auto& [k, v] : rows[r].a) xstar[k] += lambda[r] * v;

        double move = 0.0;
        for (std::size_t k = 0; k < nv; ++k) move = std::max(move, std::abs(xstar[k] - x[k]));

        if (move <= 1e-12) {
            // optimal unless some working multiplier is negative
            double worst = -1e-10;
            std::size_t drop = nr;
            for (std::size_t r = eq.size(); r < nr; ++r)
                if (lambda[r] < worst) {
                    worst = lambda[r];
                    drop = r;
                }
            if (drop == nr) {
                DenseMatrix out(n, c);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < c; ++j) out(i, j) = x[i * c + j];
                return out;
            }
            working.erase(working.begin() + static_cast<std::ptrdiff_t>(drop - eq.size()));
            continue;
        }

        // step toward xstar until an inactive inequality blocks
        double alpha = 1.0;
        std::size_t blocker = n_ineq;
        for (std::size_t id = 0; id < n_ineq; ++id) {
            if (std::find(working.begin(), working.end(), id) != working.end()) continue;
            const auto row = catalogue(id);
            double av = 0.0, ad = 0.0;
            for (const auto& [k, v] : row.a) {
                av += v * x[k];
                ad += v * (xstar[k] - x[k]);
            }
            if (ad < -1e-14) {
                const double amax = (row.rhs - av) / ad;  // ad < 0, av >= rhs
                if (amax < alpha) {
                    alpha = amax;
                    blocker = id;
                }
            }
        }
        if (alpha < 0.0) alpha = 0.0;
        for (std::size_t k = 0; k < nv; ++k) x[k] += alpha * (xstar[k] - x[k]);
        if (blocker != n_ineq) working.push_back(blocker);
    }
    throw std::runtime_error("qp oracle: active-set iteration limit");
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration over hard assignments.
// ---------------------------------------------------------------------------

/// Visit every assignment of n items to c labels whose label counts lie in
/// [min_count, max_count].
inline void for_each_bounded_assignment(std::size_t n, std::size_t c, double min_count,
                                        double max_count,
                                        const std::function<void(const std::vector<int>&)>& fn) {
    if (n > 16) throw std::invalid_argument("assignment enumeration: n too large");
    std::vector<int> lab(n, 0);
    std::vector<std::size_t> cnt(c, 0);
    cnt[0] = n;
    while (true) {
        bool ok = true;
        for (std::size_t j = 0; j < c; ++j)
            if (static_cast<double>(cnt[j]) < min_count || static_cast<double>(cnt[j]) > max_count)
                ok = false;
        if (ok) fn(lab);
        std::size_t pos = 0;
        while (pos < n) {
            --cnt[static_cast<std::size_t>(lab[pos])];
            if (static_cast<std::size_t>(lab[pos]) + 1 < c) {
                ++lab[pos];
                ++cnt[static_cast<std::size_t>(lab[pos])];
                break;
            }
            lab[pos] = 0;
            ++cnt[0];
            ++pos;
        }
        if (pos == n) break;
    }
}

/// Exact minimum of <grad, P> over the dual-bounded set with integral bounds:
/// the vertex optimum is attained at a hard assignment, so enumeration is an
/// exact linear-programming oracle at desk scale.
inline double lp_min_enumerate(const DenseMatrix& grad, const DualBoundedSet& omega) {
    if (omega.lower() != std::floor(omega.lower()) || omega.upper() != std::floor(omega.upper()))
        throw std::invalid_argument("lp_min_enumerate: bounds must be integral");
    double best = std::numeric_limits<double>::infinity();
    for_each_bounded_assignment(omega.n(), omega.c(), omega.lower(), omega.upper(),
                                [&](const std::vector<int>& lab) {
                                    double v = 0.0;
                                    for (std::size_t i = 0; i < lab.size(); ++i)
                                        v += grad(i, static_cast<std::size_t>(lab[i]));
                                    best = std::min(best, v);
                                });
    return best;
}

/// Kept-similarity of a hard assignment, computed straight off the stored
/// entries: sum of s_ij over same-label pairs (both orientations).
inline double hard_assignment_objective(const SparseAffinity& s, const std::vector<int>& lab) {
    const SparseSym& msp = s.matrix();
    double kept = 0.0;
    for (std::size_t i = 0; i < msp.n; ++i)
        for (std::size_t k = msp.row_ptr[i]; k < msp.row_ptr[i + 1]; ++k)
            if (lab[i] == lab[msp.col[k]]) kept += msp.val[k];
    return -kept;
}

struct EnumeratedOptimum {
    double objective = std::numeric_limits<double>::infinity();
    std::vector<int> labels;
};

/// Best hard assignment under the column-count bounds, by exhaustive search.
inline EnumeratedOptimum best_bounded_assignment(const SparseAffinity& s, std::size_t c,
                                                 double min_count, double max_count) {
    EnumeratedOptimum best;
    for_each_bounded_assignment(s.n(), c, min_count, max_count,
                                [&](const std::vector<int>& lab) {
                                    const double v = hard_assignment_objective(s, lab);
                                    if (v < best.objective) {
                                        best.objective = v;
                                        best.labels = lab;
                                    }
                                });
    return best;
}

// ---------------------------------------------------------------------------
// Derivative and metric references.
// ---------------------------------------------------------------------------

/// Central finite differences of a scalar function of a matrix.
inline DenseMatrix finite_difference_gradient(const std::function<double(const DenseMatrix&)>& f,
                                              const DenseMatrix& at, double h = 1e-6) {
    DenseMatrix g(at.rows(), at.cols());
    DenseMatrix p = at;
    for (std::size_t i = 0; i < at.rows(); ++i)
        for (std::size_t j = 0; j < at.cols(); ++j) {
            const double orig = p(i, j);
            p(i, j) = orig + h;
            const double up = f(p);
            p(i, j) = orig - h;
            const double dn = f(p);
            p(i, j) = orig;
            g(i, j) = (up - dn) / (2.0 * h);
        }
    return g;
}

/// Accuracy by brute force over every injective label relabeling.
inline double accuracy_bruteforce(const LabelVector& pred, const LabelVector& truth) {
    int m = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) m = std::max({m, pred[i], truth[i]});
    std::vector<int> perm(static_cast<std::size_t>(m) + 1);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
        std::size_t agree = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (perm[static_cast<std::size_t>(pred[i])] == truth[i]) ++agree;
        best = std::max(best, static_cast<double>(agree) / static_cast<double>(pred.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Adjusted Rand index by explicit counting over all point pairs.
inline double ari_bruteforce(const LabelVector& pred, const LabelVector& truth) {
    const std::size_t n = pred.size();
    double both = 0.0, pred_only = 0.0, truth_only = 0.0, neither = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sp = pred[i] == pred[j];
            const bool st = truth[i] == truth[j];
            if (sp && st)
                both += 1.0;
            else if (sp)
                pred_only += 1.0;
            else if (st)
                truth_only += 1.0;
            else
                neither += 1.0;
        }
    const double total = both + pred_only + truth_only + neither;
    const double expected = (both + pred_only) * (both + truth_only) / total;
    const double maximum = 0.5 * ((both + pred_only) + (both + truth_only));
    if (std::abs(maximum - expected) < 1e-15)
        return (pred_only == 0.0 && truth_only == 0.0) ? 1.0 : 0.0;
    return (both - expected) / (maximum - expected);
}

/// Normalized mutual information straight from the joint distribution.
inline double nmi_bruteforce(const LabelVector& pred, const LabelVector& truth) {
    const double n = static_cast<double>(pred.size());
    int mp = 0, mt = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        mp = std::max(mp, pred[i]);
        mt = std::max(mt, truth[i]);
    }
    const std::size_t cp = static_cast<std::size_t>(mp) + 1, ct = static_cast<std::size_t>(mt) + 1;
    std::vector<std::vector<double>> joint(cp, std::vector<double>(ct, 0.0));
    std::vector<double> pp(cp, 0.0), pt(ct, 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        joint[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])] += 1.0;
        pp[static_cast<std::size_t>(pred[i])] += 1.0;
        pt[static_cast<std::size_t>(truth[i])] += 1.0;
    }
    for (auto& row : joint)
        for (double& x : row) x /= n;
    for (double& x : pp) x /= n;
    for (double& x : pt) x /= n;
    double hp = 0.0, ht = 0.0, mi = 0.0;
    for (double p : pp)
        if (p > 0.0) hp -= p * std::log(p);
    for (double p : pt)
        if (p > 0.0) ht -= p * std::log(p);
    for (std::size_t a = 0; a < cp; ++a)
        for (std::size_t b = 0; b < ct; ++b)
            if (joint[a][b] > 0.0) mi += joint[a][b] * std::log(joint[a][b] / (pp[a] * pt[b]));
    if (hp <= 0.0 && ht <= 0.0) return 1.0;
    if (hp <= 0.0 || ht <= 0.0) return 0.0;
    return mi / std::sqrt(hp * ht);
}

}  // namespace dbnot::oracle
