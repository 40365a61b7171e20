#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dbnot/constraints.hpp"
#include "dbnot/linalg.hpp"

namespace dbnot {

/// Diagonal scaling state for the entropy-regularized feasible-gradient
/// subproblem: the plan is diag(u) * K * diag(v .* w) with K the row-shifted
/// Gibbs kernel of the gradient. u handles the unit row sums, v lifts columns
/// to the lower bound (v >= 1), w caps them at the upper bound (0 < w <= 1).
struct ScalingState {
    std::vector<double> u;   // length n, positive
    std::vector<double> v;   // length c, >= 1
    std::vector<double> w;   // length c, in (0, 1]
    DenseMatrix kernel;      // exp(-(grad_i - min_j grad_ij) / delta)
    double delta = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct EntropicResult {
    DenseMatrix plan;
    ScalingState state;
};

/// Default regularization: a fixed fraction of the gradient range, so the
/// kernel conditioning is independent of the objective's scale.
inline double default_entropic_delta(const DenseMatrix& grad) {
    double lo = grad.data().empty() ? 0.0 : grad.data()[0];
    double hi = lo;
    for (double x : grad.data()) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return 0.05 * (hi - lo + 1e-12);
}

/// Solve min_{P in Omega} <grad, P> + delta * sum P log P by three-vector
/// scaling. Row sums of the result are exact by construction of u; column
/// sums converge into [b_l, b_u]. Pass delta <= 0 to use the default rule.
inline EntropicResult feasible_gradient_entropic_full(const DenseMatrix& grad,
                                                      const DualBoundedSet& omega, double delta = 0.0,
                                                      double tol = 1e-9,
                                                      std::size_t max_iter = 5000) {
    if (grad.rows() != omega.n() || grad.cols() != omega.c())
        throw std::invalid_argument("feasible_gradient_entropic: dimension mismatch");
    if (!grad.all_finite())
        throw std::invalid_argument("feasible_gradient_entropic: non-finite gradient");
    if (delta <= 0.0) delta = default_entropic_delta(grad);

    const std::size_t n = omega.n(), c = omega.c();
    ScalingState st;
    st.delta = delta;
    st.kernel = DenseMatrix(n, c);

    // Per-row shift before exponentiation keeps the largest kernel entry of
    // every row at exactly 1, so u stays finite for any delta.
    for (std::size_t i = 0; i < n; ++i) {
        const double* g = grad.row(i);
        double rmin = g[0];
        for (std::size_t j = 1; j < c; ++j) rmin = std::min(rmin, g[j]);
        for (std::size_t j = 0; j < c; ++j) st.kernel(i, j) = std::exp(-(g[j] - rmin) / delta);
    }

    st.u.assign(n, 1.0);
    st.v.assign(c, 1.0);
    st.w.assign(c, 1.0);
    std::vector<double> colm(c), vw(c);

    const double marginal_tol = std::max(10.0 * tol, 1e-12);
    for (std::size_t it = 0; it < max_iter; ++it) {
        double change = 0.0;

        for (std::size_t j = 0; j < c; ++j) vw[j] = st.v[j] * st.w[j];
        for (std::size_t i = 0; i < n; ++i) {
            double denom = 0.0;
            const double* k = st.kernel.row(i);
            for (std::size_t j = 0; j < c; ++j) denom += k[j] * vw[j];
            const double nu = 1.0 / denom;
            change = std::max(change, std::abs(nu - st.u[i]) / std::max(std::abs(nu), 1e-300));
            st.u[i] = nu;
        }

        std::fill(colm.begin(), colm.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* k = st.kernel.row(i);
            for (std::size_t j = 0; j < c; ++j) colm[j] += st.u[i] * k[j];
        }

        for (std::size_t j = 0; j < c; ++j) {
            const double denom = std::max(colm[j] * st.w[j], 1e-300);
            const double nv = std::max(omega.lower() / denom, 1.0);
            change = std::max(change, std::abs(nv - st.v[j]));
            st.v[j] = nv;
        }
        for (std::size_t j = 0; j < c; ++j) {
            const double denom = std::max(colm[j] * st.v[j], 1e-300);
            const double nw = std::min(omega.upper() / denom, 1.0);
            change = std::max(change, std::abs(nw - st.w[j]));
            st.w[j] = nw;
        }

        st.iterations = it + 1;
        if (change < tol) {
            double viol = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                const double s = colm[j] * st.v[j] * st.w[j];
                viol = std::max({viol, omega.lower() - s, s - omega.upper()});
            }
            if (viol <= marginal_tol) {
                st.converged = true;
                break;
            }
        }
    }

    // Refresh u from the final (v, w) so row sums hold to round-off.
    for (std::size_t j = 0; j < c; ++j) vw[j] = st.v[j] * st.w[j];
    for (std::size_t i = 0; i < n; ++i) {
        double denom = 0.0;
        const double* k = st.kernel.row(i);
        for (std::size_t j = 0; j < c; ++j) denom += k[j] * vw[j];
        st.u[i] = 1.0 / denom;
    }

    EntropicResult res;
    res.plan = DenseMatrix(n, c);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) res.plan(i, j) = st.u[i] * st.kernel(i, j) * vw[j];

    if (!res.plan.all_finite())
        throw std::runtime_error(
            "feasible_gradient_entropic: scaling overflowed; increase delta "
            "(gradient range too large for the requested regularization)");

    res.state = std::move(st);
    return res;
}

inline DenseMatrix feasible_gradient_entropic(const DenseMatrix& grad, const DualBoundedSet& omega,
                                              double delta = 0.0, double tol = 1e-9,
                                              std::size_t max_iter = 5000) {
    return feasible_gradient_entropic_full(grad, omega, delta, tol, max_iter).plan;
}

}  // namespace dbnot
