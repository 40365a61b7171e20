#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbnot/constraints.hpp"
#include "dbnot/entropic.hpp"
#include "dbnot/linalg.hpp"
#include "dbnot/objective.hpp"

namespace dbnot {

enum class Measure { Norm, InnerProduct };

enum class StepRule { Easy, LineSearch, DualGap, NonconvexCertified };

enum class StopReason { GapTolerance, Stationary, MaxIterations };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::GapTolerance: return "gap_tolerance";
        case StopReason::Stationary: return "stationary";
        case StopReason::MaxIterations: return "max_iterations";
    }
    return "unknown";
}

inline const char* to_string(Measure m) {
    return m == Measure::Norm ? "norm" : "inner_product";
}

inline const char* to_string(StepRule s) {
    switch (s) {
        case StepRule::Easy: return "easy";
        case StepRule::LineSearch: return "line_search";
        case StepRule::DualGap: return "dual_gap";
        case StepRule::NonconvexCertified: return "nonconvex_certified";
    }
    return "unknown";
}

/// A transport plan: n x c nonnegative matrix with unit row sums and bounded
/// column sums (feasibility is checked where plans enter the solver).
struct TransportPlan {
    DenseMatrix matrix;
};

struct SolveConfig {
    Measure measure = Measure::InnerProduct;
    StepRule step = StepRule::Easy;
    std::size_t max_iter = 500;
    double gap_tol = 1e-9;
    std::uint64_t seed = 0;
    bool record_history = true;

    // Feasible-gradient tuning. Zero means "use the module default".
    double entropic_delta = 0.0;      // fixed regularization; 0 = per-call range rule
    double entropic_tol = 1e-9;
    std::size_t entropic_max_iter = 5000;
    double dykstra_tol = 1e-10;
    std::size_t dykstra_max_iter = 2000;
    double norm_scale = 0.0;          // gradient step length for the norm target; 0 = 1/L
};

struct PhaseTimings {
    double gradient_seconds = 0.0;
    double feasible_gradient_seconds = 0.0;
    double update_seconds = 0.0;
    double total_seconds = 0.0;
};

struct SolveReport {
    std::vector<double> objective_trace;  // value at iterate t (1-based)
    std::vector<double> gap_trace;
    TransportPlan best;         // iterate attaining the smallest recorded gap
    std::size_t best_index = 0;  // 1-based position in the traces
    double best_objective = 0.0;
    double best_gap = 0.0;
    TransportPlan final;
    std::size_t iterations = 0;
    StopReason stop_reason = StopReason::MaxIterations;
    double max_feasibility_deviation = 0.0;
    PhaseTimings timings;
};

/// Dual gap <F - fg, grad>; zero exactly at optima of convex problems and at
/// critical points otherwise.
inline double dual_gap(const TransportPlan& f, const DenseMatrix& fg, const DenseMatrix& grad) {
    return inner_product(f.matrix - fg, grad);
}

inline double step_easy(std::size_t t) {
    if (t < 1) throw std::invalid_argument("step_easy: iteration index must be >= 1");
    return 2.0 / static_cast<double>(t + 2);
}

/// min(g / (L * ||diff||_F^2), 1); the squared-norm form that makes the step
/// the exact minimizer of the smoothness upper bound.
inline double step_dual_gap(double g, double l_smooth, const DenseMatrix& diff) {
    if (g < 0.0) g = 0.0;
    if (g == 0.0) return 0.0;
    const double d = diff.frobenius_norm();
    if (d == 0.0)
        throw std::invalid_argument("step_dual_gap: zero direction with positive gap");
    return std::min(g / (l_smooth * d * d), 1.0);
}

inline double step_nonconvex(double g, double l_smooth, std::size_t n) {
    if (g < 0.0) g = 0.0;
    return std::min(g / (2.0 * l_smooth * static_cast<double>(n)), 1.0);
}

/// Convex-combination update (1-mu)*F + mu*fg; stays in the feasible set for
/// any mu in [0,1].
inline TransportPlan dnf_step(const TransportPlan& f, const DenseMatrix& fg, double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("dnf_step: mu must be in [0,1]");
    return TransportPlan{blend(f.matrix, fg, mu)};
}

namespace detail {

inline double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace detail

/// The DNF driver: iterate gradient -> feasible gradient (projected target or
/// entropic scaling) -> dual gap -> step size -> convex blend, tracking the
/// best-gap iterate.
inline SolveReport solve(const ObjectiveOracle& oracle, const DualBoundedSet& omega,
                         const TransportPlan& f0, const SolveConfig& config = {}) {
    if (config.max_iter < 1) throw std::invalid_argument("solve: max_iter must be >= 1");
    if (f0.matrix.rows() != omega.n() || f0.matrix.cols() != omega.c())
        throw std::invalid_argument("solve: initial plan shape mismatch");
    {
        auto rep = check_feasible(f0.matrix, omega, 1e-8);
        if (!rep.feasible)
            throw std::invalid_argument("solve: initial plan infeasible (deviation " +
                                        std::to_string(rep.max_deviation()) + ")");
    }

    const double l_smooth = oracle.smoothness();
    const double t_start = detail::now_seconds();

    SolveReport report;
    TransportPlan f = f0;
    double best_gap = std::numeric_limits<double>::infinity();
    std::size_t zero_steps = 0;

    for (std::size_t t = 1; t <= config.max_iter; ++t) {
        double t0 = detail::now_seconds();
        DenseMatrix grad = oracle.gradient(f.matrix);
        if (grad.rows() != omega.n() || grad.cols() != omega.c())
            throw std::invalid_argument("solve: oracle gradient shape mismatch");
        double t1 = detail::now_seconds();
        report.timings.gradient_seconds += t1 - t0;

        DenseMatrix fg;
        if (config.measure == Measure::InnerProduct) {
            fg = feasible_gradient_entropic(grad, omega, config.entropic_delta,
                                            config.entropic_tol, config.entropic_max_iter);
            // a stalled scaling can leave residual column-sum error; project it out
            if (check_feasible(fg, omega, 1e-8).max_deviation() > 1e-8)
                fg = dykstra_project(fg, omega, config.dykstra_tol, config.dykstra_max_iter);
        } else {
            const double s = config.norm_scale > 0.0 ? config.norm_scale : 1.0 / l_smooth;
            DenseMatrix target = f.matrix - grad.scaled(s);
            fg = dykstra_project(target, omega, config.dykstra_tol, config.dykstra_max_iter);
        }
        double t2 = detail::now_seconds();
        report.timings.feasible_gradient_seconds += t2 - t1;

        double gap = dual_gap(f, fg, grad);
        if (std::abs(gap) < 1e-12) gap = std::max(gap, 0.0);

        const double objective = oracle.value(f.matrix);
        if (config.record_history) {
            report.objective_trace.push_back(objective);
            report.gap_trace.push_back(gap);
        }
        report.max_feasibility_deviation =
            std::max(report.max_feasibility_deviation,
                     check_feasible(f.matrix, omega, 1e-8).max_deviation());
        report.iterations = t;

        if (gap < best_gap) {
            best_gap = gap;
            report.best = f;
            report.best_index = t;
            report.best_objective = objective;
            report.best_gap = gap;
        }

        if (gap <= config.gap_tol) {
            report.stop_reason = StopReason::GapTolerance;
            break;
        }

        double mu = 0.0;
        switch (config.step) {
            case StepRule::Easy:
                mu = step_easy(t);
                break;
            case StepRule::LineSearch: {
                auto ls = oracle.line_search(f.matrix, fg);
                if (!ls)
                    throw std::invalid_argument(
                        "solve: line-search step requires an oracle with an analytic line search");
                mu = *ls;
                break;
            }
            case StepRule::DualGap:
                mu = step_dual_gap(gap, l_smooth, fg - f.matrix);
                break;
            case StepRule::NonconvexCertified:
                mu = step_nonconvex(gap, l_smooth, omega.n());
                break;
        }

        if (mu == 0.0) {
            if (++zero_steps >= 3) {
                report.stop_reason = StopReason::Stationary;
                break;
            }
        } else {
            zero_steps = 0;
        }

        f = dnf_step(f, fg, mu);
        double t3 = detail::now_seconds();
        report.timings.update_seconds += t3 - t2;

        if (t == config.max_iter) report.stop_reason = StopReason::MaxIterations;
    }

    report.final = std::move(f);
    report.max_feasibility_deviation =
        std::max(report.max_feasibility_deviation,
                 check_feasible(report.final.matrix, omega, 1e-8).max_deviation());
    if (report.best_index == 0) {  // no iteration ran; keep the start point
        report.best = report.final;
        report.best_index = 1;
        report.best_objective = oracle.value(report.final.matrix);
        report.best_gap = 0.0;
    }
    report.timings.total_seconds = detail::now_seconds() - t_start;
    return report;
}

}  // namespace dbnot
