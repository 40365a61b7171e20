#pragma once

// Named verification properties: the acceptance checks behind the `verify`
// command, each implemented against the independent oracles.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dbnot/pipeline.hpp"
#include "dbnot/verify/oracles.hpp"

namespace dbnot::verify {

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

inline DenseMatrix random_matrix(Rng& rng, std::size_t n, std::size_t c, double lo, double hi) {
    DenseMatrix m(n, c);
    for (double& x : m.data()) x = rng.uniform(lo, hi);
    return m;
}

inline DenseMatrix random_row_stochastic(Rng& rng, std::size_t n, std::size_t c) {
    DenseMatrix m(n, c);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            m(i, j) = rng.uniform(0.0, 1.0) + 1e-3;
            s += m(i, j);
        }
        for (std::size_t j = 0; j < c; ++j) m(i, j) /= s;
    }
    return m;
}

inline SparseAffinity random_geometric_graph(Rng& rng, std::size_t n, std::size_t k) {
    FeatureMatrix z(2, n);
    for (std::size_t i = 0; i < n; ++i) {
        z.at(0, i) = rng.normal();
        z.at(1, i) = rng.normal();
    }
    return knn_gaussian_affinity(z, k);
}

inline SparseAffinity two_cliques(std::size_t per_clique) {
    std::vector<Triplet> e;
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < per_clique; ++i)
            for (std::size_t j = i + 1; j < per_clique; ++j)
                e.push_back({b * per_clique + i, b * per_clique + j, 1.0});
    return SparseAffinity::from_edges(2 * per_clique, e);
}

inline std::filesystem::path fresh_out_dir(const std::string& tag) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("dbnot-verify-" + tag + "-" + std::to_string(++counter));
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace detail

/// Projection equivalence: Dykstra against the active-set QP oracle on 200
/// random desk-scale instances.
inline PropertyResult check_dykstra_matches_qp_oracle() {
    Rng rng(101);
    double worst = 0.0;
    const double t0 = detail::now_s();
    for (int done = 0; done < 200;) {
        const std::size_t n = 2 + rng.index(5);         // 2..6
        const std::size_t c = 2 + rng.index(2);         // 2..3
        if (n < c) continue;
        ++done;
        double b_l, b_u;
        const int mode = static_cast<int>(rng.index(3));
        if (mode == 0) {
            b_l = 0.0;
            b_u = static_cast<double>(n);
        } else if (mode == 1 && n % c == 0) {
            b_l = b_u = static_cast<double>(n / c);
        } else {
            b_l = static_cast<double>(rng.index(n / c + 1));
            const double need = static_cast<double>(n) / static_cast<double>(c);
            b_u = std::ceil(need) + static_cast<double>(rng.index(n));
        }
        DualBoundedSet omega(n, c, b_l, b_u);
        DenseMatrix m = detail::random_matrix(rng, n, c, -1.5, 1.5);
        DenseMatrix dyk = dykstra_project(m, omega, 1e-10, 5000);
        DenseMatrix qp = oracle::qp_project_active_set(m, omega);
        worst = std::max(worst, (dyk - qp).frobenius_norm());
    }
    const double elapsed = detail::now_s() - t0;
    PropertyResult r;
    r.name = "projection: dykstra matches active-set QP oracle";
    r.pass = worst <= 1e-6 && elapsed < 10.0;
    r.detail = "max |dykstra - qp|_F = " + detail::fmt(worst) + ", " + detail::fmt(elapsed) + " s";
    return r;
}

/// Newton simplex projection against the exact sort rule on 1000 vectors.
inline PropertyResult check_simplex_newton_matches_sort() {
    Rng rng(202);
    double worst = 0.0;
    const double t0 = detail::now_s();
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> v(10);
        for (double& x : v) x = rng.uniform(-10.0, 10.0);
        auto a = project_row_simplex(v);
        auto b = project_simplex_sort(v);
        for (std::size_t j = 0; j < v.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
    }
    const double elapsed = detail::now_s() - t0;
    PropertyResult r;
    r.name = "projection: newton simplex matches sort rule";
    r.pass = worst <= 1e-10 && elapsed < 1.0;
    r.detail = "max deviation = " + detail::fmt(worst) + ", " + detail::fmt(elapsed) + " s";
    return r;
}

/// Every iterate of 100-iteration runs stays feasible at 1e-7, for both
/// measures and all four step rules.
inline PropertyResult check_feasibility_invariance() {
    Rng rng(303);
    const std::size_t n = 50, c = 3;
    DualBoundedSet omega(n, c, std::floor(0.5 * 50.0 / 3.0), std::ceil(1.5 * 50.0 / 3.0));

    double worst = 0.0;
    for (int instance = 0; instance < 2; ++instance) {
        SparseAffinity s = detail::random_geometric_graph(rng, n, 6);
        MinCutOracle oracle_mc(s);
        TransportPlan f0 =
            initial_plan(omega, InitMode::UniformJitter, nullptr, nullptr, 4 + instance);
        for (Measure m : {Measure::InnerProduct, Measure::Norm}) {
            for (StepRule st : {StepRule::Easy, StepRule::LineSearch, StepRule::DualGap,
                                StepRule::NonconvexCertified}) {
                SolveConfig sc;
                sc.measure = m;
                sc.step = st;
                sc.max_iter = 100;
                sc.gap_tol = 0.0;
                SolveReport rep = solve(oracle_mc, omega, f0, sc);
                worst = std::max(worst, rep.max_feasibility_deviation);
            }
        }
    }
    PropertyResult r;
    r.name = "solver: feasibility invariance across measures and step rules";
    r.pass = worst <= 1e-7;
    r.detail = "max deviation over all iterates = " + detail::fmt(worst);
    return r;
}

struct ConvexRuns {
    PropertyResult certificate;   // objective bound 4nL/(t+1)
    PropertyResult gap_dominance;  // gap + 1e-8 >= objective excess
};

/// Convex quadratic runs: the objective certificate and gap dominance, for
/// all three step rules, against the analytically known optimum (uniform
/// plan, value 0).
inline ConvexRuns check_convex_certificates() {
    const std::size_t n = 30, c = 3;
    SparseAffinity g = random_connected_graph(n, 3);
    ConvexLaplacianOracle oracle_cx(laplacian(g));
    const double l_smooth = oracle_cx.smoothness();
    DualBoundedSet omega(n, c, 0.0, static_cast<double>(n));

    bool cert_ok = true, gap_ok = true;
    double cert_margin = std::numeric_limits<double>::infinity();
    double gap_margin = std::numeric_limits<double>::infinity();
    for (StepRule st : {StepRule::Easy, StepRule::LineSearch, StepRule::DualGap}) {
        TransportPlan f0 = initial_plan(omega, InitMode::UniformJitter, nullptr, nullptr, 11);
        SolveConfig sc;
        sc.step = st;
        sc.max_iter = 500;
        sc.gap_tol = 1e-12;
        sc.entropic_delta = frobenius_norm(oracle_cx.laplacian()) / static_cast<double>(c);
        SolveReport rep = solve(oracle_cx, omega, f0, sc);
        for (std::size_t t = 1; t <= rep.objective_trace.size(); ++t) {
            const double excess = rep.objective_trace[t - 1];  // optimum value is 0
            const double bound =
                4.0 * static_cast<double>(n) * l_smooth / static_cast<double>(t + 1);
            cert_margin = std::min(cert_margin, bound - excess);
            if (excess > bound) cert_ok = false;
            const double slack = rep.gap_trace[t - 1] + 1e-8 - excess;
            gap_margin = std::min(gap_margin, slack);
            if (slack < 0.0) gap_ok = false;
        }
    }
    ConvexRuns out;
    out.certificate.name = "solver: convex objective certificate 4nL/(t+1), all step rules";
    out.certificate.pass = cert_ok;
    out.certificate.detail = "min bound margin = " + detail::fmt(cert_margin);
    out.gap_dominance.name = "solver: dual gap dominates objective excess on convex runs";
    out.gap_dominance.pass = gap_ok;
    out.gap_dominance.detail = "min slack = " + detail::fmt(gap_margin);
    return out;
}

/// Convex demo reaches the uniform plan within 50 iterations.
inline PropertyResult check_convex_demo() {
    const double t0 = detail::now_s();
    ConvexDemoOutcome out = run_convex_demo(60, 3, 7, "", 50);
    const double elapsed = detail::now_s() - t0;
    PropertyResult r;
    r.name = "solver: convex demo converges to the uniform plan";
    r.pass = out.max_deviation_from_uniform < 1e-3 && elapsed < 5.0;
    r.detail = "max |F - 1/c| = " + detail::fmt(out.max_deviation_from_uniform) + " after " +
               std::to_string(out.iterations) + " iterations, " + detail::fmt(elapsed) + " s";
    return r;
}

/// Running-minimum gap certificate max{2(H0-Hbest), 2nL}/sqrt(t+1) on
/// exhaustively solvable instances.
inline PropertyResult check_nonconvex_certificate() {
    Rng rng(909);
    bool ok = true;
    double min_margin = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 3; ++trial) {
        SparseAffinity s = detail::random_geometric_graph(rng, 10, 3);
        const std::size_t n = 10, c = 2;
        DualBoundedSet omega(n, c, 3.0, 7.0);
        auto enumerated = oracle::best_bounded_assignment(s, c, omega.lower(), omega.upper());
        MinCutOracle oracle_mc(s);
        const double l_smooth = oracle_mc.smoothness();

        TransportPlan f0 =
            initial_plan(omega, InitMode::UniformJitter, nullptr, nullptr, 1 + trial);
        const double h0 = oracle_mc.value(f0.matrix);

        SolveConfig sc;
        sc.step = StepRule::NonconvexCertified;
        sc.max_iter = 500;
        sc.gap_tol = 0.0;
        SolveReport rep = solve(oracle_mc, omega, f0, sc);

        const double numer = std::max(2.0 * (h0 - enumerated.objective),
                                      2.0 * static_cast<double>(n) * l_smooth);
        double running = std::numeric_limits<double>::infinity();
        for (std::size_t t = 1; t <= rep.gap_trace.size(); ++t) {
            running = std::min(running, rep.gap_trace[t - 1]);
            const double bound = numer / std::sqrt(static_cast<double>(t + 1));
            min_margin = std::min(min_margin, bound - running);
            if (running > bound) ok = false;
        }
    }
    PropertyResult r;
    r.name = "solver: nonconvex running-min gap certificate";
    r.pass = ok;
    r.detail = "min bound margin = " + detail::fmt(min_margin);
    return r;
}

/// Closed-form line search beats a 1001-point grid on 200 random segments.
inline PropertyResult check_line_search_grid() {
    Rng rng(808);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 5 + rng.index(4);
        SparseAffinity s = detail::random_geometric_graph(rng, n, 2);
        DenseMatrix f = detail::random_row_stochastic(rng, n, 3);
        DenseMatrix fg = detail::random_row_stochastic(rng, n, 3);
        const double mu_star = line_search_mincut(s, f, fg);
        const double v_star = mincut_value(s, blend(f, fg, mu_star));
        for (int k = 0; k <= 1000; ++k) {
            const double mu = static_cast<double>(k) / 1000.0;
            worst = std::max(worst, v_star - mincut_value(s, blend(f, fg, mu)));
        }
    }
    PropertyResult r;
    r.name = "mincut: closed-form line search optimal on 1001-point grids";
    r.pass = worst <= 1e-9;
    r.detail = "max shortfall vs grid = " + detail::fmt(worst);
    return r;
}

/// Entropic scaling: exact row sums, bounded column sums, monotone tightening
/// toward the enumerated linear-program optimum as delta shrinks.
inline PropertyResult check_entropic_marginals() {
    Rng rng(505);
    const std::size_t n = 6, c = 3;
    DualBoundedSet omega(n, c, 1.0, 3.0);
    bool ok = true;
    std::string why;
    double final_gap_worst = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
        DenseMatrix grad = detail::random_matrix(rng, n, c, 0.0, 1.0);
        const double lp = oracle::lp_min_enumerate(grad, omega);
        double prev = std::numeric_limits<double>::infinity();
        double last = 0.0;
        for (double delta : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
            DenseMatrix p = feasible_gradient_entropic(grad, omega, delta, 1e-12, 200000);
            for (std::size_t i = 0; i < n; ++i) {
                double rs = -1.0;
                for (std::size_t j = 0; j < c; ++j) rs += p(i, j);
                if (std::abs(rs) > 1e-12) {
                    ok = false;
                    why = "row sum off by " + detail::fmt(std::abs(rs));
                }
            }
            auto rep = check_feasible(p, omega, 1e-4);
            for (double v : rep.bound_violations)
                if (v > 1e-4) {
                    ok = false;
                    why = "column bound violated by " + detail::fmt(v);
                }
            last = inner_product(grad, p);
            if (last > prev + 1e-9) {
                ok = false;
                why = "delta-monotonicity broken by " + detail::fmt(last - prev);
            }
            prev = last;
        }
        final_gap_worst = std::max(final_gap_worst, last - lp);
        if (last - lp >= 1e-2) {
            ok = false;
            why = "LP gap " + detail::fmt(last - lp) + " at smallest delta";
        }
    }
    PropertyResult r;
    r.name = "entropic: marginals exact and objective tightens to the LP optimum";
    r.pass = ok;
    r.detail = ok ? "worst LP gap at delta=0.0125: " + detail::fmt(final_gap_worst) : why;
    return r;
}

/// Two-rings pipeline end to end: perfect recovery of the ring labels.
inline PropertyResult check_two_rings_end_to_end() {
    const double t0 = detail::now_s();
    RunConfig cfg;
    cfg.input = "rings:100:0.05";
    cfg.c = 2;
    cfg.slack = 0.2;
    cfg.k = 10;
    cfg.seed = 42;
    cfg.out_dir = detail::fresh_out_dir("rings").string();
    ClusterOutcome out = run_cluster(cfg);
    const double elapsed = detail::now_s() - t0;
    PropertyResult r;
    r.name = "pipeline: two rings clustered exactly (ACC = NMI = ARI = 1)";
    r.pass = out.acc && *out.acc == 1.0 && *out.nmi_score == 1.0 && *out.ari_score == 1.0 &&
             elapsed < 10.0;
    std::ostringstream os;
    os << "ACC=" << (out.acc ? *out.acc : -1.0) << " NMI=" << (out.nmi_score ? *out.nmi_score : -1.0)
       << " ARI=" << (out.ari_score ? *out.ari_score : -1.0) << ", " << detail::fmt(elapsed)
       << " s";
    r.detail = os.str();
    std::filesystem::remove_all(cfg.out_dir);
    return r;
}

/// Two disjoint cliques: the solver lands on the enumerated optimum and the
/// labels separate the cliques.
inline PropertyResult check_two_cliques_exact() {
    SparseAffinity s = detail::two_cliques(5);
    const std::size_t n = 10, c = 2;
    DualBoundedSet omega(n, c, 4.0, 6.0);
    auto enumerated = oracle::best_bounded_assignment(s, c, omega.lower(), omega.upper());
    MinCutOracle oracle_mc(s);

    TransportPlan f0 = initial_plan(omega, InitMode::UniformJitter, nullptr, nullptr, 1);
    SolveConfig sc;
    sc.step = StepRule::LineSearch;
    sc.gap_tol = 1e-12;
    SolveReport rep = solve(oracle_mc, omega, f0, sc);

    const double diff = std::abs(oracle_mc.value(rep.final.matrix) - enumerated.objective);
    LabelVector lab = labels_from_plan(rep.final);
    bool split = true;
    for (std::size_t i = 1; i < 5; ++i)
        if (lab[i] != lab[0]) split = false;
    for (std::size_t i = 6; i < 10; ++i)
        if (lab[i] != lab[5]) split = false;
    if (lab[0] == lab[5]) split = false;

    PropertyResult r;
    r.name = "pipeline: two 5-cliques solved to the enumerated optimum";
    r.pass = diff <= 1e-6 && split;
    r.detail = "|objective - enumerated| = " + detail::fmt(diff) +
               std::string(split ? ", cliques separated" : ", cliques NOT separated");
    return r;
}

/// Analytic gradients of both shipped oracles against central differences.
inline PropertyResult check_gradient_finite_differences() {
    Rng rng(606);
    SparseAffinity s = detail::random_geometric_graph(rng, 12, 3);
    MinCutOracle mc(s);
    ConvexLaplacianOracle cx(laplacian(s));
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        DenseMatrix f = detail::random_row_stochastic(rng, 12, 3);
        for (const ObjectiveOracle* oracle_ptr :
             std::initializer_list<const ObjectiveOracle*>{&mc, &cx}) {
            DenseMatrix g = oracle_ptr->gradient(f);
            DenseMatrix fd = oracle::finite_difference_gradient(
                [&](const DenseMatrix& x) { return oracle_ptr->value(x); }, f);
            const double rel = (g - fd).frobenius_norm() / std::max(g.frobenius_norm(), 1e-12);
            worst = std::max(worst, rel);
        }
    }
    PropertyResult r;
    r.name = "oracles: gradients match central finite differences";
    r.pass = worst <= 1e-5;
    r.detail = "max relative error = " + detail::fmt(worst);
    return r;
}

/// Metric implementations against brute force on every pair of partitions of
/// 6 points into at most 3 clusters.
inline PropertyResult check_metric_oracles() {
    std::vector<LabelVector> parts;
    LabelVector lab(6, 0);
    while (true) {
        parts.push_back(lab);
        std::size_t pos = 0;
        while (pos < 6) {
            if (lab[pos] < 2) {
                ++lab[pos];
                break;
            }
            lab[pos] = 0;
            ++pos;
        }
        if (pos == 6) break;
    }
    double worst_nmi = 0.0, worst_ari = 0.0;
    bool acc_exact = true;
    for (const auto& a : parts)
        for (const auto& b : parts) {
            if (accuracy(a, b) != oracle::accuracy_bruteforce(a, b)) acc_exact = false;
            worst_nmi = std::max(worst_nmi, std::abs(nmi(a, b) - oracle::nmi_bruteforce(a, b)));
            worst_ari = std::max(worst_ari, std::abs(ari(a, b) - oracle::ari_bruteforce(a, b)));
        }
    PropertyResult r;
    r.name = "metrics: exhaustive agreement with brute-force oracles";
    r.pass = acc_exact && worst_nmi <= 1e-12 && worst_ari <= 1e-12;
    r.detail = std::string("accuracy ") + (acc_exact ? "exact" : "MISMATCH") +
               ", |nmi err| = " + detail::fmt(worst_nmi) + ", |ari err| = " + detail::fmt(worst_ari);
    return r;
}

/// Column sums written by cluster runs stay inside the configured bounds.
inline PropertyResult check_colsum_bounds() {
    bool ok = true;
    double worst = 0.0;
    std::vector<RunConfig> matrix;
    {
        RunConfig a;
        a.input = "rings:60:0.05";
        a.c = 2;
        a.slack = 0.2;
        a.k = 8;
        a.seed = 5;
        matrix.push_back(a);
        RunConfig b;
        b.input = "blobs:30:3:0.4";
        b.c = 3;
        b.slack = 0.3;
        b.k = 6;
        b.step = StepRule::LineSearch;
        b.seed = 6;
        matrix.push_back(b);
        RunConfig d;
        d.input = "blobs:25:2:0.4";
        d.c = 2;
        d.slack = 0.25;
        d.k = 6;
        d.measure = Measure::Norm;
        d.step = StepRule::DualGap;
        d.seed = 7;
        matrix.push_back(d);
    }
    for (auto& cfg : matrix) {
        cfg.out_dir = detail::fresh_out_dir("colsum").string();
        run_cluster(cfg);
        std::ifstream in(std::filesystem::path(cfg.out_dir) / "colsum.csv");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            double col, sum, lo, hi;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &col, &sum, &lo, &hi) == 4) {
                const double viol = std::max({lo - sum, sum - hi, 0.0});
                worst = std::max(worst, viol);
                if (viol > 1e-6) ok = false;
            }
        }
        std::filesystem::remove_all(cfg.out_dir);
    }
    PropertyResult r;
    r.name = "pipeline: reported column sums inside the bounds";
    r.pass = ok;
    r.detail = "max violation = " + detail::fmt(worst);
    return r;
}

// ---------------------------------------------------------------------------
// Suites.
// ---------------------------------------------------------------------------

inline std::vector<PropertyResult> run_projection_suite() {
    return {check_dykstra_matches_qp_oracle(), check_simplex_newton_matches_sort()};
}

inline std::vector<PropertyResult> run_convergence_suite() {
    std::vector<PropertyResult> out;
    out.push_back(check_feasibility_invariance());
    ConvexRuns cr = check_convex_certificates();
    out.push_back(cr.certificate);
    out.push_back(check_convex_demo());
    out.push_back(check_nonconvex_certificate());
    out.push_back(cr.gap_dominance);
    out.push_back(check_line_search_grid());
    out.push_back(check_entropic_marginals());
    return out;
}

inline std::vector<PropertyResult> run_metric_suite() {
    return {check_metric_oracles()};
}

inline std::vector<PropertyResult> run_all_suites() {
    std::vector<PropertyResult> out = run_projection_suite();
    auto conv = run_convergence_suite();
    out.insert(out.end(), conv.begin(), conv.end());
    out.push_back(check_two_rings_end_to_end());
    out.push_back(check_two_cliques_exact());
    out.push_back(check_gradient_finite_differences());
    auto met = run_metric_suite();
    out.insert(out.end(), met.begin(), met.end());
    out.push_back(check_colsum_bounds());
    return out;
}

}  // namespace dbnot::verify
