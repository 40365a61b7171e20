#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbnot/eval.hpp"
#include "dbnot/graph.hpp"
#include "dbnot/io.hpp"
#include "dbnot/mincut.hpp"
#include "dbnot/solver.hpp"

namespace dbnot {

enum class InitChoice { Auto, UniformJitter, KMeansWarm, GraphComponents };

/// Configuration of one clustering run. Bounds may be given directly or via
/// the slack form b_l = floor((1-slack) n/c), b_u = ceil((1+slack) n/c).
struct RunConfig {
    std::string input;            // CSV path, or "rings:<n>:<noise>" / "blobs:<n>:<c>:<spread>"
    std::size_t c = 2;
    double b_l = -1.0;            // <0: derive from slack
    double b_u = -1.0;
    double slack = 0.1;
    std::size_t k = 10;
    double sigma = 0.0;           // kernel bandwidth override; 0 = mean pairwise distance
    Measure measure = Measure::InnerProduct;
    StepRule step = StepRule::Easy;
    std::size_t max_iter = 500;
    double gap_tol = 1e-9;
    std::uint64_t seed = 42;
    InitChoice init = InitChoice::Auto;
    double entropic_delta = 0.0;
    bool use_final_iterate = false;  // default reports the best-gap iterate
    std::string out_dir = "out";
};

struct ClusterOutcome {
    LabelVector labels;
    std::vector<double> column_sums;
    std::optional<double> acc, nmi_score, ari_score;
    double objective = 0.0;
    std::size_t iterations = 0;
    std::size_t best_index = 0;
    StopReason stop_reason = StopReason::MaxIterations;
    double max_feasibility_deviation = 0.0;
    std::filesystem::path report_path;
};

namespace detail {

inline LabeledDataset load_dataset(const std::string& input, std::uint64_t seed) {
    if (input.rfind("rings:", 0) == 0) {
        std::size_t npr = 100;
        double noise = 0.05;
        std::sscanf(input.c_str(), "rings:%zu:%lf", &npr, &noise);
        return generate_two_rings(npr, noise, seed);
    }
    if (input.rfind("blobs:", 0) == 0) {
        std::size_t npb = 50, nb = 2;
        double spread = 0.5;
        std::sscanf(input.c_str(), "blobs:%zu:%zu:%lf", &npb, &nb, &spread);
        std::vector<std::vector<double>> centers;
        const double two_pi = 2.0 * 3.14159265358979323846;
        for (std::size_t b = 0; b < nb; ++b) {
            const double th = two_pi * static_cast<double>(b) / static_cast<double>(nb);
            centers.push_back({6.0 * std::cos(th), 6.0 * std::sin(th)});
        }
        return generate_blobs(npb, centers, spread, seed);
    }
    return read_csv_dataset(input);
}

inline TransportPlan pick_initial_plan(const RunConfig& cfg, const DualBoundedSet& omega,
                                       const FeatureMatrix& z, const SparseAffinity& s) {
    switch (cfg.init) {
        case InitChoice::UniformJitter:
            return initial_plan(omega, InitMode::UniformJitter, nullptr, nullptr, cfg.seed);
        case InitChoice::KMeansWarm:
            return initial_plan(omega, InitMode::KMeansWarm, &z, nullptr, cfg.seed);
        case InitChoice::GraphComponents:
            return initial_plan(omega, InitMode::GraphComponents, nullptr, &s, cfg.seed);
        case InitChoice::Auto: {
            auto [comp, count] = connected_components(s);
            (void)comp;
            if (count >= omega.c())
                return initial_plan(omega, InitMode::GraphComponents, nullptr, &s, cfg.seed);
            return initial_plan(omega, InitMode::KMeansWarm, &z, nullptr, cfg.seed);
        }
    }
    throw std::logic_error("pick_initial_plan: unreachable");
}

inline const char* to_string(InitChoice ic) {
    switch (ic) {
        case InitChoice::Auto: return "auto";
        case InitChoice::UniformJitter: return "uniform";
        case InitChoice::KMeansWarm: return "kmeans";
        case InitChoice::GraphComponents: return "components";
    }
    return "unknown";
}

}  // namespace detail

/// Full clustering run: load -> normalize -> affinity -> solve -> labels ->
/// metrics -> artifacts (labels.csv, report.json, trace.csv, colsum.csv,
/// plan.csv) under cfg.out_dir.
inline ClusterOutcome run_cluster(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const double t_start = detail::now_seconds();

    LabeledDataset ds = detail::load_dataset(cfg.input, cfg.seed);
    const std::size_t n = ds.features.samples();

    double b_l = cfg.b_l, b_u = cfg.b_u;
    if (b_l < 0.0 || b_u < 0.0) {
        const double per = static_cast<double>(n) / static_cast<double>(cfg.c);
        b_l = std::floor((1.0 - cfg.slack) * per);
        b_u = std::ceil((1.0 + cfg.slack) * per);
        if (b_l < 0.0) b_l = 0.0;
    }
    DualBoundedSet omega(n, cfg.c, b_l, b_u);

    const double t_loaded = detail::now_seconds();

    FeatureMatrix zn = normalize_features(ds.features);
    SparseAffinity s = knn_gaussian_affinity(zn, cfg.k, cfg.sigma);
    MinCutOracle oracle(std::move(s));

    TransportPlan f0 = detail::pick_initial_plan(cfg, omega, zn, oracle.affinity());
    const double t_graph = detail::now_seconds();

    SolveConfig sc;
    sc.measure = cfg.measure;
    sc.step = cfg.step;
    sc.max_iter = cfg.max_iter;
    sc.gap_tol = cfg.gap_tol;
    sc.seed = cfg.seed;
    sc.entropic_delta = cfg.entropic_delta;
    SolveReport rep = solve(oracle, omega, f0, sc);

    const TransportPlan& chosen = cfg.use_final_iterate ? rep.final : rep.best;
    const double t_solved = detail::now_seconds();

    ClusterOutcome out;
    out.labels = labels_from_plan(chosen);
    out.objective = oracle.value(chosen.matrix);
    out.iterations = rep.iterations;
    out.best_index = rep.best_index;
    out.stop_reason = rep.stop_reason;
    out.max_feasibility_deviation = rep.max_feasibility_deviation;

    auto feas = check_feasible(chosen.matrix, omega, 1e-8);
    out.column_sums = feas.column_sums;

    if (ds.labels) {
        out.acc = accuracy(out.labels, *ds.labels);
        out.nmi_score = nmi(out.labels, *ds.labels);
        out.ari_score = ari(out.labels, *ds.labels);
    }

    fs::path dir(cfg.out_dir);
    write_labels_csv(dir / "labels.csv", out.labels);
    write_trace_csv(dir / "trace.csv", rep.objective_trace, rep.gap_trace);
    write_colsum_csv(dir / "colsum.csv", out.column_sums, omega.lower(), omega.upper());
    write_plan_csv(dir / "plan.csv", chosen.matrix);

    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["config"] = {{"input", cfg.input},
                   {"c", cfg.c},
                   {"b_l", omega.lower()},
                   {"b_u", omega.upper()},
                   {"k", cfg.k},
                   {"measure", to_string(cfg.measure)},
                   {"step", to_string(cfg.step)},
                   {"max_iter", cfg.max_iter},
                   {"gap_tol", cfg.gap_tol},
                   {"seed", cfg.seed},
                   {"init", detail::to_string(cfg.init)},
                   {"selected", cfg.use_final_iterate ? "final" : "best_gap"}};
    j["n"] = n;
    j["iterations"] = rep.iterations;
    j["stop_reason"] = to_string(rep.stop_reason);
    j["best_gap_index"] = rep.best_index;
    j["best_gap"] = rep.best_gap;
    j["objective"] = out.objective;
    j["objective_trace"] = rep.objective_trace;
    j["gap_trace"] = rep.gap_trace;
    j["cluster_sizes"] = cluster_sizes(out.labels, cfg.c);
    j["column_sums"] = out.column_sums;
    j["max_feasibility_deviation"] = rep.max_feasibility_deviation;
    if (out.acc) {
        j["metrics"] = {{"accuracy", *out.acc}, {"nmi", *out.nmi_score}, {"ari", *out.ari_score}};
    }
    const double t_end = detail::now_seconds();
    j["timings"] = {{"load_seconds", t_loaded - t_start},
                    {"graph_seconds", t_graph - t_loaded},
                    {"solve_seconds", t_solved - t_graph},
                    {"gradient_seconds", rep.timings.gradient_seconds},
                    {"feasible_gradient_seconds", rep.timings.feasible_gradient_seconds},
                    {"update_seconds", rep.timings.update_seconds},
                    {"total_seconds", t_end - t_start}};
    out.report_path = dir / "report.json";
    write_text_atomic(out.report_path, j.dump(2) + "\n");
    return out;
}

struct ConvexDemoOutcome {
    double max_deviation_from_uniform = 0.0;
    std::size_t iterations = 0;
    std::vector<double> objective_trace;
};

/// Random connected weighted graph: a cycle plus 2n seeded random edges.
inline SparseAffinity random_connected_graph(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Triplet> edges;
    for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
    for (std::size_t e = 0; e < 2 * n; ++e) {
        const std::size_t i = rng.index(n), j = rng.index(n);
        if (i == j) continue;
        edges.push_back({i, j, rng.uniform(0.5, 1.5)});
    }
    return SparseAffinity::from_edges(n, edges);
}

/// Minimize tr(F' Lap F) over row-simplex plans on a random connected graph;
/// the minimizers are the plans with identical rows, and the entropic
/// feasible gradient pulls the iterates to the uniform one.
inline ConvexDemoOutcome run_convex_demo(std::size_t n, std::size_t c, std::uint64_t seed,
                                         const std::string& out_dir = "",
                                         std::size_t max_iter = 500) {
    SparseAffinity graph = random_connected_graph(n, seed);
    ConvexLaplacianOracle oracle(laplacian(graph));
    DualBoundedSet omega(n, c, 0.0, static_cast<double>(n));

    TransportPlan f0 = initial_plan(omega, InitMode::UniformJitter, nullptr, nullptr, seed);

    SolveConfig sc;
    sc.measure = Measure::InnerProduct;
    sc.step = StepRule::Easy;
    sc.max_iter = max_iter;
    sc.gap_tol = 1e-9;
    // fixed regularization keeps the feasible gradient pointing at the
    // uniform plan once the gradient flattens
    sc.entropic_delta = frobenius_norm(oracle.laplacian()) / static_cast<double>(c);
    SolveReport rep = solve(oracle, omega, f0, sc);

    ConvexDemoOutcome out;
    out.iterations = rep.iterations;
    out.objective_trace = rep.objective_trace;
    const double uniform = 1.0 / static_cast<double>(c);
    for (double x : rep.final.matrix.data())
        out.max_deviation_from_uniform = std::max(out.max_deviation_from_uniform,
                                                  std::abs(x - uniform));
    if (!out_dir.empty()) {
        std::filesystem::path dir(out_dir);
        write_trace_csv(dir / "trace.csv", rep.objective_trace, rep.gap_trace);
        write_plan_csv(dir / "plan.csv", rep.final.matrix);
    }
    return out;
}

}  // namespace dbnot
