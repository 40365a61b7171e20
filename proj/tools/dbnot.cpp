#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dbnot/dbnot.hpp"
#include "dbnot/verify/suites.hpp"

namespace {

dbnot::Measure parse_measure(const std::string& s) {
    if (s == "inner") return dbnot::Measure::InnerProduct;
    if (s == "norm") return dbnot::Measure::Norm;
    throw CLI::ValidationError("--measure", "expected inner|norm");
}

dbnot::StepRule parse_step(const std::string& s) {
    if (s == "easy") return dbnot::StepRule::Easy;
    if (s == "line") return dbnot::StepRule::LineSearch;
    if (s == "gap") return dbnot::StepRule::DualGap;
    throw CLI::ValidationError("--step", "expected easy|line|gap");
}

dbnot::InitChoice parse_init(const std::string& s) {
    if (s == "auto") return dbnot::InitChoice::Auto;
    if (s == "uniform") return dbnot::InitChoice::UniformJitter;
    if (s == "kmeans") return dbnot::InitChoice::KMeansWarm;
    if (s == "components") return dbnot::InitChoice::GraphComponents;
    throw CLI::ValidationError("--init", "expected auto|uniform|kmeans|components");
}

int run_verify(const std::string& suite) {
    std::vector<dbnot::verify::PropertyResult> results;
    if (suite == "projections")
        results = dbnot::verify::run_projection_suite();
    else if (suite == "convergence")
        results = dbnot::verify::run_convergence_suite();
    else if (suite == "metrics")
        results = dbnot::verify::run_metric_suite();
    else if (suite == "all")
        results = dbnot::verify::run_all_suites();
    else {
        std::cerr << "unknown suite '" << suite
                  << "'; expected one of: projections, convergence, metrics, all\n";
        return 2;
    }
    int failures = 0;
    for (const auto& r : results) {
        std::printf("[%s] %s (%s)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        if (!r.pass) ++failures;
    }
    std::printf("%zu properties, %d failed\n", results.size(), failures);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dbnot: bounded-cluster-size min-cut clustering via Frank-Wolfe over the "
                 "dual-bounded transport polytope"};
    app.require_subcommand(1);

    // cluster
    auto* cluster = app.add_subcommand("cluster", "cluster a dataset and write artifacts");
    dbnot::RunConfig cfg;
    std::string measure = "inner", step = "easy", init = "auto";
    double bl = -1.0, bu = -1.0;
    cluster->add_option("--input", cfg.input,
                        "CSV path, or rings:<n>:<noise> / blobs:<n>:<c>:<spread>")
        ->required();
    cluster->add_option("--c", cfg.c, "number of clusters")->required();
    cluster->add_option("--balance", cfg.slack,
                        "slack: b_l = floor((1-slack) n/c), b_u = ceil((1+slack) n/c)");
    cluster->add_option("--bl", bl, "explicit lower column-sum bound");
    cluster->add_option("--bu", bu, "explicit upper column-sum bound");
    cluster->add_option("--k", cfg.k, "nearest neighbors for the affinity graph");
    cluster->add_option("--sigma", cfg.sigma, "Gaussian bandwidth override (default: mean distance)");
    cluster->add_option("--measure", measure, "feasible-gradient measure: inner|norm");
    cluster->add_option("--step", step, "step rule: easy|line|gap");
    cluster->add_option("--max-iter", cfg.max_iter, "iteration cap");
    cluster->add_option("--gap-tol", cfg.gap_tol, "stop when the dual gap falls below this");
    cluster->add_option("--seed", cfg.seed, "random seed");
    cluster->add_option("--init", init, "initial plan: auto|uniform|kmeans|components");
    cluster->add_option("--delta", cfg.entropic_delta,
                        "entropic regularization (0 = scale to the gradient range)");
    cluster->add_flag("--final-iterate", cfg.use_final_iterate,
                      "report the last iterate instead of the best-gap iterate");
    cluster->add_option("--out", cfg.out_dir, "output directory")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "run the verification property suites");
    std::string suite = "all";
    verify->add_option("--suite", suite, "projections|convergence|metrics|all");

    // convex-demo
    auto* demo = app.add_subcommand("convex-demo",
                                    "solve the convex cut objective on a random connected graph");
    std::size_t demo_n = 60, demo_c = 3;
    std::uint64_t demo_seed = 7;
    std::string demo_out;
    demo->add_option("--n", demo_n, "vertices");
    demo->add_option("--c", demo_c, "clusters");
    demo->add_option("--seed", demo_seed, "random seed");
    demo->add_option("--out", demo_out, "optional output directory for trace and plan");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cluster->parsed()) {
            cfg.measure = parse_measure(measure);
            cfg.step = parse_step(step);
            cfg.init = parse_init(init);
            cfg.b_l = bl;
            cfg.b_u = bu;
            dbnot::ClusterOutcome out = dbnot::run_cluster(cfg);
            std::printf("n=%zu c=%zu iterations=%zu stop=%s objective=%.10g\n",
                        out.labels.size(), cfg.c, out.iterations,
                        dbnot::to_string(out.stop_reason), out.objective);
            if (out.acc)
                std::printf("ACC=%.6f NMI=%.6f ARI=%.6f\n", *out.acc, *out.nmi_score,
                            *out.ari_score);
            std::printf("report: %s\n", out.report_path.string().c_str());
            return 0;
        }
        if (verify->parsed()) return run_verify(suite);
        if (demo->parsed()) {
            dbnot::ConvexDemoOutcome out = dbnot::run_convex_demo(demo_n, demo_c, demo_seed, demo_out);
            std::printf("iterations=%zu max|F - 1/c| = %.6g\n", out.iterations,
                        out.max_deviation_from_uniform);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
