#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dbnot/io.hpp"
#include "dbnot/pipeline.hpp"

using namespace dbnot;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("dbnot-test-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& args) {
#ifdef DBNOT_CLI_PATH
    const int rc = std::system((std::string(DBNOT_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
#else
    (void)args;
    return -1;
#endif
}

}  // namespace

TEST_CASE("csv ingestion with and without a label header") {
    fs::path dir = scratch_dir("csv");
    {
        std::ofstream out(dir / "with_label.csv");
        out << "x,y,label\n1.0,2.0,0\n3.0,4.0,1\n-1.5,0.25,1\n";
    }
    LabeledDataset ds = read_csv_dataset((dir / "with_label.csv").string());
    CHECK(ds.features.samples() == 3);
    CHECK(ds.features.dim() == 2);
    REQUIRE(ds.labels.has_value());
    CHECK(*ds.labels == std::vector<int>{0, 1, 1});
    CHECK(ds.features.at(1, 2) == 0.25);

    {
        std::ofstream out(dir / "plain.csv");
        out << "1,2\n3,4\n";
    }
    LabeledDataset plain = read_csv_dataset((dir / "plain.csv").string());
    CHECK(plain.features.samples() == 2);
    CHECK_FALSE(plain.labels.has_value());

    {
        std::ofstream out(dir / "bad.csv");
        out << "1,2\n3,oops\n";
    }
    CHECK_THROWS_AS(read_csv_dataset((dir / "bad.csv").string()), std::runtime_error);
    CHECK_THROWS_AS(read_csv_dataset((dir / "missing.csv").string()), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("atomic text writes replace files completely") {
    fs::path dir = scratch_dir("atomic");
    write_text_atomic(dir / "f.txt", "first version");
    CHECK(slurp(dir / "f.txt") == "first version");
    write_text_atomic(dir / "f.txt", "v2");
    CHECK(slurp(dir / "f.txt") == "v2");
    CHECK_FALSE(fs::exists(dir / "f.txt.tmp"));
    fs::remove_all(dir);
}

TEST_CASE("cluster run writes all artifacts and respects the bounds") {
    fs::path dir = scratch_dir("run");
    RunConfig cfg;
    cfg.input = "blobs:20:2:0.4";
    cfg.c = 2;
    cfg.slack = 0.3;
    cfg.k = 5;
    cfg.seed = 3;
    cfg.out_dir = (dir / "out").string();
    ClusterOutcome out = run_cluster(cfg);

    for (const char* f : {"labels.csv", "report.json", "trace.csv", "colsum.csv", "plan.csv"})
        CHECK(fs::exists(fs::path(cfg.out_dir) / f));

    REQUIRE(out.acc.has_value());
    CHECK(*out.acc == 1.0);  // trivially separable blobs

    auto j = nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "report.json"));
    CHECK(j["schema_version"] == 1);
    CHECK(j["n"] == 40);
    CHECK(j.contains("timings"));
    CHECK(j["metrics"]["accuracy"] == 1.0);

    const double lo = j["config"]["b_l"], hi = j["config"]["b_u"];
    for (double s : out.column_sums) {
        CHECK(s >= lo - 1e-6);
        CHECK(s <= hi + 1e-6);
    }
    fs::remove_all(dir);
}

TEST_CASE("cluster runs are deterministic given the seed") {
    fs::path dir = scratch_dir("det");
    RunConfig cfg;
    cfg.input = "rings:40:0.05";
    cfg.c = 2;
    cfg.slack = 0.2;
    cfg.k = 8;
    cfg.seed = 9;

    cfg.out_dir = (dir / "a").string();
    run_cluster(cfg);
    cfg.out_dir = (dir / "b").string();
    run_cluster(cfg);

    CHECK(slurp(dir / "a" / "labels.csv") == slurp(dir / "b" / "labels.csv"));
    CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
    CHECK(slurp(dir / "a" / "plan.csv") == slurp(dir / "b" / "plan.csv"));

    auto ja = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
    auto jb = nlohmann::json::parse(slurp(dir / "b" / "report.json"));
    ja.erase("timings");
    jb.erase("timings");
    CHECK(ja.dump() == jb.dump());
    fs::remove_all(dir);
}

TEST_CASE("infeasible bounds are rejected up front") {
    RunConfig cfg;
    cfg.input = "blobs:10:2:0.4";
    cfg.c = 2;
    cfg.b_l = 15.0;  // 2*15 > 20 samples
    cfg.b_u = 16.0;
    cfg.out_dir = (fs::temp_directory_path() / "dbnot-never").string();
    CHECK_THROWS_AS(run_cluster(cfg), std::invalid_argument);
}

TEST_CASE("convex demo reports near-uniform plans and writes traces") {
    fs::path dir = scratch_dir("demo");
    ConvexDemoOutcome out = run_convex_demo(40, 2, 11, (dir / "demo").string(), 100);
    CHECK(out.max_deviation_from_uniform < 1e-3);
    CHECK(fs::exists(dir / "demo" / "trace.csv"));
    CHECK(fs::exists(dir / "demo" / "plan.csv"));
    CHECK_THROWS_AS(run_convex_demo(40, 1, 11, "", 10), std::invalid_argument);  // c >= 2
    fs::remove_all(dir);
}

TEST_CASE("convex demo traces are identical across repeated seeds") {
    ConvexDemoOutcome a = run_convex_demo(30, 2, 5, "", 40);
    ConvexDemoOutcome b = run_convex_demo(30, 2, 5, "", 40);
    REQUIRE(a.objective_trace.size() == b.objective_trace.size());
    for (std::size_t i = 0; i < a.objective_trace.size(); ++i)
        CHECK(a.objective_trace[i] == b.objective_trace[i]);
}

#ifdef DBNOT_CLI_PATH
TEST_CASE("cli exit codes") {
    fs::path dir = scratch_dir("cli");
    CHECK(run_cli("verify --suite bogus") == 2);
    CHECK(run_cli("cluster --input blobs:10:2:0.4 --c 2 --balance 0.5 --k 3 --seed 1 --out " +
                  (dir / "o").string()) == 0);
    CHECK(run_cli("cluster --input " + (dir / "missing.csv").string() + " --c 2 --out " +
                  (dir / "o2").string()) == 1);
    CHECK(run_cli("cluster --input blobs:10:2:0.4 --c 2 --bl 15 --bu 16 --out " +
                  (dir / "o3").string()) == 1);
    CHECK(run_cli("convex-demo --n 30 --c 2 --seed 3") == 0);
    fs::remove_all(dir);
}
#endif
