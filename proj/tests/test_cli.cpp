#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "boolspec/cli_commands.hpp"

using namespace boolspec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("boolspec_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("experiment config round trip and validation") {
    ExperimentConfig c;
    c.n = 12;
    c.m = 80;
    c.theta = 2.0;
    const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.n == 12);
    CHECK(back.m == 80);
    CHECK(back.theta == doctest::Approx(2.0));
    CHECK(back.ebic_gamma == doctest::Approx(0.25));

    CHECK_THROWS_AS(ExperimentConfig::from_json("{\"n\": 0}"), config_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json("{\"m\": 0}"), config_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json("{\"graph\": {\"edge_prob\": 1.5}}"), config_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json("{\"threshold_rule\": \"wat\"}"), config_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json("not json"), config_error);
}

TEST_CASE("threshold rule fills -1/2 of the incident interaction sum") {
    ExperimentConfig c;
    c.n = 4;
    c.explicit_edges = true;
    c.edges = {{0, 1}, {0, 2}};
    c.theta = 3.0;
    const IsingModel m = build_config_model(c, c.theta, 1);
    CHECK(m.threshold(0) == doctest::Approx(-3.0));  // degree 2
    CHECK(m.threshold(1) == doctest::Approx(-1.5));
    CHECK(m.threshold(3) == doctest::Approx(0.0));
    CHECK(m.domain() == Domain::ZeroOne);
}

TEST_CASE("simulate writes reproducible artifacts") {
    TempDir dir;
    ExperimentConfig c;
    c.n = 8;
    c.m = 30;
    c.seed = 7;
    c.edge_prob = 0.2;
    spit(dir.file("config.json"), c.to_json());

    const int rc = run_cli({"simulate", "--config", dir.file("config.json"), "--out",
                            dir.file("run1")});
    CHECK(rc == 0);
    const std::string csv1 = slurp(dir.file("run1/dataset.csv"));
    CHECK(!csv1.empty());
    // 0/1 values, 30 rows
    CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 30);
    CHECK(csv1.find("-1") == std::string::npos);

    const int rc2 = run_cli({"simulate", "--config", dir.file("config.json"), "--out",
                             dir.file("run2")});
    CHECK(rc2 == 0);
    CHECK(slurp(dir.file("run2/dataset.csv")) == csv1);  // byte identical

    // manifest carries seed and config hash
    const std::string man = slurp(dir.file("run1/manifest.json"));
    CHECK(man.find("config_hash") != std::string::npos);
    CHECK(man.find("\"seed\": 7") != std::string::npos);

    // a different seed changes the data
    const int rc3 = run_cli({"simulate", "--config", dir.file("config.json"), "--seed", "8",
                             "--out", dir.file("run3")});
    CHECK(rc3 == 0);
    CHECK(slurp(dir.file("run3/dataset.csv")) != csv1);
}

TEST_CASE("analyze produces the report files") {
    TempDir dir;
    ExperimentConfig c;
    c.n = 6;
    c.m = 60;
    c.seed = 3;
    c.edge_prob = 0.3;
    c.rho_grid = {0.5, 1.0};
    c.a0_grid = {-0.6};
    c.curve_replicates = 50;
    spit(dir.file("config.json"), c.to_json());
    REQUIRE(run_cli({"simulate", "--config", dir.file("config.json"), "--out",
                     dir.file("sim")}) == 0);

    const int rc = run_cli({"analyze", "--config", dir.file("config.json"), "--data",
                            dir.file("sim/dataset.csv"), "--true-model",
                            dir.file("sim/true_model.json"), "--out", dir.file("out")});
    CHECK(rc == 0);
    CHECK(slurp(dir.file("out/spectrum.csv")).rfind("subset_mask", 0) == 0);
    CHECK(slurp(dir.file("out/influence.csv")).rfind("item,influence", 0) == 0);
    CHECK(slurp(dir.file("out/curves.csv")).rfind("rho,a0,stability", 0) == 0);
    CHECK(slurp(dir.file("out/influence_vs_degree.csv")).rfind("item,degree", 0) == 0);
    CHECK(!slurp(dir.file("out/model_estimate.json")).empty());
    CHECK(!slurp(dir.file("out/fits.json")).empty());
    // curves: 2 rho values x 1 threshold + header
    const std::string curves = slurp(dir.file("out/curves.csv"));
    CHECK(std::count(curves.begin(), curves.end(), '\n') == 3);
}

TEST_CASE("stability subcommand emits only curves") {
    TempDir dir;
    ExperimentConfig c;
    c.n = 5;
    c.m = 40;
    c.seed = 4;
    c.rho_grid = {1.0};
    c.a0_grid = {-0.5, -0.7};
    c.curve_replicates = 20;
    spit(dir.file("config.json"), c.to_json());
    REQUIRE(run_cli({"simulate", "--config", dir.file("config.json"), "--out",
                     dir.file("sim")}) == 0);
    const int rc = run_cli({"stability", "--config", dir.file("config.json"), "--data",
                            dir.file("sim/dataset.csv"), "--out", dir.file("out")});
    CHECK(rc == 0);
    CHECK(fs::exists(dir.file("out/curves.csv")));
    CHECK_FALSE(fs::exists(dir.file("out/spectrum.csv")));
}

TEST_CASE("montecarlo emits the recovery table") {
    TempDir dir;
    ExperimentConfig c;
    c.n = 6;
    c.m = 120;
    c.seed = 5;
    c.edge_prob = 0.3;
    c.replications = 2;
    c.theta_grid = {2.0};
    spit(dir.file("config.json"), c.to_json());
    const int rc =
        run_cli({"montecarlo", "--config", dir.file("config.json"), "--out", dir.file("out")});
    CHECK(rc == 0);
    const std::string csv = slurp(dir.file("out/recovery.csv"));
    CHECK(csv.rfind("theta,precision_mean", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("properties subcommand prints the report") {
    const int rc = run_cli({"properties", "--decision",
                            "{\"type\":\"majority\",\"n\":3,\"params\":{}}"});
    CHECK(rc == 0);
}

TEST_CASE("exit codes") {
    TempDir dir;
    // unknown flag -> usage error 2
    CHECK(run_cli({"simulate", "--nope"}) == 2);
    // invalid config -> 2
    spit(dir.file("bad.json"), "{\"n\": -3}");
    CHECK(run_cli({"simulate", "--config", dir.file("bad.json"), "--out", dir.file("x")}) == 2);
    // missing data file -> 3
    CHECK(run_cli({"analyze", "--data", dir.file("missing.csv"), "--out", dir.file("x")}) == 3);
    // malformed data -> 3
    spit(dir.file("bad.csv"), "0,1\n0,7\n");
    CHECK(run_cli({"analyze", "--data", dir.file("bad.csv"), "--out", dir.file("x")}) == 3);
}

TEST_CASE("replication helpers are deterministic in the seed") {
    ExperimentConfig c;
    c.n = 8;
    c.m = 60;
    c.edge_prob = 0.2;
    c.theta = 3.0;
    const auto a = recovery_replication(c, 3.0, 12);
    const auto b = recovery_replication(c, 3.0, 12);
    CHECK(a.precision == b.precision);
    CHECK(a.recall == b.recall);
    CHECK(a.prob_mad == b.prob_mad);
    CHECK(a.fourier_mad == b.fourier_mad);
}

TEST_CASE("pearson correlation helper") {
    CHECK(pearson_correlation({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
    CHECK(pearson_correlation({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(pearson_correlation({1, 1, 1}, {1, 2, 3}) == doctest::Approx(0.0));
}
