#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "neulab/experiments.hpp"

using namespace neulab;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("the experiment registry is complete and sorted") {
    const std::vector<std::string> names = list_experiments();
    const std::vector<std::string> expected{
        "bmo-inclusion",     "commutator-bound", "counterexample",
        "duality-pairing",   "factorize-atom",   "fs-synthesis",
        "kernel-identities", "norm-equivalence", "reflection-identities",
        "riesz-mass",        "two-bump",         "weak-factorize",
    };
    CHECK(names == expected);
    CHECK(std::is_sorted(names.begin(), names.end()));
}

TEST_CASE("ExperimentConfig round-trips through JSON") {
    ExperimentConfig c;
    c.experiment = "riesz-mass";
    c.dimension = 2;
    c.half_width = 8.0;
    c.points = 128;
    c.t_min = 0.25;
    c.t_max = 4.0;
    c.scale_count = 12;
    c.M_values = {16.0, 32.0};
    c.epsilons = {0.5};
    c.epsilon = 0.5;
    c.l = 1;
    c.K_max = 3;
    c.seed = 123456789012345ULL;
    c.out_dir = "elsewhere";

    const ExperimentConfig d = ExperimentConfig::from_json(c.to_json());
    CHECK(d.experiment == c.experiment);
    CHECK(d.dimension == c.dimension);
    CHECK(d.half_width == c.half_width);
    CHECK(d.points == c.points);
    CHECK(d.t_min == c.t_min);
    CHECK(d.t_max == c.t_max);
    CHECK(d.scale_count == c.scale_count);
    CHECK(d.M_values == c.M_values);
    CHECK(d.epsilons == c.epsilons);
    CHECK(d.epsilon == c.epsilon);
    CHECK(d.l == c.l);
    CHECK(d.K_max == c.K_max);
    CHECK(d.seed == c.seed);
    CHECK(d.out_dir == c.out_dir);
}

TEST_CASE("ExperimentConfig fills defaults from an empty document") {
    const ExperimentConfig c = ExperimentConfig::from_json(nlohmann::json::object());
    CHECK(c.dimension == 1);
    CHECK(c.half_width == 16.0);
    CHECK(c.points == 4096);
    CHECK(c.epsilon == 0.1);
    CHECK(c.K_max == 6);
    CHECK(c.seed == 1);
    CHECK(c.out_dir == "out");

    const Grid g = c.make_grid();
    CHECK(g.dimension == 1);
    CHECK(g.spacing() == 32.0 / 4096.0);

    ExperimentConfig s = c;
    s.t_min = 0.25;
    s.t_max = 4.0;
    s.scale_count = 9;
    const ScaleGrid sg = s.make_scales(g);
    CHECK(sg.scales.size() == 9);
    CHECK(sg.scales.front() == Catch::Approx(0.25).epsilon(1e-12));
    CHECK(sg.scales.back() == Catch::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("make_row applies the comparison") {
    CHECK(make_row("a", 1.0, 2.0, Cmp::le).pass);
    CHECK_FALSE(make_row("a", 3.0, 2.0, Cmp::le).pass);
    CHECK(make_row("b", 3.0, 2.0, Cmp::ge).pass);
    CHECK_FALSE(make_row("b", 1.0, 2.0, Cmp::ge).pass);
    CHECK(make_row("c", 1.0, 2.0, Cmp::lt).pass);
    CHECK_FALSE(make_row("c", 2.0, 2.0, Cmp::lt).pass);
    CHECK(std::string(cmp_text(Cmp::le)) == "<=");
    CHECK(std::string(cmp_text(Cmp::ge)) == ">=");
    CHECK(std::string(cmp_text(Cmp::lt)) == "<");
}

TEST_CASE("run_experiment rejects unknown names before writing") {
    ExperimentConfig cfg;
    cfg.experiment = "no-such-experiment";
    cfg.out_dir = "exp-test-out/unknown";
    fs::remove_all(cfg.out_dir);
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    CHECK_FALSE(fs::exists(cfg.out_dir));
}

TEST_CASE("run_experiment writes deterministic reports") {
    ExperimentConfig cfg;
    cfg.experiment = "riesz-mass";
    cfg.dimension = 1;
    cfg.M_values = {16.0, 32.0};
    cfg.seed = 7;

    cfg.out_dir = "exp-test-out/run1";
    fs::remove_all(cfg.out_dir);
    const ExperimentReport rep = run_experiment(cfg);
    CHECK(rep.all_pass());
    CHECK_FALSE(rep.rows.empty());
    CHECK(rep.wall_seconds >= 0.0);

    const fs::path dir1 = fs::path(cfg.out_dir) / "riesz-mass";
    REQUIRE(fs::exists(dir1 / "metrics.csv"));
    REQUIRE(fs::exists(dir1 / "report.json"));
    REQUIRE(fs::exists(dir1 / "riesz_mass.csv"));

    const std::string metrics1 = read_file(dir1 / "metrics.csv");
    CHECK(metrics1.rfind("name,value,tolerance,cmp,pass\n", 0) == 0);

    cfg.out_dir = "exp-test-out/run2";
    fs::remove_all(cfg.out_dir);
    run_experiment(cfg);
    const fs::path dir2 = fs::path(cfg.out_dir) / "riesz-mass";
    CHECK(read_file(dir2 / "metrics.csv") == metrics1);
    CHECK(read_file(dir2 / "riesz_mass.csv") == read_file(dir1 / "riesz_mass.csv"));

    const nlohmann::json doc = nlohmann::json::parse(read_file(dir1 / "report.json"));
    CHECK(doc.at("all_pass").get<bool>());
    CHECK(doc.at("config").at("experiment").get<std::string>() == "riesz-mass");
    CHECK(doc.at("metrics").is_array());
    CHECK_FALSE(doc.at("metrics").empty());
    CHECK(doc.contains("kernel_constants"));
    CHECK(doc.at("library_version").is_string());
}
