#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "neulab/experiments.hpp"

// ============================================================================
// lab: run the named experiments and emit machine-readable reports.
//
//   lab list
//   lab run <experiment> [--config cfg.json] [--out dir] [--seed k]
//
// Exit code: 0 iff every metric row of the run passes; 2 on usage or
// configuration errors (nothing is written in that case).
// ============================================================================

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for half-space harmonic analysis"};
    app.require_subcommand(1);

    CLI::App* cmd_list = app.add_subcommand("list", "print the experiment names");

    CLI::App* cmd_run = app.add_subcommand("run", "run one experiment");
    std::string name, config_path, out_dir;
    std::uint64_t seed = 0;
    cmd_run->add_option("experiment", name, "experiment name (see `lab list`)")->required();
    cmd_run->add_option("--config", config_path, "JSON config file");
    CLI::Option* out_opt = cmd_run->add_option("--out", out_dir, "output directory");
    CLI::Option* seed_opt = cmd_run->add_option("--seed", seed, "RNG seed override");

    CLI11_PARSE(app, argc, argv);

    if (cmd_list->parsed()) {
        for (const std::string& n : neulab::list_experiments()) std::cout << n << "\n";
        return 0;
    }

    neulab::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config file: " + config_path);
            nlohmann::json j;
            in >> j;
            cfg = neulab::ExperimentConfig::from_json(j);
        }
        cfg.experiment = name;
        if (out_opt->count() > 0) cfg.out_dir = out_dir;
        if (seed_opt->count() > 0) cfg.seed = seed;

        const neulab::ExperimentReport rep = neulab::run_experiment(cfg);
        for (const auto& r : rep.rows)
            std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " = "
                      << neulab::io::format_double(r.value) << "  (want "
                      << neulab::cmp_text(r.cmp) << " "
                      << neulab::io::format_double(r.tolerance) << ")\n";
        for (const auto& [k, v] : rep.fitted)
            std::cout << "[fit]  " << k << " = " << neulab::io::format_double(v) << "\n";
        std::cout << (rep.all_pass() ? "ALL PASS" : "FAILURES PRESENT") << " in "
                  << rep.wall_seconds << " s; report under " << cfg.out_dir << "/"
                  << cfg.experiment << "/\n";
        return rep.all_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
