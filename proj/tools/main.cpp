// SPDX-License-Identifier: Apache-2.0
//
// cnslab command line: scenario runs, the aggregated verification suite, and
// report generation from stored runs.
//
//   cnslab run <scenario-file> [--out DIR]
//   cnslab verify [--resolutions 32,64] [--trials N] [--seed S] [--out DIR]
//   cnslab report <run-dir>
//
// The output root is --out, else $CNSLAB_OUT, else ./runs.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "cnslab/harness.hpp"

namespace {

std::string output_root(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("CNSLAB_OUT")) return env;
    return "runs";
}

void print_checks(const std::vector<cnslab::ManifestCheck>& checks) {
    for (const auto& c : checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  value=" << cnslab::csv_num(c.value)
                  << " threshold=" << cnslab::csv_num(c.threshold) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral compressible-flow laboratory"};
    app.require_subcommand(1);

    std::string scenario_path, out_flag, run_dir;
    std::string resolutions_flag = "32,64";
    int trials = 100;
    std::uint64_t seed = 1;

    CLI::App* run = app.add_subcommand("run", "run one scenario and write reports");
    run->add_option("scenario", scenario_path, "scenario file (key = value)")->required();
    run->add_option("--out", out_flag, "output root directory");

    CLI::App* verify = app.add_subcommand("verify", "run the aggregated verification suite");
    verify->add_option("--resolutions", resolutions_flag, "comma-separated grid sizes");
    verify->add_option("--trials", trials, "randomized trials per estimate suite");
    verify->add_option("--seed", seed, "random seed");
    verify->add_option("--out", out_flag, "output root directory");

    CLI::App* report = app.add_subcommand("report", "emit norms-vs-time CSV for a stored run");
    report->add_option("rundir", run_dir, "directory produced by `run`")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            cnslab::Scenario sc = cnslab::load_scenario(scenario_path);
            const std::string dir = output_root(out_flag) + "/" + sc.name;
            cnslab::RunManifest manifest = cnslab::run_scenario(sc, dir);
            std::cout << "run '" << sc.name << "' -> " << dir << '\n';
            print_checks(manifest.checks);
            std::cout << (manifest.all_pass() ? "result: pass" : "result: fail") << '\n';
            return manifest.all_pass() ? 0 : 1;
        }
        if (verify->parsed()) {
            std::vector<int> res;
            std::stringstream ss(resolutions_flag);
            std::string item;
            while (std::getline(ss, item, ',')) res.push_back(std::stoi(item));
            const std::string dir = output_root(out_flag) + "/verify";
            cnslab::VerifySuiteResult vr = cnslab::verify_all(res, trials, seed, dir);
            print_checks(vr.checks);
            std::cout << (vr.all_pass() ? "result: pass" : "result: fail") << '\n';
            return vr.all_pass() ? 0 : 1;
        }
        if (report->parsed()) {
            cnslab::CsvWriter csv = cnslab::report_from_run(run_dir);
            csv.save(run_dir + "/report.csv");
            std::cout << csv.str();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
