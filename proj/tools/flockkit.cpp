// flockkit command-line driver.
//
//   flockkit <test1|test2|test3|crosscheck|run> [--config PATH] [--out DIR] [--set key=value ...]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "flockkit/errors.hpp"
#include "flockkit/sim/config.hpp"
#include "flockkit/sim/manifest.hpp"
#include "flockkit/sim/scenarios.hpp"

namespace {

using namespace flockkit;
using namespace flockkit::sim;

struct CommonArgs {
    std::string config;
    std::string out;
    std::vector<std::string> sets;
};

RunConfig resolve(TestKind kind, const CommonArgs& a) {
    RunConfig c = defaults_for(kind);
    if (!a.config.empty()) parse_config_file(c, a.config);
    for (const auto& s : a.sets) apply_assignment(c, s, "--set");
    if (!a.out.empty()) c.output_dir = a.out;
    c.test = kind;
    validate(c);
    return c;
}

void print_summary(const KineticRun& r) {
    const auto& last = r.diag.back();
    std::printf("steps=%zu wall=%.2fs\n", r.steps, r.seconds);
    std::printf("mass0=%.17g max_rel_mass_drift=%.3e max_abs_M=%.3e\n", r.mass0, r.max_mass_drift, r.max_momentum);
    std::printf("final t=%g max_f=%.6g max_g=%.6g S=%.4g V=%.4g\n", last.t, last.max_f, last.max_g, last.S, last.V);
}

int dispatch(TestKind kind, const CommonArgs& a, const std::string& command) {
    const RunConfig c = resolve(kind, a);
    const std::filesystem::path dir = c.output_dir;
    prepare_dir(dir);
    write_manifest(dir, to_text(c), command);
    switch (kind) {
    case TestKind::test1: {
        const auto r = run_test1(c);
        write_test1(r, c, dir);
        std::printf("%-6s %-12s %-12s %-12s\n", "Nxi", "upwind", "mcu1", "mcu0");
        for (const auto& row : r.table) {
            std::printf("%-6zu %-12.3e %-12.3e %-12.3e\n", row.nxi, row.upwind, row.mcu1, row.mcu0);
        }
        break;
    }
    case TestKind::test2:
    case TestKind::test3: {
        const auto r = run_kinetic(c, dir);
        print_summary(r);
        break;
    }
    case TestKind::crosscheck: {
        const auto r = run_crosscheck(c, dir);
        std::printf("%-4s %-5s %-12s %-12s\n", "Nx", "Nxi", "L1_direct", "L1_homog");
        for (const auto& lv : r.levels) {
            std::printf("%-4zu %-5zu %-12.4e %-12.4e\n", lv.nx, lv.nxi, lv.l1_direct, lv.l1_homogeneous);
        }
        std::printf("order direct=%.3f homogeneous=%.3f\n", r.order_direct, r.order_homogeneous);
        for (const auto& t : r.timing) std::printf("Nxi=%zu direct/kinetic=%.2f\n", t.nxi, t.ratio());
        std::printf("timing slope=%.3f\n", r.timing_slope);
        break;
    }
    case TestKind::custom: {
        const auto r = run_custom(c, dir);
        print_summary(r.run);
        for (std::size_t k = 0; k < r.oracle_t.size(); ++k) {
            std::printf("oracle t=%g L1=%.6e\n", r.oracle_t[k], r.oracle_l1[k]);
        }
        break;
    }
    }
    std::printf("output: %s\n", dir.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flockkit: rescaled-velocity solver for kinetic flocking models"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        TestKind kind;
        const char* help;
    };
    const Entry entries[] = {
        {"test1", TestKind::test1, "toy drift equation: moment series, profiles, resolution table"},
        {"test2", TestKind::test2, "Motsch-Tadmor run with a local influence function"},
        {"test3", TestKind::test3, "Cucker-Smale run from a box initial datum"},
        {"crosscheck", TestKind::crosscheck, "compare against the direct and homogeneous oracles"},
        {"run", TestKind::custom, "run the rescaled solver from a configuration"},
    };
    std::vector<CommonArgs> args(std::size(entries));
    std::vector<CLI::App*> subs;
    for (std::size_t k = 0; k < std::size(entries); ++k) {
        auto* sub = app.add_subcommand(entries[k].name, entries[k].help);
        sub->add_option("--config", args[k].config, "key=value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", args[k].out, "output directory");
        sub->add_option("--set", args[k].sets, "override one key (repeatable)")->allow_extra_args(false);
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    std::string command = "flockkit";
    for (int k = 1; k < argc; ++k) command += std::string(" ") + argv[k];

    try {
        for (std::size_t k = 0; k < subs.size(); ++k) {
            if (subs[k]->parsed()) return dispatch(entries[k].kind, args[k], command);
        }
    } catch (const ConfigError& e) {
        std::cerr << "flockkit: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "flockkit: numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "flockkit: error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
