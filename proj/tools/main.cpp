#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "app/config.hpp"
#include "app/csv.hpp"
#include "app/experiment.hpp"
#include "app/reproduce.hpp"
#include "cogmac/model.hpp"
#include "cogmac/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

void setup_logging() {
    auto logger = spdlog::stderr_logger_mt("cogmac");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::level::level_enum lvl = spdlog::level::warn;
    if (const char* env = std::getenv("COGMAC_LOG")) {
        std::string v = env;
        if (v == "warn") v = "warning";
        lvl = spdlog::level::from_str(v);
        if (lvl == spdlog::level::off && v != "off") {
            lvl = spdlog::level::warn;
            spdlog::warn("COGMAC_LOG='{}' not recognized, using warn", env);
        }
    }
    spdlog::set_level(lvl);
}

void write_table(const cogmac::app::Table& t, const std::string& out) {
    if (out.empty()) {
        cogmac::app::write_csv(std::cout, t);
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw cogmac::app::InputError(out + ": cannot open for writing");
    cogmac::app::write_csv(f, t);
    if (!f) throw cogmac::app::InputError(out + ": write failed");
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    using namespace cogmac;
    using namespace cogmac::app;

    CLI::App cli{"cognitive-radio MAC throughput models, simulator and experiment runner", "cogmac"};
    cli.require_subcommand(1);
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<long> cycles;
    std::string out;
    cli.add_option("--jobs", jobs, "worker threads for sweep points")->check(CLI::Range(1, 1024));
    cli.add_option("--seed", seed, "run seed (overrides the file)");
    cli.add_option("--cycles", cycles, "Monte Carlo cycles (overrides the file)")->check(CLI::PositiveNumber);
    cli.add_option("--out", out, "output path (default: the file's output key, else stdout)");

    std::string spec_path, target;
    bool wall_time = false;
    auto* run = cli.add_subcommand("run", "run an experiment file and write CSV");
    run->add_option("spec", spec_path, "TOML experiment file")->required();
    run->add_flag("--wall-time", wall_time, "append a wall_time_s column (output no longer byte-stable)");
    auto* rep = cli.add_subcommand("reproduce", "recompute a published result and print the verdict");
    rep->add_option("target", target, "ch3_table | ch5_table1 | ch6_optimum | ch6_psen_bar | sim_agreement")->required();
    auto* val = cli.add_subcommand("validate", "check an experiment file without running it");
    val->add_option("spec", spec_path, "TOML experiment file")->required();
    cli.fallthrough();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = cli.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*run) {
            ExperimentSpec spec = load_spec(spec_path);
            RunOptions opt;
            opt.jobs = jobs;
            opt.seed = seed;
            opt.cycles = cycles;
            opt.wall_time = wall_time;
            Table t = run_experiment(spec, opt);
            write_table(t, !out.empty() ? out : spec.output.value_or(""));
            return kExitOk;
        }
        if (*val) {
            ExperimentSpec spec = load_spec(spec_path);
            validate_experiment(spec);
            std::cout << "ok\n";
            return kExitOk;
        }
        if (*rep) {
            ReproduceOptions opt;
            opt.jobs = jobs;
            opt.seed = seed.value_or(kDefaultSeed);
            opt.cycles = cycles.value_or(kDefaultSimCycles);
            Report r = reproduce(target, opt);
            print_report(std::cout, r);
            if (!out.empty()) write_table(report_table(r), out);
            return r.pass() ? kExitOk : kExitCheckFailed;
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
