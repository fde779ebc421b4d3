#include <CLI11.hpp>

#include <array>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "starpo/commands.hpp"

namespace {

std::pair<std::string, std::string> split_override(const std::string& kv) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        starpo::raise(starpo::Errc::invalid_config, "--set expects key=value, got '" + kv + "'");
    return {kv.substr(0, eq), kv.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"starpo — desk-scale laboratory for stability-augmented GRPO"};
    app.require_subcommand(1);
    app.fallthrough();
    app.footer("config keys (key / default / description):\n" + starpo::config_keys_help());

    std::optional<std::string> config_file;
    std::vector<std::string> set_overrides;
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::string> out_flag;
    app.add_option("--config", config_file, "config file with key = value lines");
    app.add_option("--set", set_overrides, "override one config key (key=value), repeatable")
        ->type_name("KEY=VALUE");
    app.add_option("--seed", seed_flag, "master random seed");
    app.add_option("--out", out_flag, "output directory");

    auto build = [&](std::vector<std::pair<std::string, std::string>> extra = {}) {
        std::vector<std::pair<std::string, std::string>> overrides;
        for (const std::string& kv : set_overrides) overrides.push_back(split_override(kv));
        if (seed_flag) overrides.emplace_back("seed", std::to_string(*seed_flag));
        if (out_flag) overrides.emplace_back("out_dir", *out_flag);
        for (auto& kv : extra) overrides.push_back(std::move(kv));
        return starpo::build_config(config_file, overrides);
    };

    // analyze
    auto* analyze = app.add_subcommand("analyze", "score a trajectory file with r_acf/r_pe");
    std::string analyze_input, analyze_output;
    std::string analyze_calibration;
    bool analyze_flags = false;
    analyze->add_option("input", analyze_input, "trajectory file (JSON lines)")->required();
    analyze->add_option("-o,--output", analyze_output, "annotated output file")->required();
    analyze->add_option("--calibration", analyze_calibration,
                        "calibration file enabling abnormality flags");
    analyze->add_flag("--flags", analyze_flags, "require abnormality flags in the output");
    analyze->callback([&] {
        const starpo::RunConfig config = build();
        starpo::AnalyzeArgs args;
        args.input = analyze_input;
        args.output = analyze_output;
        if (!analyze_calibration.empty()) args.calibration = analyze_calibration;
        args.want_flags = analyze_flags;
        args.stability = config.stability;
        starpo::cmd_analyze(args, std::cout);
    });

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "estimate abnormality thresholds");
    std::string calibrate_input, calibrate_output;
    std::optional<double> calibrate_tail;
    calibrate->add_option("input", calibrate_input, "trajectory file (JSON lines)")->required();
    calibrate->add_option("-o,--output", calibrate_output, "calibration output file")->required();
    calibrate->add_option("--tail-mass", calibrate_tail, "tail mass per side (default from config)");
    calibrate->callback([&] {
        const starpo::RunConfig config = build();
        starpo::CalibrateArgs args;
        args.input = calibrate_input;
        args.output = calibrate_output;
        args.tail_mass = calibrate_tail.value_or(config.tail_mass);
        args.stability = config.stability;
        starpo::cmd_calibrate(args, std::cout);
    });

    // train
    auto* train = app.add_subcommand("train", "run GRPO/StaRPO training on Game of 24");
    std::optional<std::string> train_mode;
    std::optional<int> train_iterations;
    train->add_option("--mode", train_mode, "grpo | starpo_full | starpo_acf_only | starpo_pe_only");
    train->add_option("--iterations", train_iterations, "training iterations");
    train->callback([&] {
        std::vector<std::pair<std::string, std::string>> extra;
        if (train_mode) extra.emplace_back("mode", *train_mode);
        if (train_iterations) extra.emplace_back("iterations", std::to_string(*train_iterations));
        starpo::cmd_train(build(std::move(extra)), std::cout);
    });

    // validate
    auto* validate = app.add_subcommand("validate", "synthetic-corpus association study");
    bool validate_dump = false;
    validate->add_flag("--dump-corpus", validate_dump, "also write the scored corpus");
    validate->callback([&] {
        std::vector<std::pair<std::string, std::string>> extra;
        if (validate_dump) extra.emplace_back("dump_corpus", "true");
        starpo::cmd_validate(build(std::move(extra)), std::cout);
    });

    // solve24
    auto* solve = app.add_subcommand("solve24", "brute-force a Game-of-24 puzzle");
    std::vector<int> solve_numbers;
    solve->add_option("numbers", solve_numbers, "four integers in [1,13]")
        ->expected(4)
        ->required();
    solve->callback([&] {
        std::array<int, 4> puzzle{};
        std::copy_n(solve_numbers.begin(), 4, puzzle.begin());
        starpo::cmd_solve24(puzzle, std::cout);
    });

    // report
    auto* report = app.add_subcommand("report", "compare training logs");
    std::vector<std::string> report_logs;
    report->add_option("logs", report_logs, "training CSV files")->required()->expected(-1);
    report->callback([&] {
        const starpo::RunConfig config = build();
        starpo::cmd_report(report_logs, config.out_dir, std::cout);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const starpo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
