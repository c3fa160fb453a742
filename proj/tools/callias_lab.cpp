#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "callias/runner.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"callias_lab: numerical experiments for Callias-type index identities"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    int workers = 1;
    std::vector<std::string> sets;

    auto* run = app.add_subcommand("run", "Execute the tasks listed in a config");
    run->add_option("config", config, "Experiment config (JSON)")->required();
    run->add_option("--out", out, "Output directory (overrides output_dir)");
    run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--set", sets, "Override a config leaf, key=value with a dotted key")->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    std::string param, values;
    auto* sweep = app.add_subcommand("sweep", "Repeat a run over values of one numeric config leaf");
    sweep->add_option("config", config, "Experiment config (JSON)")->required();
    sweep->add_option("--param", param, "Dotted key of the swept leaf (default: the config's sweep section)");
    sweep->add_option("--values", values, "Comma separated values");
    sweep->add_option("--out", out, "Output directory");
    sweep->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("--set", sets, "Override a config leaf, key=value with a dotted key")->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    std::optional<std::string> out_opt;
    if (!out.empty())
        out_opt = out;
    if (run->parsed())
        return callias::run_command(config, out_opt, workers, sets, std::cerr);
    return callias::sweep_command(config, param, values, out_opt, workers, sets, std::cerr);
}
