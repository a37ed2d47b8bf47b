// Command-line driver for the value-numbering analyzer.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gvn/cli.hpp"

int main(int argc, char** argv) {
    using gvn::cli::RunConfig;

    CLI::App app{"global value numbering: analysis, redundancy detection and oracle checks"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string format = "text";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("file", cfg.input_path, "flow-graph source file")->required();
        cmd->add_option("--format", format, "output format: text or json")
            ->check(CLI::IsMember({"text", "json"}));
        cmd->add_flag("--trace", cfg.trace, "stream per-sweep pools");
        cmd->add_option("--max-sweeps", [&cfg](const CLI::results_t& vals) {
                cfg.max_sweeps = std::stoi(vals.front());
                return true;
            },
            "override the fixpoint sweep cap");
        cmd->add_option("--unroll", cfg.unroll, "back-edge unroll depth for oracle checks");
        cmd->add_flag("--ascii", cfg.ascii, "ASCII pool rendering (TOP instead of ⊤)");
        cmd->add_flag("--fail-on-redundant", cfg.fail_on_redundant,
                      "exit 1 when redundant computations are found");
        return cmd;
    };

    auto* analyze = add_common(app.add_subcommand("analyze", "print EIN/EOUT pools and verdicts"));
    auto* check = add_common(
        app.add_subcommand("check", "validate the analysis against the path-enumeration oracle"));
    auto* eliminate = add_common(
        app.add_subcommand("eliminate", "rewrite redundant computations into copies"));
    auto* dump = add_common(app.add_subcommand("dump-cfg", "emit the graph in dot format"));

    CLI11_PARSE(app, argc, argv);

    if (analyze->parsed()) cfg.command = RunConfig::Command::Analyze;
    if (check->parsed()) cfg.command = RunConfig::Command::Check;
    if (eliminate->parsed()) cfg.command = RunConfig::Command::Eliminate;
    if (dump->parsed()) cfg.command = RunConfig::Command::DumpCfg;
    cfg.format = (format == "json") ? RunConfig::Format::Json : RunConfig::Format::Text;

    return gvn::cli::run_command(cfg, std::cout, std::cerr);
}
