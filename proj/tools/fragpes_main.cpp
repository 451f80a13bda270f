#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fragpes/pipeline.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string system;
    int rank = -1;
    long long seed = -1;
};

void add_common(CLI::App* cmd, CliOptions& opt, bool with_system) {
    cmd->add_option("--config", opt.config_path, "pipeline config file")->required();
    if (with_system)
        cmd->add_option("--system", opt.system, "primitive|target")
            ->check(CLI::IsMember({"primitive", "target"}));
    cmd->add_option("--rank", opt.rank, "override graph.max_rank");
    cmd->add_option("--seed", opt.seed, "override run.seed");
}

fragpes::PipelineConfig effective_config(const CliOptions& opt) {
    fragpes::PipelineConfig cfg = fragpes::load_config(opt.config_path);
    if (opt.rank >= 0) cfg.max_rank = opt.rank;
    if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fragpes: fragment-based potential energy surface pipeline"};
    app.require_subcommand(1);

    CliOptions opt;
    auto* fragment = app.add_subcommand("fragment", "fragment a trajectory into a dataset");
    add_common(fragment, opt, true);
    auto* label = app.add_subcommand("label", "compute descriptors and delta-energy labels");
    add_common(label, opt, true);
    auto* train = app.add_subcommand("train", "build the primitive model bank");
    add_common(train, opt, false);
    auto* transfer = app.add_subcommand("transfer", "slice-wise transfer to the target system");
    add_common(transfer, opt, false);
    auto* predict = app.add_subcommand("predict", "assemble full-system energies");
    add_common(predict, opt, true);
    auto* report = app.add_subcommand("report", "summarize a prediction run");
    add_common(report, opt, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const fragpes::PipelineConfig cfg = effective_config(opt);
        if (fragment->parsed()) {
            fragpes::cmd_fragment(cfg, opt.system.empty() ? "primitive" : opt.system);
        } else if (label->parsed()) {
            fragpes::cmd_label(cfg, opt.system.empty() ? "primitive" : opt.system);
        } else if (train->parsed()) {
            fragpes::cmd_train(cfg);
        } else if (transfer->parsed()) {
            fragpes::cmd_transfer(cfg);
        } else if (predict->parsed()) {
            fragpes::cmd_predict(cfg, opt.system.empty() ? "target" : opt.system);
        } else if (report->parsed()) {
            fragpes::cmd_report(cfg, opt.system.empty() ? "target" : opt.system);
        }
    } catch (const fragpes::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const fragpes::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const fragpes::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
