#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "faith/error.hpp"
#include "faith/oracle.hpp"
#include "faith/pipeline.hpp"

namespace {

void print_stage(const faith::StageResult& result) {
    if (result.skipped) {
        std::cout << result.stage << ": up to date\n";
    } else {
        std::cout << result.stage << ": " << result.items << " items\n";
    }
}

struct Overrides {
    std::string run_id;
    std::string mode;
    std::string dataset;
    std::string cache_dir;
    std::string runs_dir;
    std::string seed;
    long pairs = -1;
    long pool_size = -1;
    long concurrency = -1;
};

void add_overrides(CLI::App* cmd, std::string& config_path, Overrides& overrides) {
    cmd->add_option("--config", config_path, "run config file")->required();
    cmd->add_option("--run-id", overrides.run_id, "override run_id");
    cmd->add_option("--mode", overrides.mode, "override query mode (live, record, replay)");
    cmd->add_option("--dataset", overrides.dataset, "override dataset path");
    cmd->add_option("--cache-dir", overrides.cache_dir, "override cache directory");
    cmd->add_option("--runs-dir", overrides.runs_dir, "override runs directory");
    cmd->add_option("--seed", overrides.seed, "override seed");
    cmd->add_option("--pairs", overrides.pairs, "override test pair count");
    cmd->add_option("--pool-size", overrides.pool_size, "override in-context pool size");
    cmd->add_option("--concurrency", overrides.concurrency, "override request concurrency");
}

faith::RunConfig load_config(const std::string& config_path, const Overrides& overrides) {
    faith::RunConfig config = faith::load_run_config(config_path);
    if (!overrides.run_id.empty()) config.run_id = overrides.run_id;
    if (!overrides.mode.empty()) config.mode = faith::query_mode_from_string(overrides.mode);
    if (!overrides.dataset.empty()) config.dataset = overrides.dataset;
    if (!overrides.cache_dir.empty()) config.cache_dir = overrides.cache_dir;
    if (!overrides.runs_dir.empty()) config.runs_dir = overrides.runs_dir;
    if (!overrides.seed.empty()) config.seed = std::stoull(overrides.seed);
    if (overrides.pairs >= 0) config.pairs = overrides.pairs;
    if (overrides.pool_size >= 0) config.pool_size = overrides.pool_size;
    if (overrides.concurrency >= 0) config.concurrency = overrides.concurrency;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chain-of-thought faithfulness harness"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;
    std::string oracle_url;

    const std::map<std::string, std::string> stages = {
        {"inject", "build biased question pairs and in-context pools"},
        {"prompt", "assemble prompt bundles for every pair and setting"},
        {"query", "collect model transcripts through the response cache"},
        {"judge", "label transcripts for articulation and consistency"},
        {"analyze", "aggregate per-cell gaps and articulation metrics"},
        {"report", "emit gaps.csv, SVG figures, and the run manifest"},
    };
    std::map<std::string, CLI::App*> stage_cmds;
    for (const auto& [name, help] : stages) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_overrides(cmd, config_path, overrides);
        stage_cmds[name] = cmd;
    }
    CLI::App* run_cmd = app.add_subcommand("run", "execute every stage in order");
    add_overrides(run_cmd, config_path, overrides);

    CLI::App* oracle_cmd =
        app.add_subcommand("oracle-validate", "parse and echo an oracle:// endpoint URL");
    oracle_cmd->add_option("--url", oracle_url, "oracle URL to validate")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (oracle_cmd->parsed()) {
            const faith::OracleConfig config = faith::oracle_config_from_url(oracle_url);
            const nlohmann::json j{{"base_accuracy", config.base_accuracy},
                                   {"flip_prob", config.flip_prob},
                                   {"articulate_prob", config.articulate_prob},
                                   {"inconsistent_prob", config.inconsistent_prob},
                                   {"seed", config.seed}};
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        faith::Pipeline pipeline(load_config(config_path, overrides));
        if (run_cmd->parsed()) {
            for (const faith::StageResult& result : pipeline.run_all()) {
                print_stage(result);
            }
        } else {
            const std::map<std::string, std::function<faith::StageResult()>> dispatch = {
                {"inject", [&] { return pipeline.inject(); }},
                {"prompt", [&] { return pipeline.prompt(); }},
                {"query", [&] { return pipeline.query(); }},
                {"judge", [&] { return pipeline.judge(); }},
                {"analyze", [&] { return pipeline.analyze(); }},
                {"report", [&] { return pipeline.report(); }},
            };
            for (const auto& [name, cmd] : stage_cmds) {
                if (cmd->parsed()) print_stage(dispatch.at(name)());
            }
        }
        std::cout << "run directory: " << pipeline.run_dir().string() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
