// SPDX-License-Identifier: Apache-2.0
//
// agingmimo: pilot spacing analysis for MU-MIMO uplink over aging channels
// Copyright (C) 2026 The agingmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <agingmimo/runner/experiments.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>

namespace
{
    struct CommonArgs
    {
        std::string config;
        std::string out = "out";
        std::optional<std::uint64_t> seed;
        unsigned threads = 0;
        std::string format = "csv";
    };

    void add_common(CLI::App *cmd, CommonArgs &a)
    {
        cmd->add_option("--config", a.config, "JSON config file (omit for defaults)")->check(CLI::ExistingFile);
        cmd->add_option("--out", a.out, "Output directory")->capture_default_str();
        cmd->add_option("--seed", a.seed, "Random seed, overrides the config value");
        cmd->add_option("--threads", a.threads, "Worker threads (0: all cores; AGINGMIMO_THREADS overrides)");
        cmd->add_option("--format", a.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    }
}

int main(int argc, char **argv)
{
    using namespace agingmimo::runner;

    CLI::App app{"Spectral efficiency and pilot spacing experiments for MU-MIMO uplink over aging channels"};
    app.set_version_flag("--version", AGINGMIMO_VERSION);
    app.require_subcommand(1);

    CommonArgs args;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"sweep-frame", "SE versus frame size"},
        {"per-slot", "Per-slot SINR and SE inside one frame"},
        {"power-surface", "SE over pilot power and frame size"},
        {"doppler-optimum", "Optimal frame size per Doppler frequency and pilot power"},
        {"bound-curve", "SE and its upper bound versus frame size"},
        {"window-compare", "Per-slot SE for several pilot windows"},
        {"mismatch", "SE with an estimator designed for the wrong Doppler"},
        {"mc-validate", "Monte-Carlo SINR against the deterministic equivalent"}};
    for (const auto &[name, help] : commands)
        add_common(app.add_subcommand(name, help), args);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    ExperimentConfig cfg;
    try
    {
        cfg = args.config.empty() ? config_from_string("{}") : load_config(args.config);
        cfg.experiment = parse_experiment(sub == "sweep-frame" ? "frame-sweep" : sub);
        if (args.seed)
            cfg.seed = *args.seed;
        cfg.validate();
    }
    catch (const agingmimo::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    const unsigned threads = agingmimo::resolve_thread_count(args.threads);
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    try
    {
        res = run_experiment(cfg, threads);
    }
    catch (const agingmimo::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    try
    {
        const auto paths = write_outputs(cfg, res, args.out, args.format == "json" ? OutputFormat::Json : OutputFormat::Csv,
                                         wall, threads);
        std::cout << paths.data.string() << ": " << res.rows.size() << " rows, " << res.failed() << " failed, "
                  << wall << " s\n";
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return res.all_failed() ? 1 : 0;
}
