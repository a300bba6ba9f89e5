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

#ifndef AGINGMIMO_RUNNER_EXPERIMENTS_HPP
#define AGINGMIMO_RUNNER_EXPERIMENTS_HPP

#include "config.hpp"
#include "csv.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#ifndef AGINGMIMO_VERSION
#define AGINGMIMO_VERSION "0.0.0"
#endif

namespace agingmimo::runner
{
    struct RunResult
    {
        ExperimentKind experiment = ExperimentKind::FrameSweep;
        std::vector<SweepRecord> rows;
        std::size_t num_users = 0;

        std::size_t failed() const
        {
            std::size_t n = 0;
            for (const auto &r : rows)
                n += r.failed() ? 1 : 0;
            return n;
        }
        bool all_failed() const { return !rows.empty() && failed() == rows.size(); }
    };

    namespace detail
    {
        using Task = std::function<std::vector<SweepRecord>()>;

        inline SweepRecord base_record(const ExperimentConfig &c, const ScenarioPoint &p, bool with_window = true,
                                       bool with_factor = false)
        {
            SweepRecord r;
            r.experiment = to_string(c.experiment);
            r.scenario_hash = scenario_hash(c, p);
            r.n_r = p.n_r;
            r.doppler_hz = p.doppler_hz;
            r.pilot_power_mw = p.pilot_power_mw;
            if (with_window)
                r.window = p.window;
            if (with_factor)
                r.mismatch_factor = p.mismatch_factor;
            return r;
        }

        // Runs `body`; on failure returns a single error row built from `proto`.
        inline std::vector<SweepRecord> guarded(const SweepRecord &proto, const std::function<std::vector<SweepRecord>()> &body)
        {
            try
            {
                return body();
            }
            catch (const std::exception &e)
            {
                SweepRecord r = proto;
                r.error = e.what();
                return {r};
            }
        }

        inline double total_slot_se(const std::vector<double> &gamma, LogBase base)
        {
            double s = 0.0;
            for (double g : gamma)
                s += spectral_efficiency_slot(g, base);
            return s;
        }

        inline std::vector<SweepRecord> per_slot_rows(const ExperimentConfig &c, const ScenarioPoint &p, long delta)
        {
            SweepRecord proto = base_record(c, p);
            proto.delta = delta;
            return guarded(proto, [&]
                           {
                               const Scenario sc = build_scenario(c, p);
                               const FrameSE f = frame_spectral_efficiency(sc, delta, c.log_base_enum());
                               std::vector<SweepRecord> rows;
                               for (long i = 1; i <= delta; ++i)
                               {
                                   SweepRecord r = proto;
                                   r.slot = i;
                                   r.gamma_bar = f.gamma[static_cast<std::size_t>(i - 1)];
                                   r.se = total_slot_se(r.gamma_bar, c.log_base_enum());
                                   rows.push_back(std::move(r));
                               }
                               return rows; });
        }

        inline std::vector<Task> build_tasks(const ExperimentConfig &c)
        {
            std::vector<Task> tasks;
            const LogBase base = c.log_base_enum();
            for (long n_r : c.antenna_counts())
                for (double fd : c.doppler_hz)
                {
                    ScenarioPoint p{n_r, fd, c.pilot_power_mw, c.window, 1.0};
                    switch (c.experiment)
                    {
                    case ExperimentKind::FrameSweep:
                    case ExperimentKind::BoundCurve:
                        for (long d = c.delta_min; d <= c.delta_max; ++d)
                            tasks.push_back([&c, p, d, base]
                                            {
                                                SweepRecord proto = base_record(c, p);
                                                proto.delta = d;
                                                return guarded(proto, [&]
                                                               {
                                                                   const Scenario sc = build_scenario(c, p);
                                                                   SweepRecord r = proto;
                                                                   r.se = frame_spectral_efficiency(sc, d, base).total;
                                                                   if (c.experiment == ExperimentKind::BoundCurve)
                                                                   {
                                                                       try
                                                                       {
                                                                           r.se_upper = se_upper_total(sc, d, c.bound_options());
                                                                       }
                                                                       catch (const BoundUnavailableError &e)
                                                                       {
                                                                           r.error = e.what();
                                                                       }
                                                                   }
                                                                   return std::vector<SweepRecord>{r}; }); });
                        break;
                    case ExperimentKind::PerSlot:
                        tasks.push_back([&c, p] { return per_slot_rows(c, p, c.slot_delta); });
                        break;
                    case ExperimentKind::WindowCompare:
                        for (const auto &w : c.windows)
                        {
                            ScenarioPoint pw = p;
                            pw.window = w;
                            tasks.push_back([&c, pw] { return per_slot_rows(c, pw, c.slot_delta); });
                        }
                        break;
                    case ExperimentKind::PowerSurface:
                        for (double pp : c.pilot_power_grid_mw)
                            for (long d = c.delta_min; d <= c.delta_max; ++d)
                            {
                                ScenarioPoint pp_point = p;
                                pp_point.pilot_power_mw = pp;
                                tasks.push_back([&c, pp_point, d, base]
                                                {
                                                    SweepRecord proto = base_record(c, pp_point);
                                                    proto.delta = d;
                                                    return guarded(proto, [&]
                                                                   {
                                                                       SweepRecord r = proto;
                                                                       r.se = frame_spectral_efficiency(build_scenario(c, pp_point), d, base).total;
                                                                       return std::vector<SweepRecord>{r}; }); });
                            }
                        break;
                    case ExperimentKind::DopplerOptimum:
                        for (double pp : c.pilot_power_grid_mw)
                        {
                            ScenarioPoint pp_point = p;
                            pp_point.pilot_power_mw = pp;
                            tasks.push_back([&c, pp_point]
                                            {
                                                SweepRecord proto = base_record(c, pp_point);
                                                return guarded(proto, [&]
                                                               {
                                                                   const SearchTrace t = optimal_frame_size(build_scenario(c, pp_point), c.optimizer_options());
                                                                   SweepRecord r = proto;
                                                                   r.delta = t.delta_opt;
                                                                   r.se = t.se_opt;
                                                                   r.optimum = 1;
                                                                   r.delta_max = t.delta_max_history.front();
                                                                   if (t.bound_unavailable)
                                                                       r.error = "bound unavailable, exhaustive scan: " + t.bound_message;
                                                                   return std::vector<SweepRecord>{r}; }); });
                        }
                        break;
                    case ExperimentKind::Mismatch:
                        for (double factor : c.mismatch_factors)
                        {
                            ScenarioPoint pm = p;
                            pm.mismatch_factor = factor;
                            tasks.push_back([&c, p, pm, base]
                                            {
                                                SweepRecord proto = base_record(c, pm, true, true);
                                                return guarded(proto, [&]
                                                               {
                                                                   const SearchTrace t = optimal_frame_size(build_scenario(c, p), c.optimizer_options());
                                                                   const Scenario sc = build_scenario(c, pm);
                                                                   std::vector<long> deltas;
                                                                   for (long d = c.delta_min; d <= c.delta_max; ++d)
                                                                       deltas.push_back(d);
                                                                   if (t.delta_opt < c.delta_min || t.delta_opt > c.delta_max)
                                                                       deltas.push_back(t.delta_opt);
                                                                   std::sort(deltas.begin(), deltas.end());
                                                                   std::vector<SweepRecord> rows;
                                                                   for (long d : deltas)
                                                                   {
                                                                       SweepRecord r = proto;
                                                                       r.delta = d;
                                                                       r.se = frame_spectral_efficiency(sc, d, base).total;
                                                                       r.optimum = d == t.delta_opt ? 1 : 0;
                                                                       rows.push_back(std::move(r));
                                                                   }
                                                                   return rows; }); });
                        }
                        break;
                    case ExperimentKind::McValidate:
                        tasks.push_back([&c, p, base]
                                        {
                                            SweepRecord proto = base_record(c, p);
                                            proto.delta = c.mc_delta;
                                            proto.slot = c.mc_slot == 0 ? (c.mc_delta + 1) / 2 : c.mc_slot;
                                            return guarded(proto, [&]
                                                           {
                                                               const Scenario sc = build_scenario(c, p);
                                                               SweepRecord r = proto;
                                                               r.gamma_bar = slot_sinr(sc, r.delta, r.slot);
                                                               r.se = total_slot_se(r.gamma_bar, base);
                                                               const std::uint64_t seed = c.seed ^ fnv1a(r.scenario_hash);
                                                               const MonteCarloResult mc = monte_carlo_sinr(sc, r.delta, r.slot,
                                                                                                            static_cast<std::size_t>(c.mc_trials), seed);
                                                               r.mc_mean = mc.mean;
                                                               r.mc_stderr = mc.stderr_;
                                                               return std::vector<SweepRecord>{r}; }); });
                        break;
                    }
                }
            return tasks;
        }

        // Flags the best SE per (n_r, doppler) group of a power surface.
        inline void mark_surface_optimum(std::vector<SweepRecord> &rows)
        {
            std::size_t start = 0;
            while (start < rows.size())
            {
                std::size_t end = start;
                while (end < rows.size() && rows[end].n_r == rows[start].n_r && rows[end].doppler_hz == rows[start].doppler_hz)
                    ++end;
                std::size_t best = end;
                for (std::size_t k = start; k < end; ++k)
                    if (!rows[k].failed() && (best == end || rows[k].se > rows[best].se))
                        best = k;
                if (best != end)
                    rows[best].optimum = 1;
                start = end;
            }
        }
    }

    inline RunResult run_experiment(const ExperimentConfig &c, unsigned threads = 1)
    {
        c.validate();
        RunResult res;
        res.experiment = c.experiment;
        res.num_users = static_cast<std::size_t>(c.num_users);
        const auto tasks = detail::build_tasks(c);
        std::vector<std::vector<SweepRecord>> parts(tasks.size());
        parallel_for(tasks.size(), threads, [&](std::size_t k) { parts[k] = tasks[k](); });
        for (auto &p : parts)
            for (auto &r : p)
                res.rows.push_back(std::move(r));
        if (c.experiment == ExperimentKind::PowerSurface)
            detail::mark_surface_optimum(res.rows);
        return res;
    }

    enum class OutputFormat
    {
        Csv,
        Json
    };

    struct OutputPaths
    {
        std::filesystem::path data;
        std::filesystem::path manifest;
    };

    // Writes <experiment>.csv (or .json) and <experiment>.manifest.json into `dir`.
    inline OutputPaths write_outputs(const ExperimentConfig &c, const RunResult &res, const std::filesystem::path &dir,
                                     OutputFormat fmt, double wall_time_s, unsigned threads)
    {
        std::filesystem::create_directories(dir);
        const std::string stem = to_string(c.experiment);
        OutputPaths paths;
        paths.data = dir / (stem + (fmt == OutputFormat::Csv ? ".csv" : ".json"));
        paths.manifest = dir / (stem + ".manifest.json");
        {
            std::ofstream out(paths.data, std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot write " + paths.data.string());
            if (fmt == OutputFormat::Csv)
                write_csv(out, res.rows, res.num_users);
            else
                out << records_to_json(res.rows, res.num_users).dump(2) << '\n';
        }
        json manifest{{"experiment", stem},
                      {"config_hash", config_hash(c)},
                      {"code_version", AGINGMIMO_VERSION},
                      {"wall_time_s", wall_time_s},
                      {"rows", res.rows.size()},
                      {"failed_rows", res.failed()},
                      {"output", paths.data.filename().string()},
                      {"format", fmt == OutputFormat::Csv ? "csv" : "json"},
                      {"columns", csv_columns(res.num_users)},
                      {"seed", c.seed},
                      {"threads", threads},
                      {"config", config_to_json(c)}};
        std::ofstream m(paths.manifest, std::ios::binary);
        if (!m)
            throw std::runtime_error("cannot write " + paths.manifest.string());
        m << manifest.dump(2) << '\n';
        return paths;
    }
}

#endif
