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

#ifndef AGINGMIMO_RUNNER_CONFIG_HPP
#define AGINGMIMO_RUNNER_CONFIG_HPP

#include "../optimizer.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace agingmimo::runner
{
    using json = nlohmann::json;

    enum class ExperimentKind
    {
        FrameSweep,
        PerSlot,
        PowerSurface,
        DopplerOptimum,
        BoundCurve,
        WindowCompare,
        Mismatch,
        McValidate
    };

    inline const std::vector<std::pair<std::string, ExperimentKind>> &experiment_names()
    {
        static const std::vector<std::pair<std::string, ExperimentKind>> names = {
            {"frame-sweep", ExperimentKind::FrameSweep},
            {"per-slot", ExperimentKind::PerSlot},
            {"power-surface", ExperimentKind::PowerSurface},
            {"doppler-optimum", ExperimentKind::DopplerOptimum},
            {"bound-curve", ExperimentKind::BoundCurve},
            {"window-compare", ExperimentKind::WindowCompare},
            {"mismatch", ExperimentKind::Mismatch},
            {"mc-validate", ExperimentKind::McValidate}};
        return names;
    }

    inline std::string to_string(ExperimentKind k)
    {
        for (const auto &[name, kind] : experiment_names())
            if (kind == k)
                return name;
        return "unknown";
    }

    inline ExperimentKind parse_experiment(const std::string &s)
    {
        for (const auto &[name, kind] : experiment_names())
            if (name == s)
                return kind;
        throw ConfigError("experiment", "unknown experiment kind '" + s + "'");
    }

    struct ExperimentConfig
    {
        ExperimentKind experiment = ExperimentKind::FrameSweep;

        long n_r = 10;
        std::vector<long> n_r_values; // empty: {n_r}
        long num_users = 2;
        std::vector<double> path_loss_db = {90.0}; // one entry, or one per user
        double data_power_mw = 125.0;
        double pilot_power_mw = 125.0;
        long frequency_channels = 12;
        double sigma2_pilot = 1.25e-11;
        double sigma2_data = 1.25e-11;
        std::vector<double> doppler_hz = {50.0, 500.0, 1500.0};
        double slot_duration_s = 32e-6;
        std::string window = "1b,1a";
        std::vector<std::string> windows = {"2b,1a", "1b,1a", "2b"};
        long delta_min = 1;
        long delta_max = 50;
        long slot_delta = 50;
        std::vector<double> pilot_power_grid_mw = {50.0, 75.0, 100.0, 125.0};
        std::vector<double> mismatch_factors = {0.2, 1.0, 5.0};
        long mc_trials = 2000;
        long mc_delta = 8;
        long mc_slot = 0; // 0: mid-frame
        std::uint64_t seed = 1;
        double channel_gain = 1.0;
        double antenna_correlation = 0.0;
        double eta_fraction = 0.99;
        long delta_ceiling = 100000;
        long fallback_ceiling = 1000;
        std::string bound_mode = "clamped";
        std::string log_base = "2";

        std::vector<long> antenna_counts() const { return n_r_values.empty() ? std::vector<long>{n_r} : n_r_values; }

        // Linear amplitude of user k, 10^(-dB / 20).
        double alpha(std::size_t k) const
        {
            const double db = path_loss_db.size() == 1 ? path_loss_db.front() : path_loss_db.at(k);
            return std::pow(10.0, -db / 20.0);
        }

        LogBase log_base_enum() const { return log_base == "e" ? LogBase::Natural : LogBase::Two; }

        BoundOptions bound_options() const
        {
            BoundOptions b;
            b.eta_fraction = eta_fraction;
            b.mode = bound_mode == "literal" ? BoundMode::Literal : BoundMode::Clamped;
            b.delta_ceiling = delta_ceiling;
            b.log_base = log_base_enum();
            return b;
        }

        OptimizerOptions optimizer_options() const
        {
            OptimizerOptions o;
            o.bound = bound_options();
            o.fallback_ceiling = fallback_ceiling;
            return o;
        }

        void validate() const
        {
            auto positive = [](const char *field, double v)
            {
                if (!(v > 0.0) || !std::isfinite(v))
                    throw ConfigError(field, "must be a positive finite number");
            };
            auto positive_int = [](const char *field, long v)
            {
                if (v < 1)
                    throw ConfigError(field, "must be >= 1");
            };
            positive_int("n_r", n_r);
            for (std::size_t j = 0; j < n_r_values.size(); ++j)
                positive_int(("n_r_values[" + std::to_string(j) + "]").c_str(), n_r_values[j]);
            positive_int("num_users", num_users);
            positive_int("frequency_channels", frequency_channels);
            if (num_users > frequency_channels)
                throw ConfigError("num_users", "must not exceed frequency_channels");
            if (path_loss_db.empty() || (path_loss_db.size() != 1 && static_cast<long>(path_loss_db.size()) != num_users))
                throw ConfigError("path_loss_db", "needs one entry or one per user");
            for (std::size_t j = 0; j < path_loss_db.size(); ++j)
                if (!std::isfinite(path_loss_db[j]))
                    throw ConfigError("path_loss_db[" + std::to_string(j) + "]", "must be finite");
            positive("data_power_mw", data_power_mw);
            positive("pilot_power_mw", pilot_power_mw);
            positive("sigma2_pilot", sigma2_pilot);
            positive("sigma2_data", sigma2_data);
            positive("slot_duration_s", slot_duration_s);
            positive("channel_gain", channel_gain);
            if (doppler_hz.empty())
                throw ConfigError("doppler_hz", "must not be empty");
            for (std::size_t j = 0; j < doppler_hz.size(); ++j)
                if (!(doppler_hz[j] >= 0.0) || !std::isfinite(doppler_hz[j]))
                    throw ConfigError("doppler_hz[" + std::to_string(j) + "]", "must be >= 0");
            try
            {
                PilotWindow::parse(window);
            }
            catch (const std::invalid_argument &e)
            {
                throw ConfigError("window", e.what());
            }
            for (std::size_t j = 0; j < windows.size(); ++j)
            {
                try
                {
                    PilotWindow::parse(windows[j]);
                }
                catch (const std::invalid_argument &e)
                {
                    throw ConfigError("windows[" + std::to_string(j) + "]", e.what());
                }
            }
            positive_int("delta_min", delta_min);
            positive_int("delta_max", delta_max);
            if (delta_max < delta_min)
                throw ConfigError("delta_max", "must be >= delta_min");
            positive_int("slot_delta", slot_delta);
            if (pilot_power_grid_mw.empty())
                throw ConfigError("pilot_power_grid_mw", "must not be empty");
            for (std::size_t j = 0; j < pilot_power_grid_mw.size(); ++j)
                positive(("pilot_power_grid_mw[" + std::to_string(j) + "]").c_str(), pilot_power_grid_mw[j]);
            for (std::size_t j = 0; j < mismatch_factors.size(); ++j)
                positive(("mismatch_factors[" + std::to_string(j) + "]").c_str(), mismatch_factors[j]);
            positive_int("mc_trials", mc_trials);
            positive_int("mc_delta", mc_delta);
            if (mc_slot < 0 || mc_slot > mc_delta)
                throw ConfigError("mc_slot", "must lie in 0..mc_delta (0 selects mid-frame)");
            if (!(std::abs(antenna_correlation) < 1.0))
                throw ConfigError("antenna_correlation", "must satisfy |r| < 1");
            if (!(eta_fraction > 0.0 && eta_fraction < 1.0))
                throw ConfigError("eta_fraction", "must lie in (0, 1)");
            positive_int("delta_ceiling", delta_ceiling);
            positive_int("fallback_ceiling", fallback_ceiling);
            if (bound_mode != "clamped" && bound_mode != "literal")
                throw ConfigError("bound_mode", "must be 'clamped' or 'literal'");
            if (log_base != "2" && log_base != "e")
                throw ConfigError("log_base", "must be '2' or 'e'");
        }
    };

    namespace detail
    {
        template <typename T>
        T read_as(const json &j, const std::string &field)
        {
            try
            {
                if constexpr (std::is_same_v<T, double>)
                {
                    if (!j.is_number())
                        throw ConfigError(field, "expected a number");
                }
                else if constexpr (std::is_integral_v<T>)
                {
                    if (!j.is_number_integer())
                        throw ConfigError(field, "expected an integer");
                    if constexpr (std::is_unsigned_v<T>)
                        if (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0)
                            throw ConfigError(field, "expected a non-negative integer");
                }
                else if constexpr (std::is_same_v<T, std::string>)
                {
                    if (!j.is_string())
                        throw ConfigError(field, "expected a string");
                }
                return j.get<T>();
            }
            catch (const json::exception &e)
            {
                throw ConfigError(field, e.what());
            }
        }

        template <typename T>
        std::vector<T> read_list(const json &j, const std::string &field, bool allow_scalar = false)
        {
            std::vector<T> out;
            if (allow_scalar && !j.is_array())
            {
                out.push_back(read_as<T>(j, field));
                return out;
            }
            if (!j.is_array())
                throw ConfigError(field, "expected an array");
            for (std::size_t k = 0; k < j.size(); ++k)
                out.push_back(read_as<T>(j[k], field + "[" + std::to_string(k) + "]"));
            return out;
        }
    }

    inline ExperimentConfig config_from_json(const json &doc)
    {
        ExperimentConfig c;
        if (doc.is_null())
            return c;
        if (!doc.is_object())
            throw ConfigError("", "configuration must be a JSON object");

        using detail::read_as;
        using detail::read_list;
        static const std::set<std::string> known = {
            "experiment", "n_r", "n_r_values", "num_users", "path_loss_db", "data_power_mw", "pilot_power_mw",
            "frequency_channels", "sigma2_pilot", "sigma2_data", "doppler_hz", "slot_duration_s", "window", "windows",
            "delta_min", "delta_max", "slot_delta", "pilot_power_grid_mw", "mismatch_factors", "mc_trials", "mc_delta",
            "mc_slot", "seed", "channel_gain", "antenna_correlation", "eta_fraction", "delta_ceiling",
            "fallback_ceiling", "bound_mode", "log_base"};
        for (auto it = doc.begin(); it != doc.end(); ++it)
            if (!known.count(it.key()))
                throw ConfigError(it.key(), "unknown key");

        auto get = [&](const char *key, auto &dst)
        {
            if (!doc.contains(key))
                return;
            using T = std::decay_t<decltype(dst)>;
            dst = read_as<T>(doc.at(key), key);
        };
        if (doc.contains("experiment"))
            c.experiment = parse_experiment(read_as<std::string>(doc.at("experiment"), "experiment"));
        get("n_r", c.n_r);
        if (doc.contains("n_r_values"))
            c.n_r_values = read_list<long>(doc.at("n_r_values"), "n_r_values");
        get("num_users", c.num_users);
        if (doc.contains("path_loss_db"))
            c.path_loss_db = read_list<double>(doc.at("path_loss_db"), "path_loss_db", true);
        get("data_power_mw", c.data_power_mw);
        get("pilot_power_mw", c.pilot_power_mw);
        get("frequency_channels", c.frequency_channels);
        get("sigma2_pilot", c.sigma2_pilot);
        get("sigma2_data", c.sigma2_data);
        if (doc.contains("doppler_hz"))
            c.doppler_hz = read_list<double>(doc.at("doppler_hz"), "doppler_hz", true);
        get("slot_duration_s", c.slot_duration_s);
        get("window", c.window);
        if (doc.contains("windows"))
            c.windows = read_list<std::string>(doc.at("windows"), "windows");
        get("delta_min", c.delta_min);
        get("delta_max", c.delta_max);
        get("slot_delta", c.slot_delta);
        if (doc.contains("pilot_power_grid_mw"))
            c.pilot_power_grid_mw = read_list<double>(doc.at("pilot_power_grid_mw"), "pilot_power_grid_mw");
        if (doc.contains("mismatch_factors"))
            c.mismatch_factors = read_list<double>(doc.at("mismatch_factors"), "mismatch_factors");
        get("mc_trials", c.mc_trials);
        get("mc_delta", c.mc_delta);
        get("mc_slot", c.mc_slot);
        get("seed", c.seed);
        get("channel_gain", c.channel_gain);
        get("antenna_correlation", c.antenna_correlation);
        get("eta_fraction", c.eta_fraction);
        get("delta_ceiling", c.delta_ceiling);
        get("fallback_ceiling", c.fallback_ceiling);
        get("bound_mode", c.bound_mode);
        get("log_base", c.log_base);
        c.validate();
        return c;
    }

    inline ExperimentConfig config_from_string(const std::string &text)
    {
        if (text.find_first_not_of(" \t\r\n") == std::string::npos)
            return config_from_json(json::object());
        json doc;
        try
        {
            doc = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw ConfigError("", std::string("parse error: ") + e.what());
        }
        return config_from_json(doc);
    }

    inline ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ConfigError("", "cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return config_from_string(ss.str());
    }

    inline json config_to_json(const ExperimentConfig &c)
    {
        return json{{"experiment", to_string(c.experiment)},
                    {"n_r", c.n_r},
                    {"n_r_values", c.n_r_values},
                    {"num_users", c.num_users},
                    {"path_loss_db", c.path_loss_db},
                    {"data_power_mw", c.data_power_mw},
                    {"pilot_power_mw", c.pilot_power_mw},
                    {"frequency_channels", c.frequency_channels},
                    {"sigma2_pilot", c.sigma2_pilot},
                    {"sigma2_data", c.sigma2_data},
                    {"doppler_hz", c.doppler_hz},
                    {"slot_duration_s", c.slot_duration_s},
                    {"window", c.window},
                    {"windows", c.windows},
                    {"delta_min", c.delta_min},
                    {"delta_max", c.delta_max},
                    {"slot_delta", c.slot_delta},
                    {"pilot_power_grid_mw", c.pilot_power_grid_mw},
                    {"mismatch_factors", c.mismatch_factors},
                    {"mc_trials", c.mc_trials},
                    {"mc_delta", c.mc_delta},
                    {"mc_slot", c.mc_slot},
                    {"seed", c.seed},
                    {"channel_gain", c.channel_gain},
                    {"antenna_correlation", c.antenna_correlation},
                    {"eta_fraction", c.eta_fraction},
                    {"delta_ceiling", c.delta_ceiling},
                    {"fallback_ceiling", c.fallback_ceiling},
                    {"bound_mode", c.bound_mode},
                    {"log_base", c.log_base}};
    }

    // Point in the scenario space; everything the library needs except delta and slot.
    struct ScenarioPoint
    {
        long n_r = 10;
        double doppler_hz = 500.0;
        double pilot_power_mw = 125.0;
        std::string window = "1b,1a";
        double mismatch_factor = 1.0; // assumed Doppler = factor * true Doppler
    };

    inline Scenario build_scenario(const ExperimentConfig &c, const ScenarioPoint &p)
    {
        Scenario sc;
        sc.frame = {1, c.frequency_channels};
        sc.window = PilotWindow::parse(p.window);
        sc.noise = {c.sigma2_pilot, c.sigma2_data};
        const CMatrix cov = c.antenna_correlation == 0.0
                                ? scaled_identity_covariance(p.n_r, c.channel_gain)
                                : exponential_correlation_covariance(p.n_r, c.channel_gain, c.antenna_correlation);
        const cd q = decay_rate_from_doppler({p.doppler_hz, c.slot_duration_s});
        for (long k = 0; k < c.num_users; ++k)
        {
            UserLink u;
            u.channel.covariance = cov;
            u.channel.decay_rate = q;
            u.channel.alpha = c.alpha(static_cast<std::size_t>(k));
            u.data_power = c.data_power_mw;
            u.pilot_power = p.pilot_power_mw;
            sc.users.push_back(u);
        }
        if (p.mismatch_factor != 1.0)
        {
            const cd qa = decay_rate_from_doppler({p.doppler_hz * p.mismatch_factor, c.slot_duration_s});
            for (const auto &u : sc.users)
            {
                ChannelParams a = u.channel;
                a.decay_rate = qa;
                sc.assumed_channels.push_back(a);
            }
        }
        sc.validate();
        return sc;
    }

    // 64-bit FNV-1a.
    inline std::uint64_t fnv1a(const std::string &s)
    {
        std::uint64_t h = 14695981039346656037ull;
        for (unsigned char ch : s)
        {
            h ^= ch;
            h *= 1099511628211ull;
        }
        return h;
    }

    inline std::string hex64(std::uint64_t v)
    {
        static const char *digits = "0123456789abcdef";
        std::string out(16, '0');
        for (int k = 15; k >= 0; --k, v >>= 4)
            out[static_cast<std::size_t>(k)] = digits[v & 0xf];
        return out;
    }

    inline std::string config_hash(const ExperimentConfig &c)
    {
        return hex64(fnv1a(config_to_json(c).dump()));
    }

    // Stable across runs: built from the canonical JSON of the physical parameters.
    inline std::string scenario_hash(const ExperimentConfig &c, const ScenarioPoint &p)
    {
        const json j{{"n_r", p.n_r},
                     {"num_users", c.num_users},
                     {"path_loss_db", c.path_loss_db},
                     {"data_power_mw", c.data_power_mw},
                     {"pilot_power_mw", p.pilot_power_mw},
                     {"frequency_channels", c.frequency_channels},
                     {"sigma2_pilot", c.sigma2_pilot},
                     {"sigma2_data", c.sigma2_data},
                     {"doppler_hz", p.doppler_hz},
                     {"slot_duration_s", c.slot_duration_s},
                     {"window", p.window},
                     {"mismatch_factor", p.mismatch_factor},
                     {"channel_gain", c.channel_gain},
                     {"antenna_correlation", c.antenna_correlation}};
        return hex64(fnv1a(j.dump()));
    }
}

#endif
