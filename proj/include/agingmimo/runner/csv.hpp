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

#ifndef AGINGMIMO_RUNNER_CSV_HPP
#define AGINGMIMO_RUNNER_CSV_HPP

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace agingmimo::runner
{
    inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

    // One evaluated point. NaN marks a column that does not apply to the row.
    struct SweepRecord
    {
        std::string experiment;
        std::string scenario_hash;
        long n_r = 0;
        double doppler_hz = kNaN;
        double pilot_power_mw = kNaN;
        std::string window;
        double mismatch_factor = kNaN;
        long delta = 0; // 0: not applicable
        long slot = 0;  // 0: whole frame
        std::vector<double> gamma_bar;
        double se = kNaN;
        double se_upper = kNaN;
        double mc_mean = kNaN;
        double mc_stderr = kNaN;
        int optimum = 0;
        long delta_max = 0;
        std::string error;

        bool failed() const { return !error.empty(); }
    };

    inline std::string format_number(double v)
    {
        if (std::isnan(v))
            return "";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return buf;
    }

    inline std::string format_count(long v)
    {
        return v == 0 ? std::string() : std::to_string(v);
    }

    inline std::string csv_escape(const std::string &s)
    {
        if (s.find_first_of(",\"\n\r") == std::string::npos)
            return s;
        std::string out = "\"";
        for (char c : s)
        {
            if (c == '"')
                out += '"';
            out += (c == '\n' || c == '\r') ? ' ' : c;
        }
        return out + "\"";
    }

    inline std::vector<std::string> csv_columns(std::size_t num_users)
    {
        std::vector<std::string> cols = {"experiment", "scenario_hash", "n_r", "doppler_hz", "pilot_power_mw", "window",
                                         "mismatch_factor", "delta", "slot"};
        for (std::size_t k = 1; k <= num_users; ++k)
            cols.push_back("gamma_bar_" + std::to_string(k));
        for (const char *c : {"se", "se_upper", "mc_mean", "mc_stderr", "optimum", "delta_max", "error"})
            cols.emplace_back(c);
        return cols;
    }

    inline std::vector<std::string> record_fields(const SweepRecord &r, std::size_t num_users)
    {
        std::vector<std::string> f = {r.experiment, r.scenario_hash, format_count(r.n_r), format_number(r.doppler_hz),
                                      format_number(r.pilot_power_mw), r.window, format_number(r.mismatch_factor),
                                      format_count(r.delta), format_count(r.slot)};
        for (std::size_t k = 0; k < num_users; ++k)
            f.push_back(k < r.gamma_bar.size() ? format_number(r.gamma_bar[k]) : std::string());
        f.push_back(format_number(r.se));
        f.push_back(format_number(r.se_upper));
        f.push_back(format_number(r.mc_mean));
        f.push_back(format_number(r.mc_stderr));
        f.push_back(r.optimum ? "1" : "0");
        f.push_back(format_count(r.delta_max));
        f.push_back(r.error);
        return f;
    }

    // Header row plus one line per record, LF endings.
    inline void write_csv(std::ostream &out, const std::vector<SweepRecord> &rows, std::size_t num_users)
    {
        auto line = [&](const std::vector<std::string> &fields)
        {
            for (std::size_t k = 0; k < fields.size(); ++k)
            {
                if (k)
                    out << ',';
                out << csv_escape(fields[k]);
            }
            out << '\n';
        };
        line(csv_columns(num_users));
        for (const auto &r : rows)
            line(record_fields(r, num_users));
    }

    // Same content as the CSV; empty cells become null, numeric cells keep their 12-digit text value.
    inline nlohmann::json records_to_json(const std::vector<SweepRecord> &rows, std::size_t num_users)
    {
        const auto cols = csv_columns(num_users);
        nlohmann::json arr = nlohmann::json::array();
        for (const auto &r : rows)
        {
            const auto fields = record_fields(r, num_users);
            nlohmann::json obj = nlohmann::json::object();
            for (std::size_t k = 0; k < cols.size(); ++k)
            {
                const std::string &v = fields[k];
                const bool text = cols[k] == "experiment" || cols[k] == "scenario_hash" || cols[k] == "window" ||
                                  cols[k] == "error";
                if (v.empty())
                    obj[cols[k]] = nullptr;
                else if (text)
                    obj[cols[k]] = v;
                else
                    obj[cols[k]] = std::stod(v);
            }
            arr.push_back(std::move(obj));
        }
        return arr;
    }

    // Minimal reader for files written by write_csv (quoted fields, no embedded newlines).
    inline std::vector<std::string> split_csv_line(const std::string &line)
    {
        std::vector<std::string> out;
        std::string cur;
        bool quoted = false;
        for (std::size_t k = 0; k < line.size(); ++k)
        {
            const char c = line[k];
            if (quoted)
            {
                if (c == '"' && k + 1 < line.size() && line[k + 1] == '"')
                {
                    cur += '"';
                    ++k;
                }
                else if (c == '"')
                    quoted = false;
                else
                    cur += c;
            }
            else if (c == '"')
                quoted = true;
            else if (c == ',')
            {
                out.push_back(cur);
                cur.clear();
            }
            else
                cur += c;
        }
        out.push_back(cur);
        return out;
    }
}

#endif
