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

#ifndef AGINGMIMO_OPTIMIZER_HPP
#define AGINGMIMO_OPTIMIZER_HPP

#include "bounds.hpp"

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace agingmimo
{
    struct OptimizerOptions
    {
        BoundOptions bound;
        // Upper end of the exhaustive scan used when the bound is unavailable.
        long fallback_ceiling = 1000;
        unsigned threads = 1;
    };

    struct SearchTrace
    {
        std::vector<std::pair<long, double>> evaluated;
        std::vector<long> delta_max_history;
        long delta_opt = 1;
        double se_opt = 0.0;
        bool bound_unavailable = false;
        std::string bound_message;
        std::size_t bound_calls = 0;
    };

    // Scans delta = 1, 2, ... while delta < delta_max, where delta_max is the bound inverse of the
    // incumbent SE. Frame sizes never evaluated satisfy SE^(u)(delta) < se_opt.
    inline SearchTrace optimal_frame_size(const Scenario &sc, const OptimizerOptions &opt = {})
    {
        sc.validate();
        const LogBase base = opt.bound.log_base;
        SearchTrace tr;
        const double se1 = frame_spectral_efficiency(sc, 1, base, opt.threads).total;
        tr.evaluated.emplace_back(1, se1);
        tr.delta_opt = 1;
        tr.se_opt = se1;

        long delta_max = 0;
        auto inverse = [&](double target)
        {
            ++tr.bound_calls;
            return se_upper_inverse(sc, target, opt.bound);
        };
        try
        {
            delta_max = se1 > 0.0 ? inverse(se1) : opt.bound.delta_ceiling;
        }
        catch (const BoundUnavailableError &e)
        {
            tr.bound_unavailable = true;
            tr.bound_message = e.what();
            delta_max = opt.fallback_ceiling + 1;
        }
        tr.delta_max_history.push_back(delta_max);

        auto tighten = [&](double target)
        {
            if (tr.bound_unavailable || !(target > 0.0))
                return;
            const long cand = inverse(target);
            if (cand < delta_max)
            {
                delta_max = cand;
                tr.delta_max_history.push_back(delta_max);
            }
        };

        for (long delta = 2; delta < delta_max; ++delta)
        {
            const double se = frame_spectral_efficiency(sc, delta, base, opt.threads).total;
            tr.evaluated.emplace_back(delta, se);
            if (se > tr.se_opt)
            {
                tr.delta_opt = delta;
                tr.se_opt = se;
                tighten(se);
            }
            else if (tr.delta_opt == delta - 1)
            {
                tighten(se);
            }
        }
        return tr;
    }

    struct PowerFrameSurface
    {
        std::vector<double> pilot_powers;
        std::vector<long> deltas;
        // values[p][d]; NaN where the cell failed, with the reason in errors[p][d].
        std::vector<std::vector<double>> values;
        std::vector<std::vector<std::string>> errors;
        double best_pilot_power = std::numeric_limits<double>::quiet_NaN();
        long best_delta = 0;
        double best_se = -std::numeric_limits<double>::infinity();
    };

    inline Scenario with_pilot_power(Scenario sc, double pilot_power)
    {
        for (auto &u : sc.users)
            u.pilot_power = pilot_power;
        return sc;
    }

    inline PowerFrameSurface sweep_pilot_power_and_frame(const Scenario &sc, const std::vector<double> &pilot_powers,
                                                         const std::vector<long> &deltas, LogBase base = LogBase::Two,
                                                         unsigned threads = 1)
    {
        if (pilot_powers.empty() || deltas.empty())
            throw std::invalid_argument("sweep_pilot_power_and_frame: grids must be non-empty");
        PowerFrameSurface out;
        out.pilot_powers = pilot_powers;
        out.deltas = deltas;
        const std::size_t np = pilot_powers.size(), nd = deltas.size();
        out.values.assign(np, std::vector<double>(nd, std::numeric_limits<double>::quiet_NaN()));
        out.errors.assign(np, std::vector<std::string>(nd));
        parallel_for(np * nd, threads, [&](std::size_t cell)
                     {
                         const std::size_t p = cell / nd, d = cell % nd;
                         try
                         {
                             const Scenario s = with_pilot_power(sc, pilot_powers[p]);
                             s.validate();
                             out.values[p][d] = frame_spectral_efficiency(s, deltas[d], base).total;
                         }
                         catch (const std::exception &e)
                         {
                             out.errors[p][d] = e.what();
                         } });
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t d = 0; d < nd; ++d)
                if (out.values[p][d] > out.best_se)
                {
                    out.best_se = out.values[p][d];
                    out.best_pilot_power = pilot_powers[p];
                    out.best_delta = deltas[d];
                }
        return out;
    }
}

#endif
