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

#ifndef AGINGMIMO_SINR_HPP
#define AGINGMIMO_SINR_HPP

#include "parallel.hpp"
#include "pilot_estimation.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace agingmimo
{
    struct Scenario
    {
        std::vector<UserLink> users;
        FrameConfig frame;
        PilotWindow window;
        NoiseParams noise;
        std::size_t tagged = 0;
        // Statistics the estimator believes in, one per user; empty means matched.
        std::vector<ChannelParams> assumed_channels;

        std::size_t num_users() const { return users.size(); }
        Eigen::Index antennas() const { return users.empty() ? 0 : users.front().channel.antennas(); }
        bool mismatched() const { return !assumed_channels.empty(); }

        FrameConfig frame_with(long delta) const { return {delta, frame.frequency_channels}; }

        void validate() const
        {
            if (users.empty())
                throw std::invalid_argument("Scenario: at least one user required");
            frame.validate();
            noise.validate();
            if (static_cast<long>(users.size()) > frame.frequency_channels)
                throw std::invalid_argument("Scenario: number of users exceeds frequency_channels");
            if (tagged >= users.size())
                throw std::invalid_argument("Scenario: tagged user index out of range");
            const Eigen::Index n = antennas();
            for (const auto &u : users)
            {
                u.validate();
                if (u.channel.antennas() != n)
                    throw std::invalid_argument("Scenario: users must share the antenna count");
            }
            if (!assumed_channels.empty())
            {
                if (assumed_channels.size() != users.size())
                    throw std::invalid_argument("Scenario: assumed_channels must have one entry per user");
                for (const auto &a : assumed_channels)
                {
                    a.validate();
                    if (a.antennas() != n)
                        throw std::invalid_argument("Scenario: assumed channel antenna count differs");
                }
            }
        }

        // True when every covariance (true and assumed) is c I, so the scalar path is exact.
        bool scalar_iid() const
        {
            for (std::size_t k = 0; k < users.size(); ++k)
            {
                double c = 0.0;
                if (!linalg::is_scaled_identity(users[k].channel.covariance, &c))
                    return false;
                if (!assumed_channels.empty())
                {
                    double ca = 0.0;
                    if (!linalg::is_scaled_identity(assumed_channels[k].covariance, &ca) || ca != c)
                        return false;
                }
            }
            return true;
        }
    };

    struct SinrResult
    {
        double gamma_bar = 0.0;
        int iterations = 0;
        double residual = 0.0;
        std::vector<double> deltas; // one entry per user; the tagged entry equals gamma_bar
    };

    struct FixedPointOptions
    {
        double tolerance = 1e-12;
        int max_iterations = 10000;
    };

    // beta = sum_k alpha_k^2 P_k Z_k + sigma_d^2 I
    inline CMatrix interference_floor(const Scenario &sc, const std::vector<CMatrix> &z)
    {
        if (z.size() != sc.users.size())
            throw std::invalid_argument("interference_floor: one Z per user required");
        const Eigen::Index n = sc.antennas();
        CMatrix beta = sc.noise.sigma2_data * CMatrix::Identity(n, n);
        for (std::size_t k = 0; k < z.size(); ++k)
        {
            const auto &ch = sc.users[k].channel;
            beta += ch.alpha * ch.alpha * sc.users[k].data_power * z[k];
        }
        return linalg::hermitian_part(beta);
    }

    // Fixed point of delta_m = tr(Phi_m T), T = (sum_{m != tagged} Phi_m / (1 + delta_m) + beta)^-1.
    inline SinrResult deterministic_equivalent_sinr(const std::vector<CMatrix> &phi, const CMatrix &beta, std::size_t tagged,
                                                    const FixedPointOptions &opt = {})
    {
        const std::size_t k_users = phi.size();
        if (tagged >= k_users)
            throw std::invalid_argument("deterministic_equivalent_sinr: tagged index out of range");
        for (const auto &p : phi)
            if (p.rows() != beta.rows() || p.cols() != beta.cols())
                throw std::invalid_argument("deterministic_equivalent_sinr: dimension mismatch");

        auto t_matrix = [&](const std::vector<double> &d)
        {
            CMatrix a = beta;
            for (std::size_t m = 0; m < k_users; ++m)
                if (m != tagged)
                    a += phi[m] / (1.0 + d[m]);
            return linalg::hermitian_inverse(a);
        };
        auto update = [&](const CMatrix &t)
        {
            std::vector<double> d(k_users);
            for (std::size_t m = 0; m < k_users; ++m)
                d[m] = std::max(0.0, (phi[m] * t).trace().real());
            return d;
        };

        SinrResult res;
        std::vector<double> d = update(linalg::hermitian_inverse(beta));
        if (k_users == 1)
        {
            res.gamma_bar = d[0];
            res.deltas = d;
            return res;
        }

        auto change = [&](const std::vector<double> &a, const std::vector<double> &b)
        {
            double r = 0.0;
            for (std::size_t m = 0; m < k_users; ++m)
                if (m != tagged)
                    r = std::max(r, std::abs(a[m] - b[m]) / std::max(std::abs(b[m]), 1e-300));
            return r;
        };

        double damping = 1.0;
        double last = std::numeric_limits<double>::infinity();
        double resid = 0.0;
        int it = 0;
        for (; it < opt.max_iterations; ++it)
        {
            std::vector<double> next = update(t_matrix(d));
            resid = change(next, d);
            if (resid > last)
                damping = 0.5;
            last = resid;
            for (std::size_t m = 0; m < k_users; ++m)
                d[m] = damping * next[m] + (1.0 - damping) * d[m];
            if (resid < opt.tolerance)
            {
                ++it;
                break;
            }
        }
        if (!(resid < opt.tolerance))
            throw ConvergenceError("deterministic_equivalent_sinr: no convergence after " + std::to_string(it) + " iterations",
                                   it, resid);
        d = update(t_matrix(d));
        res.gamma_bar = d[tagged];
        res.iterations = it;
        res.residual = resid;
        res.deltas = d;
        return res;
    }

    // Root of beta = N phi / g - sum_{k != tagged} phi_k / (1 + g phi_k / phi) for C_k = c_k I.
    inline double scalar_iid_sinr(const std::vector<double> &phi, double beta, Eigen::Index n_r, std::size_t tagged)
    {
        if (tagged >= phi.size())
            throw std::invalid_argument("scalar_iid_sinr: tagged index out of range");
        if (!(beta > 0.0))
            throw std::invalid_argument("scalar_iid_sinr: beta must be > 0");
        const double pt = phi[tagged];
        if (!(pt > 0.0))
            return 0.0;
        const double n = static_cast<double>(n_r);
        const double upper = n * pt / beta;

        // Multiplied through by g: strictly decreasing with g(0) = N phi > 0.
        auto g = [&](double x)
        {
            double v = n * pt - x * beta;
            for (std::size_t k = 0; k < phi.size(); ++k)
                if (k != tagged)
                    v -= x * phi[k] / (1.0 + x * phi[k] / pt);
            return v;
        };
        const double g_hi = g(upper);
        if (g_hi >= 0.0)
            return upper;
        const double g_lo = g(0.0);
        if (!(g_lo > 0.0))
            throw ConvergenceError("scalar_iid_sinr: no sign change in bracket", 0, g_lo);
        boost::uintmax_t max_iter = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 3);
        auto r = boost::math::tools::toms748_solve(g, 0.0, upper, g_lo, g_hi, tol, max_iter);
        return 0.5 * (r.first + r.second);
    }

    enum class LogBase
    {
        Two,
        Natural
    };

    inline double spectral_efficiency_slot(double gamma_bar, LogBase base = LogBase::Two)
    {
        if (!(gamma_bar >= 0.0))
            throw std::invalid_argument("spectral_efficiency_slot: gamma_bar must be >= 0");
        return base == LogBase::Two ? std::log2(1.0 + gamma_bar) : std::log1p(gamma_bar);
    }

    // Per-user error and signal statistics for one data slot.
    struct SlotMoments
    {
        bool scalar = false;
        std::vector<CMatrix> z, phi;
        std::vector<double> z_s, phi_s; // scalar path
    };

    inline SlotMoments slot_moments(const Scenario &sc, long delta, long i, bool force_matrix = false)
    {
        const FrameConfig f = sc.frame_with(delta);
        check_slot(delta, i);
        SlotMoments out;
        const std::size_t k_users = sc.users.size();
        out.scalar = !force_matrix && sc.scalar_iid();
        if (out.scalar)
        {
            out.z_s.resize(k_users);
            out.phi_s.resize(k_users);
            for (std::size_t k = 0; k < k_users; ++k)
            {
                const UserLink &u = sc.users[k];
                const double c = u.channel.covariance(0, 0).real();
                const double s = pilot_noise_variance(u, f, sc.noise);
                const double gain = u.channel.alpha * u.channel.alpha * u.data_power;
                if (sc.mismatched())
                {
                    const double z = scalar::mismatched_error_variance(c, u.channel.decay_rate,
                                                                       sc.assumed_channels[k].decay_rate, sc.window, delta, i, s);
                    out.z_s[k] = z;
                    out.phi_s[k] = gain * std::max(c - z, 0.0);
                }
                else
                {
                    const double g = std::clamp(scalar::explained_variance(c, u.channel.decay_rate, sc.window, delta, i, s), 0.0, c);
                    out.z_s[k] = c - g;
                    out.phi_s[k] = gain * g;
                }
            }
            return out;
        }
        out.z.resize(k_users);
        out.phi.resize(k_users);
        for (std::size_t k = 0; k < k_users; ++k)
        {
            if (sc.mismatched())
            {
                auto [z, phi] = mismatched_error_covariance(sc.users[k], sc.assumed_channels[k], sc.window, f, sc.noise, i);
                out.z[k] = std::move(z);
                out.phi[k] = std::move(phi);
            }
            else
            {
                EstimationMoments m = estimation_moments(sc.users[k], sc.window, f, sc.noise, i);
                out.z[k] = std::move(m.error_covariance);
                out.phi[k] = std::move(m.signal_covariance);
            }
        }
        return out;
    }

    inline double scalar_beta(const Scenario &sc, const std::vector<double> &z)
    {
        double b = sc.noise.sigma2_data;
        for (std::size_t k = 0; k < z.size(); ++k)
        {
            const auto &ch = sc.users[k].channel;
            b += ch.alpha * ch.alpha * sc.users[k].data_power * z[k];
        }
        return b;
    }

    // Deterministic-equivalent SINR of every user (each tagged in turn) in data slot i.
    inline std::vector<double> slot_sinr(const Scenario &sc, long delta, long i, const FixedPointOptions &opt = {})
    {
        const SlotMoments m = slot_moments(sc, delta, i);
        const std::size_t k_users = sc.users.size();
        std::vector<double> g(k_users);
        if (m.scalar)
        {
            const double beta = scalar_beta(sc, m.z_s);
            for (std::size_t t = 0; t < k_users; ++t)
                g[t] = scalar_iid_sinr(m.phi_s, beta, sc.antennas(), t);
            return g;
        }
        const CMatrix beta = interference_floor(sc, m.z);
        for (std::size_t t = 0; t < k_users; ++t)
        {
            try
            {
                g[t] = deterministic_equivalent_sinr(m.phi, beta, t, opt).gamma_bar;
            }
            catch (const ConvergenceError &e)
            {
                throw ConvergenceError(std::string(e.what()) + " (user " + std::to_string(t) + ", slot " + std::to_string(i) +
                                           ", delta " + std::to_string(delta) + ")",
                                       e.iterations(), e.residual());
            }
        }
        return g;
    }

    struct FrameSE
    {
        double total = 0.0;
        std::vector<std::vector<double>> gamma;   // [slot - 1][user]
        std::vector<std::vector<double>> slot_se; // [slot - 1][user]
    };

    // Sum over users and data slots of log(1 + gamma) divided by delta + 1.
    inline FrameSE frame_spectral_efficiency(const Scenario &sc, long delta, LogBase base = LogBase::Two,
                                             unsigned threads = 1, const FixedPointOptions &opt = {})
    {
        if (delta < 1)
            throw std::invalid_argument("frame_spectral_efficiency: delta must be >= 1");
        FrameSE out;
        out.gamma.resize(static_cast<std::size_t>(delta));
        out.slot_se.resize(static_cast<std::size_t>(delta));

        // Scalar matched case: factor each user's pilot kernel once per frame.
        std::vector<scalar::ExplainedVariance> explained;
        if (sc.scalar_iid() && !sc.mismatched())
        {
            sc.validate();
            const FrameConfig f = sc.frame_with(delta);
            for (const auto &u : sc.users)
                explained.emplace_back(u.channel.covariance(0, 0).real(), u.channel.decay_rate, sc.window, delta,
                                       pilot_noise_variance(u, f, sc.noise));
        }
        auto scalar_slot = [&](long i)
        {
            const std::size_t k_users = sc.users.size();
            std::vector<double> z(k_users), phi(k_users), g(k_users);
            for (std::size_t k = 0; k < k_users; ++k)
            {
                const UserLink &u = sc.users[k];
                const double c = u.channel.covariance(0, 0).real();
                const double x = std::clamp(explained[k](i), 0.0, c);
                z[k] = c - x;
                phi[k] = u.channel.alpha * u.channel.alpha * u.data_power * x;
            }
            const double beta = scalar_beta(sc, z);
            for (std::size_t t = 0; t < k_users; ++t)
                g[t] = scalar_iid_sinr(phi, beta, sc.antennas(), t);
            return g;
        };

        parallel_for(static_cast<std::size_t>(delta), threads, [&](std::size_t k)
                     {
                         const long i = static_cast<long>(k) + 1;
                         out.gamma[k] = explained.empty() ? slot_sinr(sc, delta, i, opt) : scalar_slot(i);
                         out.slot_se[k].resize(out.gamma[k].size());
                         for (std::size_t u = 0; u < out.gamma[k].size(); ++u)
                             out.slot_se[k][u] = spectral_efficiency_slot(out.gamma[k][u], base); });
        double sum = 0.0;
        for (const auto &row : out.slot_se)
            for (double v : row)
                sum += v;
        out.total = sum / static_cast<double>(delta + 1);
        return out;
    }

    struct MonteCarloResult
    {
        double mean = 0.0;
        double stderr_ = 0.0;
        std::size_t trials = 0;
    };

    // Instantaneous SINR b^H (sum_{l != t} b_l b_l^H + beta)^-1 b averaged over channel and pilot-noise draws.
    inline MonteCarloResult monte_carlo_sinr(const Scenario &sc, long delta, long i, std::size_t trials, std::uint64_t seed,
                                             unsigned threads = 1)
    {
        sc.validate();
        if (trials < 1)
            throw std::invalid_argument("monte_carlo_sinr: trials must be >= 1");
        const FrameConfig f = sc.frame_with(delta);
        check_slot(delta, i);
        const std::size_t k_users = sc.users.size();
        const Eigen::Index n = sc.antennas();

        // Estimator filters and the floor beta use the model statistics, as in the deterministic analysis.
        std::vector<CMatrix> filters(k_users);
        std::vector<double> gains(k_users), noise_sd(k_users);
        std::vector<CMatrix> z(k_users);
        const auto offs = sc.window.offsets(delta);
        for (std::size_t k = 0; k < k_users; ++k)
        {
            const UserLink &u = sc.users[k];
            UserLink design = u;
            if (sc.mismatched())
                design.channel = sc.assumed_channels[k];
            EstimationMoments m = estimation_moments(design, sc.window, f, sc.noise, i);
            filters[k] = interpolator(m);
            gains[k] = m.despread_gain;
            noise_sd[k] = std::sqrt(static_cast<double>(f.tau_p()) * sc.noise.sigma2_pilot);
            if (sc.mismatched())
                z[k] = mismatched_error_covariance(u, sc.assumed_channels[k], sc.window, f, sc.noise, i).first;
            else
                z[k] = estimation_moments(u, sc.window, f, sc.noise, i).error_covariance;
        }
        const CMatrix beta = interference_floor(sc, z);

        std::vector<long> slots(offs.begin(), offs.end());
        slots.push_back(i);
        std::sort(slots.begin(), slots.end());
        const auto data_pos = static_cast<std::size_t>(std::find(slots.begin(), slots.end(), i) - slots.begin());
        std::vector<JointChannelSampler> samplers;
        for (const auto &u : sc.users)
            samplers.emplace_back(u.channel, slots);

        std::vector<double> values(trials);
        parallel_for(trials, threads, [&](std::size_t trial)
                     {
                         std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                                          static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
                         std::mt19937_64 rng(ss);
                         std::vector<CVector> b(k_users);
                         for (std::size_t k = 0; k < k_users; ++k)
                         {
                             const auto h = samplers[k].draw(rng);
                             CVector y(n * static_cast<Eigen::Index>(offs.size()));
                             Eigen::Index pos = 0;
                             for (std::size_t s = 0; s < slots.size(); ++s)
                             {
                                 if (s == data_pos)
                                     continue;
                                 y.segment(pos * n, n) = gains[k] * h[s] + noise_sd[k] * standard_complex_normal(n, rng);
                                 ++pos;
                             }
                             const CVector h_hat = filters[k] * (y / gains[k]);
                             const auto &u = sc.users[k];
                             b[k] = u.channel.alpha * std::sqrt(u.data_power) * h_hat;
                         }
                         CMatrix j = beta;
                         for (std::size_t l = 0; l < k_users; ++l)
                             if (l != sc.tagged)
                                 j += b[l] * b[l].adjoint();
                         const CVector x = linalg::hermitian_solve(j, b[sc.tagged]);
                         values[trial] = std::max(0.0, b[sc.tagged].dot(x).real()); });

        MonteCarloResult r;
        r.trials = trials;
        double sum = 0.0;
        for (double v : values)
            sum += v;
        r.mean = sum / static_cast<double>(trials);
        if (trials > 1)
        {
            double ss = 0.0;
            for (double v : values)
                ss += (v - r.mean) * (v - r.mean);
            r.stderr_ = std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials));
        }
        return r;
    }
}

#endif
