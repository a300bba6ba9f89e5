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

#ifndef AGINGMIMO_BOUNDS_HPP
#define AGINGMIMO_BOUNDS_HPP

#include "sinr.hpp"

#include <array>
#include <cmath>

namespace agingmimo
{
    // Sum of exp(2 q_bar |i - o|) over the three pilots at -(delta + 1), 0, delta + 1.
    inline double rho(double q_bar, long delta, long i)
    {
        check_slot(delta, i);
        const double d1 = static_cast<double>(delta + 1);
        const double x = static_cast<double>(i);
        return std::exp(2.0 * q_bar * (d1 + x)) + std::exp(2.0 * q_bar * x) + std::exp(2.0 * q_bar * (d1 - x));
    }

    // Same sum over an arbitrary window; a missing pilot drops its term.
    inline double rho(double q_bar, const PilotWindow &w, long delta, long i)
    {
        check_slot(delta, i);
        double r = 0.0;
        for (long o : w.offsets(delta))
            r += std::exp(2.0 * q_bar * static_cast<double>(std::abs(i - o)));
        return r;
    }

    // [[1, x, x^2], [x, 1, x], [x^2, x, 1]] with x = a^i.
    inline Eigen::Matrix3d m3_kernel(double a, long i)
    {
        const double x = std::pow(a, static_cast<double>(i));
        Eigen::Matrix3d k;
        k << 1.0, x, x * x,
            x, 1.0, x,
            x * x, x, 1.0;
        return k;
    }

    inline std::array<double, 3> m3_eigenvalues(double a, long i)
    {
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("m3_eigenvalues: a must lie in (0, 1)");
        if (i < 1)
            throw std::invalid_argument("m3_eigenvalues: i must be >= 1");
        const double ai = std::pow(a, static_cast<double>(i));
        const double a2i = ai * ai;
        const double root = ai * std::sqrt(8.0 + a2i);
        return {1.0 - a2i, 0.5 * (2.0 + a2i - root), 0.5 * (2.0 + a2i + root)};
    }

    inline double eta_max(double a)
    {
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("eta_max: a must lie in (0, 1); a static channel has no bound");
        return 0.5 * (2.0 + a * a - a * std::sqrt(8.0 + a * a));
    }

    // rho C (eta C + s I)^-1 C with eta = eta_fraction * eta_max(exp(2 q_bar)).
    inline CMatrix upper_explained_covariance(const UserLink &u, const PilotWindow &w, const FrameConfig &f,
                                              const NoiseParams &n, long i, double eta_fraction = 0.99)
    {
        check_slot(f.delta, i);
        const double q_bar = u.channel.decay_rate.real();
        const double eta = eta_fraction * eta_max(std::exp(2.0 * q_bar));
        const double s = pilot_noise_variance(u, f, n);
        const CMatrix &c = u.channel.covariance;
        const CMatrix inner = eta * c + s * CMatrix::Identity(c.rows(), c.cols());
        return linalg::hermitian_part(rho(q_bar, w, f.delta, i) * c * linalg::hermitian_solve(inner, c));
    }

    // Z^(u) = C - rho C (eta C + s I)^-1 C, unclipped.
    inline CMatrix upper_error_covariance(const UserLink &u, const PilotWindow &w, const FrameConfig &f, const NoiseParams &n,
                                          long i, double eta_fraction = 0.99)
    {
        return linalg::hermitian_part(u.channel.covariance - upper_explained_covariance(u, w, f, n, i, eta_fraction));
    }

    // Phi^(u) = alpha^2 P (C - Z^(u)).
    inline CMatrix upper_signal_covariance(const UserLink &u, const PilotWindow &w, const FrameConfig &f, const NoiseParams &n,
                                           long i, double eta_fraction = 0.99)
    {
        const double g = u.channel.alpha * u.channel.alpha * u.data_power;
        return g * upper_explained_covariance(u, w, f, n, i, eta_fraction);
    }

    enum class BoundMode
    {
        // Error covariance surrogate clipped to its PSD part; always defined.
        Clamped,
        // Unclipped surrogate; throws when the resulting floor is not positive definite.
        Literal
    };

    struct BoundOptions
    {
        double eta_fraction = 0.99;
        BoundMode mode = BoundMode::Clamped;
        long delta_ceiling = 100000;
        LogBase log_base = LogBase::Two;
    };

    struct GammaUpper
    {
        double value = 0.0;
        bool clamped = false; // true when any eigen-direction hit the clip
    };

    namespace detail
    {
        // Per-user eigen data reused across slots.
        struct UserBoundData
        {
            double q_bar = 0.0;
            double eta = 0.0;
            double s = 0.0;
            double power_gain = 0.0; // alpha^2 P
            RVector lambda;
            CMatrix basis;
            bool scalar = false;
        };

        inline std::vector<UserBoundData> prepare(const Scenario &sc, long delta, const BoundOptions &opt)
        {
            if (sc.mismatched())
                throw BoundUnavailableError("upper bound is not defined under mismatched statistics");
            if (!(opt.eta_fraction > 0.0 && opt.eta_fraction < 1.0))
                throw std::invalid_argument("BoundOptions: eta_fraction must lie in (0, 1)");
            const FrameConfig f = sc.frame_with(delta);
            std::vector<UserBoundData> out(sc.users.size());
            for (std::size_t k = 0; k < sc.users.size(); ++k)
            {
                const UserLink &u = sc.users[k];
                auto &d = out[k];
                d.q_bar = u.channel.decay_rate.real();
                if (!(d.q_bar < 0.0))
                    throw BoundUnavailableError("upper bound requires Re(q) < 0 for every user");
                d.eta = opt.eta_fraction * eta_max(std::exp(2.0 * d.q_bar));
                d.s = pilot_noise_variance(u, f, sc.noise);
                d.power_gain = u.channel.alpha * u.channel.alpha * u.data_power;
                double c = 0.0;
                if (linalg::is_scaled_identity(u.channel.covariance, &c))
                {
                    d.scalar = true;
                    d.lambda = RVector::Constant(1, c);
                }
                else
                {
                    Eigen::SelfAdjointEigenSolver<CMatrix> es(linalg::hermitian_part(u.channel.covariance));
                    d.lambda = es.eigenvalues().cwiseMax(0.0);
                    d.basis = es.eigenvectors();
                }
            }
            return out;
        }

        // rho lambda^2 / (eta lambda + s)
        inline double explained_upper(double lambda, double r, double eta, double s)
        {
            return r * lambda * lambda / (eta * lambda + s);
        }

        inline GammaUpper gamma_upper_slot(const Scenario &sc, const std::vector<UserBoundData> &data, long delta, long i,
                                           std::size_t tagged, const BoundOptions &opt)
        {
            const Eigen::Index n = sc.antennas();
            GammaUpper g;
            bool all_scalar = true;
            for (const auto &d : data)
                all_scalar = all_scalar && d.scalar;

            // Per-user eigenvalues of Z^(u) (clipped or not) and of C - Z^(u), in the user's own basis.
            std::vector<RVector> zu(data.size()), xu(data.size());
            for (std::size_t k = 0; k < data.size(); ++k)
            {
                const auto &d = data[k];
                const double r = rho(d.q_bar, sc.window, delta, i);
                zu[k].resize(d.lambda.size());
                xu[k].resize(d.lambda.size());
                for (Eigen::Index j = 0; j < d.lambda.size(); ++j)
                {
                    const double lam = d.lambda(j);
                    double x = explained_upper(lam, r, d.eta, d.s);
                    if (x > lam && opt.mode == BoundMode::Clamped)
                    {
                        x = lam;
                        g.clamped = true;
                    }
                    xu[k](j) = x;
                    zu[k](j) = lam - x;
                }
            }

            if (all_scalar)
            {
                double beta = sc.noise.sigma2_data;
                for (std::size_t k = 0; k < data.size(); ++k)
                    beta += data[k].power_gain * zu[k](0);
                if (!(beta > 0.0))
                    throw BoundUnavailableError("interference floor of the upper bound is not positive definite");
                const auto &dt = data[tagged];
                const double phi = dt.power_gain * xu[tagged](0);
                g.value = static_cast<double>(n) * phi / beta;
                return g;
            }

            CMatrix beta = sc.noise.sigma2_data * CMatrix::Identity(n, n);
            auto rebuild = [&](const UserBoundData &d, const RVector &ev)
            {
                if (d.scalar)
                    return CMatrix(CMatrix::Identity(n, n) * ev(0));
                return CMatrix(d.basis * ev.asDiagonal() * d.basis.adjoint());
            };
            for (std::size_t k = 0; k < data.size(); ++k)
                beta += data[k].power_gain * rebuild(data[k], zu[k]);
            beta = linalg::hermitian_part(beta);
            if (linalg::min_eigenvalue(beta) <= 0.0)
                throw BoundUnavailableError("interference floor of the upper bound is not positive definite");
            const auto &dt = data[tagged];
            const CMatrix phi = dt.power_gain * rebuild(dt, xu[tagged]);
            g.value = linalg::hermitian_solve(beta, phi).trace().real();
            return g;
        }
    }

    inline GammaUpper gamma_upper(const Scenario &sc, long delta, long i, std::size_t tagged, const BoundOptions &opt = {})
    {
        check_slot(delta, i);
        if (tagged >= sc.users.size())
            throw std::invalid_argument("gamma_upper: tagged index out of range");
        const auto data = detail::prepare(sc, delta, opt);
        return detail::gamma_upper_slot(sc, data, delta, i, tagged, opt);
    }

    // Sum over users of sum_i log(1 + gamma^(u)) / delta.
    inline double se_upper_total(const Scenario &sc, long delta, const BoundOptions &opt = {})
    {
        if (delta < 1)
            throw std::invalid_argument("se_upper_total: delta must be >= 1");
        const auto data = detail::prepare(sc, delta, opt);
        double sum = 0.0;
        for (long i = 1; i <= delta; ++i)
            for (std::size_t k = 0; k < sc.users.size(); ++k)
                sum += spectral_efficiency_slot(detail::gamma_upper_slot(sc, data, delta, i, k, opt).value, opt.log_base);
        return sum / static_cast<double>(delta);
    }

    // Smallest delta with SE^(u)(delta) < target, assuming SE^(u) non-increasing in delta.
    inline long se_upper_inverse(const Scenario &sc, double target, const BoundOptions &opt = {})
    {
        if (!(target > 0.0))
            throw std::invalid_argument("se_upper_inverse: target must be > 0");
        if (se_upper_total(sc, 1, opt) < target)
            return 1;
        long lo = 1; // SE^(u)(lo) >= target
        long hi = 2;
        for (;;)
        {
            if (hi >= opt.delta_ceiling)
            {
                hi = opt.delta_ceiling;
                if (se_upper_total(sc, hi, opt) >= target)
                    throw SearchCeilingError("se_upper_inverse: bound stays above target up to the ceiling",
                                             opt.delta_ceiling);
                break;
            }
            if (se_upper_total(sc, hi, opt) < target)
                break;
            lo = hi;
            hi *= 2;
        }
        while (hi - lo > 1)
        {
            const long mid = lo + (hi - lo) / 2;
            if (se_upper_total(sc, mid, opt) < target)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }
}

#endif
