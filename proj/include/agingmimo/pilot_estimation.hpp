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

#ifndef AGINGMIMO_PILOT_ESTIMATION_HPP
#define AGINGMIMO_PILOT_ESTIMATION_HPP

#include "channel_model.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace agingmimo
{
    // One pilot slot followed by `delta` data slots. Pilot sequences have length F.
    struct FrameConfig
    {
        long delta = 1;
        long frequency_channels = 12;

        long tau_p() const { return frequency_channels; }

        void validate() const
        {
            if (delta < 1)
                throw std::invalid_argument("FrameConfig: delta must be >= 1");
            if (frequency_channels < 1)
                throw std::invalid_argument("FrameConfig: frequency_channels must be >= 1");
        }
    };

    // Pilot slots used to interpolate data slot i in 1..delta. Offsets are integer multiples of
    // the frame length (delta + 1), with the frame's own pilot at 0.
    class PilotWindow
    {
    public:
        PilotWindow() : PilotWindow(one_before_one_after()) {}

        explicit PilotWindow(std::vector<int> frame_multiples, std::string name = "")
            : multiples_(std::move(frame_multiples)), name_(std::move(name))
        {
            if (multiples_.empty())
                throw std::invalid_argument("PilotWindow: at least one pilot required");
            for (std::size_t k = 1; k < multiples_.size(); ++k)
                if (multiples_[k] <= multiples_[k - 1])
                    throw std::invalid_argument("PilotWindow: offsets must be strictly increasing");
            if (name_.empty())
            {
                const long before = std::count_if(multiples_.begin(), multiples_.end(), [](int m) { return m <= 0; });
                const long after = static_cast<long>(multiples_.size()) - before;
                name_ = std::to_string(before) + "b";
                if (after > 0)
                    name_ += "," + std::to_string(after) + "a";
            }
        }

        static PilotWindow two_before_one_after() { return PilotWindow({-1, 0, 1}, "2b,1a"); }
        static PilotWindow one_before_one_after() { return PilotWindow({0, 1}, "1b,1a"); }
        static PilotWindow two_before() { return PilotWindow({-1, 0}, "2b"); }

        static PilotWindow parse(const std::string &name)
        {
            if (name == "2b,1a")
                return two_before_one_after();
            if (name == "1b,1a")
                return one_before_one_after();
            if (name == "2b")
                return two_before();
            throw std::invalid_argument("PilotWindow: unknown window '" + name + "' (expected 2b,1a | 1b,1a | 2b)");
        }

        std::vector<long> offsets(long delta) const
        {
            std::vector<long> out;
            out.reserve(multiples_.size());
            for (int m : multiples_)
                out.push_back(static_cast<long>(m) * (delta + 1));
            return out;
        }

        const std::vector<int> &frame_multiples() const { return multiples_; }
        const std::string &name() const { return name_; }
        std::size_t size() const { return multiples_.size(); }

        // True when the window is {0, delta + 1}, whose per-slot statistics mirror about the frame centre.
        bool is_symmetric_pair() const { return multiples_ == std::vector<int>{0, 1}; }

        bool operator==(const PilotWindow &o) const { return multiples_ == o.multiples_; }

    private:
        std::vector<int> multiples_;
        std::string name_;
    };

    struct NoiseParams
    {
        double sigma2_pilot = 1.25e-11;
        double sigma2_data = 1.25e-11;

        void validate() const
        {
            if (!(sigma2_pilot > 0.0) || !std::isfinite(sigma2_pilot))
                throw std::invalid_argument("NoiseParams: sigma2_pilot must be > 0");
            if (!(sigma2_data > 0.0) || !std::isfinite(sigma2_data))
                throw std::invalid_argument("NoiseParams: sigma2_data must be > 0");
        }
    };

    // Per-block pilot noise after de-spreading and normalization: sigma_p^2 / (alpha^2 P_p tau_p).
    inline double pilot_noise_variance(const UserLink &u, const FrameConfig &f, const NoiseParams &n)
    {
        return n.sigma2_pilot / (u.channel.alpha * u.channel.alpha * u.pilot_power * static_cast<double>(f.tau_p()));
    }

    struct EstimationMoments
    {
        CMatrix prior;            // C
        CMatrix cross_covariance; // E, N x PN
        CMatrix pilot_covariance; // M, PN x PN
        double pilot_noise = 0.0; // s, Sigma_P = s I
        double despread_gain = 1.0;
        CMatrix error_covariance;  // Z
        CMatrix signal_covariance; // Phi
    };

    inline void check_slot(long delta, long i)
    {
        if (delta < 1)
            throw std::invalid_argument("delta must be >= 1");
        if (i < 1 || i > delta)
            throw std::out_of_range("data slot index " + std::to_string(i) + " outside 1.." + std::to_string(delta));
    }

    // Block j is E(h(i) h^H(o_j)).
    inline CMatrix build_cross_covariance(const ChannelParams &p, const PilotWindow &w, long delta, long i)
    {
        check_slot(delta, i);
        const auto offs = w.offsets(delta);
        const Eigen::Index n = p.antennas();
        CMatrix e(n, n * static_cast<Eigen::Index>(offs.size()));
        for (std::size_t j = 0; j < offs.size(); ++j)
            e.block(0, static_cast<Eigen::Index>(j) * n, n, n) = cross_covariance(p, i, offs[j]);
        return e;
    }

    // Block (j, k) is E(h(o_j) h^H(o_k)).
    inline CMatrix build_pilot_stack_covariance(const ChannelParams &p, const PilotWindow &w, long delta)
    {
        if (delta < 1)
            throw std::invalid_argument("delta must be >= 1");
        return joint_covariance(p, w.offsets(delta));
    }

    inline CMatrix regularized_pilot_covariance(const CMatrix &m, double s)
    {
        return m + s * CMatrix::Identity(m.rows(), m.cols());
    }

    // E (M + s I)^-1 E^H, the covariance captured by the estimate (C - Z).
    inline CMatrix explained_covariance(const CMatrix &e, const CMatrix &m, double s)
    {
        if (!(s > 0.0))
            throw std::invalid_argument("explained_covariance: pilot noise must be > 0");
        const CMatrix x = linalg::hermitian_solve(regularized_pilot_covariance(m, s), e.adjoint());
        CMatrix g = linalg::hermitian_part(e * x);
        if (!g.allFinite())
            throw IllConditionedError("explained_covariance: non-finite result");
        return g;
    }

    // Z = C - E (M + s I)^-1 E^H
    inline CMatrix error_covariance(const CMatrix &c, const CMatrix &e, const CMatrix &m, double s)
    {
        return linalg::hermitian_part(c - explained_covariance(e, m, s));
    }

    inline CMatrix effective_signal_covariance(const ChannelParams &p, const CMatrix &z, double data_power)
    {
        return linalg::hermitian_part(p.alpha * p.alpha * data_power * (p.covariance - z));
    }

    inline EstimationMoments estimation_moments(const UserLink &u, const PilotWindow &w, const FrameConfig &f,
                                                const NoiseParams &n, long i)
    {
        f.validate();
        check_slot(f.delta, i);
        EstimationMoments m;
        m.prior = u.channel.covariance;
        m.cross_covariance = build_cross_covariance(u.channel, w, f.delta, i);
        m.pilot_covariance = build_pilot_stack_covariance(u.channel, w, f.delta);
        m.pilot_noise = pilot_noise_variance(u, f, n);
        m.despread_gain = u.channel.alpha * std::sqrt(u.pilot_power) * static_cast<double>(f.tau_p());
        // Phi from the explained part directly; C - Z cancels badly when the estimate captures little.
        const CMatrix g = explained_covariance(m.cross_covariance, m.pilot_covariance, m.pilot_noise);
        m.error_covariance = linalg::hermitian_part(m.prior - g);
        m.signal_covariance = u.channel.alpha * u.channel.alpha * u.data_power * g;
        return m;
    }

    // H = E (M + s I)^-1, maps normalized pilot observations to the estimate.
    inline CMatrix interpolator(const EstimationMoments &m)
    {
        const CMatrix x = linalg::hermitian_solve(regularized_pilot_covariance(m.pilot_covariance, m.pilot_noise),
                                                  m.cross_covariance.adjoint());
        return x.adjoint();
    }

    // `despread` is the stacked de-spread observation g h(o_j) + noise, g = alpha sqrt(P_p) tau_p.
    inline CVector mmse_estimate(const EstimationMoments &m, const CVector &despread)
    {
        if (despread.size() != m.pilot_covariance.rows())
            throw std::invalid_argument("mmse_estimate: observation has " + std::to_string(despread.size()) +
                                        " entries, expected " + std::to_string(m.pilot_covariance.rows()));
        return interpolator(m) * (despread / m.despread_gain);
    }

    // Exact error covariance of the estimator designed for `assumed` when the channel follows `truth`.
    // Returns (Z_mis, Phi_mis); Phi_mis is clipped to its PSD part.
    inline std::pair<CMatrix, CMatrix> mismatched_error_covariance(const UserLink &truth, const ChannelParams &assumed,
                                                                   const PilotWindow &w, const FrameConfig &f,
                                                                   const NoiseParams &n, long i)
    {
        f.validate();
        check_slot(f.delta, i);
        if (assumed.antennas() != truth.channel.antennas())
            throw std::invalid_argument("mismatched_error_covariance: antenna count differs");
        const double s = pilot_noise_variance(truth, f, n);
        const CMatrix e_a = build_cross_covariance(assumed, w, f.delta, i);
        const CMatrix m_a = build_pilot_stack_covariance(assumed, w, f.delta);
        const CMatrix h = linalg::hermitian_solve(regularized_pilot_covariance(m_a, s), e_a.adjoint()).adjoint();

        // C - H E^H - E H^H + H F H^H rewritten as Z + D F D^H with D = H - E F^-1, which stays exact
        // when the statistics match and avoids cancellation at high SNR.
        const CMatrix &c_t = truth.channel.covariance;
        const CMatrix e_t = build_cross_covariance(truth.channel, w, f.delta, i);
        const CMatrix f_t = regularized_pilot_covariance(build_pilot_stack_covariance(truth.channel, w, f.delta), s);
        const CMatrix h_t = linalg::hermitian_solve(f_t, e_t.adjoint()).adjoint();
        const CMatrix d = h - h_t;
        CMatrix z = linalg::hermitian_part(c_t - h_t * e_t.adjoint() + d * f_t * d.adjoint());
        if (!z.allFinite())
            throw IllConditionedError("mismatched_error_covariance: non-finite result");
        const double g = truth.channel.alpha * truth.channel.alpha * truth.data_power;
        CMatrix phi = g * linalg::psd_part(c_t - z);
        return {z, phi};
    }

    namespace scalar
    {
        // Decay factors and kernels for C = c I. Everything here is P x P with P the window size.
        inline CVector cross_vector(cd q, const std::vector<long> &offs, long i)
        {
            CVector e(static_cast<Eigen::Index>(offs.size()));
            for (std::size_t j = 0; j < offs.size(); ++j)
                e(static_cast<Eigen::Index>(j)) = offs[j] >= i ? decay_factor(q, offs[j] - i) : std::conj(decay_factor(q, i - offs[j]));
            return e;
        }

        inline CMatrix pilot_kernel(cd q, const std::vector<long> &offs)
        {
            const auto p = static_cast<Eigen::Index>(offs.size());
            CMatrix k(p, p);
            for (Eigen::Index a = 0; a < p; ++a)
                for (Eigen::Index b = 0; b < p; ++b)
                    k(a, b) = offs[b] >= offs[a] ? decay_factor(q, offs[b] - offs[a]) : std::conj(decay_factor(q, offs[a] - offs[b]));
            return k;
        }

        // z(i) = c - c^2 e^H (c K + s I)^-1 e  for prior c I.
        // c^2 e^T (c K + s I)^-1 e^*, the variance captured by the estimate, for every slot of one frame.
        // The pilot kernel is factored once.
        class ExplainedVariance
        {
        public:
            ExplainedVariance(double c, cd q, const PilotWindow &w, long delta, double s)
                : c_(c), q_(q), delta_(delta), offs_(w.offsets(delta)), factor_(make_factor(c, q, offs_, s))
            {
            }

            double operator()(long i) const
            {
                check_slot(delta_, i);
                const CVector e = cross_vector(q_, offs_, i);
                const CVector x = factor_.solve(CMatrix(e.conjugate())).col(0);
                const double g = c_ * c_ * (e.transpose() * x)(0).real();
                if (!std::isfinite(g))
                    throw IllConditionedError("explained_variance: non-finite result");
                return g;
            }

        private:
            static linalg::HermitianFactor make_factor(double c, cd q, const std::vector<long> &offs, double s)
            {
                if (!(s > 0.0))
                    throw std::invalid_argument("explained_variance: pilot noise must be > 0");
                const auto p = static_cast<Eigen::Index>(offs.size());
                return linalg::HermitianFactor(c * pilot_kernel(q, offs) + s * CMatrix::Identity(p, p));
            }

            double c_;
            cd q_;
            long delta_;
            std::vector<long> offs_;
            linalg::HermitianFactor factor_;
        };

        inline double explained_variance(double c, cd q, const PilotWindow &w, long delta, long i, double s)
        {
            check_slot(delta, i);
            return ExplainedVariance(c, q, w, delta, s)(i);
        }

        inline double error_variance(double c, cd q, const PilotWindow &w, long delta, long i, double s)
        {
            return c - explained_variance(c, q, w, delta, i, s);
        }

        // Plug-in estimator built with q_assumed applied to a channel with q_true.
        inline double mismatched_error_variance(double c, cd q_true, cd q_assumed, const PilotWindow &w, long delta,
                                                long i, double s)
        {
            check_slot(delta, i);
            const auto offs = w.offsets(delta);
            const auto p = static_cast<Eigen::Index>(offs.size());
            const CMatrix ip = CMatrix::Identity(p, p);
            const CVector e_a = cross_vector(q_assumed, offs, i);
            const CVector e_t = cross_vector(q_true, offs, i);
            const CMatrix f_t = c * pilot_kernel(q_true, offs) + s * ip;
            // Columns hold H^H for the assumed and the true statistics.
            const CVector ha = c * linalg::hermitian_solve(c * pilot_kernel(q_assumed, offs) + s * ip, CMatrix(e_a.conjugate())).col(0);
            const CVector ht = c * linalg::hermitian_solve(f_t, CMatrix(e_t.conjugate())).col(0);
            const CVector d = ha - ht;
            const double z_matched = c - c * (e_t.transpose() * ht)(0).real();
            const double z = z_matched + (d.adjoint() * f_t * d)(0).real();
            if (!std::isfinite(z))
                throw IllConditionedError("mismatched_error_variance: non-finite result");
            return z;
        }
    }
}

#endif
