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

#ifndef AGINGMIMO_CHANNEL_MODEL_HPP
#define AGINGMIMO_CHANNEL_MODEL_HPP

#include "linalg.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace agingmimo
{
    // Maximum Doppler frequency and slot duration. All lags elsewhere are integer slot counts.
    struct DopplerSpec
    {
        double max_doppler_hz = 0.0;
        double slot_duration_s = 32e-6;

        void validate() const
        {
            if (!(max_doppler_hz >= 0.0) || !std::isfinite(max_doppler_hz))
                throw std::invalid_argument("DopplerSpec: max_doppler_hz must be >= 0");
            if (!(slot_duration_s > 0.0) || !std::isfinite(slot_duration_s))
                throw std::invalid_argument("DopplerSpec: slot_duration_s must be > 0");
        }
    };

    // Stationary covariance C, per-slot decay rate q (same for every antenna) and amplitude alpha.
    struct ChannelParams
    {
        CMatrix covariance;
        cd decay_rate{0.0, 0.0};
        double alpha = 1.0;

        Eigen::Index antennas() const { return covariance.rows(); }
        double decay_real() const { return decay_rate.real(); }

        void validate() const
        {
            if (covariance.rows() == 0 || covariance.rows() != covariance.cols())
                throw std::invalid_argument("ChannelParams: covariance must be square and non-empty");
            if (!covariance.allFinite())
                throw std::invalid_argument("ChannelParams: covariance has non-finite entries");
            if (!linalg::is_hermitian(covariance, 1e-10))
                throw std::invalid_argument("ChannelParams: covariance is not Hermitian");
            if (!linalg::is_psd(covariance, 1e-10))
                throw std::invalid_argument("ChannelParams: covariance is not positive semidefinite");
            if (!(decay_rate.real() <= 0.0) || !std::isfinite(decay_rate.imag()))
                throw std::invalid_argument("ChannelParams: Re(decay_rate) must be <= 0");
            if (!(alpha > 0.0) || !std::isfinite(alpha))
                throw std::invalid_argument("ChannelParams: alpha must be > 0");
        }
    };

    struct UserLink
    {
        ChannelParams channel;
        double data_power = 125.0;
        double pilot_power = 125.0;

        void validate() const
        {
            channel.validate();
            if (!(data_power > 0.0) || !std::isfinite(data_power))
                throw std::invalid_argument("UserLink: data_power must be > 0");
            if (!(pilot_power > 0.0) || !std::isfinite(pilot_power))
                throw std::invalid_argument("UserLink: pilot_power must be > 0");
        }
    };

    // Real decay rate -2 pi f_D T; the imaginary part is left at zero.
    inline cd decay_rate_from_doppler(const DopplerSpec &d)
    {
        d.validate();
        return {-2.0 * std::numbers::pi * d.max_doppler_hz * d.slot_duration_s, 0.0};
    }

    inline double doppler_from_decay(cd q, double slot_duration_s)
    {
        if (!(slot_duration_s > 0.0))
            throw std::invalid_argument("doppler_from_decay: slot_duration_s must be > 0");
        return -q.real() / (2.0 * std::numbers::pi * slot_duration_s);
    }

    // Scalar factor exp(conj(q) * lag) of the autocorrelation.
    inline cd decay_factor(cd q, long lag)
    {
        return std::exp(std::conj(q) * static_cast<double>(lag));
    }

    // R(lag) = E(h(t) h^H(t + lag)) = C exp(conj(q) lag)
    inline CMatrix autocorrelation(const ChannelParams &p, long lag)
    {
        if (lag < 0)
            throw std::invalid_argument("autocorrelation: lag must be >= 0");
        if (lag == 0)
            return p.covariance;
        return p.covariance * decay_factor(p.decay_rate, lag);
    }

    // E(h(t1) h^H(t2)) for arbitrary slot pair.
    inline CMatrix cross_covariance(const ChannelParams &p, long t1, long t2)
    {
        if (t2 >= t1)
            return autocorrelation(p, t2 - t1);
        return autocorrelation(p, t1 - t2).adjoint();
    }

    // Reference Jakes curve c J0(2 pi f_D T lag); not used by the estimator.
    inline double bessel_autocorrelation(const DopplerSpec &d, double c_scale, long lag)
    {
        d.validate();
        if (lag < 0)
            throw std::invalid_argument("bessel_autocorrelation: lag must be >= 0");
        const double x = 2.0 * std::numbers::pi * d.max_doppler_hz * d.slot_duration_s * static_cast<double>(lag);
        return c_scale * std::cyl_bessel_j(0.0, x);
    }

    inline CMatrix scaled_identity_covariance(Eigen::Index n, double c)
    {
        if (n <= 0)
            throw std::invalid_argument("scaled_identity_covariance: n must be > 0");
        if (!(c >= 0.0))
            throw std::invalid_argument("scaled_identity_covariance: c must be >= 0");
        return CMatrix::Identity(n, n) * c;
    }

    // C_mn = c r^|m-n|, |r| < 1
    inline CMatrix exponential_correlation_covariance(Eigen::Index n, double c, double r)
    {
        if (n <= 0)
            throw std::invalid_argument("exponential_correlation_covariance: n must be > 0");
        if (!(c >= 0.0) || !(std::abs(r) < 1.0))
            throw std::invalid_argument("exponential_correlation_covariance: need c >= 0 and |r| < 1");
        CMatrix out(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                out(i, j) = c * std::pow(r, static_cast<double>(std::abs(i - j)));
        return out;
    }

    // Covariance of the stacked vector [h(t_1); ...; h(t_n)].
    inline CMatrix joint_covariance(const ChannelParams &p, const std::vector<long> &slots)
    {
        const Eigen::Index n = p.antennas();
        const Eigen::Index m = static_cast<Eigen::Index>(slots.size());
        CMatrix out(n * m, n * m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b)
                out.block(a * n, b * n, n, n) = cross_covariance(p, slots[a], slots[b]);
        return out;
    }

    inline CVector standard_complex_normal(Eigen::Index n, std::mt19937_64 &rng)
    {
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const double re = nd(rng);
            const double im = nd(rng);
            v(i) = cd(re, im);
        }
        return v;
    }

    // Draws the channel at a sorted list of slots. Consecutive slots are linked by the AR(1)
    // recursion h(t + l) = exp(q l) h(t) + w, w ~ CN(0, (1 - exp(2 Re(q) l)) C), which reproduces
    // the cross covariances of `cross_covariance` exactly.
    class JointChannelSampler
    {
    public:
        JointChannelSampler(const ChannelParams &p, std::vector<long> slots) : params_(p), slots_(std::move(slots))
        {
            if (slots_.empty())
                throw std::invalid_argument("JointChannelSampler: empty slot list");
            for (std::size_t k = 1; k < slots_.size(); ++k)
                if (slots_[k] < slots_[k - 1])
                    throw std::invalid_argument("JointChannelSampler: slots must be sorted ascending");
            if (params_.covariance.rows() == 0 || params_.covariance.rows() != params_.covariance.cols())
                throw std::invalid_argument("JointChannelSampler: covariance must be square");
            if (params_.decay_rate.real() > 0.0)
                throw IllConditionedError("JointChannelSampler: Re(q) > 0 gives a non-PSD joint covariance");

            Eigen::SelfAdjointEigenSolver<CMatrix> es(linalg::hermitian_part(params_.covariance));
            const RVector &ev = es.eigenvalues();
            const double lmax = std::max(1.0, ev.cwiseAbs().maxCoeff());
            if (ev.minCoeff() < -1e-10 * lmax)
                throw IllConditionedError("JointChannelSampler: covariance is not positive semidefinite");
            sqrt_cov_ = es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
        }

        const std::vector<long> &slots() const { return slots_; }

        std::vector<CVector> draw(std::mt19937_64 &rng) const
        {
            const Eigen::Index n = params_.antennas();
            const double qr = params_.decay_rate.real();
            std::vector<CVector> out;
            out.reserve(slots_.size());
            out.push_back(sqrt_cov_ * standard_complex_normal(n, rng));
            for (std::size_t k = 1; k < slots_.size(); ++k)
            {
                const double lag = static_cast<double>(slots_[k] - slots_[k - 1]);
                const cd a = std::exp(params_.decay_rate * lag);
                const double innov = 1.0 - std::exp(2.0 * qr * lag);
                CVector h = a * out.back();
                if (innov > 0.0)
                    h += std::sqrt(innov) * (sqrt_cov_ * standard_complex_normal(n, rng));
                out.push_back(std::move(h));
            }
            return out;
        }

    private:
        ChannelParams params_;
        std::vector<long> slots_;
        CMatrix sqrt_cov_;
    };

    inline std::vector<CVector> sample_joint_channel(const ChannelParams &p, const std::vector<long> &slots, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        return JointChannelSampler(p, slots).draw(rng);
    }
}

#endif
