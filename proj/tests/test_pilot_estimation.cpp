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

#include <agingmimo/bounds.hpp>
#include <agingmimo/pilot_estimation.hpp>

#include <catch_amalgamated.hpp>

#include <random>

using namespace agingmimo;
using Catch::Approx;

namespace
{
    ChannelParams iid_channel(Eigen::Index n, double c, double q_bar)
    {
        ChannelParams p;
        p.covariance = scaled_identity_covariance(n, c);
        p.decay_rate = {q_bar, 0.0};
        p.alpha = 1.0;
        return p;
    }

    UserLink link(const ChannelParams &p, double pilot_power = 1.0, double data_power = 1.0)
    {
        UserLink u;
        u.channel = p;
        u.pilot_power = pilot_power;
        u.data_power = data_power;
        return u;
    }

    double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

    const std::vector<PilotWindow> kWindows = {PilotWindow::two_before_one_after(), PilotWindow::one_before_one_after(),
                                               PilotWindow::two_before()};
}

TEST_CASE("pilot windows")
{
    const auto w = PilotWindow::two_before_one_after();
    CHECK(w.offsets(3) == std::vector<long>{-4, 0, 4});
    CHECK(PilotWindow::parse("1b,1a").offsets(5) == std::vector<long>{0, 6});
    CHECK(PilotWindow::parse("2b").offsets(2) == std::vector<long>{-3, 0});
    CHECK(PilotWindow::parse("2b,1a").name() == "2b,1a");
    CHECK(PilotWindow({-2, -1, 0, 1}).name() == "3b,1a");
    CHECK_THROWS_AS(PilotWindow::parse("3a"), std::invalid_argument);
    CHECK_THROWS_AS(PilotWindow({0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(PilotWindow(std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("cross covariance block row")
{
    const ChannelParams stat = iid_channel(2, 1.5, 0.0);
    const CMatrix e = build_cross_covariance(stat, PilotWindow::one_before_one_after(), 4, 2);
    CHECK((e.leftCols(2) - stat.covariance).norm() == 0.0);
    CHECK((e.rightCols(2) - stat.covariance).norm() == 0.0);

    const double c = 2.0;
    const ChannelParams p = iid_channel(2, c, -0.1);
    const CMatrix e3 = build_cross_covariance(p, PilotWindow::two_before_one_after(), 3, 1);
    const CMatrix id = CMatrix::Identity(2, 2);
    CHECK((e3.block(0, 0, 2, 2) - c * std::exp(-0.5) * id).norm() < 1e-14);
    CHECK((e3.block(0, 2, 2, 2) - c * std::exp(-0.1) * id).norm() < 1e-14);
    CHECK((e3.block(0, 4, 2, 2) - c * std::exp(-0.3) * id).norm() < 1e-14);

    // Two-pilot window: slot i and delta + 1 - i see the two blocks swapped.
    const ChannelParams pc = iid_channel(2, c, -0.07);
    const CMatrix a = build_cross_covariance(pc, PilotWindow::one_before_one_after(), 9, 3);
    const CMatrix b = build_cross_covariance(pc, PilotWindow::one_before_one_after(), 9, 7);
    CHECK((a.leftCols(2) - b.rightCols(2)).norm() < 1e-15);
    CHECK((a.rightCols(2) - b.leftCols(2)).norm() < 1e-15);

    CHECK_THROWS_AS(build_cross_covariance(p, PilotWindow::two_before_one_after(), 3, 0), std::out_of_range);
    CHECK_THROWS_AS(build_cross_covariance(p, PilotWindow::two_before_one_after(), 3, 4), std::out_of_range);
}

TEST_CASE("pilot stack covariance")
{
    CMatrix c(2, 2);
    c << 2.0, cd(0.5, 0.5), cd(0.5, -0.5), 1.0;
    ChannelParams p;
    p.covariance = c;
    p.decay_rate = {0.0, 0.0};
    const CMatrix m = build_pilot_stack_covariance(p, PilotWindow::two_before_one_after(), 5);
    CMatrix ones = CMatrix::Ones(3, 3);
    CMatrix kron(6, 6);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            kron.block(2 * a, 2 * b, 2, 2) = ones(a, b) * c;
    CHECK((m - kron).norm() < 1e-15);

    p.decay_rate = {-50.0, 0.0};
    const CMatrix md = build_pilot_stack_covariance(p, PilotWindow::two_before_one_after(), 5);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            CHECK(md.block(2 * a, 2 * b, 2, 2).norm() < (a == b ? 10.0 : 1e-100));
    CHECK(linalg::is_hermitian(md));
}

TEST_CASE("scalar pilot kernel eigenvalues follow the closed forms")
{
    // With offsets spaced by delta + 1 the kernel is M3 with a^i = exp(q_bar (delta + 1)).
    for (double q_bar : {-0.01, -0.1, -0.4})
        for (long delta : {1L, 3L, 7L, 21L})
        {
            const ChannelParams p = iid_channel(1, 1.0, q_bar);
            const CMatrix m = build_pilot_stack_covariance(p, PilotWindow::two_before_one_after(), delta);
            const RVector ev = linalg::hermitian_eigenvalues(m);
            const auto closed = m3_eigenvalues(std::exp(2.0 * q_bar), (delta + 1) / 2);
            std::array<double, 3> sorted = closed;
            std::sort(sorted.begin(), sorted.end());
            for (int k = 0; k < 3; ++k)
                CHECK(ev(k) == Approx(sorted[static_cast<std::size_t>(k)]).margin(1e-12));
        }
}

TEST_CASE("error covariance closed forms")
{
    // q = 0, three pilots, C = c I: only the all-ones direction is observed.
    for (double c : {0.5, 1.0, 3.0})
        for (double s : {1e-3, 0.1, 2.0})
        {
            const ChannelParams p = iid_channel(3, c, 0.0);
            const CMatrix e = build_cross_covariance(p, PilotWindow::two_before_one_after(), 4, 2);
            const CMatrix m = build_pilot_stack_covariance(p, PilotWindow::two_before_one_after(), 4);
            const CMatrix z = error_covariance(p.covariance, e, m, s);
            const double expect = c * s / (3.0 * c + s);
            CHECK((z - expect * CMatrix::Identity(3, 3)).norm() < 1e-12 * c);
        }

    const ChannelParams p = iid_channel(2, 1.0, 0.0);
    const CMatrix e = build_cross_covariance(p, PilotWindow::two_before_one_after(), 4, 2);
    const CMatrix m = build_pilot_stack_covariance(p, PilotWindow::two_before_one_after(), 4);
    CHECK(error_covariance(p.covariance, e, m, 1e-9).norm() < 1e-8);

    // Far from any pilot the prior is left untouched.
    const ChannelParams fast = iid_channel(2, 1.0, -5.0);
    const CMatrix ef = build_cross_covariance(fast, PilotWindow::one_before_one_after(), 20, 10);
    const CMatrix mf = build_pilot_stack_covariance(fast, PilotWindow::one_before_one_after(), 20);
    CHECK((error_covariance(fast.covariance, ef, mf, 0.1) - fast.covariance).norm() < 1e-12);

    CHECK_THROWS_AS(error_covariance(p.covariance, e, m, 0.0), std::invalid_argument);
}

TEST_CASE("effective signal covariance")
{
    ChannelParams p = iid_channel(2, 2.0, -0.1);
    p.alpha = 0.5;
    CHECK(effective_signal_covariance(p, p.covariance, 3.0).norm() == 0.0);
    CHECK((effective_signal_covariance(p, CMatrix::Zero(2, 2), 3.0) - 0.75 * p.covariance).norm() < 1e-15);

    const UserLink u = link(p, 2.0, 3.0);
    const NoiseParams n{0.01, 0.01};
    const FrameConfig f{6, 4};
    const EstimationMoments m = estimation_moments(u, PilotWindow::one_before_one_after(), f, n, 2);
    const double z = scalar::error_variance(2.0, p.decay_rate, PilotWindow::one_before_one_after(), 6, 2,
                                            pilot_noise_variance(u, f, n));
    CHECK(m.signal_covariance(0, 0).real() == Approx(0.25 * 3.0 * (2.0 - z)).epsilon(1e-12));
    CHECK(m.pilot_noise == Approx(0.01 / (0.25 * 2.0 * 4.0)));
}

TEST_CASE("error covariance invariants on random instances")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uc(0.1, 5.0), ur(-0.9, 0.9), uq(-1.0, -1e-4), us(-6.0, 1.0);
    std::uniform_int_distribution<long> ud(1, 60);
    for (int rep = 0; rep < 300; ++rep)
    {
        ChannelParams p;
        p.covariance = exponential_correlation_covariance(4, uc(rng), ur(rng));
        p.decay_rate = {uq(rng), 0.0};
        const long delta = ud(rng);
        const long i = std::uniform_int_distribution<long>(1, delta)(rng);
        const double s = std::pow(10.0, us(rng));
        const PilotWindow &w = kWindows[static_cast<std::size_t>(rep) % 3];
        const CMatrix z = error_covariance(p.covariance, build_cross_covariance(p, w, delta, i),
                                           build_pilot_stack_covariance(p, w, delta), s);
        const double scale = linalg::spectral_norm(p.covariance);
        CHECK(linalg::is_hermitian(z, 1e-12));
        CHECK(linalg::min_eigenvalue(z) >= -1e-9 * scale);
        CHECK(linalg::min_eigenvalue(p.covariance - z) >= -1e-9 * scale);
    }
}

TEST_CASE("scalar path equals the matrix path for C = c I")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uc(0.1, 5.0), uq(-1.0, -1e-4), us(-5.0, 1.0);
    std::uniform_int_distribution<long> ud(1, 80);
    for (int rep = 0; rep < 300; ++rep)
    {
        const double c = uc(rng);
        const ChannelParams p = iid_channel(3, c, uq(rng));
        const long delta = ud(rng);
        const long i = std::uniform_int_distribution<long>(1, delta)(rng);
        const double s = std::pow(10.0, us(rng));
        const PilotWindow &w = kWindows[static_cast<std::size_t>(rep) % 3];
        const CMatrix z = error_covariance(p.covariance, build_cross_covariance(p, w, delta, i),
                                           build_pilot_stack_covariance(p, w, delta), s);
        const double zs = scalar::error_variance(c, p.decay_rate, w, delta, i, s);
        CHECK(rel(z(0, 0).real(), zs) < 1e-10);
        CHECK((z - z(0, 0) * CMatrix::Identity(3, 3)).norm() < 1e-12 * c);
    }
}

TEST_CASE("scalar error variance: monotone in pilot noise, symmetric, more pilots help")
{
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> uq(-0.5, -1e-3);
    std::uniform_int_distribution<long> ud(1, 60);
    for (int rep = 0; rep < 200; ++rep)
    {
        const double q_bar = uq(rng);
        const long delta = ud(rng);
        const long i = std::uniform_int_distribution<long>(1, delta)(rng);
        const cd q{q_bar, 0.0};

        double prev = -1.0;
        for (double s : {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0})
        {
            const double z = scalar::error_variance(1.0, q, PilotWindow::two_before_one_after(), delta, i, s);
            CHECK(z > prev);
            prev = z;
        }

        const double s = 0.05;
        const auto pair = PilotWindow::one_before_one_after();
        const double zi = scalar::error_variance(1.0, q, pair, delta, i, s);
        const double zm = scalar::error_variance(1.0, q, pair, delta, delta + 1 - i, s);
        CHECK(std::abs(zi - zm) <= 1e-12);

        const double z3 = scalar::error_variance(1.0, q, PilotWindow::two_before_one_after(), delta, i, s);
        const double z2b = scalar::error_variance(1.0, q, PilotWindow::two_before(), delta, i, s);
        CHECK(z3 <= zi + 1e-14);
        CHECK(z3 <= z2b + 1e-14);
    }

    // Matrix version of the symmetry on a correlated prior.
    ChannelParams p;
    p.covariance = exponential_correlation_covariance(3, 1.0, 0.6);
    p.decay_rate = {-0.05, 0.0};
    const auto w = PilotWindow::one_before_one_after();
    for (long i = 1; i <= 12; ++i)
    {
        const CMatrix a = error_covariance(p.covariance, build_cross_covariance(p, w, 12, i),
                                           build_pilot_stack_covariance(p, w, 12), 0.02);
        const CMatrix b = error_covariance(p.covariance, build_cross_covariance(p, w, 12, 13 - i),
                                           build_pilot_stack_covariance(p, w, 12), 0.02);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("mmse estimate: linearity and Monte-Carlo moments")
{
    ChannelParams p;
    p.covariance = exponential_correlation_covariance(2, 1.0, 0.4);
    p.decay_rate = {-0.05, 0.0};
    p.alpha = 0.8;
    const UserLink u = link(p, 1.5, 1.0);
    const NoiseParams noise{0.2, 0.2};
    const FrameConfig f{5, 3};
    const PilotWindow w = PilotWindow::two_before_one_after();
    const long i = 2;
    const EstimationMoments m = estimation_moments(u, w, f, noise, i);

    CHECK(mmse_estimate(m, CVector::Zero(6)).norm() == 0.0);
    CHECK_THROWS_AS(mmse_estimate(m, CVector::Zero(5)), std::invalid_argument);

    const auto offs = w.offsets(f.delta);
    std::vector<long> slots(offs.begin(), offs.end());
    slots.push_back(i);
    std::sort(slots.begin(), slots.end());
    const std::size_t data_pos = static_cast<std::size_t>(std::find(slots.begin(), slots.end(), i) - slots.begin());
    JointChannelSampler sampler(p, slots);
    std::mt19937_64 rng(31);
    const double noise_sd = std::sqrt(static_cast<double>(f.tau_p()) * noise.sigma2_pilot);

    const int draws = 100000;
    CMatrix cov_hat = CMatrix::Zero(2, 2), cov_err = CMatrix::Zero(2, 2);
    for (int d = 0; d < draws; ++d)
    {
        const auto h = sampler.draw(rng);
        CVector y(6);
        Eigen::Index pos = 0;
        for (std::size_t s = 0; s < slots.size(); ++s)
        {
            if (s == data_pos)
                continue;
            y.segment(2 * pos, 2) = m.despread_gain * h[s] + noise_sd * standard_complex_normal(2, rng);
            ++pos;
        }
        const CVector est = mmse_estimate(m, y);
        const CVector err = est - h[data_pos];
        cov_hat += est * est.adjoint();
        cov_err += err * err.adjoint();
    }
    cov_hat /= draws;
    cov_err /= draws;
    const CMatrix expect_hat = p.covariance - m.error_covariance;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
        {
            const double se_hat = std::sqrt(expect_hat(a, a).real() * expect_hat(b, b).real() / draws);
            const double se_err = std::sqrt(m.error_covariance(a, a).real() * m.error_covariance(b, b).real() / draws);
            CHECK(std::abs(cov_hat(a, b) - expect_hat(a, b)) < 3.0 * se_hat);
            CHECK(std::abs(cov_err(a, b) - m.error_covariance(a, b)) < 3.0 * se_err);
        }
}

TEST_CASE("mismatched statistics")
{
    ChannelParams truth_p;
    truth_p.covariance = exponential_correlation_covariance(3, 1.0, 0.3);
    truth_p.decay_rate = decay_rate_from_doppler({500.0, 32e-6});
    truth_p.alpha = std::pow(10.0, -90.0 / 20.0);
    const UserLink truth = link(truth_p, 125.0, 125.0);
    const NoiseParams noise{1.25e-11, 1.25e-11};
    const FrameConfig f{12, 12};
    const PilotWindow w = PilotWindow::one_before_one_after();

    for (long i = 1; i <= 12; ++i)
    {
        const auto [zm, phim] = mismatched_error_covariance(truth, truth_p, w, f, noise, i);
        const EstimationMoments m = estimation_moments(truth, w, f, noise, i);
        CHECK((zm - m.error_covariance).norm() <= 1e-12 * m.error_covariance.norm());
        CHECK((phim - m.signal_covariance).norm() <= 1e-10 * m.signal_covariance.norm());
    }

    const double s = pilot_noise_variance(truth, f, noise);
    const cd q = truth_p.decay_rate;
    for (long i = 1; i <= 12; ++i)
    {
        const double z = scalar::error_variance(1.0, q, w, 12, i, s);
        for (double factor : {0.2, 5.0})
        {
            const cd qa = decay_rate_from_doppler({500.0 * factor, 32e-6});
            CHECK(scalar::mismatched_error_variance(1.0, q, qa, w, 12, i, s) >= z - 1e-15);
        }
        CHECK(rel(scalar::mismatched_error_variance(1.0, q, q, w, 12, i, s), z) < 1e-10);
    }
    const double z_mid = scalar::error_variance(1.0, q, w, 12, 6, s);
    CHECK(scalar::mismatched_error_variance(1.0, q, {0.0, 0.0}, w, 12, 6, s) > z_mid * (1.0 + 1e-6));

    // Matrix and scalar mismatch paths agree for C = c I.
    ChannelParams iid = iid_channel(2, 1.0, q.real());
    iid.alpha = truth_p.alpha;
    ChannelParams assumed = iid;
    assumed.decay_rate = decay_rate_from_doppler({2500.0, 32e-6});
    const auto [zmat, phimat] = mismatched_error_covariance(link(iid, 125.0, 125.0), assumed, w, f, noise, 4);
    CHECK(rel(zmat(0, 0).real(), scalar::mismatched_error_variance(1.0, q, assumed.decay_rate, w, 12, 4, s)) < 1e-10);
    CHECK(linalg::is_psd(phimat));

    ChannelParams wrong_size = iid_channel(4, 1.0, -0.1);
    CHECK_THROWS_AS(mismatched_error_covariance(link(iid), wrong_size, w, f, noise, 1), std::invalid_argument);
}
