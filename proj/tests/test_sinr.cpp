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

#include <agingmimo/sinr.hpp>

#include <catch_amalgamated.hpp>

#include <random>

using namespace agingmimo;
using Catch::Approx;

namespace
{
    double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

    Scenario iid_scenario(long n_r, std::size_t k_users, double doppler_hz, double sigma2 = 1.25e-11)
    {
        Scenario sc;
        sc.frame = {1, 12};
        sc.window = PilotWindow::one_before_one_after();
        sc.noise = {sigma2, sigma2};
        for (std::size_t k = 0; k < k_users; ++k)
        {
            UserLink u;
            u.channel.covariance = scaled_identity_covariance(n_r, 1.0);
            u.channel.decay_rate = decay_rate_from_doppler({doppler_hz, 32e-6});
            u.channel.alpha = std::pow(10.0, -90.0 / 20.0);
            sc.users.push_back(u);
        }
        return sc;
    }

    CMatrix random_psd(Eigen::Index n, std::mt19937_64 &rng, double scale)
    {
        std::normal_distribution<double> nd;
        CMatrix a(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                a(i, j) = cd(nd(rng), nd(rng));
        return scale * a * a.adjoint() / static_cast<double>(n);
    }

    // Positive root of beta g^2 + (beta + phi - N phi) g - N phi = 0.
    double quadratic_root(double phi, double beta, double n)
    {
        const double b = beta + phi - n * phi;
        return (-b + std::sqrt(b * b + 4.0 * beta * n * phi)) / (2.0 * beta);
    }
}

TEST_CASE("interference floor")
{
    Scenario sc = iid_scenario(3, 2, 500.0);
    const std::vector<CMatrix> zero(2, CMatrix::Zero(3, 3));
    CHECK((interference_floor(sc, zero) - sc.noise.sigma2_data * CMatrix::Identity(3, 3)).norm() == 0.0);

    Scenario one = iid_scenario(3, 1, 500.0);
    const std::vector<CMatrix> z1 = {0.2 * CMatrix::Identity(3, 3)};
    const double a2p = std::pow(10.0, -9.0) * 125.0;
    CHECK(interference_floor(one, z1)(1, 1).real() == Approx(a2p * 0.2 + 1.25e-11));

    Scenario louder = sc;
    louder.noise.sigma2_data *= 2.0;
    const std::vector<CMatrix> z = {0.1 * CMatrix::Identity(3, 3), 0.3 * CMatrix::Identity(3, 3)};
    CHECK(linalg::is_psd(interference_floor(louder, z) - interference_floor(sc, z)));
    CHECK(linalg::min_eigenvalue(interference_floor(louder, z) - interference_floor(sc, z)) > 0.0);
}

TEST_CASE("deterministic equivalent: trivial cases")
{
    std::mt19937_64 rng(5);
    const CMatrix phi = random_psd(4, rng, 2.0);
    const CMatrix beta = random_psd(4, rng, 1.0) + 0.5 * CMatrix::Identity(4, 4);
    const SinrResult r = deterministic_equivalent_sinr({phi}, beta, 0);
    CHECK(r.iterations == 0);
    CHECK(r.gamma_bar == Approx((phi * linalg::hermitian_inverse(beta)).trace().real()).epsilon(1e-12));

    const SinrResult z = deterministic_equivalent_sinr({CMatrix::Zero(4, 4), phi}, beta, 0);
    CHECK(z.gamma_bar == 0.0);

    CHECK_THROWS_AS(deterministic_equivalent_sinr({phi}, beta, 1), std::invalid_argument);
}

TEST_CASE("deterministic equivalent: K = 2 symmetric users match the quadratic")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> lphi(-2.0, 2.0), lbeta(-2.0, 1.0);
    std::uniform_int_distribution<long> un(1, 64);
    for (int rep = 0; rep < 100; ++rep)
    {
        const long n = un(rng);
        const double phi = std::pow(10.0, lphi(rng));
        const double beta = std::pow(10.0, lbeta(rng));
        const CMatrix id = CMatrix::Identity(n, n);
        const double expect = quadratic_root(phi, beta, static_cast<double>(n));
        const SinrResult r = deterministic_equivalent_sinr({phi * id, phi * id}, beta * id, 0);
        CHECK(rel(r.gamma_bar, expect) < 1e-10);
        CHECK(rel(scalar_iid_sinr({phi, phi}, beta, n, 1), expect) < 1e-10);
    }
}

TEST_CASE("scalar root: closed forms")
{
    CHECK(scalar_iid_sinr({0.7}, 0.2, 10, 0) == Approx(10 * 0.7 / 0.2).epsilon(1e-15));
    CHECK(scalar_iid_sinr({0.0, 1.0}, 0.2, 10, 0) == 0.0);
    // Linear growth in N_r for one user.
    CHECK(scalar_iid_sinr({0.7}, 0.2, 100, 0) == Approx(10.0 * scalar_iid_sinr({0.7}, 0.2, 10, 0)));
    // Silent interferers leave the single-user value.
    CHECK(scalar_iid_sinr({0.7, 0.0, 0.0}, 0.2, 8, 0) == Approx(8 * 0.7 / 0.2).epsilon(1e-15));
    CHECK_THROWS_AS(scalar_iid_sinr({0.7}, 0.0, 10, 0), std::invalid_argument);
}

TEST_CASE("fixed point residual, scalar agreement and trace ceiling on random instances")
{
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> uk(1, 5), un(1, 12);
    std::uniform_real_distribution<double> lsc(-2.0, 2.0);
    for (int rep = 0; rep < 150; ++rep)
    {
        const int k_users = uk(rng);
        const Eigen::Index n = un(rng);
        std::vector<CMatrix> phi;
        for (int k = 0; k < k_users; ++k)
            phi.push_back(random_psd(n, rng, std::pow(10.0, lsc(rng))));
        const CMatrix beta = random_psd(n, rng, 0.3) + std::pow(10.0, lsc(rng)) * CMatrix::Identity(n, n);
        const std::size_t tagged = static_cast<std::size_t>(rep % k_users);
        const SinrResult r = deterministic_equivalent_sinr(phi, beta, tagged);

        // Re-substitute: delta_m = tr(Phi_m T).
        CMatrix a = beta;
        for (int m = 0; m < k_users; ++m)
            if (static_cast<std::size_t>(m) != tagged)
                a += phi[static_cast<std::size_t>(m)] / (1.0 + r.deltas[static_cast<std::size_t>(m)]);
        const CMatrix t = linalg::hermitian_inverse(a);
        for (int m = 0; m < k_users; ++m)
        {
            const double dm = (phi[static_cast<std::size_t>(m)] * t).trace().real();
            CHECK(std::abs(dm - r.deltas[static_cast<std::size_t>(m)]) <= 1e-10 * std::max(1.0, dm));
        }

        const double ceiling = (phi[tagged] * linalg::hermitian_inverse(beta)).trace().real();
        CHECK(r.gamma_bar <= ceiling * (1.0 + 1e-12));

        // Scaling an interferer up never helps the tagged user.
        if (k_users > 1)
        {
            auto louder = phi;
            louder[(tagged + 1) % static_cast<std::size_t>(k_users)] *= 3.0;
            CHECK(deterministic_equivalent_sinr(louder, beta, tagged).gamma_bar <= r.gamma_bar * (1.0 + 1e-12));
        }

        // Scalar versions of the same instance.
        std::vector<double> phis;
        std::vector<CMatrix> phid;
        for (int k = 0; k < k_users; ++k)
        {
            phis.push_back(std::pow(10.0, lsc(rng)));
            phid.push_back(phis.back() * CMatrix::Identity(n, n));
        }
        const double b = std::pow(10.0, lsc(rng));
        const double g_mat = deterministic_equivalent_sinr(phid, b * CMatrix::Identity(n, n), tagged).gamma_bar;
        CHECK(rel(g_mat, scalar_iid_sinr(phis, b, n, tagged)) < 1e-10);
    }
}

TEST_CASE("fixed point reports non-convergence")
{
    const CMatrix id = CMatrix::Identity(2, 2);
    FixedPointOptions opt;
    opt.max_iterations = 1;
    CHECK_THROWS_AS(deterministic_equivalent_sinr({id, 5.0 * id, 3.0 * id}, 0.1 * id, 0, opt), ConvergenceError);
}

TEST_CASE("spectral efficiency per slot")
{
    CHECK(spectral_efficiency_slot(0.0) == 0.0);
    CHECK(spectral_efficiency_slot(1.0) == 1.0);
    CHECK(spectral_efficiency_slot(3.0) == 2.0);
    CHECK(spectral_efficiency_slot(std::exp(1.0) - 1.0, LogBase::Natural) == Approx(1.0));
    CHECK_THROWS_AS(spectral_efficiency_slot(-1.0), std::invalid_argument);
}

TEST_CASE("frame spectral efficiency")
{
    // Perfect-CSI style: one user whose per-slot SE is 2 gives SE(1) = 1.
    Scenario sc = iid_scenario(1, 1, 0.0, 1.0);
    sc.users[0].channel.alpha = 1.0;
    sc.users[0].data_power = 3.0;
    sc.users[0].pilot_power = 1e6;
    sc.noise = {1e-3, 1.0};
    const FrameSE f = frame_spectral_efficiency(sc, 1);
    CHECK(f.gamma[0][0] == Approx(3.0).epsilon(1e-9));
    CHECK(f.total == Approx(1.0).epsilon(1e-9));

    // Symmetric window: slot table mirrors about the centre.
    const Scenario sym = iid_scenario(10, 2, 1500.0);
    const FrameSE s = frame_spectral_efficiency(sym, 11);
    for (long i = 1; i <= 11; ++i)
        for (std::size_t u = 0; u < 2; ++u)
            CHECK(std::abs(s.slot_se[static_cast<std::size_t>(i - 1)][u] - s.slot_se[static_cast<std::size_t>(11 - i)][u]) <= 1e-10);

    // SE vanishes for very long frames.
    CHECK(frame_spectral_efficiency(iid_scenario(10, 2, 500.0), 3000).total < 0.05);

    // Matrix and scalar dispatch agree.
    Scenario corr = iid_scenario(4, 2, 500.0);
    const std::vector<double> g = slot_sinr(corr, 7, 3);
    const SlotMoments m = slot_moments(corr, 7, 3, true);
    const CMatrix beta = interference_floor(corr, m.z);
    for (std::size_t t = 0; t < 2; ++t)
        CHECK(rel(deterministic_equivalent_sinr(m.phi, beta, t).gamma_bar, g[t]) < 1e-10);

    // Threads do not change the answer.
    const FrameSE a = frame_spectral_efficiency(iid_scenario(10, 2, 500.0), 40, LogBase::Two, 1);
    const FrameSE b = frame_spectral_efficiency(iid_scenario(10, 2, 500.0), 40, LogBase::Two, 4);
    CHECK(a.total == b.total);
}

TEST_CASE("scenario validation")
{
    Scenario sc = iid_scenario(4, 2, 500.0);
    CHECK_NOTHROW(sc.validate());
    Scenario many = sc;
    many.frame.frequency_channels = 1;
    CHECK_THROWS_AS(many.validate(), std::invalid_argument);
    Scenario mixed = sc;
    mixed.users[1].channel.covariance = scaled_identity_covariance(3, 1.0);
    CHECK_THROWS_AS(mixed.validate(), std::invalid_argument);
    Scenario none = sc;
    none.users.clear();
    CHECK_THROWS_AS(none.validate(), std::invalid_argument);
    CHECK(sc.scalar_iid());
    sc.users[0].channel.covariance = exponential_correlation_covariance(4, 1.0, 0.2);
    CHECK_FALSE(sc.scalar_iid());
}

TEST_CASE("Monte-Carlo oracle")
{
    Scenario sc = iid_scenario(32, 2, 500.0);
    const long delta = 8, i = 4;
    const MonteCarloResult a = monte_carlo_sinr(sc, delta, i, 400, 77);
    const double de = slot_sinr(sc, delta, i)[0];
    CHECK(rel(a.mean, de) < 0.1);

    const MonteCarloResult b = monte_carlo_sinr(sc, delta, i, 400, 77, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    const MonteCarloResult one = monte_carlo_sinr(sc, delta, i, 1, 5);
    CHECK(one.mean == monte_carlo_sinr(sc, delta, i, 1, 5).mean);

    // Near-perfect CSI on a static channel: mean equals tr(Phi T) with Z = 0 (here alpha^2 P N / sigma^2).
    Scenario clean = iid_scenario(16, 1, 0.0, 1.0);
    clean.users[0].channel.alpha = 1.0;
    clean.users[0].data_power = 1.0;
    clean.users[0].pilot_power = 1e3;
    clean.noise = {1e-6, 1.0};
    const MonteCarloResult c = monte_carlo_sinr(clean, 2, 1, 4000, 3);
    CHECK(std::abs(c.mean - 16.0) < 4.0 * c.stderr_ + 1e-6);

    CHECK_THROWS_AS(monte_carlo_sinr(sc, delta, i, 0, 1), std::invalid_argument);
}
