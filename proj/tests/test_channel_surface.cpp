// SPDX-License-Identifier: Apache-2.0
//
// astars: active STAR-RIS ISAC link-level simulator and optimizer
// Copyright (C) 2026 The astars authors
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

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace astars;
using namespace astars::testing;

namespace {
long double law_oracle(long double c_db, long double d, long double mu)
{
    return std::pow(10.0L, c_db / 10.0L) * std::exp(-mu * std::log(d));
}
}  // namespace

TEST(PathLoss, Values)
{
    EXPECT_DOUBLE_EQ(path_loss({0.0, 3.67, 1.0}), 1.0);
    const double a = path_loss({28.0, 3.67, 50.0});
    EXPECT_LT(rel_err(a, static_cast<double>(law_oracle(28.0L, 50.0L, 3.67L))), 1e-14);
    const double b = path_loss({26.0, 2.2, 8.0});
    EXPECT_LT(rel_err(b, static_cast<double>(law_oracle(26.0L, 8.0L, 2.2L))), 1e-14);
    EXPECT_GT(a, 0.0);
}

TEST(PathLoss, Errors)
{
    EXPECT_THROW(path_loss({28.0, 3.67, 0.0}), std::domain_error);
    EXPECT_THROW(path_loss({28.0, 3.67, -1.0}), std::domain_error);
    EXPECT_THROW(path_loss({28.0, -1.0, 5.0}), std::domain_error);
}

TEST(Steering, Values)
{
    const CVec a = steering_vector(0.0, 4);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(a(i), cplx(1.0, 0.0));
    const CVec b = steering_vector(pi / 2, 2);
    EXPECT_EQ(b(0), cplx(1.0, 0.0));
    EXPECT_LT(std::abs(b(1) - cplx(-1.0, 0.0)), 1e-15);
    const CVec c = steering_vector(pi / 6, 3);
    EXPECT_LT(std::abs(c(1) - std::exp(cplx(0.0, -pi / 2))), 1e-15);
    EXPECT_LT(std::abs(c(1) - cplx(0.0, -1.0)), 1e-15);
    EXPECT_LT(std::abs(c(2) - cplx(-1.0, 0.0)), 1e-15);
    EXPECT_THROW(steering_vector(2.0, 3), std::domain_error);
}

TEST(Steering, TargetChannel)
{
    const CVec a = surface_target_channel(0.0, 4.0, 2);
    EXPECT_LT(std::abs(a(0) - cplx(2.0, 0.0)), 1e-15);
    EXPECT_LT(std::abs(a(1) - cplx(2.0, 0.0)), 1e-15);
    const double beta = path_loss({28.0, 3.67, 50.0});
    const CVec h = surface_target_channel(pi / 6, beta, 5);
    const CVec o = std::sqrt(beta) * steering_vector(pi / 6, 5);
    EXPECT_LT((h - o).norm(), 1e-15);
    EXPECT_THROW(surface_target_channel(0.0, 0.0, 2), std::domain_error);
}

TEST(Rayleigh, Moments)
{
    RngStream r(21, {1});
    const CMat g = sample_rayleigh(1000, 1000, 1.0, r);
    const double p = g.cwiseAbs2().mean();
    EXPECT_NEAR(p, 1.0, 0.01);
    const double vr = g.real().array().square().mean();
    const double vi = g.imag().array().square().mean();
    EXPECT_NEAR(vr, 0.5, 0.005);
    EXPECT_NEAR(vi, 0.5, 0.005);
    RngStream r1(5, {2}), r2(5, {2});
    EXPECT_EQ((sample_rayleigh(3, 4, 2.0, r1) - sample_rayleigh(3, 4, 2.0, r2)).norm(), 0.0);
}

TEST(Channels, Shapes)
{
    ScenarioConfig c;
    const ChannelSet ch = realize_channels(c, 1, 0);
    EXPECT_EQ(ch.g.size(), 64u);
    EXPECT_EQ(ch.h_at.size(), 64u);
    EXPECT_EQ(ch.h_dk.size(), 64u);
    EXPECT_EQ(ch.t_k.size(), 64u);
    EXPECT_EQ(ch.g[0].rows(), 100);
    EXPECT_EQ(ch.g[0].cols(), 32);
    EXPECT_EQ(ch.h_dk[0].size(), 4u);
    const double beta_a = path_loss(c.surface_target);
    for (int i = 0; i < c.q; ++i) EXPECT_NEAR(std::abs(ch.h_at[7](i)), std::sqrt(beta_a), 1e-15);
}

TEST(Channels, ZeroAngleConstantTarget)
{
    ScenarioConfig c = small_scenario();
    c.theta_at_rad = 0.0;
    const ChannelSet ch = realize_channels(c, 2, 1);
    for (const auto& h : ch.h_at)
        for (int i = 1; i < c.q; ++i) EXPECT_EQ(h(i), h(0));
}

TEST(Channels, OrderIndependentKeys)
{
    ScenarioConfig c = small_scenario();
    c.flat_fading = false;
    c.n_subcarriers = 6;
    const ChannelSet a = realize_channels(c, 9, 3);
    ScenarioConfig c2 = c;
    c2.n_subcarriers = 2;
    const ChannelSet b = realize_channels(c2, 9, 3);
    EXPECT_EQ((a.g[1] - b.g[1]).norm(), 0.0);
    EXPECT_GT((a.g[1] - a.g[2]).norm(), 0.0);
    c.flat_fading = true;
    const ChannelSet f = realize_channels(c, 9, 3);
    EXPECT_EQ((f.g[0] - f.g[5]).norm(), 0.0);
}

TEST(Channels, TargetPhaseRotation)
{
    ScenarioConfig c = small_scenario();
    c.target_phase_rotation = true;
    const ChannelSet ch = realize_channels(c, 1, 0);
    const double step = -two_pi * c.delta_f_hz * c.surface_target.distance_m / speed_of_light;
    EXPECT_NEAR(wrap_pm_pi(std::arg(ch.h_at[1](0)) - std::arg(ch.h_at[0](0))), wrap_pm_pi(step), 1e-12);
}

TEST(Surface, CoefficientVectors)
{
    const int q = 3;
    SurfaceConfig s = make_surface(RVec::Ones(q), RVec::Zero(q), RVec::Zero(q), RVec::Ones(q), 4.0, true);
    EXPECT_LT((coefficient_vector(s, Side::reflect) - CVec::Ones(q)).norm(), 1e-15);
    s.alpha = RVec::Constant(q, 4.0);
    EXPECT_LT((coefficient_vector(s, Side::reflect) - CVec::Constant(q, 4.0)).norm(), 1e-15);
    const double h = 1.0 / std::sqrt(2.0);
    SurfaceConfig u = make_surface(RVec::Constant(q, h), RVec::Constant(q, pi), RVec::Zero(q), RVec::Constant(q, 2.0), 4.0,
                                   true);
    const CVec t = coefficient_vector(u, Side::transmit);
    for (int i = 0; i < q; ++i) EXPECT_LT(std::abs(t(i) - cplx(-2.0 * h, 0.0)), 1e-12);
}

TEST(Surface, Validation)
{
    const int q = 4;
    SurfaceConfig s;
    s.q = q;
    s.beta_t = RVec::Constant(q, 0.6);
    s.beta_r = RVec::Constant(q, 0.8);
    s.phi_t = RVec::Zero(q);
    s.phi_r = RVec::Zero(q);
    s.alpha = RVec::Ones(q);
    s.alpha_max = 4.0;
    EXPECT_TRUE(validate(s).empty());

    SurfaceConfig bad = s;
    bad.beta_t = RVec::Constant(q, 0.8);
    auto v = validate(bad);
    ASSERT_EQ(v.size(), static_cast<std::size_t>(q));
    EXPECT_EQ(v[0].kind, SurfaceViolation::Kind::energy_coupling);
    EXPECT_EQ(v[2].element, 2);
    EXPECT_THROW(coefficient_vector(bad, Side::reflect), SurfaceError);

    SurfaceConfig cap = s;
    cap.alpha(1) = 5.0;
    v = validate(cap);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, SurfaceViolation::Kind::alpha_range);
    EXPECT_EQ(v[0].element, 1);

    SurfaceConfig pas = s;
    pas.active = false;
    pas.alpha(0) = 2.0;
    v = validate(pas);
    ASSERT_FALSE(v.empty());
    EXPECT_EQ(v[0].kind, SurfaceViolation::Kind::passive_alpha);

    SurfaceConfig ph = s;
    ph.phi_r(3) = two_pi;
    v = validate(ph);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, SurfaceViolation::Kind::phase_range);
}

TEST(Surface, RandomConfig)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RngStream r(seed, {1});
        const SurfaceConfig s = random_config(16, 4.0, true, r);
        EXPECT_TRUE(validate(s).empty());
        EXPECT_TRUE((s.alpha.array() == 4.0).all());
    }
    RngStream r1(3, {1}), r2(3, {1});
    const SurfaceConfig a = random_config(8, 4.0, false, r1);
    const SurfaceConfig b = random_config(8, 4.0, false, r2);
    EXPECT_TRUE((a.alpha.array() == 1.0).all());
    EXPECT_EQ((a.phi_r - b.phi_r).norm(), 0.0);
    EXPECT_EQ((a.beta_t - b.beta_t).norm(), 0.0);
}

TEST(Surface, PassiveBaseline)
{
    RngStream r(4, {1});
    const SurfaceConfig s = random_config(8, 4.0, true, r);
    const SurfaceConfig p = passive_baseline(s);
    EXPECT_FALSE(p.active);
    EXPECT_TRUE((p.alpha.array() == 1.0).all());
    EXPECT_EQ((p.phi_r - s.phi_r).norm(), 0.0);
    EXPECT_EQ((p.phi_t - s.phi_t).norm(), 0.0);
    const SurfaceConfig pp = passive_baseline(p);
    EXPECT_EQ((pp.alpha - p.alpha).norm(), 0.0);
    EXPECT_EQ(pp.active, p.active);
}

// amplification wins over the passive surface only while its dynamic noise stays small
TEST(Surface, AmplificationVersusPassiveAtEqualPhases)
{
    ScenarioConfig c = small_scenario(16, 8, 2);
    const ChannelSet ch = realize_channels(c, 5, 0);
    RngStream r(5, {0, key(StreamId::surface_init)});
    const SurfaceConfig act = random_config(c.q, 4.0, true, r);
    const SurfaceConfig pas = passive_baseline(act);
    Precoders w;
    w.w_r = std::sqrt(1.0 / c.m) * CMat::Identity(c.m, c.m);
    w.w_c = CMat::Zero(c.m, 0);
    auto snr = [&](const SurfaceConfig& s, const NoisePowers& np) { return link_radar_snr(make_link(ch, 0, s), w, np); };

    NoisePowers quiet = c.noise();
    quiet.sigma_v2 = db_to_linear(-100.0);
    EXPECT_LE(snr(pas, quiet), snr(act, quiet));
    // at the scenario noise levels the injected noise dominates the echo noise
    EXPECT_GT(snr(pas, c.noise()), snr(act, c.noise()));
}
