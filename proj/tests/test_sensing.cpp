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

#include <algorithm>

using namespace astars;
using namespace astars::testing;

namespace {

SurfaceConfig surface_with_phases(const RVec& phi_r)
{
    const auto q = phi_r.size();
    return make_surface(RVec::Constant(q, 0.8), RVec::Zero(q), phi_r, RVec::Ones(q), 4.0, true);
}

std::vector<EchoSubcarrier> random_rows(int n, int width, RngStream& r)
{
    std::vector<EchoSubcarrier> out(n);
    for (auto& e : out) {
        e.signal_row = random_cvec(width, r).transpose();
        e.noise_var = 0.01;
    }
    return out;
}

OfdmGrid sensing_grid(int n = 64, double df = 240e3)
{
    OfdmGrid g;
    g.n_subcarriers = n;
    g.delta_f = df;
    g.n_symbols = 14;
    return g;
}

}  // namespace

TEST(RisIncrements, Examples)
{
    EXPECT_EQ(ris_phase_increments(surface_with_phases(RVec::Constant(5, 1.2))).norm(), 0.0);
    RVec ramp(6);
    for (int i = 0; i < 6; ++i) ramp(i) = 0.4 * i;
    const RVec d = ris_phase_increments(surface_with_phases(ramp));
    ASSERT_EQ(d.size(), 5);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(d(i), 0.4, 1e-15);
    RngStream r(1, {0});
    for (int t = 0; t < 20; ++t) {
        const SurfaceConfig s = random_config(9, 4.0, true, r);
        EXPECT_NEAR(ris_phase_increments(s).sum(), s.phi_r(8) - s.phi_r(0), 1e-12);
    }
    EXPECT_THROW(ris_phase_increments(surface_with_phases(RVec::Zero(1))), std::invalid_argument);
}

TEST(RawPhase, Examples)
{
    EXPECT_EQ(raw_phase_diff(CVec::Constant(5, cplx(0.3, -2.0))).norm(), 0.0);
    CVec y(6);
    for (int i = 0; i < 6; ++i) y(i) = std::polar(2.0, 0.3 * i);
    const RVec d = raw_phase_diff(y);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(d(i), 0.3, 1e-14);
    CVec w(2);
    w << std::polar(1.0, 3.0), std::polar(1.0, -3.0);
    EXPECT_NEAR(raw_phase_diff(w)(0), two_pi - 6.0, 1e-14);
    EXPECT_NEAR(raw_phase_diff(w)(0), 0.283, 5e-4);
    CVec z = CVec::Ones(3);
    z(1) = 0.0;
    EXPECT_THROW(raw_phase_diff(z), std::domain_error);
    EXPECT_THROW(raw_phase_diff(CVec::Ones(1)), std::invalid_argument);
}

TEST(EffectivePhase, Examples)
{
    RngStream r(2, {0});
    RVec raw(7);
    for (int i = 0; i < 7; ++i) raw(i) = r.uniform(-pi, pi);
    EXPECT_LT((effective_phase_diff(raw, RVec::Zero(4)) - raw).norm(), 1e-15);
    RVec ris(3);
    ris << 0.2, -0.7, 0.4;
    const RVec flat = RVec::Constant(7, ris.sum());
    EXPECT_LT(effective_phase_diff(flat, ris).norm(), 1e-15);
    for (int t = 0; t < 20; ++t) {
        RVec inc(5);
        for (int i = 0; i < 5; ++i) inc(i) = r.uniform(-3.0, 3.0);
        const RVec eff = effective_phase_diff(raw, inc);
        for (int i = 0; i < 7; ++i) {
            double direct = raw(i) - inc.sum();
            while (direct > pi) direct -= two_pi;
            while (direct <= -pi) direct += two_pi;
            EXPECT_NEAR(eff(i), direct, 1e-12);
        }
    }
}

TEST(Estimators, WorkedValues)
{
    const RVec zero = RVec::Zero(1);
    EXPECT_EQ(estimate_range(zero, 240e3)(0), 0.0);
    EXPECT_NEAR(estimate_range(RVec::Constant(1, two_pi), 240e3)(0), 1249.14, 0.005);
    EXPECT_NEAR(estimate_range(RVec::Constant(1, two_pi), 240e3)(0), speed_of_light / 240e3, 1e-9);
    EXPECT_NEAR(estimate_range(RVec::Constant(1, pi), 120e3)(0), 1249.14, 0.005);
    EXPECT_EQ(estimate_doppler(zero, 17.68e-6)(0), 0.0);
    EXPECT_NEAR(estimate_doppler(RVec::Constant(1, two_pi), 17.68e-6)(0), 56561.0, 0.5);
    EXPECT_NEAR(estimate_doppler(RVec::Constant(1, 1.4), 2e-5)(0), 2.0 * estimate_doppler(RVec::Constant(1, 0.7), 2e-5)(0),
                1e-9);
    EXPECT_EQ(estimate_velocity(zero, 0.1)(0), 0.0);
    EXPECT_NEAR(estimate_velocity(RVec::Constant(1, 200.0), 0.1)(0), 10.0, 1e-12);
    EXPECT_NEAR(ms_to_kmh(estimate_velocity(RVec::Constant(1, 200.0), 0.1)(0)), 36.0, 1e-12);
    EXPECT_THROW(estimate_range(zero, 0.0), std::invalid_argument);
    EXPECT_THROW(estimate_doppler(zero, 0.0), std::invalid_argument);
    EXPECT_THROW(estimate_velocity(zero, -1.0), std::invalid_argument);
}

TEST(Estimators, RangeAmbiguity)
{
    RngStream r(3, {0});
    for (int t = 0; t < 20; ++t) {
        const double x = r.uniform(-pi, pi);
        const double df = r.uniform(30e3, 480e3);
        const double a = estimate_range(RVec::Constant(1, x), df)(0);
        const double b = estimate_range(RVec::Constant(1, x + two_pi), df)(0);
        EXPECT_NEAR(b - a, speed_of_light / df, 1e-8 * speed_of_light / df);
        EXPECT_NEAR(estimate_range(RVec::Constant(1, 3.0 * x), df)(0), 3.0 * a, 1e-9 * std::abs(a) + 1e-12);
    }
}

TEST(Mse, Examples)
{
    EXPECT_EQ(estimation_mse(std::vector<double>{5.0, 5.0, 5.0}, 5.0), 0.0);
    EXPECT_DOUBLE_EQ(estimation_mse(std::vector<double>{7.0}, 5.0), 4.0);
    EXPECT_DOUBLE_EQ(estimation_mse(std::vector<double>{4.0, 6.0, 4.0, 6.0}, 5.0), 1.0);
    EXPECT_THROW(estimation_mse(std::vector<double>{}, 1.0), std::invalid_argument);
    std::vector<double> v{1.0, 2.5, -3.0, 8.0, 0.1};
    const double m = estimation_mse(v, 1.3);
    std::reverse(v.begin(), v.end());
    EXPECT_DOUBLE_EQ(estimation_mse(v, 1.3), m);
    std::rotate(v.begin(), v.begin() + 2, v.end());
    EXPECT_DOUBLE_EQ(estimation_mse(v, 1.3), m);
    EXPECT_GE(m, 0.0);
}

TEST(RoundTrip, NoiselessResourceElementsRecoverTruth)
{
    RngStream r(4, {0});
    for (double df : {60e3, 120e3, 240e3}) {
        const OfdmGrid g = sensing_grid(64, df);
        const double amb = speed_of_light / df;
        for (double d : {20.0, 40.0, 333.3, 0.9 * amb})
            for (double v : {0.0, 50.0, 150.0, 300.0, -80.0}) {
                const TargetTruth t{d, v, 3e9};
                const double ris_total = r.uniform(-pi, pi);
                RngStream s(5, {1}), n(5, {2});
                const auto f = synthesize_echo(random_rows(64, 6, r), g, t, ris_total, EchoSynthesis::resource_element,
                                               false, s, n);
                const SensingRecord rec = analyze_echo(f, ris_total, g, t);
                EXPECT_LT(rel_err(rec.d_pooled, d), 1e-6) << d << " " << v << " " << df;
                if (v == 0.0)
                    EXPECT_LT(std::abs(rec.v_pooled), 1e-6);
                else
                    EXPECT_LT(rel_err(rec.v_pooled, v), 1e-6) << d << " " << v << " " << df;
                for (Eigen::Index i = 0; i < rec.d_hat.size(); ++i) EXPECT_LT(rel_err(rec.d_hat(i), d), 1e-6);
                EXPECT_LT(rec.mse_d, 1e-6 * d * d);
            }
    }
}

TEST(RoundTrip, TimeDomainSynthesisIsClose)
{
    RngStream r(6, {0});
    const OfdmGrid g = sensing_grid(64, 240e3);
    const TargetTruth t{40.0, 150.0, 3e9};
    RngStream s(6, {1}), n(6, {2});
    const auto f = synthesize_echo(random_rows(64, 6, r), g, t, 0.4, EchoSynthesis::time_domain, false, s, n);
    const SensingRecord rec = analyze_echo(f, 0.4, g, t);
    EXPECT_NEAR(rec.d_pooled, 40.0, 1.0);
    EXPECT_NEAR(rec.v_pooled, 150.0, 15.0);
}

TEST(RoundTrip, NoiseRaisesError)
{
    RngStream r(7, {0});
    const OfdmGrid g = sensing_grid(64, 240e3);
    const TargetTruth t{40.0, 100.0, 3e9};
    auto rows = random_rows(64, 6, r);
    for (auto& e : rows) e.noise_var = 1.0;
    RngStream s(7, {1}), n(7, {2});
    const auto f = synthesize_echo(rows, g, t, 0.0, EchoSynthesis::resource_element, true, s, n);
    const SensingRecord rec = analyze_echo(f, 0.0, g, t);
    EXPECT_GT(rec.mse_d, 0.0);
    EXPECT_GT(rec.mse_v, 0.0);
    EXPECT_TRUE(std::isfinite(rec.mse_v_literal));
    EXPECT_EQ(rec.v_hat.size(), 64);
    EXPECT_EQ(rec.d_hat.size(), 63);
    EXPECT_EQ(rec.f_d_eff.size(), 63);
}

TEST(EchoStatistic, NoiseVarianceAndCombiners)
{
    ScenarioConfig c = small_scenario(8, 4, 2);
    const ChannelSet ch = realize_channels(c, 2, 0);
    RngStream r(2, {3});
    const SurfaceConfig s = random_config(c.q, 4.0, true, r);
    const SubcarrierLink l = make_link(ch, 0, s);
    Precoders p;
    p.w_r = random_cmat(4, 4, r, 0.3);
    p.w_c = random_cmat(4, 2, r, 0.3);
    const NoisePowers np = c.noise();
    const auto e = echo_subcarrier(l, p, np, EchoCombining::coherent_sum);
    const CVec ones = CVec::Ones(4);
    const double var = np.sigma_r2 * 4 + np.sigma_v2 * ((l.radar.h_v1.adjoint() * ones).squaredNorm() +
                                                        (l.radar.h_v2.adjoint() * ones).squaredNorm());
    EXPECT_LT(rel_err(e.noise_var, var), 1e-12);
    EXPECT_LT((e.signal_row - ones.adjoint() * l.radar.h_t * p.stacked()).norm(), 1e-12 * e.signal_row.norm());

    const auto dom = echo_subcarrier(l, p, np, EchoCombining::dominant_direction);
    const CVec u = echo_combiner(l, p, EchoCombining::dominant_direction);
    EXPECT_NEAR(u.norm(), 1.0, 1e-12);
    EXPECT_GE(dom.signal_row.norm(), (ones.adjoint() * l.radar.h_t * p.stacked()).norm() / 2.0 * (1.0 - 1e-12));

    const SubcarrierLink lp = make_link(ch, 0, passive_baseline(s));
    EXPECT_DOUBLE_EQ(echo_subcarrier(lp, p, np, EchoCombining::coherent_sum).noise_var, np.sigma_r2 * 4);
}
