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

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace astars;
using namespace astars::testing;

namespace {

struct Instance {
    CMat g;
    CVec h;
    CVec phi;
    Precoders w;
    NoisePowers np;
};

Instance random_instance(RngStream& r, int q = 8, int m = 4, int k = 2)
{
    Instance in;
    in.g = random_cmat(q, m, r);
    in.h = random_cvec(q, r);
    in.phi = random_cvec(q, r);
    in.w.w_r = random_cmat(m, m, r, 0.3);
    in.w.w_c = random_cmat(m, k, r, 0.5);
    in.np.sigma2 = 0.01;
    in.np.sigma_v2 = 0.03;
    in.np.sigma_r2 = 0.02;
    return in;
}

CVec random_in_disks(const RVec& radii, RngStream& r)
{
    CVec x(radii.size());
    for (Eigen::Index i = 0; i < radii.size(); ++i) x(i) = std::polar(radii(i) * std::sqrt(r.uniform()), two_pi * r.uniform());
    return x;
}

CMat random_hermitian_k(int n, RngStream& r) { return random_hermitian(n, r); }

}  // namespace

TEST(Kronecker, TraceIdentity)
{
    RngStream r(1, {0});
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const CMat b = random_hermitian(4, r), c = random_hermitian(4, r), k = random_hermitian_k(4, r);
        const cplx lhs = (b * k * c * k).trace();
        const cplx rhs = vec(k).dot(kron(c.transpose(), b) * vec(k));
        const cplx brute = oracles::trace_bkck(b, k, c);
        worst = std::max({worst, std::abs(lhs - rhs) / std::abs(lhs), std::abs(brute - rhs) / std::abs(brute)});
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(Cascade, Examples)
{
    RngStream r(2, {0});
    const Instance in = random_instance(r);
    EXPECT_EQ((cascade_matrix(in.g, CVec::Ones(8)) - in.g.adjoint()).norm(), 0.0);
    EXPECT_LT((cascade_matrix(in.g, 2.0 * in.h) - 2.0 * cascade_matrix(in.g, in.h)).norm(), 1e-14);
    const CMat gb = cascade_matrix(in.g, in.h);
    const CMat ht = gb * in.phi * in.phi.adjoint() * gb.adjoint();
    const auto sig = composite_radar_channels(in.g, in.phi, in.h);
    EXPECT_LT((ht - sig.h_t).norm(), 1e-12 * sig.h_t.norm());
    EXPECT_THROW(cascade_matrix(in.g, CVec::Ones(3)), std::invalid_argument);
}

TEST(Evaluators, AgreeWithSignalModel)
{
    RngStream r(3, {0});
    for (int t = 0; t < 100; ++t) {
        const Instance in = random_instance(r);
        const CMat gb = cascade_matrix(in.g, in.h);
        const auto num = numerator_form(gb, in.w.stacked());
        const auto den = denominator_form(in.h, gb, in.g, in.np);
        const auto sig = composite_radar_channels(in.g, in.phi, in.h);
        const auto terms = radar_snr_terms(sig, in.w, in.np, 4);
        EXPECT_LT(rel_err(num.value(in.phi), terms.numerator), 1e-9);
        EXPECT_LT(rel_err(den.value(in.phi), terms.denominator), 1e-9);

        const CVec z = vec(in.phi * in.phi.adjoint());
        EXPECT_LT(rel_err(z.dot(num.e() * z).real(), terms.numerator), 1e-9);
        const double f_direct = in.np.sigma_v2 * (z.dot(den.f() * z).real() + in.phi.dot(den.l_matrix() * in.phi).real()) +
                                in.np.sigma_r2 * 4;
        EXPECT_LT(rel_err(f_direct, terms.denominator), 1e-9);
        const CMat gg = in.g * in.g.adjoint();
        EXPECT_LT((den.l_matrix().diagonal() - gg.diagonal()).norm(), 1e-12 * gg.norm());

        const double delta = dinkelbach_update(num, den, in.phi);
        EXPECT_LT(rel_err(delta, radar_snr(sig, in.w, in.np, 4)), 1e-9);
        EXPECT_LT(std::abs(dinkelbach_residual(num, den, delta, in.phi)), 1e-12 * num.value(in.phi));
    }
}

TEST(Evaluators, TrivialCases)
{
    RngStream r(4, {0});
    const Instance in = random_instance(r);
    const CMat gb = cascade_matrix(in.g, in.h);
    const auto num = numerator_form(gb, in.w.stacked());
    auto den = denominator_form(in.h, gb, in.g, in.np);
    const CVec zero = CVec::Zero(8);
    EXPECT_EQ(num.value(zero), 0.0);
    EXPECT_DOUBLE_EQ(den.value(zero), in.np.sigma_r2 * 4);
    const auto pas = denominator_form(in.h, gb, in.g, in.np, false);
    EXPECT_DOUBLE_EQ(pas.value(in.phi), in.np.sigma_r2 * 4);

    // g = f gives delta = 1
    den.sigma_v2 = 0.0;
    den.sigma_r2 = num.value(in.phi) / 4;
    EXPECT_NEAR(dinkelbach_update(num, den, in.phi), 1.0, 1e-14);
    den.sigma_r2 = 0.0;
    EXPECT_THROW(dinkelbach_update(num, den, zero), std::domain_error);
}

TEST(Evaluators, PsdFactors)
{
    RngStream r(5, {0});
    const Instance in = random_instance(r, 4, 3, 1);
    const CMat gb = cascade_matrix(in.g, in.h);
    const auto num = numerator_form(gb, in.w.stacked());
    const auto den = denominator_form(in.h, gb, in.g, in.np);
    for (const CMat& a : {num.e(), den.f(), den.l_matrix()}) {
        EXPECT_LT((a - a.adjoint()).norm(), 1e-12 * a.norm());
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(a));
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * a.norm());
    }
}

TEST(Majorizer, KroneckerQuarticMatchesDense)
{
    RngStream r(6, {0});
    for (int t = 0; t < 20; ++t) {
        const Instance in = random_instance(r, 4, 3, 1);
        const CMat gb = cascade_matrix(in.g, in.h);
        const auto num = numerator_form(gb, in.w.stacked());
        const auto den = denominator_form(in.h, gb, in.g, in.np);
        const double delta = r.uniform(0.0, 20.0);
        const auto mq = quartic_part(num, den, delta);
        const CVec z = vec(in.phi * in.phi.adjoint());
        const double dense = z.dot(mq.matrix() * z).real();
        EXPECT_LT(rel_err(mq.value(in.phi), dense), 1e-10);
        EXPECT_LT(rel_err(mq.value(in.phi), delta * den.sigma_v2 * den.quartic(in.phi) - num.value(in.phi)), 1e-10);
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(mq.matrix()), Eigen::EigenvaluesOnly);
        EXPECT_LT(std::abs(mq.lambda_max() - es.eigenvalues().maxCoeff()), 1e-9 * es.eigenvalues().cwiseAbs().maxCoeff());
    }
}

TEST(Majorizer, TangencyAndDomination)
{
    RngStream r(7, {0});
    int violations = 0;
    for (int t = 0; t < 20; ++t) {
        const int q = 4;
        const Instance in = random_instance(r, q, 3, 1);
        const CMat gb = cascade_matrix(in.g, in.h);
        const auto num = numerator_form(gb, in.w.stacked());
        const auto den = denominator_form(in.h, gb, in.g, in.np);
        const RVec radii = RVec::Constant(q, 2.0);
        const CVec phi_j = random_in_disks(radii, r);
        const double delta = dinkelbach_update(num, den, in.phi);
        const auto mq = quartic_part(num, den, delta);
        const auto maj = majorize_quartic(mq, phi_j, radii.squaredNorm());

        const double at_j = mq.value(phi_j);
        EXPECT_LE(std::abs(maj.value(phi_j) - at_j), 1e-8 * std::max(1.0, std::abs(at_j)));
        for (int s = 0; s < 1000; ++s) {
            CVec x = s % 2 ? random_in_disks(radii, r) : project_disks(phi_j + random_cvec(q, r, 0.05), radii);
            if (maj.value(x) < mq.value(x) - 1e-9 * std::max(1.0, std::abs(mq.value(x)))) ++violations;
        }
        Eigen::SelfAdjointEigenSolver<CMat> em(hermitian_part(mq.matrix()), Eigen::EigenvaluesOnly);
        EXPECT_GE(maj.lambda_m0, em.eigenvalues().maxCoeff() - 1e-9 * em.eigenvalues().cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<CMat> eb(hermitian_part(maj.m_bar_matrix), Eigen::EigenvaluesOnly);
        EXPECT_GE(maj.lambda_mbar, eb.eigenvalues().maxCoeff() - 1e-9 * eb.eigenvalues().cwiseAbs().maxCoeff());
    }
    EXPECT_EQ(violations, 0);
}

TEST(Majorizer, ScaledIdentityCollapses)
{
    const int q = 3;
    KroneckerQuartic mq;
    mq.n = 2.5 * CMat::Identity(q, q);
    mq.b = CMat::Identity(q, q);
    RngStream r(8, {0});
    const CVec phi = random_cvec(q, r);
    const auto maj = majorize_quartic(mq, phi, 10.0 * phi.squaredNorm());
    EXPECT_NEAR(maj.lambda_m0, 2.5, 1e-12);
    EXPECT_LT(maj.m_bar_matrix.norm(), 1e-12);
    EXPECT_NEAR(maj.lambda_mbar, 0.0, 1e-12);
    EXPECT_THROW(majorize_quartic(mq, phi, 0.5 * phi.squaredNorm()), std::invalid_argument);
}

TEST(Surrogate, TangentAndDominatesResidual)
{
    RngStream r(9, {0});
    int violations = 0;
    for (int t = 0; t < 20; ++t) {
        const int q = 8;
        const Instance in = random_instance(r, q, 4, 2);
        const CMat gb = cascade_matrix(in.g, in.h);
        const auto num = numerator_form(gb, in.w.stacked());
        const auto den = denominator_form(in.h, gb, in.g, in.np);
        RVec radii(q);
        for (int i = 0; i < q; ++i) radii(i) = r.uniform(0.5, 4.0);
        const CVec phi_j = random_in_disks(radii, r);
        const double delta = dinkelbach_update(num, den, random_in_disks(radii, r));
        const auto sur = build_surrogate(num, den, delta, phi_j, radii.squaredNorm());
        const double hj = dinkelbach_residual(num, den, delta, phi_j);
        EXPECT_LE(std::abs(sur.value(phi_j) - hj), 1e-8 * std::max(1.0, std::abs(hj)));
        for (int s = 0; s < 1000; ++s) {
            const CVec x = random_in_disks(radii, r);
            const double h = dinkelbach_residual(num, den, delta, x);
            if (sur.value(x) < h - 1e-9 * std::max(1.0, std::abs(h))) ++violations;
        }
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(sur.l_bar), Eigen::EigenvaluesOnly);
        EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
    }
    EXPECT_EQ(violations, 0);
}

TEST(DiskQp, ClosedFormCases)
{
    const int q = 4;
    const RVec inf = RVec::Constant(q, std::numeric_limits<double>::infinity());
    RngStream r(10, {0});
    const CMat l = random_psd(q, q, r) + CMat::Identity(q, q);
    EXPECT_LT(solve_disk_qp(l, CVec::Zero(q), inf).x.norm(), 1e-12);
    const CVec v = random_cvec(q, r);
    EXPECT_LT((solve_disk_qp(CMat::Identity(q, q), -2.0 * v, inf).x - v).norm(), 1e-14);
    const RVec radii = RVec::Constant(q, 0.1);
    const CVec x = solve_disk_qp(CMat::Identity(q, q), -2.0 * v, radii).x;
    for (int i = 0; i < q; ++i) EXPECT_LT(std::abs(x(i) - v(i) * (0.1 / std::abs(v(i)))), 1e-14);
}

TEST(DiskQp, AgreesWithLongProjectedGradient)
{
    RngStream r(11, {0});
    const int q = 3;
    for (int t = 0; t < 3; ++t) {
        const CMat l = random_psd(q, q, r) + 0.1 * CMat::Identity(q, q);
        const CVec m = random_cvec(q, r, 4.0);
        const RVec radii = RVec::Constant(q, r.uniform(0.2, 1.0));
        const auto res = solve_disk_qp(l, m, radii);
        auto obj = [&](const CVec& x) { return x.dot(l * x).real() + x.dot(m).real(); };
        Eigen::SelfAdjointEigenSolver<CMat> es(l, Eigen::EigenvaluesOnly);
        const double step = 1.0 / (2.0 * es.eigenvalues().maxCoeff());
        CVec x = CVec::Zero(q);
        for (int it = 0; it < 1000000; ++it) x = project_disks(x - step * (2.0 * (l * x) + m), radii);
        EXPECT_LT(std::abs(res.objective - obj(x)), 1e-6);
        EXPECT_LE(res.kkt_residual, 1e-5);
        EXPECT_TRUE((res.x.cwiseAbs().array() <= radii.array() * (1.0 + 1e-12)).all());
    }
}

namespace {

struct PhaseCase {
    ScenarioConfig cfg;
    ChannelSet ch;
    SurfaceConfig init;
    Precoders w;
    SubcarrierLink link;
};

PhaseCase phase_case(std::uint64_t seed, int q = 16)
{
    PhaseCase c;
    c.cfg = small_scenario(q, 8, 2);
    c.ch = reference_channels(c.cfg, seed, 0);
    c.init = initial_surface(c.cfg, seed, 0, false);
    c.link = make_link(c.ch, 0, c.init);
    const auto prob = make_beamform_problem(c.link, c.cfg.xi(), c.cfg.p_bs, c.cfg.noise());
    const auto sol = solve_beamforming(prob);
    c.w = sol.converged ? sol.precoders : initial_precoders(prob);
    return c;
}

}  // namespace

TEST(OptimizePhases, MonotoneAndValid)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const PhaseCase c = phase_case(seed);
        PhaseOptions opt;
        opt.record_steps = true;
        const auto res = optimize_phases(c.link, c.init, c.w, c.cfg.noise(), c.cfg.xi(), opt);
        const auto& h = res.state.history;
        ASSERT_GE(h.size(), 2u);
        for (std::size_t i = 1; i < h.size(); ++i) EXPECT_GE(h[i], h[i - 1] * (1.0 - 1e-9)) << "seed " << seed;
        EXPECT_GE(h.back(), h.front());
        EXPECT_TRUE(validate(res.surface).empty());
        const double snr = link_radar_snr(relink(c.link, res.surface), c.w, c.cfg.noise());
        EXPECT_LT(rel_err(snr, res.state.delta), 1e-9);
        for (const auto& s : res.state.steps) {
            EXPECT_LE(std::abs(s.surrogate_at_j - s.true_at_j), 1e-8 * std::max(1.0, std::abs(s.true_at_j)));
            EXPECT_GE(s.surrogate_at_new, s.true_at_new - 1e-9 * std::max(1.0, std::abs(s.true_at_new)));
        }
        const bool start_ok = sinr_feasible(c.link, c.w, c.cfg.noise(), c.cfg.xi(), 1e-6);
        if (start_ok) {
            EXPECT_TRUE(sinr_feasible(relink(c.link, res.surface), c.w, c.cfg.noise(), c.cfg.xi(), 1e-6));
        }
    }
}

TEST(OptimizePhases, ImprovesOverRandomStart)
{
    int improved = 0;
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
        const PhaseCase c = phase_case(seed);
        const auto res = optimize_phases(c.link, c.init, c.w, c.cfg.noise(), c.cfg.xi());
        improved += res.state.history.back() > res.state.history.front() * (1.0 + 1e-6);
    }
    EXPECT_GE(improved, 4);
}

TEST(OptimizePhases, FixedPoint)
{
    const PhaseCase c = phase_case(3);
    PhaseOptions opt;
    opt.max_outer = 200;
    opt.tol = 1e-10;
    const auto first = optimize_phases(c.link, c.init, c.w, c.cfg.noise(), c.cfg.xi(), opt);
    PhaseOptions again;
    again.tol = 1e-6;
    const auto second = optimize_phases(relink(c.link, first.surface), first.surface, c.w, c.cfg.noise(), c.cfg.xi(), again);
    EXPECT_EQ(second.state.iteration, 1);
    EXPECT_TRUE(second.state.converged);
}

TEST(OptimizePhases, PassiveSurfaceStaysPassive)
{
    PhaseCase c = phase_case(4);
    c.init = passive_baseline(c.init);
    c.link = relink(c.link, c.init);
    const auto res = optimize_phases(c.link, c.init, c.w, c.cfg.noise(), c.cfg.xi());
    EXPECT_FALSE(res.surface.active);
    EXPECT_TRUE((res.surface.alpha.array() == 1.0).all());
    EXPECT_GE(res.state.history.back(), res.state.history.front());
}
