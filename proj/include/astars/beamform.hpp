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

#pragma once

#include "astars/linalg.hpp"
#include "astars/sdp.hpp"
#include "astars/signal.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace astars {

/// SINR_k >= xi rewritten as a constraint that is linear in the covariances:
///   (1 + 1/xi) u^H R_k u >= sigma^2 + u^H R u + sigma_v^2 t^H Psi_t Psi_t^H t
struct SinrConstraint {
    CVec u;
    double own_coef = 0.0;  ///< 1 + 1/xi, multiplies u^H R_k u
    double rhs = 0.0;       ///< sigma^2 + dynamic noise
    int user = 0;

    /// lhs - rhs; non-negative iff the constraint holds.
    double margin(const CMat& r_total, const CMat& r_own) const
    {
        return own_coef * u.dot(r_own * u).real() - u.dot(r_total * u).real() - rhs;
    }
    bool satisfied(const CMat& r_total, const CMat& r_own) const { return margin(r_total, r_own) >= 0.0; }
};

inline SinrConstraint compile_sinr_constraint(const CVec& u_k, const CVec& psi_t, const CVec& t_k, double xi,
                                              const NoisePowers& np, int user = 0, bool active = true)
{
    if (!(xi > 0.0)) throw std::invalid_argument("compile_sinr_constraint: xi must be positive");
    SinrConstraint c;
    c.u = u_k;
    c.own_coef = 1.0 + 1.0 / xi;
    c.rhs = np.sigma2 + dynamic_noise_at_user(psi_t, t_k, np, active);
    c.user = user;
    return c;
}

struct BeamformProblem {
    CompositeRadarChannels radar;
    std::vector<CVec> u;
    std::vector<CVec> t;
    CVec psi_t;
    double xi = 10.0;
    double p_bs = 1.0;
    NoisePowers noise;
    bool active = true;

    int m() const { return static_cast<int>(radar.h_t.rows()); }
    int k() const { return static_cast<int>(u.size()); }
};

inline BeamformProblem make_beamform_problem(const SubcarrierLink& l, double xi, double p_bs, const NoisePowers& np)
{
    BeamformProblem p;
    p.radar = l.radar;
    p.u = l.u;
    p.t = l.t_k;
    p.psi_t = l.psi_t;
    p.xi = xi;
    p.p_bs = p_bs;
    p.noise = np;
    p.active = l.active;
    return p;
}

enum class BeamformStatus { optimal, infeasible, max_iterations, numerical_error };

struct BeamformerSolution {
    Precoders precoders;
    BeamformStatus status = BeamformStatus::numerical_error;
    double objective = 0.0;            ///< radar SNR
    double numerator = 0.0;            ///< tr(H_T W W^H H_T^H)
    std::vector<double> sinr;          ///< achieved per-user SINR
    std::vector<double> sinr_slacks;   ///< SINR_k - xi
    double power_margin = 0.0;         ///< P_BS - tr(W W^H)
    double relative_gap = 0.0;
    int iterations = 0;
    bool converged = false;
    int most_violated = -1;            ///< user index, or K for the power constraint
};

namespace detail {

inline Precoders precoders_from_covariances(const CMat& r_r, const std::vector<CMat>& r_k, const std::vector<CVec>& u)
{
    const auto m = r_r.rows();
    const auto k = static_cast<Eigen::Index>(r_k.size());
    Precoders p;
    p.w_c = CMat::Zero(m, k);
    CMat radar = r_r;
    for (Eigen::Index i = 0; i < k; ++i) {
        const CVec ru = r_k[i] * u[i];
        const double gain = u[i].dot(ru).real();
        CVec w = CVec::Zero(m);
        if (gain > 0.0) w = ru / std::sqrt(gain);
        p.w_c.col(i) = w;
        // the remainder R_k - w w^H is PSD and moves into the radar covariance; this keeps
        // the total covariance and every user's useful/interference split unchanged
        radar += r_k[i] - w * w.adjoint();
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(radar));
    const RVec ev = es.eigenvalues().cwiseMax(0.0);
    p.w_r = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    return p;
}

}  // namespace detail

inline void evaluate_solution(const BeamformProblem& prob, BeamformerSolution& sol)
{
    const auto terms = radar_snr_terms(prob.radar, sol.precoders, prob.noise, prob.m(), prob.active);
    sol.numerator = terms.numerator;
    sol.objective = terms.snr();
    sol.sinr.clear();
    sol.sinr_slacks.clear();
    for (int k = 0; k < prob.k(); ++k) {
        const double s = user_sinr(prob.u[k], sol.precoders, prob.psi_t, prob.t[k], prob.noise, k, prob.active);
        sol.sinr.push_back(s);
        sol.sinr_slacks.push_back(s - prob.xi);
    }
    sol.power_margin = prob.p_bs - sol.precoders.power();
}

/// Relative tightening of the SINR threshold inside the solver.
inline constexpr double sinr_margin = 1e-5;

/// Transmit precoder step: maximize tr(H_T R H_T^H) over R = R_r + sum_k R_k subject to the
/// compiled SINR constraints and tr(R) <= P_BS, as an SDP in the covariances. Rank-one
/// communication precoders are extracted afterwards and the solution is rescaled so the
/// power budget is met with equality.
inline BeamformerSolution solve_beamforming(const BeamformProblem& prob, double tol = 1e-7, int max_iter = 500)
{
    require(prob.xi > 0.0, "solve_beamforming: xi must be positive");
    require(prob.p_bs > 0.0, "solve_beamforming: p_bs must be positive");
    const int m = prob.m();
    const int k = prob.k();
    const double p_bs = prob.p_bs;

    CMat a = hermitian_part(prob.radar.h_t.adjoint() * prob.radar.h_t);
    double a_scale = a.norm();
    if (!(a_scale > 0.0)) a_scale = 1.0;

    // the interior point method meets constraints only to its feasibility tolerance, so the
    // threshold handed to it carries a small margin
    const double xi_solver = prob.xi * (1.0 + sinr_margin);
    std::vector<SinrConstraint> rows;
    for (int i = 0; i < k; ++i)
        rows.push_back(compile_sinr_constraint(prob.u[i], prob.psi_t, prob.t[i], xi_solver, prob.noise, i, prob.active));

    // blocks: 0 radar covariance, 1..k user covariances, then k SINR slacks and one power slack
    sdp::Problem sp;
    const int n_mat = 1 + k;
    for (int i = 0; i < n_mat; ++i) {
        sp.block_dims.push_back(m);
        sp.cost.push_back(-a / a_scale);
    }
    for (int i = 0; i < k + 1; ++i) {
        sp.block_dims.push_back(1);
        sp.cost.push_back(CMat::Zero(1, 1));
    }
    // covariances are scaled by 1/P_BS
    for (int i = 0; i < k; ++i) {
        const auto& r = rows[i];
        // unit-norm direction and unit largest coefficient keep the Schur complement well scaled
        const double un2 = r.u.squaredNorm();
        const double gain = p_bs * un2 / r.rhs;
        const double row = gain * std::max(1.0, r.own_coef - 1.0);
        const CVec dir = un2 > 0.0 ? CVec(r.u / std::sqrt(un2)) : r.u;
        sdp::Constraint c;
        for (int b = 0; b < n_mat; ++b) {
            const double coef = (b == i + 1) ? (r.own_coef - 1.0) : -1.0;
            c.terms.push_back(sdp::Term::rank_one(b, coef * gain / row, dir));
        }
        c.terms.push_back(sdp::Term::identity(n_mat + i, -1.0));
        c.rhs = 1.0 / row;
        sp.constraints.push_back(std::move(c));
    }
    {
        sdp::Constraint c;
        for (int b = 0; b < n_mat; ++b) c.terms.push_back(sdp::Term::identity(b, 1.0));
        c.terms.push_back(sdp::Term::identity(n_mat + k, 1.0));
        c.rhs = 1.0;
        sp.constraints.push_back(std::move(c));
    }

    sdp::Options opt;
    opt.tol = tol;
    opt.feasibility_tol = std::min(1e-9, tol);
    opt.max_iterations = max_iter;
    const auto res = sdp::solve(sp, opt);

    BeamformerSolution sol;
    sol.iterations = res.iterations;
    sol.relative_gap = res.relative_gap;

    std::vector<CMat> r_k;
    for (int i = 0; i < k; ++i) r_k.push_back(p_bs * res.x[1 + i]);
    const CMat r_r = p_bs * res.x[0];
    sol.precoders = detail::precoders_from_covariances(r_r, r_k, prob.u);

    switch (res.status) {
    case sdp::Status::optimal: sol.status = BeamformStatus::optimal; break;
    case sdp::Status::infeasible: sol.status = BeamformStatus::infeasible; break;
    case sdp::Status::max_iterations: sol.status = BeamformStatus::max_iterations; break;
    case sdp::Status::numerical_error: sol.status = BeamformStatus::numerical_error; break;
    }

    if (sol.status == BeamformStatus::optimal || sol.status == BeamformStatus::max_iterations) {
        // scaling every covariance up raises each SINR (noise is fixed) and the objective
        const double pw = sol.precoders.power();
        if (pw > 0.0) {
            const double s = std::sqrt(p_bs / pw);
            sol.precoders.w_r *= s;
            sol.precoders.w_c *= s;
        }
    }
    evaluate_solution(prob, sol);

    // most violated constraint, in units relative to each constraint's scale
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
        const double rel = sol.sinr_slacks[i] / prob.xi;
        if (rel < worst) {
            worst = rel;
            sol.most_violated = i;
        }
    }
    if (sol.power_margin / p_bs < worst) {
        worst = sol.power_margin / p_bs;
        sol.most_violated = k;
    }
    const bool feasible = worst >= -1e-6;
    if (sol.status == BeamformStatus::optimal && !feasible) sol.status = BeamformStatus::infeasible;
    sol.converged = sol.status == BeamformStatus::optimal;
    return sol;
}

/// Starting precoders: radar power spread isotropically, users served by matched filters.
inline Precoders initial_precoders(const BeamformProblem& prob)
{
    const int m = prob.m(), k = prob.k();
    Precoders p;
    const double share = k > 0 ? 0.5 : 1.0;
    p.w_r = std::sqrt(share * prob.p_bs / m) * CMat::Identity(m, m);
    p.w_c = CMat::Zero(m, k);
    for (int i = 0; i < k; ++i) {
        const double n = prob.u[i].norm();
        if (n > 0.0) p.w_c.col(i) = std::sqrt((1.0 - share) * prob.p_bs / k) * prob.u[i] / n;
    }
    return p;
}

}  // namespace astars
