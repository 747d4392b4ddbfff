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

// Primal-dual interior-point solver for block-diagonal complex Hermitian SDPs
//
//   min  sum_b Re tr(C_b X_b)   s.t.  sum_b Re tr(A_ib X_b) = b_i,  X_b >= 0
//   max  b^T y                   s.t.  S_b = C_b - sum_i y_i A_ib >= 0
//
// Infeasible-start path following with the HKM search direction and Mehrotra
// predictor-corrector steps. Constraint matrices are stored in structured form
// (scaled identity, scaled rank-one, dense) so the Schur complement assembly stays
// cheap when there are few constraints on large blocks.

#include "astars/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace astars::sdp {

struct Term {
    enum class Kind { identity, rank_one, dense };
    Kind kind = Kind::identity;
    int block = 0;
    double coef = 1.0;
    CVec v;   ///< rank_one: coef * v v^H
    CMat d;   ///< dense: coef * d (Hermitian)

    static Term identity(int block, double coef) { return {Kind::identity, block, coef, {}, {}}; }
    static Term rank_one(int block, double coef, CVec v) { return {Kind::rank_one, block, coef, std::move(v), {}}; }
    static Term dense(int block, double coef, CMat d) { return {Kind::dense, block, coef, {}, std::move(d)}; }

    /// Re tr(A X) for Hermitian A, any square X.
    double apply(const CMat& x) const
    {
        switch (kind) {
        case Kind::identity: return coef * x.trace().real();
        case Kind::rank_one: return coef * v.dot(x * v).real();
        case Kind::dense: return coef * (d.transpose().cwiseProduct(x)).sum().real();
        }
        return 0.0;
    }

    void add_to(CMat& out, double scale) const
    {
        switch (kind) {
        case Kind::identity: out.diagonal().array() += scale * coef; break;
        case Kind::rank_one: out.noalias() += (scale * coef) * v * v.adjoint(); break;
        case Kind::dense: out += (scale * coef) * d; break;
        }
    }

    /// X A Z.
    CMat sandwich(const CMat& x, const CMat& z) const
    {
        switch (kind) {
        case Kind::identity: return coef * (x * z);
        case Kind::rank_one: return coef * (x * v) * (z.adjoint() * v).adjoint();
        case Kind::dense: return coef * (x * d * z);
        }
        return {};
    }
};

struct Constraint {
    std::vector<Term> terms;
    double rhs = 0.0;
};

struct Problem {
    std::vector<int> block_dims;
    std::vector<CMat> cost;  ///< one Hermitian matrix per block
    std::vector<Constraint> constraints;
};

enum class Status { optimal, infeasible, max_iterations, numerical_error };

struct Result {
    Status status = Status::numerical_error;
    std::vector<CMat> x;
    std::vector<CMat> s;
    RVec y;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double relative_gap = 0.0;
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    int iterations = 0;
};

struct Options {
    double tol = 1e-7;            ///< relative duality gap
    double feasibility_tol = 1e-9; ///< relative primal/dual residuals
    double stall_feasibility_tol = 1e-7; ///< accepted once progress stalls
    int stall_iterations = 5;
    int max_iterations = 500;
    double step_fraction = 0.98;
    double divergence_limit = 1e12;
};

namespace detail {

inline double inner(const std::vector<CMat>& a, const std::vector<CMat>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i].conjugate().cwiseProduct(b[i])).sum().real();
    return s;
}

inline double frob(const std::vector<CMat>& a)
{
    double s = 0.0;
    for (const auto& m : a) s += m.squaredNorm();
    return std::sqrt(s);
}

/// Largest alpha (possibly +inf) keeping X + alpha*dX positive semidefinite.
inline double max_step(const CMat& x, const CMat& dx)
{
    if (x.rows() == 1) {
        const double d = dx(0, 0).real();
        return d >= 0.0 ? std::numeric_limits<double>::infinity() : -x(0, 0).real() / d;
    }
    Eigen::LLT<CMat> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    const CMat li = llt.matrixL().solve(CMat::Identity(x.rows(), x.cols()));
    const CMat w = hermitian_part(li * dx * li.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(w, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

}  // namespace detail

inline RVec apply_constraints(const Problem& p, const std::vector<CMat>& x)
{
    RVec out = RVec::Zero(static_cast<Eigen::Index>(p.constraints.size()));
    for (std::size_t i = 0; i < p.constraints.size(); ++i)
        for (const auto& t : p.constraints[i].terms) out(i) += t.apply(x[t.block]);
    return out;
}

inline std::vector<CMat> apply_adjoint(const Problem& p, const RVec& y)
{
    std::vector<CMat> out;
    for (int d : p.block_dims) out.push_back(CMat::Zero(d, d));
    for (std::size_t i = 0; i < p.constraints.size(); ++i)
        for (const auto& t : p.constraints[i].terms) t.add_to(out[t.block], y(i));
    return out;
}

inline Result solve(const Problem& p, const Options& opt = {})
{
    const std::size_t nb = p.block_dims.size();
    const auto m = static_cast<Eigen::Index>(p.constraints.size());
    RVec b(m);
    for (Eigen::Index i = 0; i < m; ++i) b(i) = p.constraints[i].rhs;

    double n_total = 0.0;
    for (int d : p.block_dims) n_total += d;

    Result res;
    res.y = RVec::Zero(m);
    for (int d : p.block_dims) {
        res.x.push_back(CMat::Identity(d, d));
        res.s.push_back(CMat::Identity(d, d));
    }
    auto& x = res.x;
    auto& s = res.s;
    auto& y = res.y;

    const double b_norm = b.norm();
    const double c_norm = detail::frob(p.cost);

    double best_merit = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int it = 0; it <= opt.max_iterations; ++it) {
        res.iterations = it;
        const RVec rp = b - apply_constraints(p, x);
        std::vector<CMat> rd = apply_adjoint(p, y);
        for (std::size_t k = 0; k < nb; ++k) rd[k] = p.cost[k] - rd[k] - s[k];

        res.primal_objective = detail::inner(p.cost, x);
        res.dual_objective = b.dot(y);
        res.relative_gap = std::abs(res.primal_objective - res.dual_objective) /
                           (1.0 + std::abs(res.primal_objective) + std::abs(res.dual_objective));
        res.primal_infeasibility = rp.norm() / (1.0 + b_norm);
        res.dual_infeasibility = detail::frob(rd) / (1.0 + c_norm);
        const double mu = detail::inner(x, s) / n_total;

        if (res.relative_gap <= opt.tol && res.primal_infeasibility <= opt.feasibility_tol &&
            res.dual_infeasibility <= opt.feasibility_tol) {
            res.status = Status::optimal;
            return res;
        }
        if (y.norm() > opt.divergence_limit || detail::frob(x) > opt.divergence_limit) {
            res.status = Status::infeasible;
            return res;
        }
        if (it == opt.max_iterations) break;
        const bool near_optimal = res.relative_gap <= opt.tol && res.primal_infeasibility <= opt.stall_feasibility_tol &&
                                  res.dual_infeasibility <= opt.stall_feasibility_tol;
        const double merit = std::max(res.relative_gap, res.primal_infeasibility);
        if (merit < 0.5 * best_merit) {
            best_merit = merit;
            stall = 0;
        } else if (++stall >= opt.stall_iterations && near_optimal) {
            res.status = Status::optimal;
            return res;
        }
        auto fail = [&]() {
            res.status = near_optimal ? Status::optimal : Status::numerical_error;
            return res;
        };

        // Z = S^{-1}
        std::vector<CMat> z(nb);
        for (std::size_t k = 0; k < nb; ++k) {
            Eigen::LLT<CMat> llt(s[k]);
            if (llt.info() != Eigen::Success) return fail();
            z[k] = hermitian_part(llt.solve(CMat::Identity(s[k].rows(), s[k].cols())));
        }

        // Schur complement M_ij = Re tr(A_i X A_j Z)
        RMat schur = RMat::Zero(m, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            for (const auto& tj : p.constraints[j].terms) {
                const CMat t = tj.sandwich(x[tj.block], z[tj.block]);
                for (Eigen::Index i = 0; i < m; ++i)
                    for (const auto& ti : p.constraints[i].terms)
                        if (ti.block == tj.block) schur(i, j) += ti.apply(t);
            }
        }
        schur = 0.5 * (schur + schur.transpose());
        Eigen::LDLT<RMat> ldlt(schur);
        if (ldlt.info() != Eigen::Success) return fail();

        // X Rd Z is shared by predictor and corrector
        std::vector<CMat> x_rd_z(nb);
        for (std::size_t k = 0; k < nb; ++k) x_rd_z[k] = x[k] * rd[k] * z[k];

        auto direction = [&](double sigma_mu, const std::vector<CMat>* corr, std::vector<CMat>& dx,
                             std::vector<CMat>& ds, RVec& dy) {
            std::vector<CMat> base(nb);
            for (std::size_t k = 0; k < nb; ++k) {
                base[k] = sigma_mu * z[k] - x[k] - x_rd_z[k];
                if (corr) base[k] -= (*corr)[k];
            }
            const RVec rhs = rp - apply_constraints(p, base);
            dy = ldlt.solve(rhs);
            const auto aty = apply_adjoint(p, dy);
            dx.resize(nb);
            ds.resize(nb);
            for (std::size_t k = 0; k < nb; ++k) {
                ds[k] = hermitian_part(rd[k] - aty[k]);
                CMat t = sigma_mu * z[k] - x[k] - x[k] * ds[k] * z[k];
                if (corr) t -= (*corr)[k];
                dx[k] = hermitian_part(t);
            }
        };

        auto steps = [&](const std::vector<CMat>& dx, const std::vector<CMat>& ds) {
            double ap = std::numeric_limits<double>::infinity(), ad = ap;
            for (std::size_t k = 0; k < nb; ++k) {
                ap = std::min(ap, detail::max_step(x[k], dx[k]));
                ad = std::min(ad, detail::max_step(s[k], ds[k]));
            }
            return std::pair{std::min(1.0, opt.step_fraction * ap), std::min(1.0, opt.step_fraction * ad)};
        };

        std::vector<CMat> dx_a, ds_a;
        RVec dy_a;
        direction(0.0, nullptr, dx_a, ds_a, dy_a);
        const auto [ap_a, ad_a] = steps(dx_a, ds_a);
        double mu_aff = 0.0;
        for (std::size_t k = 0; k < nb; ++k)
            mu_aff += ((x[k] + ap_a * dx_a[k]).conjugate().cwiseProduct(s[k] + ad_a * ds_a[k])).sum().real();
        mu_aff /= n_total;
        const double sigma = std::clamp(std::pow(mu_aff / std::max(mu, 1e-300), 3.0), 0.0, 1.0);

        std::vector<CMat> corr(nb);
        for (std::size_t k = 0; k < nb; ++k) corr[k] = dx_a[k] * ds_a[k] * z[k];
        std::vector<CMat> dx, ds;
        RVec dy;
        direction(sigma * mu, &corr, dx, ds, dy);
        const auto [ap, ad] = steps(dx, ds);
        if (!(ap > 0.0) || !(ad > 0.0)) return fail();
        for (std::size_t k = 0; k < nb; ++k) {
            x[k] = hermitian_part(x[k] + ap * dx[k]);
            s[k] = hermitian_part(s[k] + ad * ds[k]);
        }
        y += ad * dy;
    }
    res.status = res.primal_infeasibility > 1e-4 ? Status::infeasible : Status::max_iterations;
    return res;
}

}  // namespace astars::sdp
