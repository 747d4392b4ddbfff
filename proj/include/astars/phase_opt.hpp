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
#include "astars/scenario.hpp"
#include "astars/signal.hpp"
#include "astars/surface.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace astars {

namespace detail {
inline double hquad(const CMat& a, const CVec& x) { return x.dot(a * x).real(); }
inline double dquad(const RVec& d, const CVec& x) { return (d.array() * x.array().abs2()).sum(); }
}  // namespace detail

/// G_bar = G^H diag(h_at), M x Q.
inline CMat cascade_matrix(const CMat& g, const CVec& h_at)
{
    if (g.rows() != h_at.size()) throw std::invalid_argument("cascade_matrix: dimension mismatch");
    return g.adjoint() * h_at.asDiagonal();
}

/// Echo signal power as a quartic in phi: g = (phi^H B phi)(phi^H C phi) = z^H E z,
/// z = vec(phi phi^H), B = G_bar^H G_bar, C = G_bar^H W W^H G_bar, E = C^T kron B.
struct NumeratorForm {
    CMat b;
    CMat c;

    double value(const CVec& phi) const { return detail::hquad(b, phi) * detail::hquad(c, phi); }
    CMat e() const { return kron(c.transpose(), b); }
};

inline NumeratorForm numerator_form(const CMat& g_bar, const CMat& w)
{
    if (g_bar.rows() != w.rows()) throw std::invalid_argument("numerator_form: dimension mismatch");
    NumeratorForm n;
    n.b = hermitian_part(g_bar.adjoint() * g_bar);
    const CMat gw = g_bar.adjoint() * w;
    n.c = hermitian_part(gw * gw.adjoint());
    return n;
}

/// Echo noise power: f = sigma_v^2 (z^H F z + phi^H L phi) + sigma_r^2 M with F = D kron B,
/// D = diag(|h_at|^2) and L = diag(G G^H). Dynamic terms vanish for a passive surface.
struct DenominatorForm {
    CMat b;
    RVec d;
    RVec l;
    double sigma_v2 = 0.0;  ///< zero for a passive surface
    double sigma_r2 = 0.0;
    int m = 0;

    double quartic(const CVec& phi) const { return detail::dquad(d, phi) * detail::hquad(b, phi); }
    double quadratic(const CVec& phi) const { return detail::dquad(l, phi); }
    double value(const CVec& phi) const
    {
        return sigma_v2 * (quartic(phi) + quadratic(phi)) + sigma_r2 * m;
    }
    CMat f() const { return kron(CMat(d.cast<cplx>().asDiagonal()), b); }
    CMat l_matrix() const { return CMat(l.cast<cplx>().asDiagonal()); }
};

inline DenominatorForm denominator_form(const CVec& h_at, const CMat& g_bar, const CMat& g, const NoisePowers& np,
                                        bool active = true)
{
    if (g_bar.cols() != h_at.size() || g.rows() != h_at.size() || g.cols() != g_bar.rows())
        throw std::invalid_argument("denominator_form: dimension mismatch");
    DenominatorForm f;
    f.b = hermitian_part(g_bar.adjoint() * g_bar);
    f.d = h_at.cwiseAbs2();
    f.l = g.rowwise().squaredNorm();
    f.sigma_v2 = active ? np.sigma_v2 : 0.0;
    f.sigma_r2 = np.sigma_r2;
    f.m = static_cast<int>(g.cols());
    return f;
}

/// delta = g / f at phi.
inline double dinkelbach_update(const NumeratorForm& num, const DenominatorForm& den, const CVec& phi)
{
    const double f = den.value(phi);
    if (!(f > 0.0)) throw std::domain_error("dinkelbach_update: denominator must be positive");
    return num.value(phi) / f;
}

/// z^H (N kron B) z = (phi^H B phi)(phi^H N^T phi) with N = delta sigma_v^2 D - C^T, the
/// quartic part of delta f - g.
struct KroneckerQuartic {
    CMat n;
    CMat b;

    double value(const CVec& phi) const { return detail::hquad(b, phi) * detail::hquad(n.transpose(), phi); }
    CMat matrix() const { return kron(n, b); }

    /// Largest eigenvalue of N kron B from the factor spectra.
    double lambda_max() const
    {
        Eigen::SelfAdjointEigenSolver<CMat> en(hermitian_part(n), Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<CMat> eb(hermitian_part(b), Eigen::EigenvaluesOnly);
        if (en.info() != Eigen::Success || eb.info() != Eigen::Success)
            throw std::runtime_error("KroneckerQuartic: eigenvalue computation failed");
        const double n_max = en.eigenvalues().maxCoeff();
        const double b_max = eb.eigenvalues().maxCoeff();
        const double b_min = std::max(0.0, eb.eigenvalues().minCoeff());
        return n_max >= 0.0 ? n_max * b_max : n_max * b_min;
    }
};

inline KroneckerQuartic quartic_part(const NumeratorForm& num, const DenominatorForm& den, double delta)
{
    KroneckerQuartic k;
    k.n = CMat(delta * den.sigma_v2 * den.d.cast<cplx>().asDiagonal()) - num.c.transpose();
    k.b = num.b;
    return k;
}

/// Quadratic upper bound of z^H M z on the set ||phi||^2 <= radius2, tight at phi_j:
/// z^H M z <= quad ||phi||^2 + Re(phi^H linear) + constant.
struct QuarticMajorizer {
    double lambda_m0 = 0.0;    ///< lambda_max(M)
    double lambda_mbar = 0.0;  ///< lambda_max(M_bar), M_bar = Y + Y^H
    CMat m_bar_matrix;         ///< M_bar, rank <= 3
    double quad = 0.0;
    CVec linear;
    double constant = 0.0;

    double value(const CVec& phi) const
    {
        return quad * phi.squaredNorm() + phi.dot(linear).real() + constant;
    }
};

namespace detail {

/// Largest eigenvalue of a Hermitian matrix whose range lies in span(basis).
inline double lambda_max_on_span(const CMat& h, const CMat& basis)
{
    Eigen::ColPivHouseholderQR<CMat> qr(basis);
    qr.setThreshold(1e-12);
    const auto r = qr.rank();
    const auto n = h.rows();
    if (r == 0) return 0.0;
    const CMat qm = CMat(qr.householderQ()).leftCols(r);
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(qm.adjoint() * h * qm), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("lambda_max_on_span: eigenvalue computation failed");
    double top = es.eigenvalues().maxCoeff();
    if (r < n) top = std::max(top, 0.0);
    return top;
}

}  // namespace detail

inline QuarticMajorizer majorize_quartic(const KroneckerQuartic& mq, const CVec& phi_j, double radius2)
{
    require(phi_j.size() == mq.b.rows(), "majorize_quartic: dimension mismatch");
    require(radius2 >= phi_j.squaredNorm() * (1.0 - 1e-12), "majorize_quartic: expansion point outside the ball");
    QuarticMajorizer out;
    const auto q = phi_j.size();
    const double s_j = phi_j.squaredNorm();
    const double zmz = mq.value(phi_j);
    out.lambda_m0 = mq.lambda_max();
    const double l0 = out.lambda_m0;

    // z^H M z <= l0 ||z||^2 + 2 Re z^H (M - l0 I) z_j + z_j^H (l0 I - M) z_j, and the middle term is
    // phi^H M_bar phi with M_bar = Y + Y^H, Y = (B phi_j)(conj(N) phi_j)^H - l0 phi_j phi_j^H
    const CVec a = mq.b * phi_j;
    const CVec nb = mq.n.conjugate() * phi_j;
    const CMat y = a * nb.adjoint() - l0 * phi_j * phi_j.adjoint();
    out.m_bar_matrix = y + y.adjoint();
    CMat basis(q, 3);
    basis << a, nb, phi_j;
    out.lambda_mbar = detail::lambda_max_on_span(out.m_bar_matrix, basis);
    const double lb = out.lambda_mbar;

    // phi^H M_bar phi <= lb ||phi||^2 + 2 Re phi^H (M_bar - lb I) phi_j + phi_j^H (lb I - M_bar) phi_j
    out.quad = lb;
    out.linear = 2.0 * (out.m_bar_matrix * phi_j - lb * phi_j);
    out.constant = lb * s_j - detail::hquad(out.m_bar_matrix, phi_j) + l0 * s_j * s_j - zmz;

    // l0 ||phi||^4: tangent plane when concave, descent lemma with curvature 12 radius2 otherwise
    if (l0 > 0.0) {
        const double curv = 6.0 * radius2 * l0;
        out.quad += curv;
        out.linear += (4.0 * l0 * s_j - 2.0 * curv) * phi_j;
        out.constant += l0 * s_j * s_j - 4.0 * l0 * s_j * s_j + curv * s_j;
    } else {
        out.linear += 4.0 * l0 * s_j * phi_j;
        out.constant += -3.0 * l0 * s_j * s_j;
    }
    return out;
}

/// Convex surrogate of delta f - g: phi^H L_bar phi + Re(phi^H m_bar) + constant.
struct PhaseSurrogate {
    CMat l_bar;
    CVec m_bar;
    double constant = 0.0;
    QuarticMajorizer quartic;

    double value(const CVec& phi) const
    {
        return detail::hquad(l_bar, phi) + phi.dot(m_bar).real() + constant;
    }
};

inline PhaseSurrogate build_surrogate(const NumeratorForm& num, const DenominatorForm& den, double delta,
                                      const CVec& phi_j, double radius2)
{
    PhaseSurrogate s;
    s.quartic = majorize_quartic(quartic_part(num, den, delta), phi_j, radius2);
    const auto q = phi_j.size();
    s.l_bar = CMat(delta * den.sigma_v2 * den.l.cast<cplx>().asDiagonal()) + s.quartic.quad * CMat::Identity(q, q);
    s.m_bar = s.quartic.linear;
    s.constant = s.quartic.constant + delta * den.sigma_r2 * den.m;
    return s;
}

/// delta f - g.
inline double dinkelbach_residual(const NumeratorForm& num, const DenominatorForm& den, double delta,
                                  const CVec& phi)
{
    return delta * den.value(phi) - num.value(phi);
}

inline CVec project_disks(const CVec& x, const RVec& radii)
{
    CVec out = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x(i));
        if (a > radii(i)) out(i) = a > 0.0 ? x(i) * (radii(i) / a) : cplx(0.0);
    }
    return out;
}

struct QpResult {
    CVec x;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
};

/// min x^H L x + Re(x^H m) subject to |x_q| <= radii_q. Diagonal L is solved per element in
/// closed form; otherwise accelerated projected gradient until the fixed-point residual
/// falls below tol.
inline QpResult solve_disk_qp(const CMat& l, const CVec& m, const RVec& radii, double tol = 1e-7,
                              int max_iter = 100000)
{
    const auto q = m.size();
    require(l.rows() == q && l.cols() == q && radii.size() == q, "solve_disk_qp: dimension mismatch");
    require((radii.array() >= 0.0).all(), "solve_disk_qp: radii must be non-negative");
    const bool unconstrained = !radii.allFinite();
    QpResult r;
    auto objective = [&](const CVec& x) { return detail::hquad(l, x) + x.dot(m).real(); };
    const CMat off = l - CMat(l.diagonal().asDiagonal());
    const double lnorm = std::max(l.norm(), 1e-300);
    if (off.norm() <= 1e-14 * lnorm) {
        r.x = CVec(q);
        for (Eigen::Index i = 0; i < q; ++i) {
            const double li = l(i, i).real();
            if (li > 0.0) {
                r.x(i) = -m(i) / (2.0 * li);
                const double a = std::abs(r.x(i));
                if (a > radii(i)) r.x(i) *= radii(i) / a;
            } else {
                require(std::isfinite(radii(i)) || std::abs(m(i)) == 0.0, "solve_disk_qp: unbounded problem");
                const double a = std::abs(m(i));
                r.x(i) = a > 0.0 ? -m(i) * (radii(i) / a) : cplx(0.0);
            }
        }
    } else {
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(l), Eigen::EigenvaluesOnly);
        const double lip = 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-300);
        auto proj = [&](const CVec& v) { return unconstrained ? v : project_disks(v, radii); };
        CVec x = proj(CVec::Zero(q));
        CVec yv = x;
        double t = 1.0;
        for (int it = 0; it < max_iter; ++it) {
            const CVec grad = 2.0 * (l * yv) + m;
            const CVec xn = proj(yv - grad / lip);
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            CVec yn = xn + ((t - 1.0) / tn) * (xn - x);
            // restart on non-monotone steps
            if ((xn - x).dot(yv - xn).real() > 0.0) {
                yn = xn;
                t = 1.0;
            } else {
                t = tn;
            }
            x = xn;
            yv = yn;
            r.iterations = it + 1;
            const CVec g2 = 2.0 * (l * x) + m;
            const double res = (x - proj(x - g2 / lip)).norm() * lip;
            if (res <= tol * std::max(1.0, m.norm())) break;
        }
        r.x = x;
    }
    const CVec g2 = 2.0 * (l * r.x) + m;
    const double lip = 2.0 * std::max(l.diagonal().real().maxCoeff(), 1e-300);
    r.kkt_residual = (r.x - (unconstrained ? CVec(r.x - g2 / lip) : project_disks(r.x - g2 / lip, radii))).norm() * lip;
    r.objective = objective(r.x);
    return r;
}

/// Thrown when the optimizer observes a decrease of the objective beyond tolerance.
class AlgorithmFault : public std::runtime_error {
public:
    AlgorithmFault(const std::string& what, std::vector<double> trace)
        : std::runtime_error(what), trace_(std::move(trace))
    {
    }
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

/// One inner MM step as recorded for diagnostics.
struct MmStep {
    int outer = 0;
    int inner = 0;
    double delta = 0.0;
    double radius2 = 0.0;
    CVec phi_j;
    double true_at_j = 0.0;
    double surrogate_at_j = 0.0;
    double true_at_new = 0.0;
    double surrogate_at_new = 0.0;
    double step = 0.0;  ///< fraction of the step to the surrogate minimizer; negative for a backoff, 2 for a phase-only step, 0 if rejected
};

struct FractionalState {
    double delta = 0.0;
    CVec phi_r;
    CVec phi_t;
    int iteration = 0;
    std::vector<double> history;  ///< radar SNR after each outer update
    std::vector<MmStep> steps;
    bool converged = false;
    int backoffs = 0;
};

struct PhaseOptions {
    double tol = 1e-6;
    int max_outer = 30;
    int max_inner = 10;
    double sinr_tol = 1e-6;  ///< relative slack accepted on SINR_k >= xi
    int line_search = 7;     ///< step fractions 1, 1/2, ..., 2^-(line_search-1)
    int backoff_steps = 4;
    bool record_steps = false;
};

/// Surface with phi_r fixed, reflect amplitudes |phi_r| / alpha, transmit amplitudes from the
/// energy coupling and transmit phases supplied by the caller.
inline SurfaceConfig surface_from_reflect(const CVec& phi_r, const RVec& phi_t, const SurfaceConfig& base)
{
    const auto q = phi_r.size();
    RVec beta_r(q), ph_r(q);
    for (Eigen::Index i = 0; i < q; ++i) {
        beta_r(i) = base.alpha(i) > 0.0 ? std::min(1.0, std::abs(phi_r(i)) / base.alpha(i)) : 0.0;
        ph_r(i) = std::abs(phi_r(i)) > 0.0 ? std::arg(phi_r(i)) : base.phi_r(i);
    }
    return make_surface(beta_r, phi_t, ph_r, base.alpha, base.alpha_max, base.active);
}

/// Transmit phases that co-phase the surface path of user k with its direct path for precoder w.
inline RVec cophase_transmit(const CMat& g, const CVec& h_dk, const CVec& t_k, const CVec& w)
{
    const CVec gw = g * w;
    const double ref = std::arg(h_dk.dot(w));
    RVec out(g.rows());
    for (Eigen::Index i = 0; i < g.rows(); ++i) out(i) = wrap_2pi(std::arg(std::conj(t_k(i)) * gw(i)) - ref);
    return out;
}

inline SubcarrierLink relink(const SubcarrierLink& base, const SurfaceConfig& s)
{
    SubcarrierLink l = base;
    l.psi_r = coefficient_vector(s, Side::reflect);
    l.psi_t = coefficient_vector(s, Side::transmit);
    l.u.clear();
    for (std::size_t k = 0; k < l.h_dk.size(); ++k)
        l.u.push_back(effective_user_channel(l.h_dk[k], l.g, l.psi_t, l.t_k[k]));
    l.radar = composite_radar_channels(l.g, l.psi_r, l.h_at);
    l.active = s.active;
    return l;
}

inline bool sinr_feasible(const SubcarrierLink& l, const Precoders& w, const NoisePowers& np, double xi, double rel_tol)
{
    for (double s : link_user_sinrs(l, w, np))
        if (s < xi * (1.0 - rel_tol)) return false;
    return true;
}

struct PhaseResult {
    SurfaceConfig surface;
    FractionalState state;
};

/// Dinkelbach outer loop with MM inner iterations on the reflect coefficients for fixed
/// precoders. Every accepted inner step lowers delta f - g and keeps the SINR targets.
inline PhaseResult optimize_phases(const SubcarrierLink& link, const SurfaceConfig& init, const Precoders& w,
                                   const NoisePowers& np, double xi, const PhaseOptions& opt = {})
{
    ensure_valid(init);
    require(init.q == link.g.rows(), "optimize_phases: surface size does not match the channel");
    check_precoders(w);
    const CMat g_bar = cascade_matrix(link.g, link.h_at);
    const NumeratorForm num = numerator_form(g_bar, w.stacked());
    const DenominatorForm den = denominator_form(link.h_at, g_bar, link.g, np, init.active);
    const RVec radii = init.alpha;
    const double radius2 = radii.squaredNorm();

    PhaseResult res;
    SurfaceConfig cur = init;
    SubcarrierLink cur_link = relink(link, cur);
    FractionalState& st = res.state;
    st.phi_r = coefficient_vector(cur, Side::reflect);
    st.phi_t = coefficient_vector(cur, Side::transmit);
    st.delta = dinkelbach_update(num, den, st.phi_r);
    st.history.push_back(st.delta);

    const double start_ok = sinr_feasible(cur_link, w, np, xi, opt.sinr_tol);

    auto worst_user = [&](const SubcarrierLink& l) {
        const auto s = link_user_sinrs(l, w, np);
        return static_cast<int>(std::min_element(s.begin(), s.end()) - s.begin());
    };

    for (int outer = 0; outer < opt.max_outer; ++outer) {
        st.iteration = outer + 1;
        const double delta = st.delta;
        for (int inner = 0; inner < opt.max_inner; ++inner) {
            const CVec phi_j = st.phi_r;
            const PhaseSurrogate sur = build_surrogate(num, den, delta, phi_j, radius2);
            const QpResult qp = solve_disk_qp(sur.l_bar, sur.m_bar, radii);
            const double h_j = dinkelbach_residual(num, den, delta, phi_j);
            MmStep rec;
            rec.outer = outer;
            rec.inner = inner;
            rec.delta = delta;
            rec.radius2 = radius2;
            rec.phi_j = phi_j;
            rec.true_at_j = h_j;
            rec.surrogate_at_j = sur.value(phi_j);
            rec.true_at_new = dinkelbach_residual(num, den, delta, qp.x);
            rec.surrogate_at_new = sur.value(qp.x);

            const double h_scale = std::max({std::abs(h_j), delta * den.sigma_r2 * den.m, 1e-300});
            struct Candidate {
                SurfaceConfig surface;
                CVec phi_r;
                double h;
                double step;
            };
            std::vector<Candidate> pool;
            auto consider = [&](const CVec& phi, const RVec& phi_t, double step, bool check_sinr) {
                SurfaceConfig cand = surface_from_reflect(phi, phi_t, cur);
                const CVec pr = coefficient_vector(cand, Side::reflect);
                const double h = dinkelbach_residual(num, den, delta, pr);
                if (h > h_j + 1e-12 * h_scale) return;
                if (check_sinr && start_ok && !sinr_feasible(relink(link, cand), w, np, xi, opt.sinr_tol)) return;
                pool.push_back({std::move(cand), pr, h, step});
            };

            const int k_user = link.h_dk.empty() ? -1 : worst_user(cur_link);
            RVec cophased;
            if (k_user >= 0) cophased = cophase_transmit(link.g, link.h_dk[k_user], link.t_k[k_user], w.w_c.col(k_user));
            double tau = 1.0;
            for (int ls = 0; ls < opt.line_search; ++ls, tau *= 0.5) {
                const CVec phi = phi_j + tau * (qp.x - phi_j);
                if (k_user >= 0) consider(phi, cophased, tau, true);
                consider(phi, cur.phi_t, tau, true);
            }
            // shift amplitude toward the transmit side
            for (int b = 1; b <= opt.backoff_steps; ++b) {
                const double kappa = static_cast<double>(b) / (opt.backoff_steps + 1);
                consider((1.0 - kappa) * qp.x, cur.phi_t, -kappa, true);
            }
            // moduli held fixed: the transmit side and every user channel are unchanged, and the
            // diagonal surrogate is minimized on each circle in closed form
            {
                CVec phi = phi_j;
                for (Eigen::Index i = 0; i < phi.size(); ++i) {
                    const double r = std::abs(phi_j(i));
                    const double am = std::abs(sur.m_bar(i));
                    if (r > 0.0 && am > 0.0) phi(i) = -sur.m_bar(i) * (r / am);
                }
                consider(phi, cur.phi_t, 2.0, false);
            }
            bool accepted = false;
            if (!pool.empty()) {
                auto best = std::min_element(pool.begin(), pool.end(),
                                             [](const Candidate& a, const Candidate& b) { return a.h < b.h; });
                if (best->h < h_j) {
                    accepted = true;
                    cur = best->surface;
                    cur_link = relink(link, cur);
                    st.phi_r = best->phi_r;
                    st.phi_t = coefficient_vector(cur, Side::transmit);
                    rec.step = best->step;
                    if (best->step < 0.0) ++st.backoffs;
                }
            }
            if (opt.record_steps) st.steps.push_back(std::move(rec));
            if (!accepted) break;
        }
        const double delta_new = dinkelbach_update(num, den, st.phi_r);
        if (delta_new < st.delta * (1.0 - 1e-9)) {
            st.history.push_back(delta_new);
            throw AlgorithmFault("optimize_phases: radar SNR decreased", st.history);
        }
        const bool done = std::abs(delta_new - st.delta) <= opt.tol * st.delta;
        st.delta = delta_new;
        st.history.push_back(delta_new);
        if (done) {
            st.converged = true;
            break;
        }
    }
    res.surface = cur;
    ensure_valid(res.surface);
    return res;
}

}  // namespace astars
