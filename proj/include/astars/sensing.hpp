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
#include "astars/ofdm.hpp"
#include "astars/rng.hpp"
#include "astars/scenario.hpp"
#include "astars/signal.hpp"
#include "astars/surface.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace astars {

struct PhaseDiffs {
    RVec raw;
    RVec ris;
    RVec eff;
};

/// phi^r_{q+1} - phi^r_q for q = 1..Q-1.
inline RVec ris_phase_increments(const SurfaceConfig& s)
{
    if (s.q < 2 || s.phi_r.size() != s.q) throw std::invalid_argument("ris_phase_increments: need Q >= 2");
    return s.phi_r.tail(s.q - 1) - s.phi_r.head(s.q - 1);
}

/// arg y(n) - arg y(n-1), wrapped to (-pi, pi].
inline RVec raw_phase_diff(const CVec& y)
{
    if (y.size() < 2) throw std::invalid_argument("raw_phase_diff: need at least two samples");
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (!(std::abs(y(i)) > 0.0)) throw std::domain_error("raw_phase_diff: zero-magnitude sample has no phase");
    RVec out(y.size() - 1);
    for (Eigen::Index i = 1; i < y.size(); ++i) out(i - 1) = wrap_pm_pi(std::arg(y(i)) - std::arg(y(i - 1)));
    return out;
}

/// wrap(raw(n) - sum_q ris(q)).
inline RVec effective_phase_diff(const RVec& raw, const RVec& ris)
{
    const double total = ris.sum();
    return raw.unaryExpr([total](double x) { return wrap_pm_pi(x - total); });
}

inline PhaseDiffs phase_diffs(const CVec& y, const SurfaceConfig& s)
{
    PhaseDiffs p;
    p.raw = raw_phase_diff(y);
    p.ris = ris_phase_increments(s);
    p.eff = effective_phase_diff(p.raw, p.ris);
    return p;
}

/// d = c dphi / (2 pi delta_f), total path length in meters.
inline RVec estimate_range(const RVec& dphi, double delta_f)
{
    require(delta_f > 0.0, "estimate_range: delta_f must be > 0");
    return dphi * (speed_of_light / (two_pi * delta_f));
}

/// f_d = dphi / (2 pi T_s).
inline RVec estimate_doppler(const RVec& dphi, double t_s)
{
    require(t_s > 0.0, "estimate_doppler: T_s must be > 0");
    return dphi / (two_pi * t_s);
}

/// v = f_d lambda / 2 in m/s.
inline RVec estimate_velocity(const RVec& f_d, double lambda)
{
    require(lambda > 0.0, "estimate_velocity: lambda must be > 0");
    return f_d * (lambda / 2.0);
}

inline double estimation_mse(const std::vector<double>& estimates, double truth)
{
    if (estimates.empty()) throw std::invalid_argument("estimation_mse: no estimates");
    double acc = 0.0;
    for (double e : estimates) acc += (e - truth) * (e - truth);
    return acc / static_cast<double>(estimates.size());
}

inline double estimation_mse(const RVec& estimates, double truth)
{
    return estimation_mse(std::vector<double>(estimates.data(), estimates.data() + estimates.size()), truth);
}

/// Scalar echo statistic c^H y per subcarrier: known signal row c^H H_T W and noise variance.
struct EchoSubcarrier {
    Eigen::RowVectorXcd signal_row;
    double noise_var = 0.0;
};

inline CVec echo_combiner(const SubcarrierLink& l, const Precoders& p, EchoCombining mode)
{
    const auto m = l.g.cols();
    if (mode == EchoCombining::coherent_sum) return CVec::Ones(m);
    Eigen::JacobiSVD<CMat> svd(l.radar.h_t * p.stacked(), Eigen::ComputeThinU);
    return svd.matrixU().col(0);
}

inline EchoSubcarrier echo_subcarrier(const SubcarrierLink& l, const Precoders& p, const NoisePowers& np,
                                      EchoCombining mode)
{
    const CVec c = echo_combiner(l, p, mode);
    EchoSubcarrier e;
    e.signal_row = c.adjoint() * l.radar.h_t * p.stacked();
    e.noise_var = np.sigma_r2 * c.squaredNorm();
    if (l.active)
        e.noise_var += np.sigma_v2 * ((l.radar.h_v1.adjoint() * c).squaredNorm() + (l.radar.h_v2.adjoint() * c).squaredNorm());
    return e;
}

enum class EchoSynthesis { resource_element, time_domain };

/// Echo grid y (with delay, Doppler and surface phase ramp) and the noiseless reference x
/// carrying only the known transmit symbols, both n_subcarriers x n_symbols.
struct EchoFrame {
    CMat y;
    CMat x;
};

/// The surface imposes a phase step ris_total between adjacent subcarriers; with add_noise false
/// the echo is exact.
inline EchoFrame synthesize_echo(const std::vector<EchoSubcarrier>& sub, const OfdmGrid& grid, const TargetTruth& truth,
                                 double ris_total, EchoSynthesis mode, bool add_noise, RngStream& symbols_rng,
                                 RngStream& noise_rng)
{
    grid.validate();
    const int n = grid.n_subcarriers;
    const int l_sym = grid.n_symbols;
    if (static_cast<int>(sub.size()) != n) throw std::invalid_argument("synthesize_echo: one entry per subcarrier required");
    const double a = 1.0 / std::sqrt(2.0);
    EchoFrame f;
    f.x.resize(n, l_sym);
    for (int l = 0; l < l_sym; ++l)
        for (int i = 0; i < n; ++i) {
            const auto len = sub[i].signal_row.size();
            cplx acc = 0.0;
            for (Eigen::Index s = 0; s < len; ++s) {
                const auto b = symbols_rng.bits();
                acc += sub[i].signal_row(s) * cplx((b & 1u) ? -a : a, (b & 2u) ? -a : a);
            }
            f.x(i, l) = acc;
        }
    CMat ramped(n, l_sym);
    for (int l = 0; l < l_sym; ++l)
        for (int i = 0; i < n; ++i) ramped(i, l) = f.x(i, l) * std::polar(1.0, i * ris_total);

    if (mode == EchoSynthesis::resource_element) {
        f.y = apply_delay_doppler(ramped, truth, grid);
    } else {
        const CMat delayed = apply_delay_doppler(ramped, TargetTruth{truth.d_true_m, 0.0, truth.f_c_hz}, grid);
        auto td = modulate_frame(delayed, grid);
        apply_time_doppler(td, truth.doppler_hz(), grid);
        f.y = demodulate_frame(td, grid);
    }
    if (add_noise) {
        for (int l = 0; l < l_sym; ++l)
            for (int i = 0; i < n; ++i) {
                const double s = std::sqrt(sub[i].noise_var / 2.0);
                const double re = noise_rng.normal();
                const double im = noise_rng.normal();
                f.y(i, l) += s * cplx(re, im);
            }
    }
    return f;
}

struct SensingRecord {
    RVec d_hat;             ///< per subcarrier pair, pooled over symbols, m
    RVec v_hat;             ///< per subcarrier, symbol-axis phase, km/h
    RVec f_d_eff;           ///< subcarrier-axis phase read as Doppler, Hz
    RVec v_hat_literal;     ///< velocity from f_d_eff, km/h
    double d_pooled = 0.0;  ///< m
    double v_pooled = 0.0;  ///< km/h
    double mse_d = 0.0;
    double mse_v = 0.0;
    double mse_v_literal = 0.0;
};

/// Range from the phase step across subcarriers and velocity from the phase step across symbols.
/// The delay term enters as exp(-j 2 pi n delta_f d / c), so the range estimator receives the
/// delay phase -dphi_eff reduced to [0, 2 pi); per-pair estimates are unwrapped to the branch of
/// the pooled estimate.
inline SensingRecord analyze_echo(const EchoFrame& f, double ris_total, const OfdmGrid& grid, const TargetTruth& truth)
{
    const int n = grid.n_subcarriers;
    const int l_sym = grid.n_symbols;
    require(f.y.rows() == n && f.y.cols() == l_sym && f.x.rows() == n && f.x.cols() == l_sym,
            "analyze_echo: frame size mismatch");
    // matched statistic: phase of y x^*, weighted by |x|^2
    const CMat z = f.y.cwiseProduct(f.x.conjugate());
    const double lambda = truth.lambda();
    const double ts = grid.symbol_duration();
    const cplx ramp = std::polar(1.0, -ris_total);

    SensingRecord r;
    cplx pooled_f = 0.0;
    RVec eff(n - 1);
    for (int i = 1; i < n; ++i) {
        cplx acc = 0.0;
        for (int l = 0; l < l_sym; ++l) acc += z(i, l) * std::conj(z(i - 1, l));
        pooled_f += acc;
        eff(i - 1) = std::abs(acc) > 0.0 ? wrap_pm_pi(std::arg(acc * ramp)) : 0.0;
    }
    const double delay_pooled = std::abs(pooled_f) > 0.0 ? wrap_2pi(-std::arg(pooled_f * ramp)) : 0.0;
    RVec delay(n - 1);
    for (int i = 0; i < n - 1; ++i) delay(i) = delay_pooled + wrap_pm_pi(-eff(i) - delay_pooled);
    r.d_hat = estimate_range(delay, grid.delta_f);
    r.d_pooled = estimate_range(RVec::Constant(1, delay_pooled), grid.delta_f)(0);

    r.f_d_eff = estimate_doppler(eff, ts);
    r.v_hat_literal = estimate_velocity(r.f_d_eff, lambda).unaryExpr([](double v) { return ms_to_kmh(v); });

    r.v_hat = RVec::Zero(n);
    cplx pooled_t = 0.0;
    if (l_sym >= 2) {
        for (int i = 0; i < n; ++i) {
            cplx acc = 0.0;
            for (int l = 1; l < l_sym; ++l) acc += z(i, l) * std::conj(z(i, l - 1));
            pooled_t += acc;
            r.v_hat(i) = ms_to_kmh(estimate_velocity(estimate_doppler(RVec::Constant(1, std::arg(acc)), ts), lambda)(0));
        }
        r.v_pooled = ms_to_kmh(estimate_velocity(estimate_doppler(RVec::Constant(1, std::arg(pooled_t)), ts), lambda)(0));
    }
    r.mse_d = (r.d_pooled - truth.d_true_m) * (r.d_pooled - truth.d_true_m);
    r.mse_v = (r.v_pooled - truth.v_true_kmh) * (r.v_pooled - truth.v_true_kmh);
    r.mse_v_literal = estimation_mse(r.v_hat_literal, truth.v_true_kmh);
    return r;
}

}  // namespace astars
