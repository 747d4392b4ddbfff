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

#include "astars/channel.hpp"
#include "astars/linalg.hpp"
#include "astars/scenario.hpp"
#include "astars/surface.hpp"

#include <stdexcept>
#include <vector>

namespace astars {

/// Radar precoder W_r (M x M) and communication precoder W_c (M x K).
struct Precoders {
    CMat w_r;
    CMat w_c;

    int m() const { return static_cast<int>(w_r.rows()); }
    int k() const { return static_cast<int>(w_c.cols()); }

    /// W = [W_r, W_c], M x (M+K).
    CMat stacked() const
    {
        CMat w(w_r.rows(), w_r.cols() + w_c.cols());
        w << w_r, w_c;
        return w;
    }
    double power() const { return w_r.squaredNorm() + w_c.squaredNorm(); }
};

inline void check_precoders(const Precoders& p)
{
    if (p.w_r.rows() != p.w_r.cols()) throw std::invalid_argument("W_r must be M x M");
    if (p.w_c.cols() > 0 && p.w_c.rows() != p.w_r.rows()) throw std::invalid_argument("W_c must have M rows");
}

/// R = W_r W_r^H + sum_k w_{c,k} w_{c,k}^H.
inline CMat transmit_covariance(const Precoders& p)
{
    check_precoders(p);
    CMat r = p.w_r * p.w_r.adjoint();
    if (p.w_c.cols() > 0) r += p.w_c * p.w_c.adjoint();
    return hermitian_part(r);
}

struct CompositeRadarChannels {
    CMat h_t;   ///< M x M
    CMat h_v1;  ///< M x Q
    CMat h_v2;  ///< M x Q
};

/// Echo composites. The return leg applies Psi_r^H, which makes H_T the Hermitian rank-one
/// form G_bar phi phi^H G_bar^H used by the surface optimizer.
inline CompositeRadarChannels composite_radar_channels(const CMat& g, const CVec& psi_r, const CVec& h_at)
{
    if (g.rows() != psi_r.size() || h_at.size() != psi_r.size())
        throw std::invalid_argument("composite_radar_channels: dimension mismatch");
    CompositeRadarChannels c;
    const CVec b = g.adjoint() * psi_r.cwiseProduct(h_at);            // G^H Psi h, M
    const CVec back = psi_r.cwiseProduct(h_at);                       // Psi h, Q
    c.h_v2 = g.adjoint() * psi_r.asDiagonal();                        // G^H Psi
    c.h_v1 = b * back.adjoint();                                      // G^H Psi h h^H Psi^H
    c.h_t = c.h_v1 * g;                                               // ... G
    return c;
}

struct RadarSnrTerms {
    double numerator = 0.0;
    double denominator = 0.0;
    double snr() const { return numerator / denominator; }
};

/// Signal and noise powers of the echo; dynamic noise is dropped when `active` is false.
inline RadarSnrTerms radar_snr_terms(const CompositeRadarChannels& c, const Precoders& p, const NoisePowers& np,
                                     int m, bool active = true)
{
    check_precoders(p);
    if (c.h_t.cols() != p.w_r.rows()) throw std::invalid_argument("radar_snr: dimension mismatch");
    RadarSnrTerms t;
    t.numerator = (c.h_t * p.w_r).squaredNorm() + (p.w_c.cols() > 0 ? (c.h_t * p.w_c).squaredNorm() : 0.0);
    t.denominator = np.sigma_r2 * m;
    if (active) t.denominator += np.sigma_v2 * (c.h_v1.squaredNorm() + c.h_v2.squaredNorm());
    return t;
}

inline double radar_snr(const CompositeRadarChannels& c, const Precoders& p, const NoisePowers& np, int m,
                        bool active = true)
{
    return radar_snr_terms(c, p, np, m, active).snr();
}

/// u_k = h_dk + G^H Psi_t t_k.
inline CVec effective_user_channel(const CVec& h_dk, const CMat& g, const CVec& psi_t, const CVec& t_k)
{
    if (g.cols() != h_dk.size() || g.rows() != psi_t.size() || t_k.size() != psi_t.size())
        throw std::invalid_argument("effective_user_channel: dimension mismatch");
    return h_dk + g.adjoint() * psi_t.cwiseProduct(t_k);
}

/// sigma_v^2 t_k^H Psi_t Psi_t^H t_k.
inline double dynamic_noise_at_user(const CVec& psi_t, const CVec& t_k, const NoisePowers& np, bool active)
{
    if (!active) return 0.0;
    return np.sigma_v2 * psi_t.cwiseProduct(t_k).squaredNorm();
}

inline double user_sinr(const CVec& u_k, const Precoders& p, const CVec& psi_t, const CVec& t_k,
                        const NoisePowers& np, int k, bool active = true)
{
    check_precoders(p);
    if (k < 0 || k >= p.k()) throw std::out_of_range("user_sinr: user index out of range");
    if (u_k.size() != p.w_r.rows()) throw std::invalid_argument("user_sinr: dimension mismatch");
    const double desired = std::norm(u_k.dot(p.w_c.col(k)));
    double interference = (u_k.adjoint() * p.w_r).squaredNorm();
    for (int i = 0; i < p.k(); ++i)
        if (i != k) interference += std::norm(u_k.dot(p.w_c.col(i)));
    return desired / (interference + dynamic_noise_at_user(psi_t, t_k, np, active) + np.sigma2);
}

/// Everything the optimizers need about one subcarrier for a given surface.
struct SubcarrierLink {
    CMat g;
    CVec h_at;
    std::vector<CVec> h_dk;
    std::vector<CVec> t_k;
    CVec psi_r;
    CVec psi_t;
    std::vector<CVec> u;
    CompositeRadarChannels radar;
    bool active = true;
};

inline SubcarrierLink make_link(const ChannelSet& ch, int n, const SurfaceConfig& s)
{
    SubcarrierLink l;
    l.g = ch.g.at(n);
    l.h_at = ch.h_at.at(n);
    l.h_dk = ch.h_dk.at(n);
    l.t_k = ch.t_k.at(n);
    l.psi_r = coefficient_vector(s, Side::reflect);
    l.psi_t = coefficient_vector(s, Side::transmit);
    for (std::size_t k = 0; k < l.h_dk.size(); ++k)
        l.u.push_back(effective_user_channel(l.h_dk[k], l.g, l.psi_t, l.t_k[k]));
    l.radar = composite_radar_channels(l.g, l.psi_r, l.h_at);
    l.active = s.active;
    return l;
}

inline double link_radar_snr(const SubcarrierLink& l, const Precoders& p, const NoisePowers& np)
{
    return radar_snr(l.radar, p, np, static_cast<int>(l.g.cols()), l.active);
}

inline std::vector<double> link_user_sinrs(const SubcarrierLink& l, const Precoders& p, const NoisePowers& np)
{
    std::vector<double> out;
    for (std::size_t k = 0; k < l.u.size(); ++k)
        out.push_back(user_sinr(l.u[k], p, l.psi_t, l.t_k[k], np, static_cast<int>(k), l.active));
    return out;
}

}  // namespace astars
