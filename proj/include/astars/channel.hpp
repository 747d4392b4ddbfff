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
#include "astars/rng.hpp"
#include "astars/scenario.hpp"

#include <stdexcept>
#include <vector>

namespace astars {

/// Linear power gain of a path-loss law.
inline double path_loss(const PathLossLaw& law)
{
    if (!(law.distance_m > 0.0)) throw std::domain_error("path_loss: distance must be positive");
    if (law.mu < 0.0) throw std::domain_error("path_loss: exponent must be non-negative");
    return db_to_linear(law.c_db) * std::pow(law.distance_m, -law.mu);
}

/// ULA response; entry i is exp(-j*pi*i*sin(theta)).
inline CVec steering_vector(double theta, int q)
{
    if (!(theta >= -pi / 2 && theta <= pi / 2)) throw std::domain_error("steering_vector: theta outside [-pi/2, pi/2]");
    if (q < 1) throw std::domain_error("steering_vector: q must be >= 1");
    CVec a(q);
    const double s = std::sin(theta);
    a(0) = 1.0;
    for (int i = 1; i < q; ++i) a(i) = std::polar(1.0, -pi * i * s);
    return a;
}

/// Line-of-sight surface->target channel sqrt(beta_a) * a(theta).
inline CVec surface_target_channel(double theta, double beta_a, int q)
{
    if (!(beta_a > 0.0)) throw std::domain_error("surface_target_channel: beta_a must be positive");
    return std::sqrt(beta_a) * steering_vector(theta, q);
}

/// i.i.d. CN(0, beta) entries.
inline CMat sample_rayleigh(int rows, int cols, double beta, RngStream& rng)
{
    if (!(beta > 0.0)) throw std::domain_error("sample_rayleigh: beta must be positive");
    const double s = std::sqrt(beta / 2.0);
    CMat out(rows, cols);
    // column-major fill order is part of the determinism contract
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) {
            const double re = rng.normal();
            const double im = rng.normal();
            out(r, c) = cplx(s * re, s * im);
        }
    return out;
}

/// Per-subcarrier realizations of every link.
struct ChannelSet {
    std::vector<CMat> g;                  ///< BS->surface, Q x M
    std::vector<CVec> h_at;               ///< surface->target, Q
    std::vector<std::vector<CVec>> h_dk;  ///< [n][k], BS->user direct, M
    std::vector<std::vector<CVec>> t_k;   ///< [n][k], surface->user, Q
    double theta_at = 0.0;
    int n_subcarriers = 0;

    int q() const { return g.empty() ? 0 : static_cast<int>(g.front().rows()); }
    int m() const { return g.empty() ? 0 : static_cast<int>(g.front().cols()); }
    int k() const { return h_dk.empty() ? 0 : static_cast<int>(h_dk.front().size()); }
};

/// Large-scale gain of the surface->target link, optionally coupled to the scenario's
/// total path length (BS->surface->target) so that a farther target is also weaker.
inline double target_gain(const ScenarioConfig& cfg)
{
    PathLossLaw law = cfg.surface_target;
    if (cfg.distance_coupled_target) {
        law.distance_m = cfg.d_true_m - cfg.bs_surface.distance_m;
        if (!(law.distance_m > 0.0))
            throw std::domain_error("target_gain: d_true_m must exceed the BS->surface distance");
    }
    return path_loss(law);
}

/// Draws one ChannelSet. Every link and subcarrier has its own stream keyed by
/// (seed, trial, link, subcarrier[, user]), so the result does not depend on evaluation order.
inline ChannelSet realize_channels(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t trial)
{
    cfg.validate();
    const double beta_g = path_loss(cfg.bs_surface);
    const double beta_d = path_loss(cfg.bs_user);
    const double eta = path_loss(cfg.surface_user);
    const double beta_a = target_gain(cfg);

    ChannelSet ch;
    ch.theta_at = cfg.theta_at_rad;
    ch.n_subcarriers = cfg.n_subcarriers;
    const CVec h_at = surface_target_channel(cfg.theta_at_rad, beta_a, cfg.q);
    const double d_at = cfg.distance_coupled_target ? cfg.d_true_m - cfg.bs_surface.distance_m
                                                    : cfg.surface_target.distance_m;

    for (int n = 0; n < cfg.n_subcarriers; ++n) {
        const std::uint64_t sc = cfg.flat_fading ? 0 : static_cast<std::uint64_t>(n);
        RngStream rg(seed, {trial, key(StreamId::bs_surface), sc});
        ch.g.push_back(sample_rayleigh(cfg.q, cfg.m, beta_g, rg));

        if (cfg.target_phase_rotation)
            ch.h_at.push_back(h_at * std::polar(1.0, -two_pi * n * cfg.delta_f_hz * d_at / speed_of_light));
        else
            ch.h_at.push_back(h_at);

        std::vector<CVec> hd, tk;
        for (int k = 0; k < cfg.k; ++k) {
            RngStream rd(seed, {trial, key(StreamId::bs_user), sc, static_cast<std::uint64_t>(k)});
            hd.push_back(sample_rayleigh(cfg.m, 1, beta_d, rd).col(0));
            RngStream rt(seed, {trial, key(StreamId::surface_user), sc, static_cast<std::uint64_t>(k)});
            tk.push_back(sample_rayleigh(cfg.q, 1, eta, rt).col(0));
        }
        ch.h_dk.push_back(std::move(hd));
        ch.t_k.push_back(std::move(tk));
    }
    return ch;
}

}  // namespace astars
