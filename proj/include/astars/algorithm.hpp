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

#include "astars/beamform.hpp"
#include "astars/channel.hpp"
#include "astars/log.hpp"
#include "astars/phase_opt.hpp"
#include "astars/rng.hpp"
#include "astars/scenario.hpp"
#include "astars/signal.hpp"
#include "astars/surface.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace astars {

struct Algorithm1Result {
    bool feasible = false;
    Precoders precoders;
    SurfaceConfig surface;
    SurfaceConfig initial_surface;
    Precoders initial_precoders;
    double baseline_snr = 0.0;     ///< initial surface with its optimal precoders
    std::vector<double> history;   ///< radar SNR after the initial W-step and after each later step
    std::vector<double> sinr;      ///< final per-user SINR
    int alternations = 0;
    bool converged = false;
    BeamformStatus first_status = BeamformStatus::numerical_error;
};

inline PhaseOptions phase_options(const ScenarioConfig& cfg)
{
    PhaseOptions o;
    o.tol = cfg.phase_tol;
    o.max_outer = cfg.phase_max_outer;
    o.max_inner = cfg.phase_max_inner;
    return o;
}

/// Channels of the reference subcarrier only; identical to the matching entry of a full draw.
inline ChannelSet reference_channels(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t trial)
{
    ScenarioConfig c = cfg;
    c.n_subcarriers = std::max(2, cfg.reference_subcarrier + 1);
    return realize_channels(c, seed, trial);
}

/// Random surface of one trial. Active and passive runs consume the same draws.
inline SurfaceConfig initial_surface(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t trial, bool passive)
{
    RngStream r(seed, {trial, key(StreamId::surface_init)});
    return random_config(cfg.q, cfg.alpha_max, !passive, r);
}

/// Alternates the precoder step and the surface step on the reference subcarrier until the
/// relative radar-SNR gain of a full round falls below alternation_tol.
inline Algorithm1Result run_algorithm1(const ScenarioConfig& cfg, const ChannelSet& ch, const SurfaceConfig& init)
{
    const NoisePowers np = cfg.noise();
    const double xi = cfg.xi();
    const int n = cfg.reference_subcarrier;
    Algorithm1Result r;
    r.initial_surface = init;
    r.surface = init;

    SubcarrierLink link = make_link(ch, n, init);
    BeamformerSolution sol =
        solve_beamforming(make_beamform_problem(link, xi, cfg.p_bs, np), cfg.solver_tol, cfg.solver_max_iter);
    r.first_status = sol.status;
    if (sol.status != BeamformStatus::optimal && sol.status != BeamformStatus::max_iterations) {
        log::debug("run_algorithm1: initial precoder step not solved (status ", static_cast<int>(sol.status), ")");
        return r;
    }
    r.feasible = true;
    r.precoders = sol.precoders;
    r.initial_precoders = sol.precoders;
    r.baseline_snr = sol.objective;
    r.history.push_back(sol.objective);
    double snr = sol.objective;

    for (int t = 0; t < cfg.max_alternations; ++t) {
        const double round_start = snr;
        const PhaseResult pr = optimize_phases(link, r.surface, r.precoders, np, xi, phase_options(cfg));
        r.surface = pr.surface;
        link = relink(link, r.surface);
        const double snr_phi = link_radar_snr(link, r.precoders, np);
        if (snr_phi < snr * (1.0 - 1e-6)) throw AlgorithmFault("run_algorithm1: surface step lowered the radar SNR", r.history);
        snr = snr_phi;
        r.history.push_back(snr);

        const BeamformerSolution s2 =
            solve_beamforming(make_beamform_problem(link, xi, cfg.p_bs, np), cfg.solver_tol, cfg.solver_max_iter);
        const bool usable = (s2.status == BeamformStatus::optimal || s2.status == BeamformStatus::max_iterations);
        if (usable && s2.objective >= snr) {
            r.precoders = s2.precoders;
            snr = s2.objective;
        } else if (!usable) {
            log::debug("run_algorithm1: precoder step status ", static_cast<int>(s2.status), ", keeping previous precoders");
        }
        r.history.push_back(snr);
        r.alternations = t + 1;
        if (snr - round_start <= cfg.alternation_tol * round_start) {
            r.converged = true;
            break;
        }
    }
    r.sinr = link_user_sinrs(link, r.precoders, np);
    return r;
}

inline Algorithm1Result run_algorithm1(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t trial, bool passive)
{
    const ChannelSet ch = reference_channels(cfg, seed, trial);
    return run_algorithm1(cfg, ch, initial_surface(cfg, seed, trial, passive));
}

}  // namespace astars
