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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace astars {

/// Large-scale fading law beta = 10^(c_db/10) * d^(-mu).
struct PathLossLaw {
    double c_db = 0.0;
    double mu = 0.0;
    double distance_m = 1.0;
};

/// Linear noise powers used by the radar SNR and user SINR metrics. The dynamic-noise
/// power is ignored by the metrics whenever the surface is passive.
struct NoisePowers {
    double sigma2 = 1e-4;    ///< user AWGN
    double sigma_v2 = 1e-4;  ///< dynamic noise injected by active elements
    double sigma_r2 = 1.58489319246111e-6;  ///< radar receiver noise
};

enum class EchoCombining { coherent_sum, dominant_direction };

/// All physical and system constants of one scenario. Powers are kept in dB here and
/// converted to linear units through the accessor functions.
struct ScenarioConfig {
    // array sizes
    int m = 32;  ///< BS antennas (used for both transmit and echo receive)
    int k = 4;   ///< single-antenna users
    int q = 100; ///< surface elements
    int n_subcarriers = 64;

    // waveform
    double delta_f_hz = 240e3;
    double f_c_hz = 3e9;
    double cp_fraction = 0.07;
    std::optional<double> t_s_override_s;  ///< use e.g. 17.68e-6 to reproduce the stated pairing
    int n_symbols = 14;

    // large-scale fading; target and surface->user links default to the BS->user law
    PathLossLaw bs_user{28.0, 3.67, 50.0};
    PathLossLaw bs_surface{26.0, 2.2, 8.0};
    PathLossLaw surface_target{28.0, 3.67, 50.0};
    PathLossLaw surface_user{28.0, 3.67, 50.0};
    double theta_at_rad = pi / 6.0;

    // noise powers in dB
    double sigma2_db = -40.0;
    double sigma_v2_db = -40.0;
    double sigma_r2_db = -58.0;

    // surface
    double alpha_max = 4.0;
    bool passive = false;

    // constraints
    double xi_db = 10.0;
    double p_bs = 1.0;

    // randomness
    std::uint64_t seed = 1;
    int trials = 1;
    bool flat_fading = true;   ///< one channel draw shared by every subcarrier
    bool target_phase_rotation = false;
    int reference_subcarrier = 0;

    // optimizer budgets
    int max_alternations = 8;
    double alternation_tol = 1e-4;
    int phase_max_outer = 30;
    int phase_max_inner = 10;
    double phase_tol = 1e-6;
    double solver_tol = 1e-7;
    int solver_max_iter = 500;

    // sensing experiment defaults
    double d_true_m = 40.0;
    double v_true_kmh = 100.0;
    bool distance_coupled_target = false;  ///< derive the surface->target law distance from d_true
    EchoCombining combining = EchoCombining::coherent_sum;
    double ber_snr_db = 10.0;

    // stored for documentation only; no model equation consumes them
    double element_dh_wavelengths = 0.25;
    double element_dv_wavelengths = 0.25;
    int m_t = 32;
    int m_r = 32;

    double wavelength_m() const { return speed_of_light / f_c_hz; }
    double xi() const { return db_to_linear(xi_db); }

    NoisePowers noise() const
    {
        NoisePowers np;
        np.sigma2 = db_to_linear(sigma2_db);
        np.sigma_v2 = db_to_linear(sigma_v2_db);
        np.sigma_r2 = db_to_linear(sigma_r2_db);
        return np;
    }

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const
    {
        require(m >= 1, "m must be >= 1");
        require(k >= 0, "k must be >= 0");
        require(q >= 1, "q must be >= 1");
        require(n_subcarriers >= 2, "n_subcarriers must be >= 2");
        require(delta_f_hz > 0.0, "delta_f_hz must be > 0");
        require(f_c_hz > 0.0, "f_c_hz must be > 0");
        require(cp_fraction >= 0.0 && cp_fraction < 1.0, "cp_fraction must be in [0,1)");
        require(!t_s_override_s || *t_s_override_s > 0.0, "t_s_override_s must be > 0");
        require(n_symbols >= 1, "n_symbols must be >= 1");
        for (const auto* law : {&bs_user, &bs_surface, &surface_target, &surface_user}) {
            require(law->distance_m > 0.0, "path-loss distance must be > 0");
            require(law->mu >= 0.0, "path-loss exponent must be >= 0");
        }
        require(theta_at_rad >= -pi / 2 && theta_at_rad <= pi / 2, "theta_at_rad must be in [-pi/2, pi/2]");
        require(alpha_max > 0.0, "alpha_max must be > 0");
        require(p_bs > 0.0, "p_bs must be > 0");
        require(trials >= 1, "trials must be >= 1");
        require(reference_subcarrier >= 0 && reference_subcarrier < n_subcarriers,
                "reference_subcarrier out of range");
        require(max_alternations >= 0, "max_alternations must be >= 0");
        require(phase_max_outer >= 0 && phase_max_inner >= 1, "phase iteration budgets invalid");
        require(d_true_m >= 0.0, "d_true_m must be >= 0");
    }
};

}  // namespace astars
