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

#include "astars/scenario.hpp"
#include "astars/surface.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace astars {

/// Sweep grids of the figure experiments. Grids the scenario does not fix have defaults here.
struct SweepGrids {
    std::vector<int> q{16, 36, 64, 100};
    std::vector<int> m{8, 16, 32};
    std::vector<double> d_true_m{20.0, 40.0, 60.0};
    std::vector<double> v_true_kmh{50.0, 150.0, 300.0};
    std::vector<int> n_subcarriers{16, 64, 256};
    std::vector<double> delta_f_hz{60e3, 120e3, 240e3};
    double ber_delta_f_hz = 120e3;  ///< fixed spacing of the BER-versus-velocity sweep
    double ber_v_true_kmh = 150.0;  ///< fixed velocity of the BER-versus-spacing sweep
    int ber_frames = 20;            ///< frames per trial and grid point
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    SweepGrids sweep;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using json = nlohmann::json;

template <class T>
void read_key(const json& j, const char* key, T& out)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

inline void read_law(const json& j, const std::string& c, const std::string& mu, const std::string& d, PathLossLaw& law)
{
    read_key(j, c.c_str(), law.c_db);
    read_key(j, mu.c_str(), law.mu);
    read_key(j, d.c_str(), law.distance_m);
}

inline const std::vector<std::string>& scenario_keys()
{
    static const std::vector<std::string> keys{
        "m", "k", "q", "n_subcarriers", "delta_f_hz", "f_c_hz", "cp_fraction", "t_s_s", "n_symbols",
        "c1_db", "mu1", "d1_m", "c2_db", "mu2", "d2_m", "c_target_db", "mu_target", "d_target_m",
        "c_surface_user_db", "mu_surface_user", "d_surface_user_m", "theta_at_rad", "sigma2_db", "sigma_v2_db",
        "sigma_r2_db", "alpha_max", "passive", "xi_db", "p_bs", "seed", "trials", "flat_fading",
        "target_phase_rotation", "reference_subcarrier", "max_alternations", "alternation_tol", "phase_max_outer",
        "phase_max_inner", "phase_tol", "solver_tol", "solver_max_iter", "d_true_m", "v_true_kmh",
        "distance_coupled_target", "combining", "ber_snr_db", "element_dh_wavelengths", "element_dv_wavelengths",
        "m_t", "m_r", "sweep"};
    return keys;
}

}  // namespace detail

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j)
{
    using detail::read_key;
    if (!j.is_object()) throw ConfigError("config root must be an object");
    const auto& keys = detail::scenario_keys();
    for (const auto& [k, v] : j.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown config key '" + k + "'");
    }
    ExperimentConfig ec;
    ScenarioConfig& c = ec.scenario;
    read_key(j, "m", c.m);
    read_key(j, "k", c.k);
    read_key(j, "q", c.q);
    read_key(j, "n_subcarriers", c.n_subcarriers);
    read_key(j, "delta_f_hz", c.delta_f_hz);
    read_key(j, "f_c_hz", c.f_c_hz);
    read_key(j, "cp_fraction", c.cp_fraction);
    if (j.contains("t_s_s") && !j.at("t_s_s").is_null()) c.t_s_override_s = j.at("t_s_s").get<double>();
    read_key(j, "n_symbols", c.n_symbols);
    detail::read_law(j, "c1_db", "mu1", "d1_m", c.bs_user);
    detail::read_law(j, "c2_db", "mu2", "d2_m", c.bs_surface);
    detail::read_law(j, "c_target_db", "mu_target", "d_target_m", c.surface_target);
    detail::read_law(j, "c_surface_user_db", "mu_surface_user", "d_surface_user_m", c.surface_user);
    read_key(j, "theta_at_rad", c.theta_at_rad);
    read_key(j, "sigma2_db", c.sigma2_db);
    read_key(j, "sigma_v2_db", c.sigma_v2_db);
    read_key(j, "sigma_r2_db", c.sigma_r2_db);
    read_key(j, "alpha_max", c.alpha_max);
    read_key(j, "passive", c.passive);
    read_key(j, "xi_db", c.xi_db);
    read_key(j, "p_bs", c.p_bs);
    read_key(j, "seed", c.seed);
    read_key(j, "trials", c.trials);
    read_key(j, "flat_fading", c.flat_fading);
    read_key(j, "target_phase_rotation", c.target_phase_rotation);
    read_key(j, "reference_subcarrier", c.reference_subcarrier);
    read_key(j, "max_alternations", c.max_alternations);
    read_key(j, "alternation_tol", c.alternation_tol);
    read_key(j, "phase_max_outer", c.phase_max_outer);
    read_key(j, "phase_max_inner", c.phase_max_inner);
    read_key(j, "phase_tol", c.phase_tol);
    read_key(j, "solver_tol", c.solver_tol);
    read_key(j, "solver_max_iter", c.solver_max_iter);
    read_key(j, "d_true_m", c.d_true_m);
    read_key(j, "v_true_kmh", c.v_true_kmh);
    read_key(j, "distance_coupled_target", c.distance_coupled_target);
    if (j.contains("combining")) {
        const auto s = j.at("combining").get<std::string>();
        if (s == "coherent_sum") c.combining = EchoCombining::coherent_sum;
        else if (s == "dominant_direction") c.combining = EchoCombining::dominant_direction;
        else throw ConfigError("combining must be 'coherent_sum' or 'dominant_direction'");
    }
    read_key(j, "ber_snr_db", c.ber_snr_db);
    read_key(j, "element_dh_wavelengths", c.element_dh_wavelengths);
    read_key(j, "element_dv_wavelengths", c.element_dv_wavelengths);
    read_key(j, "m_t", c.m_t);
    read_key(j, "m_r", c.m_r);

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        static const std::vector<std::string> sk{"q", "m", "d_true_m", "v_true_kmh", "n_subcarriers", "delta_f_hz",
                                                 "ber_delta_f_hz", "ber_v_true_kmh", "ber_frames"};
        for (const auto& [k, v] : s.items())
            if (std::find(sk.begin(), sk.end(), k) == sk.end()) throw ConfigError("unknown sweep key '" + k + "'");
        SweepGrids& g = ec.sweep;
        read_key(s, "q", g.q);
        read_key(s, "m", g.m);
        read_key(s, "d_true_m", g.d_true_m);
        read_key(s, "v_true_kmh", g.v_true_kmh);
        read_key(s, "n_subcarriers", g.n_subcarriers);
        read_key(s, "delta_f_hz", g.delta_f_hz);
        read_key(s, "ber_delta_f_hz", g.ber_delta_f_hz);
        read_key(s, "ber_v_true_kmh", g.ber_v_true_kmh);
        read_key(s, "ber_frames", g.ber_frames);
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
    return ec;
}

inline nlohmann::json to_json(const ScenarioConfig& c)
{
    nlohmann::json j;
    j["m"] = c.m;
    j["k"] = c.k;
    j["q"] = c.q;
    j["n_subcarriers"] = c.n_subcarriers;
    j["delta_f_hz"] = c.delta_f_hz;
    j["f_c_hz"] = c.f_c_hz;
    j["cp_fraction"] = c.cp_fraction;
    j["t_s_s"] = c.t_s_override_s ? nlohmann::json(*c.t_s_override_s) : nlohmann::json(nullptr);
    j["n_symbols"] = c.n_symbols;
    j["c1_db"] = c.bs_user.c_db;
    j["mu1"] = c.bs_user.mu;
    j["d1_m"] = c.bs_user.distance_m;
    j["c2_db"] = c.bs_surface.c_db;
    j["mu2"] = c.bs_surface.mu;
    j["d2_m"] = c.bs_surface.distance_m;
    j["c_target_db"] = c.surface_target.c_db;
    j["mu_target"] = c.surface_target.mu;
    j["d_target_m"] = c.surface_target.distance_m;
    j["c_surface_user_db"] = c.surface_user.c_db;
    j["mu_surface_user"] = c.surface_user.mu;
    j["d_surface_user_m"] = c.surface_user.distance_m;
    j["theta_at_rad"] = c.theta_at_rad;
    j["sigma2_db"] = c.sigma2_db;
    j["sigma_v2_db"] = c.sigma_v2_db;
    j["sigma_r2_db"] = c.sigma_r2_db;
    j["alpha_max"] = c.alpha_max;
    j["passive"] = c.passive;
    j["xi_db"] = c.xi_db;
    j["p_bs"] = c.p_bs;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["flat_fading"] = c.flat_fading;
    j["target_phase_rotation"] = c.target_phase_rotation;
    j["reference_subcarrier"] = c.reference_subcarrier;
    j["max_alternations"] = c.max_alternations;
    j["alternation_tol"] = c.alternation_tol;
    j["phase_max_outer"] = c.phase_max_outer;
    j["phase_max_inner"] = c.phase_max_inner;
    j["phase_tol"] = c.phase_tol;
    j["solver_tol"] = c.solver_tol;
    j["solver_max_iter"] = c.solver_max_iter;
    j["d_true_m"] = c.d_true_m;
    j["v_true_kmh"] = c.v_true_kmh;
    j["distance_coupled_target"] = c.distance_coupled_target;
    j["combining"] = c.combining == EchoCombining::coherent_sum ? "coherent_sum" : "dominant_direction";
    j["ber_snr_db"] = c.ber_snr_db;
    j["element_dh_wavelengths"] = c.element_dh_wavelengths;
    j["element_dv_wavelengths"] = c.element_dv_wavelengths;
    j["m_t"] = c.m_t;
    j["m_r"] = c.m_r;
    return j;
}

inline nlohmann::json to_json(const SweepGrids& g)
{
    return {{"q", g.q},
            {"m", g.m},
            {"d_true_m", g.d_true_m},
            {"v_true_kmh", g.v_true_kmh},
            {"n_subcarriers", g.n_subcarriers},
            {"delta_f_hz", g.delta_f_hz},
            {"ber_delta_f_hz", g.ber_delta_f_hz},
            {"ber_v_true_kmh", g.ber_v_true_kmh},
            {"ber_frames", g.ber_frames}};
}

inline nlohmann::json to_json(const ExperimentConfig& ec)
{
    auto j = to_json(ec.scenario);
    j["sweep"] = to_json(ec.sweep);
    return j;
}

inline nlohmann::json to_json(const SurfaceConfig& s)
{
    nlohmann::json j;
    j["q"] = s.q;
    j["alpha_max"] = s.alpha_max;
    j["active"] = s.active;
    auto& el = j["elements"] = nlohmann::json::array();
    for (int i = 0; i < s.q; ++i)
        el.push_back({{"beta_t", s.beta_t(i)},
                      {"beta_r", s.beta_r(i)},
                      {"phi_t", s.phi_t(i)},
                      {"phi_r", s.phi_r(i)},
                      {"alpha", s.alpha(i)}});
    return j;
}

inline SurfaceConfig surface_from_json(const nlohmann::json& j)
{
    try {
        SurfaceConfig s;
        s.q = j.at("q").get<int>();
        s.alpha_max = j.at("alpha_max").get<double>();
        s.active = j.at("active").get<bool>();
        const auto& el = j.at("elements");
        if (!el.is_array() || static_cast<int>(el.size()) != s.q) throw ConfigError("surface: expected q elements");
        s.beta_t.resize(s.q);
        s.beta_r.resize(s.q);
        s.phi_t.resize(s.q);
        s.phi_r.resize(s.q);
        s.alpha.resize(s.q);
        for (int i = 0; i < s.q; ++i) {
            s.beta_t(i) = el[i].at("beta_t").get<double>();
            s.beta_r(i) = el[i].at("beta_r").get<double>();
            s.phi_t(i) = el[i].at("phi_t").get<double>();
            s.phi_r(i) = el[i].at("phi_r").get<double>();
            s.alpha(i) = el[i].at("alpha").get<double>();
        }
        ensure_valid(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("surface: ") + e.what());
    }
}

inline nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    try {
        return nlohmann::json::parse(is, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline ExperimentConfig load_experiment_config(const std::string& path)
{
    return experiment_config_from_json(read_json_file(path));
}

}  // namespace astars
