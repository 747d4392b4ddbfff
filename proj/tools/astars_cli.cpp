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

// astars command line: figure sweeps and single-scenario optimization reports.

#include "astars/astars.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <thread>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_infeasible = 2;

nlohmann::json matrix_json(const astars::CMat& a)
{
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            rr.push_back(a(i, j).real());
            ri.push_back(a(i, j).imag());
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    return {{"rows", a.rows()}, {"cols", a.cols()}, {"re", re}, {"im", im}};
}

astars::ExperimentConfig load_or_default(const std::string& path)
{
    if (path.empty()) return astars::ExperimentConfig{};
    return astars::load_experiment_config(path);
}

int run_simulate(int figure, const std::string& config, int trials, long long seed, const std::string& out,
                 const std::string& plot, int threads, bool passive)
{
    auto ec = load_or_default(config);
    astars::SweepOptions o;
    o.trials = trials > 0 ? trials : ec.scenario.trials;
    o.seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : ec.scenario.seed;
    o.threads = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    o.passive_only = passive;
    astars::log::info("figure ", figure, ": ", astars::figure_title(figure), ", trials=", o.trials, " seed=", o.seed,
                      " threads=", o.threads);
    const auto rows = astars::run_figure_sweep(figure, ec, o);
    astars::emit_csv(rows, out, astars::sweep_metadata(figure, ec, o));
    if (!plot.empty()) astars::emit_plot_script(rows, plot, out);
    bool empty_point = false;
    for (const auto& r : rows)
        if (r.trials == 0) empty_point = true;
    if (empty_point) {
        astars::log::warn("some sweep points have no feasible trial");
        return exit_infeasible;
    }
    return exit_ok;
}

int run_optimize(const std::string& config, const std::string& out, long long seed, int trial, bool passive,
                 const std::string& dump)
{
    auto ec = load_or_default(config);
    auto& cfg = ec.scenario;
    if (passive) cfg.passive = true;
    const std::uint64_t s = seed >= 0 ? static_cast<std::uint64_t>(seed) : cfg.seed;
    const auto r = astars::run_algorithm1(cfg, s, static_cast<std::uint64_t>(trial), cfg.passive);

    nlohmann::json rep;
    rep["config"] = astars::to_json(ec);
    rep["seed"] = s;
    rep["trial"] = trial;
    rep["status"] = r.feasible ? "optimal" : "infeasible";
    rep["history"] = r.history;
    if (r.feasible) {
        rep["radar_snr"] = r.history.back();
        rep["radar_snr_db"] = astars::linear_to_db(r.history.back());
        rep["baseline_snr"] = r.baseline_snr;
        nlohmann::json sinr_db = nlohmann::json::array();
        for (double v : r.sinr) sinr_db.push_back(astars::linear_to_db(v));
        rep["sinr"] = r.sinr;
        rep["sinr_db"] = sinr_db;
        rep["transmit_power"] = r.precoders.power();
        rep["alternations"] = r.alternations;
        rep["converged"] = r.converged;
        rep["surface"] = astars::to_json(r.surface);
        rep["precoders"] = {{"w_r", matrix_json(r.precoders.w_r)}, {"w_c", matrix_json(r.precoders.w_c)}};

        const astars::TargetTruth truth{cfg.d_true_m, cfg.v_true_kmh, cfg.f_c_hz};
        const auto rec = astars::sense_trial(cfg, r.surface, r.precoders, truth, s, static_cast<std::uint64_t>(trial));
        rep["sensing"] = {{"d_true_m", truth.d_true_m},
                          {"v_true_kmh", truth.v_true_kmh},
                          {"d_hat_m", rec.d_pooled},
                          {"v_hat_kmh", rec.v_pooled},
                          {"squared_error_d", rec.mse_d},
                          {"squared_error_v", rec.mse_v},
                          {"mse_v_literal", rec.mse_v_literal}};
        if (!dump.empty()) {
            const auto ch = astars::realize_channels(cfg, s, static_cast<std::uint64_t>(trial));
            const auto sub = astars::echo_subcarriers(cfg, ch, r.surface, r.precoders);
            astars::RngStream sym(s, {static_cast<std::uint64_t>(trial), astars::key(astars::StreamId::data_bits), 1});
            astars::RngStream noise(s, {static_cast<std::uint64_t>(trial), astars::key(astars::StreamId::echo_noise)});
            const double ramp = cfg.q >= 2 ? astars::ris_phase_increments(r.surface).sum() : 0.0;
            const auto f = astars::synthesize_echo(sub, astars::make_grid(cfg), truth, ramp,
                                                   astars::EchoSynthesis::time_domain, true, sym, noise);
            astars::write_frame_dump(dump, f.y);
        }
    } else {
        rep["first_step_status"] = static_cast<int>(r.first_status);
    }
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open " + out + " for writing");
    os << rep.dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed for " + out);
    return r.feasible ? exit_ok : exit_infeasible;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"astars: active STAR-RIS ISAC link-level simulator and optimizer.\n"
                 "Log verbosity: ASTARS_LOG=error|warn|info|debug (default warn).\n"
                 "Exit codes: 0 success, 2 infeasible, 1 error."};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo sweep of one figure, written as CSV");
    int figure = 0;
    std::string config, out, plot;
    int trials = 0, threads = 0;
    long long seed = -1;
    bool passive = false;
    sim->add_option("--figure", figure, "figure id")->required()->check(CLI::Range(2, 10));
    sim->add_option("--config", config, "JSON scenario file; defaults when omitted");
    sim->add_option("--trials", trials, "Monte Carlo trials (default: config)");
    sim->add_option("--seed", seed, "master seed (default: config)");
    sim->add_option("--out", out, "output CSV")->required();
    sim->add_option("--plot", plot, "also write a matplotlib script for the CSV");
    sim->add_option("--threads", threads, "worker threads (output does not depend on it)");
    sim->add_flag("--passive", passive, "use the passive STAR-RIS wherever a single surface is optimized");
    sim->footer("Range estimates are unambiguous below c / delta_f (total path length).");

    auto* opt = app.add_subcommand("optimize", "run the alternating optimizer on one channel draw");
    std::string oconfig, oout, dump;
    long long oseed = -1;
    int trial = 0;
    bool opassive = false;
    opt->add_option("--config", oconfig, "JSON scenario file; defaults when omitted");
    opt->add_option("--out", oout, "JSON report")->required();
    opt->add_option("--seed", oseed, "master seed (default: config)");
    opt->add_option("--trial", trial, "trial index of the channel draw")->check(CLI::NonNegativeNumber);
    opt->add_flag("--passive", opassive, "optimize a passive STAR-RIS");
    opt->add_option("--dump-frame", dump, "write the received echo grid as a binary frame dump");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_error;
    }

    try {
        if (*sim) return run_simulate(figure, config, trials, seed, out, plot, threads, passive);
        if (*opt) return run_optimize(oconfig, oout, oseed, trial, opassive, dump);
    } catch (const std::exception& e) {
        astars::log::error(e.what());
        return exit_error;
    }
    return exit_error;
}
