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

#include "astars/algorithm.hpp"
#include "astars/config_io.hpp"
#include "astars/log.hpp"
#include "astars/ofdm.hpp"
#include "astars/sensing.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

namespace astars {

// ---- statistics ----

/// Pairwise summation; the result depends only on the order of the input.
inline double pairwise_sum(const double* x, std::size_t n)
{
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

struct MeanStderr {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stderr_ = std::numeric_limits<double>::quiet_NaN();
    int count = 0;
};

/// Mean and sample standard deviation over sqrt(n) of the finite entries.
inline MeanStderr mean_stderr(const std::vector<double>& v)
{
    std::vector<double> x;
    for (double e : v)
        if (std::isfinite(e)) x.push_back(e);
    MeanStderr r;
    r.count = static_cast<int>(x.size());
    if (x.empty()) return r;
    r.mean = pairwise_sum(x.data(), x.size()) / static_cast<double>(x.size());
    if (x.size() < 2) {
        r.stderr_ = 0.0;
        return r;
    }
    std::vector<double> d2(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d2[i] = (x[i] - r.mean) * (x[i] - r.mean);
    const double var = pairwise_sum(d2.data(), d2.size()) / static_cast<double>(x.size() - 1);
    r.stderr_ = std::sqrt(var / static_cast<double>(x.size()));
    return r;
}

// ---- records and CSV ----

struct RunRecord {
    std::string experiment;
    std::string swept_var;
    double swept_value = 0.0;
    std::string metric;
    double mean = 0.0;
    double stderr_ = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
    std::vector<double> per_trial;  ///< not written to the CSV

    bool operator==(const RunRecord& o) const
    {
        auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
        return experiment == o.experiment && swept_var == o.swept_var && same(swept_value, o.swept_value) &&
               metric == o.metric && same(mean, o.mean) && same(stderr_, o.stderr_) && trials == o.trials &&
               seed == o.seed;
    }
};

inline constexpr const char* csv_header = "experiment,swept_var,swept_value,metric,mean,stderr,trials,seed";

/// Shortest text that round-trips is not used on purpose: 17 significant digits, '.' separator.
inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s)
{
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "'");
    return v;
}

inline void check_field(const std::string& s)
{
    if (s.find_first_of(",\n\r\"") != std::string::npos) throw std::invalid_argument("CSV field contains a delimiter: " + s);
}

/// Header line, one line per record, then '#' metadata lines.
inline std::string csv_text(const std::vector<RunRecord>& rows, const std::vector<std::string>& metadata = {})
{
    if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
    std::string out = csv_header;
    out += '\n';
    for (const auto& r : rows) {
        check_field(r.experiment);
        check_field(r.swept_var);
        check_field(r.metric);
        out += r.experiment + ',' + r.swept_var + ',' + format_double(r.swept_value) + ',' + r.metric + ',' +
               format_double(r.mean) + ',' + format_double(r.stderr_) + ',' + std::to_string(r.trials) + ',' +
               std::to_string(r.seed) + '\n';
    }
    for (const auto& m : metadata) out += "# " + m + '\n';
    return out;
}

inline void emit_csv(const std::vector<RunRecord>& rows, const std::string& path,
                     const std::vector<std::string>& metadata = {})
{
    const std::string text = csv_text(rows, metadata);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << text;
    if (!os) throw std::runtime_error("write failed for " + path);
}

inline std::vector<RunRecord> parse_csv_text(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != csv_header) throw std::runtime_error("parse_csv: missing header");
    std::vector<RunRecord> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 8) throw std::runtime_error("parse_csv: expected 8 fields in '" + line + "'");
        RunRecord r;
        r.experiment = f[0];
        r.swept_var = f[1];
        r.swept_value = parse_double(f[2]);
        r.metric = f[3];
        r.mean = parse_double(f[4]);
        r.stderr_ = parse_double(f[5]);
        r.trials = std::stoi(f[6]);
        r.seed = std::stoull(f[7]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<RunRecord> parse_csv(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_csv_text(ss.str());
}

/// Standalone matplotlib script: one panel, one line with error bars per metric.
inline std::string plot_script_text(const std::vector<RunRecord>& rows, const std::string& csv_path)
{
    if (rows.empty()) throw std::invalid_argument("emit_plot_script: no rows");
    std::string s;
    s += "#!/usr/bin/env python3\n";
    s += "# Plots a sweep CSV written by astars.\n";
    s += "import csv\nimport sys\nfrom collections import defaultdict\n\n";
    s += "import matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n";
    s += "path = sys.argv[1] if len(sys.argv) > 1 else \"" + csv_path + "\"\n";
    s += "series = defaultdict(list)\nxlabel = \"\"\ntitle = \"\"\n";
    s += "with open(path, newline=\"\") as fh:\n";
    s += "    for row in csv.DictReader(line for line in fh if not line.startswith(\"#\")):\n";
    s += "        xlabel = row[\"swept_var\"]\n        title = row[\"experiment\"]\n";
    s += "        series[row[\"metric\"]].append((float(row[\"swept_value\"]), float(row[\"mean\"]), float(row[\"stderr\"])))\n\n";
    s += "fig, ax = plt.subplots()\n";
    s += "for name, pts in series.items():\n";
    s += "    pts.sort()\n";
    s += "    ax.errorbar([p[0] for p in pts], [p[1] for p in pts], yerr=[p[2] for p in pts], marker=\"o\", capsize=3, label=name)\n";
    s += "ax.set_xlabel(xlabel)\nax.set_title(title)\nax.grid(True)\nax.legend()\n";
    s += "out = path.rsplit(\".\", 1)[0] + \".png\"\nfig.savefig(out, dpi=150)\nprint(out)\n";
    return s;
}

inline void emit_plot_script(const std::vector<RunRecord>& rows, const std::string& path, const std::string& csv_path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << plot_script_text(rows, csv_path);
    if (!os) throw std::runtime_error("write failed for " + path);
}

// ---- per-trial building blocks ----

/// Echo statistics of every subcarrier for the given surface and precoders.
inline std::vector<EchoSubcarrier> echo_subcarriers(const ScenarioConfig& cfg, const ChannelSet& ch,
                                                    const SurfaceConfig& s, const Precoders& w)
{
    const NoisePowers np = cfg.noise();
    std::vector<EchoSubcarrier> out;
    out.reserve(static_cast<std::size_t>(ch.n_subcarriers));
    if (cfg.flat_fading && !cfg.target_phase_rotation) {
        const EchoSubcarrier e = echo_subcarrier(make_link(ch, 0, s), w, np, cfg.combining);
        out.assign(static_cast<std::size_t>(ch.n_subcarriers), e);
        return out;
    }
    for (int n = 0; n < ch.n_subcarriers; ++n) out.push_back(echo_subcarrier(make_link(ch, n, s), w, np, cfg.combining));
    return out;
}

/// Noisy echo frame and its analysis for one trial.
inline SensingRecord sense_trial(const ScenarioConfig& cfg, const SurfaceConfig& s, const Precoders& w,
                                 const TargetTruth& truth, std::uint64_t seed, std::uint64_t trial,
                                 EchoSynthesis mode = EchoSynthesis::time_domain, bool add_noise = true)
{
    const ChannelSet ch = realize_channels(cfg, seed, trial);
    const auto sub = echo_subcarriers(cfg, ch, s, w);
    const OfdmGrid grid = make_grid(cfg);
    const double ramp = cfg.q >= 2 ? ris_phase_increments(s).sum() : 0.0;
    RngStream sym(seed, {trial, key(StreamId::data_bits), 1});
    RngStream noise(seed, {trial, key(StreamId::echo_noise)});
    const EchoFrame f = synthesize_echo(sub, grid, truth, ramp, mode, add_noise, sym, noise);
    return analyze_echo(f, ramp, grid, truth);
}

/// Bit error rate over `frames` QPSK frames at the configured per-element SNR.
inline double ber_trial(const ScenarioConfig& cfg, const TargetTruth& truth, int frames, std::uint64_t seed,
                        std::uint64_t trial)
{
    const OfdmGrid grid = make_grid(cfg);
    RngStream bits(seed, {trial, key(StreamId::data_bits), 2});
    RngStream noise(seed, {trial, key(StreamId::link_noise)});
    BerTally total;
    for (int f = 0; f < frames; ++f) {
        const BerTally t = simulate_ber_frame(grid, truth, db_to_linear(cfg.ber_snr_db), bits, noise);
        total.errors += t.errors;
        total.bits += t.bits;
    }
    return total.rate();
}

// ---- sweeps ----

/// Runs job(t) for t in [0, trials) on up to `threads` workers. Results are stored by trial
/// index, so the output does not depend on scheduling.
template <class Job>
void parallel_trials(int trials, int threads, Job&& job)
{
    const int n_workers = std::max(1, std::min(threads, trials));
    if (n_workers == 1) {
        for (int t = 0; t < trials; ++t) job(t);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= trials) return;
                try {
                    job(t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                    next = trials;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

struct SweepOptions {
    int trials = 1;
    std::uint64_t seed = 1;
    int threads = 1;
    bool passive_only = false;  ///< optimize the passive surface wherever a single surface is used
};

/// Collects (point, metric) -> per-trial values and turns them into records in insertion order.
class SweepTable {
public:
    SweepTable(std::string experiment, std::string swept_var, int trials)
        : experiment_(std::move(experiment)), swept_var_(std::move(swept_var)), trials_(trials)
    {
    }

    void declare(double value, const std::string& metric)
    {
        const auto k = std::make_pair(value, metric);
        if (index_.count(k)) return;
        index_[k] = cells_.size();
        cells_.push_back({value, metric, std::vector<double>(static_cast<std::size_t>(trials_),
                                                             std::numeric_limits<double>::quiet_NaN())});
    }
    void set(double value, const std::string& metric, int trial, double v)
    {
        cells_.at(index_.at(std::make_pair(value, metric))).values.at(static_cast<std::size_t>(trial)) = v;
    }
    std::vector<RunRecord> records(std::uint64_t seed) const
    {
        std::vector<RunRecord> out;
        for (const auto& c : cells_) {
            const auto ms = mean_stderr(c.values);
            RunRecord r;
            r.experiment = experiment_;
            r.swept_var = swept_var_;
            r.swept_value = c.value;
            r.metric = c.metric;
            r.mean = ms.mean;
            r.stderr_ = ms.stderr_;
            r.trials = ms.count;
            r.seed = seed;
            r.per_trial = c.values;
            out.push_back(std::move(r));
        }
        return out;
    }

private:
    struct Cell {
        double value;
        std::string metric;
        std::vector<double> values;
    };
    std::string experiment_;
    std::string swept_var_;
    int trials_;
    std::vector<Cell> cells_;
    std::map<std::pair<double, std::string>, std::size_t> index_;
};

inline std::string series_name(const std::string& metric, const std::string& var, double v)
{
    return metric + "[" + var + "=" + format_double(v) + "]";
}

inline double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

namespace detail {

inline double db_or_nan(double snr) { return snr > 0.0 ? linear_to_db(snr) : nan_value(); }

inline void radar_snr_sweep(SweepTable& tab, const std::vector<ScenarioConfig>& points, const std::vector<double>& xs,
                            const SweepOptions& o)
{
    for (double x : xs)
        for (const char* m : {"radar_snr_astars", "radar_snr_passive", "radar_snr_db_astars", "radar_snr_db_passive"})
            tab.declare(x, m);
    std::mutex mu;
    parallel_trials(o.trials, o.threads, [&](int t) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto a = run_algorithm1(points[i], o.seed, static_cast<std::uint64_t>(t), false);
            const auto p = run_algorithm1(points[i], o.seed, static_cast<std::uint64_t>(t), true);
            const double sa = a.feasible ? a.history.back() : nan_value();
            const double sp = p.feasible ? p.history.back() : nan_value();
            std::lock_guard<std::mutex> lock(mu);
            tab.set(xs[i], "radar_snr_astars", t, sa);
            tab.set(xs[i], "radar_snr_passive", t, sp);
            tab.set(xs[i], "radar_snr_db_astars", t, db_or_nan(sa));
            tab.set(xs[i], "radar_snr_db_passive", t, db_or_nan(sp));
        }
    });
}

}  // namespace detail

inline const char* figure_title(int figure)
{
    switch (figure) {
    case 2: return "radar SNR versus surface elements";
    case 3: return "radar SNR versus BS antennas";
    case 4: return "range MSE, optimized versus random surface";
    case 5: return "velocity MSE, optimized versus random surface";
    case 6: return "range MSE versus surface elements over target distance";
    case 7: return "velocity MSE versus surface elements over target velocity";
    case 8: return "velocity MSE versus surface elements over subcarrier count";
    case 9: return "QPSK BER versus surface elements over target velocity";
    case 10: return "QPSK BER versus surface elements over subcarrier spacing";
    default: return "";
    }
}

/// Monte Carlo sweep behind one figure; see figure_title for the contents of each.
inline std::vector<RunRecord> run_figure_sweep(int figure, const ExperimentConfig& ec, const SweepOptions& o)
{
    require(o.trials >= 1, "run_figure_sweep: trials must be >= 1");
    const ScenarioConfig& base = ec.scenario;
    const SweepGrids& g = ec.sweep;
    const std::string exp = "fig" + std::to_string(figure);
    const bool passive = o.passive_only || base.passive;
    std::vector<double> qs(g.q.begin(), g.q.end());
    auto with_q = [&](int q) {
        ScenarioConfig c = base;
        c.q = q;
        return c;
    };
    std::mutex mu;

    switch (figure) {
    case 2: {
        SweepTable tab(exp, "q", o.trials);
        std::vector<ScenarioConfig> pts;
        for (int q : g.q) pts.push_back(with_q(q));
        detail::radar_snr_sweep(tab, pts, qs, o);
        return tab.records(o.seed);
    }
    case 3: {
        SweepTable tab(exp, "m", o.trials);
        std::vector<ScenarioConfig> pts;
        std::vector<double> xs;
        for (int m : g.m) {
            ScenarioConfig c = base;
            c.m = m;
            pts.push_back(c);
            xs.push_back(m);
        }
        detail::radar_snr_sweep(tab, pts, xs, o);
        return tab.records(o.seed);
    }
    case 4:
    case 5: {
        const bool range = figure == 4;
        const std::string metric = range ? "mse_d" : "mse_v";
        SweepTable tab(exp, "q", o.trials);
        for (double q : qs)
            for (const char* s : {"_optimal", "_random"}) tab.declare(q, metric + s);
        if (!range)
            for (double q : qs)
                for (const char* s : {"_literal_optimal", "_literal_random"}) tab.declare(q, "mse_v" + std::string(s));
        parallel_trials(o.trials, o.threads, [&](int t) {
            for (int q : g.q) {
                const ScenarioConfig c = with_q(q);
                const auto a = run_algorithm1(c, o.seed, static_cast<std::uint64_t>(t), passive);
                double e_opt = nan_value(), e_rnd = nan_value(), l_opt = nan_value(), l_rnd = nan_value();
                if (a.feasible) {
                    const TargetTruth truth{c.d_true_m, range ? 0.0 : c.v_true_kmh, c.f_c_hz};
                    const auto so = sense_trial(c, a.surface, a.precoders, truth, o.seed, static_cast<std::uint64_t>(t));
                    const auto sr = sense_trial(c, a.initial_surface, a.initial_precoders, truth, o.seed,
                                                static_cast<std::uint64_t>(t));
                    e_opt = range ? so.mse_d : so.mse_v;
                    e_rnd = range ? sr.mse_d : sr.mse_v;
                    l_opt = so.mse_v_literal;
                    l_rnd = sr.mse_v_literal;
                }
                std::lock_guard<std::mutex> lock(mu);
                tab.set(q, metric + "_optimal", t, e_opt);
                tab.set(q, metric + "_random", t, e_rnd);
                if (!range) {
                    tab.set(q, "mse_v_literal_optimal", t, l_opt);
                    tab.set(q, "mse_v_literal_random", t, l_rnd);
                }
            }
        });
        return tab.records(o.seed);
    }
    case 6:
    case 7:
    case 8: {
        SweepTable tab(exp, "q", o.trials);
        const std::string var = figure == 6 ? "d_true_m" : figure == 7 ? "v_true_kmh" : "n_subcarriers";
        std::vector<double> series;
        if (figure == 6) series = g.d_true_m;
        else if (figure == 7) series = g.v_true_kmh;
        else series.assign(g.n_subcarriers.begin(), g.n_subcarriers.end());
        const std::string metric = figure == 6 ? "mse_d" : "mse_v";
        for (double q : qs)
            for (double s : series) tab.declare(q, series_name(metric, var, s));
        parallel_trials(o.trials, o.threads, [&](int t) {
            const auto tt = static_cast<std::uint64_t>(t);
            for (int q : g.q) {
                // the optimized configuration depends on the target distance only
                std::optional<Algorithm1Result> shared;
                for (double s : series) {
                    ScenarioConfig c = with_q(q);
                    TargetTruth truth{c.d_true_m, c.v_true_kmh, c.f_c_hz};
                    if (figure == 6) {
                        c.d_true_m = s;
                        c.distance_coupled_target = true;
                        truth = TargetTruth{s, 0.0, c.f_c_hz};
                    } else if (figure == 7) {
                        truth.v_true_kmh = s;
                    } else {
                        c.n_subcarriers = static_cast<int>(s);
                    }
                    Algorithm1Result a;
                    if (figure == 6 || !shared) {
                        a = run_algorithm1(c, o.seed, tt, passive);
                        if (figure != 6) shared = a;
                    } else {
                        a = *shared;
                    }
                    double e = nan_value();
                    if (a.feasible) {
                        const auto rec = sense_trial(c, a.surface, a.precoders, truth, o.seed, tt);
                        e = figure == 6 ? rec.mse_d : rec.mse_v;
                    }
                    std::lock_guard<std::mutex> lock(mu);
                    tab.set(q, series_name(metric, var, s), t, e);
                }
            }
        });
        return tab.records(o.seed);
    }
    case 9:
    case 10: {
        SweepTable tab(exp, "q", o.trials);
        const std::string var = figure == 9 ? "v_true_kmh" : "delta_f_hz";
        const std::vector<double>& series = figure == 9 ? g.v_true_kmh : g.delta_f_hz;
        for (double q : qs)
            for (double s : series) tab.declare(q, series_name("ber", var, s));
        parallel_trials(o.trials, o.threads, [&](int t) {
            for (int q : g.q) {
                for (double s : series) {
                    ScenarioConfig c = with_q(q);
                    TargetTruth truth{c.d_true_m, g.ber_v_true_kmh, c.f_c_hz};
                    if (figure == 9) {
                        c.delta_f_hz = g.ber_delta_f_hz;
                        truth.v_true_kmh = s;
                    } else {
                        c.delta_f_hz = s;
                    }
                    const double ber = ber_trial(c, truth, g.ber_frames, o.seed, static_cast<std::uint64_t>(t));
                    std::lock_guard<std::mutex> lock(mu);
                    tab.set(q, series_name("ber", var, s), t, ber);
                }
            }
        });
        return tab.records(o.seed);
    }
    default:
        throw std::invalid_argument("run_figure_sweep: unknown figure " + std::to_string(figure) + " (expected 2..10)");
    }
}

/// Metadata lines appended to every sweep CSV.
inline std::vector<std::string> sweep_metadata(int figure, const ExperimentConfig& ec, const SweepOptions& o)
{
    const auto& c = ec.scenario;
    return {std::string("figure=") + std::to_string(figure) + " " + figure_title(figure),
            "xi_db=" + format_double(c.xi_db) + " p_bs=" + format_double(c.p_bs) +
                " alpha_max=" + format_double(c.alpha_max) + " passive=" + (o.passive_only || c.passive ? "1" : "0"),
            "m=" + std::to_string(c.m) + " k=" + std::to_string(c.k) + " n_subcarriers=" +
                std::to_string(c.n_subcarriers) + " delta_f_hz=" + format_double(c.delta_f_hz),
            "trials=" + std::to_string(o.trials) + " seed=" + std::to_string(o.seed)};
}

}  // namespace astars
