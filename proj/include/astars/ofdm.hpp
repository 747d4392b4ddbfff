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

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace astars {

struct OfdmGrid {
    int n_subcarriers = 64;
    double delta_f = 240e3;
    double cp_fraction = 0.07;
    int n_symbols = 14;
    std::optional<double> t_s_override;

    int cp_length() const { return static_cast<int>(std::ceil(cp_fraction * n_subcarriers - 1e-9)); }
    int samples_per_symbol() const { return n_subcarriers + cp_length(); }
    double useful_time() const { return 1.0 / delta_f; }
    double sample_period() const { return 1.0 / (n_subcarriers * delta_f); }
    /// T_s = (1 + cp_fraction) / delta_f unless overridden.
    double symbol_duration() const { return t_s_override ? *t_s_override : (1.0 + cp_fraction) / delta_f; }

    void validate() const
    {
        require(n_subcarriers >= 2, "OfdmGrid: n_subcarriers must be >= 2");
        require(delta_f > 0.0, "OfdmGrid: delta_f must be > 0");
        require(cp_fraction >= 0.0 && cp_fraction < 1.0, "OfdmGrid: cp_fraction must be in [0, 1)");
        require(n_symbols >= 1, "OfdmGrid: n_symbols must be >= 1");
        require(!t_s_override || *t_s_override > 0.0, "OfdmGrid: symbol duration must be > 0");
    }
};

inline OfdmGrid make_grid(const ScenarioConfig& cfg)
{
    OfdmGrid g;
    g.n_subcarriers = cfg.n_subcarriers;
    g.delta_f = cfg.delta_f_hz;
    g.cp_fraction = cfg.cp_fraction;
    g.n_symbols = cfg.n_symbols;
    g.t_s_override = cfg.t_s_override_s;
    g.validate();
    return g;
}

struct TargetTruth {
    double d_true_m = 0.0;    ///< total path length
    double v_true_kmh = 0.0;  ///< radial velocity
    double f_c_hz = 3e9;

    double lambda() const { return speed_of_light / f_c_hz; }
    /// f_d = 2 v / lambda.
    double doppler_hz() const { return 2.0 * kmh_to_ms(v_true_kmh) / lambda(); }
    void validate() const
    {
        require(d_true_m >= 0.0, "TargetTruth: d_true must be >= 0");
        require(f_c_hz > 0.0, "TargetTruth: f_c must be > 0");
    }
};

/// Unitary IDFT of one symbol with the last cp_length samples prepended.
inline CVec ofdm_modulate(const CVec& freq, const OfdmGrid& grid)
{
    const int n = grid.n_subcarriers;
    if (freq.size() != n) throw std::invalid_argument("ofdm_modulate: expected n_subcarriers symbols");
    Eigen::FFT<double> fft;
    std::vector<cplx> in(freq.data(), freq.data() + n), out;
    fft.inv(out, in);
    const double scale = std::sqrt(static_cast<double>(n));
    const int cp = grid.cp_length();
    CVec td(n + cp);
    for (int i = 0; i < n; ++i) td(cp + i) = out[i] * scale;
    for (int i = 0; i < cp; ++i) td(i) = td(n + i);
    return td;
}

/// Drops the cyclic prefix and applies the unitary DFT.
inline CVec ofdm_demodulate(const CVec& samples, const OfdmGrid& grid)
{
    const int n = grid.n_subcarriers;
    const int cp = grid.cp_length();
    if (samples.size() != n + cp) throw std::invalid_argument("ofdm_demodulate: sample count does not match the grid");
    Eigen::FFT<double> fft;
    std::vector<cplx> in(samples.data() + cp, samples.data() + cp + n), out;
    fft.fwd(out, in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    CVec fd(n);
    for (int i = 0; i < n; ++i) fd(i) = out[i] * scale;
    return fd;
}

/// Gray-mapped QPSK: bit pair (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2).
inline CVec qpsk_map(const std::vector<std::uint8_t>& bits)
{
    if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_map: bit count must be even");
    const double a = 1.0 / std::sqrt(2.0);
    CVec s(static_cast<Eigen::Index>(bits.size() / 2));
    for (Eigen::Index i = 0; i < s.size(); ++i)
        s(i) = cplx(bits[2 * i] ? -a : a, bits[2 * i + 1] ? -a : a);
    return s;
}

inline std::vector<std::uint8_t> qpsk_demap(const CVec& symbols)
{
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(symbols.size()) * 2);
    for (Eigen::Index i = 0; i < symbols.size(); ++i) {
        bits.push_back(symbols(i).real() < 0.0 ? 1 : 0);
        bits.push_back(symbols(i).imag() < 0.0 ? 1 : 0);
    }
    return bits;
}

inline double measure_ber(const std::vector<std::uint8_t>& tx, const std::vector<std::uint8_t>& rx)
{
    if (tx.size() != rx.size()) throw std::invalid_argument("measure_ber: length mismatch");
    if (tx.empty()) throw std::invalid_argument("measure_ber: empty streams");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < tx.size(); ++i) errors += (tx[i] != 0) != (rx[i] != 0);
    return static_cast<double>(errors) / static_cast<double>(tx.size());
}

/// Gaussian tail Q(x).
inline double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Resource-element model: subcarrier n of symbol l is multiplied by
/// exp(-j 2 pi n delta_f d / c) exp(j 2 pi f_d l T_s). frame is n_subcarriers x n_symbols.
inline CMat apply_delay_doppler(const CMat& frame, const TargetTruth& truth, const OfdmGrid& grid)
{
    truth.validate();
    if (frame.rows() != grid.n_subcarriers) throw std::invalid_argument("apply_delay_doppler: frame size mismatch");
    const double fd = truth.doppler_hz();
    const double ts = grid.symbol_duration();
    CMat out(frame.rows(), frame.cols());
    for (Eigen::Index l = 0; l < frame.cols(); ++l)
        for (Eigen::Index n = 0; n < frame.rows(); ++n) {
            const double ph = -two_pi * n * grid.delta_f * truth.d_true_m / speed_of_light + two_pi * fd * l * ts;
            out(n, l) = frame(n, l) * std::polar(1.0, ph);
        }
    return out;
}

/// Modulates every column of a frame; symbol l starts at l T_s.
inline std::vector<CVec> modulate_frame(const CMat& frame, const OfdmGrid& grid)
{
    std::vector<CVec> out;
    for (Eigen::Index l = 0; l < frame.cols(); ++l) out.push_back(ofdm_modulate(frame.col(l), grid));
    return out;
}

inline CMat demodulate_frame(const std::vector<CVec>& symbols, const OfdmGrid& grid)
{
    CMat out(grid.n_subcarriers, static_cast<Eigen::Index>(symbols.size()));
    for (std::size_t l = 0; l < symbols.size(); ++l) out.col(static_cast<Eigen::Index>(l)) = ofdm_demodulate(symbols[l], grid);
    return out;
}

/// Continuous-time Doppler: sample i of symbol l (CP included) is rotated by exp(j 2 pi f_d t)
/// with t = l T_s + i / (N_s delta_f). Produces inter-carrier interference after demodulation.
inline void apply_time_doppler(std::vector<CVec>& symbols, double f_d, const OfdmGrid& grid)
{
    const double ts = grid.symbol_duration();
    const double dt = grid.sample_period();
    for (std::size_t l = 0; l < symbols.size(); ++l)
        for (Eigen::Index i = 0; i < symbols[l].size(); ++i)
            symbols[l](i) *= std::polar(1.0, two_pi * f_d * (static_cast<double>(l) * ts + static_cast<double>(i) * dt));
}

inline void add_awgn(std::vector<CVec>& symbols, double variance, RngStream& rng)
{
    const double s = std::sqrt(variance / 2.0);
    for (auto& v : symbols)
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            v(i) += s * cplx(re, im);
        }
}

struct BerTally {
    std::size_t errors = 0;
    std::size_t bits = 0;
    double rate() const { return bits ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0; }
};

/// One QPSK frame through the time-domain Doppler channel at per-resource-element SNR snr_lin.
/// Symbol 0 is a pilot used for a one-tap estimate per subcarrier; later symbols are equalized
/// with that estimate and no phase tracking.
inline BerTally simulate_ber_frame(const OfdmGrid& grid, const TargetTruth& truth, double snr_lin, RngStream& bits_rng,
                                   RngStream& noise_rng)
{
    grid.validate();
    require(grid.n_symbols >= 2, "simulate_ber_frame: need a pilot and at least one data symbol");
    require(snr_lin > 0.0, "simulate_ber_frame: snr must be positive");
    const int n = grid.n_subcarriers;
    const int l_sym = grid.n_symbols;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(2 * n * l_sym));
    for (auto& b : bits) b = static_cast<std::uint8_t>(bits_rng.bits() & 1u);
    const CVec s = qpsk_map(bits);
    const CMat frame = Eigen::Map<const CMat>(s.data(), n, l_sym);
    const CMat delayed = apply_delay_doppler(frame, TargetTruth{truth.d_true_m, 0.0, truth.f_c_hz}, grid);
    auto td = modulate_frame(delayed, grid);
    apply_time_doppler(td, truth.doppler_hz(), grid);
    add_awgn(td, 1.0 / snr_lin, noise_rng);
    const CMat rx = demodulate_frame(td, grid);

    const CVec h = rx.col(0).cwiseQuotient(frame.col(0));
    BerTally t;
    for (int l = 1; l < l_sym; ++l) {
        const CVec eq = rx.col(l).cwiseQuotient(h);
        const auto got = qpsk_demap(eq);
        for (int i = 0; i < 2 * n; ++i) {
            t.errors += got[i] != bits[static_cast<std::size_t>(2 * n * l + i)];
            ++t.bits;
        }
    }
    return t;
}

// frame dumps: 8-byte magic, uint32 N_s, uint32 n_symbols, then float64 re/im pairs,
// little-endian, symbol-major

inline constexpr std::array<char, 8> frame_magic{'A', 'S', 'T', 'F', 'R', 'M', '0', '1'};

namespace detail {

template <class T>
void put_le(std::ostream& os, T v)
{
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    os.write(reinterpret_cast<const char*>(b.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is)
{
    std::array<unsigned char, sizeof(T)> b;
    is.read(reinterpret_cast<char*>(b.data()), sizeof(T));
    if (!is) throw std::runtime_error("frame dump: truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    T v;
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
}

}  // namespace detail

inline void write_frame_dump(const std::string& path, const CMat& frame)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(frame_magic.data(), frame_magic.size());
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(frame.rows()));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(frame.cols()));
    for (Eigen::Index l = 0; l < frame.cols(); ++l)
        for (Eigen::Index n = 0; n < frame.rows(); ++n) {
            detail::put_le<double>(os, frame(n, l).real());
            detail::put_le<double>(os, frame(n, l).imag());
        }
    if (!os) throw std::runtime_error("write failed for " + path);
}

inline CMat read_frame_dump(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::array<char, 8> magic;
    is.read(magic.data(), magic.size());
    if (!is || magic != frame_magic) throw std::runtime_error(path + ": not a frame dump");
    const auto n = detail::get_le<std::uint32_t>(is);
    const auto l = detail::get_le<std::uint32_t>(is);
    CMat frame(n, l);
    for (std::uint32_t j = 0; j < l; ++j)
        for (std::uint32_t i = 0; i < n; ++i) {
            const double re = detail::get_le<double>(is);
            const double im = detail::get_le<double>(is);
            frame(i, j) = cplx(re, im);
        }
    return frame;
}

}  // namespace astars
