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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace astars {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double speed_of_light = 299792458.0;  // m/s

inline constexpr cplx j_unit{0.0, 1.0};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double kmh_to_ms(double v) { return v / 3.6; }
inline double ms_to_kmh(double v) { return v * 3.6; }

/// Wraps an angle into (-pi, pi].
inline double wrap_pm_pi(double x)
{
    double r = std::fmod(x + pi, two_pi);
    if (r < 0.0) r += two_pi;
    // r in [0, 2pi); map r == 0 to +pi so the interval is half-open at -pi
    if (r == 0.0) return pi;
    return r - pi;
}

/// Wraps an angle into [0, 2*pi).
inline double wrap_2pi(double x)
{
    double r = std::fmod(x, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r -= two_pi;
    return r;
}

inline CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

/// Column-stacking vectorization.
inline CVec vec(const CMat& a)
{
    return Eigen::Map<const CVec>(a.data(), a.size());
}

/// Inverse of vec for a square matrix of side n.
inline CMat unvec(const CVec& v, Eigen::Index n)
{
    if (v.size() != n * n) throw std::invalid_argument("unvec: size mismatch");
    return Eigen::Map<const CMat>(v.data(), n, n);
}

inline CMat kron(const CMat& a, const CMat& b)
{
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < a.cols(); ++k)
            out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    return out;
}

/// Real lift of a Hermitian form: phi^H H phi == x^T lift(H) x with x = [Re phi; Im phi].
inline RMat real_lift(const CMat& h)
{
    const auto n = h.rows();
    RMat out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = h.real();
    out.topRightCorner(n, n) = -h.imag();
    out.bottomLeftCorner(n, n) = h.imag();
    out.bottomRightCorner(n, n) = h.real();
    return out;
}

inline RVec stack_real(const CVec& v)
{
    RVec x(2 * v.size());
    x.head(v.size()) = v.real();
    x.tail(v.size()) = v.imag();
    return x;
}

inline CVec unstack_real(const RVec& x)
{
    const auto n = x.size() / 2;
    return x.head(n).cast<cplx>() + j_unit * x.tail(n).cast<cplx>();
}

inline double lambda_max_hermitian(const CMat& h)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace astars
