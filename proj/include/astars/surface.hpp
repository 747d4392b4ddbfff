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

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace astars {

enum class Side { transmit, reflect };

/// Per-element amplitudes, phases and amplifying coefficients of the surface.
struct SurfaceConfig {
    int q = 0;
    RVec beta_t;
    RVec beta_r;
    RVec phi_t;
    RVec phi_r;
    RVec alpha;
    double alpha_max = 1.0;
    bool active = true;
};

struct SurfaceViolation {
    enum class Kind { size, energy_coupling, amplitude_range, phase_range, alpha_range, passive_alpha };
    Kind kind;
    int element;  ///< -1 when the violation is not tied to one element
    std::string message;
};

inline constexpr double coupling_tol = 1e-9;

inline std::vector<SurfaceViolation> validate(const SurfaceConfig& s)
{
    using K = SurfaceViolation::Kind;
    std::vector<SurfaceViolation> out;
    const auto n = static_cast<Eigen::Index>(s.q);
    if (s.q < 1 || s.beta_t.size() != n || s.beta_r.size() != n || s.phi_t.size() != n || s.phi_r.size() != n ||
        s.alpha.size() != n) {
        out.push_back({K::size, -1, "per-element arrays must all have length q >= 1"});
        return out;
    }
    if (!(s.alpha_max > 0.0)) out.push_back({K::alpha_range, -1, "alpha_max must be positive"});
    for (int i = 0; i < s.q; ++i) {
        auto note = [&](K kind, const char* what) {
            std::ostringstream os;
            os << "element " << i << ": " << what;
            out.push_back({kind, i, os.str()});
        };
        const double bt = s.beta_t(i), br = s.beta_r(i);
        if (std::abs(bt * bt + br * br - 1.0) > coupling_tol) note(K::energy_coupling, "beta_t^2 + beta_r^2 != 1");
        if (bt < 0.0 || bt > 1.0 || br < 0.0 || br > 1.0) note(K::amplitude_range, "amplitude outside [0,1]");
        for (double ph : {s.phi_t(i), s.phi_r(i)})
            if (!(ph >= 0.0 && ph < two_pi)) {
                note(K::phase_range, "phase outside [0, 2pi)");
                break;
            }
        if (!(s.alpha(i) > 0.0 && s.alpha(i) <= s.alpha_max)) note(K::alpha_range, "alpha outside (0, alpha_max]");
        if (!s.active && s.alpha(i) != 1.0) note(K::passive_alpha, "passive surface requires alpha == 1");
    }
    return out;
}

class SurfaceError : public std::invalid_argument {
  public:
    explicit SurfaceError(std::vector<SurfaceViolation> v)
        : std::invalid_argument(summary(v)), violations_(std::move(v))
    {
    }
    const std::vector<SurfaceViolation>& violations() const { return violations_; }

  private:
    static std::string summary(const std::vector<SurfaceViolation>& v)
    {
        std::string s = "invalid surface configuration: ";
        s += v.empty() ? "unknown" : v.front().message;
        if (v.size() > 1) s += " (+" + std::to_string(v.size() - 1) + " more)";
        return s;
    }
    std::vector<SurfaceViolation> violations_;
};

inline void ensure_valid(const SurfaceConfig& s)
{
    auto v = validate(s);
    if (!v.empty()) throw SurfaceError(std::move(v));
}

/// Builds a configuration from reflect amplitudes; the transmit amplitude is derived so the
/// energy coupling holds by construction. Phases are reduced to [0, 2pi).
inline SurfaceConfig make_surface(const RVec& beta_r, const RVec& phi_t, const RVec& phi_r, const RVec& alpha,
                                  double alpha_max, bool active)
{
    SurfaceConfig s;
    s.q = static_cast<int>(beta_r.size());
    s.beta_r = beta_r.cwiseMax(0.0).cwiseMin(1.0);
    s.beta_t = (1.0 - s.beta_r.array().square()).max(0.0).sqrt().matrix();
    s.phi_t = phi_t.unaryExpr([](double x) { return wrap_2pi(x); });
    s.phi_r = phi_r.unaryExpr([](double x) { return wrap_2pi(x); });
    s.alpha = alpha;
    s.alpha_max = alpha_max;
    s.active = active;
    return s;
}

/// Entry q is alpha_q * beta_q^side * exp(j phi_q^side); Psi_side = diag of this vector.
inline CVec coefficient_vector(const SurfaceConfig& s, Side side)
{
    ensure_valid(s);
    const RVec& beta = side == Side::transmit ? s.beta_t : s.beta_r;
    const RVec& phi = side == Side::transmit ? s.phi_t : s.phi_r;
    CVec out(s.q);
    for (int i = 0; i < s.q; ++i) out(i) = std::polar(s.alpha(i) * beta(i), phi(i));
    return out;
}

/// Uniform phases, uniform reflect amplitude; alpha = alpha_max when active, 1 otherwise.
inline SurfaceConfig random_config(int q, double alpha_max, bool active, RngStream& rng)
{
    if (q < 1) throw std::invalid_argument("random_config: q must be >= 1");
    RVec beta_r(q), phi_t(q), phi_r(q);
    for (int i = 0; i < q; ++i) {
        phi_t(i) = rng.uniform(0.0, two_pi);
        phi_r(i) = rng.uniform(0.0, two_pi);
        beta_r(i) = rng.uniform();
    }
    const double a = active ? alpha_max : 1.0;
    return make_surface(beta_r, phi_t, phi_r, RVec::Constant(q, a), active ? alpha_max : std::max(alpha_max, 1.0),
                        active);
}

/// Same phases and amplitudes with unit amplification and no dynamic noise.
inline SurfaceConfig passive_baseline(const SurfaceConfig& s)
{
    ensure_valid(s);
    SurfaceConfig out = s;
    out.alpha = RVec::Ones(s.q);
    out.alpha_max = std::max(s.alpha_max, 1.0);
    out.active = false;
    return out;
}

}  // namespace astars
