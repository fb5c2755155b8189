#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <complex>
#include <functional>
#include <queue>
#include <vector>

#include "noneq/constants.hpp"
#include "noneq/errors.hpp"
#include "noneq/matprops.hpp"
#include "noneq/slab_optics.hpp"

namespace noneq::quadrature {

using Vec3 = std::array<double, 3>;
using complexd = std::complex<double>;
using slab_optics::Geometry;
using slab_optics::Polarization;

struct QuadratureControl {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_panels = 8000;
    // diagnostics-grade mode: on an exhausted budget return the current
    // estimate (with its error) instead of throwing, and cap fringe seeding
    bool best_effort = false;
};

// The slab xy-symmetry leaves three independent scalar integrals per vector:
// TE contributes to x = y only, TM to x = y and z.
struct ChannelSplit {
    double te_xy = 0.0;
    double tm_xy = 0.0;
    double tm_z = 0.0;
    Vec3 assemble() const { return {te_xy + tm_xy, te_xy + tm_xy, tm_z}; }
};

struct QuadDiagnostics {
    Vec3 abs_err{0.0, 0.0, 0.0};
    int panels = 0;
};

struct EnvBodyFactors {
    Vec3 B{}, C{}, D{};
    ChannelSplit B_pol, C_pol, D_pol;
    QuadDiagnostics B_diag, C_diag, D_diag;
    double omega = 0.0;
    Geometry geom;
};

namespace detail {

// QK15 nodes/weights (positive half; node 7 is the midpoint). Odd indices are
// the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kGkNodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr std::array<double, 8> kGkWeights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Panel {
    double a, b;
    std::array<double, 3> q{};    // 15-point estimates per channel
    std::array<double, 3> err{};  // |q15 - q7| per channel
    double worst = 0.0;
};

inline bool operator<(const Panel& x, const Panel& y) { return x.worst < y.worst; }

// F: void(double x, std::array<double,3>& out)
template <class F>
Panel eval_panel(F&& f, double a, double b) {
    const double h = 0.5 * (b - a), mid = 0.5 * (a + b);
    std::array<double, 3> q15{}, q7{}, fx{};
    for (int i = 0; i < 7; ++i) {
        const double d = h * kGkNodes[i];
        std::array<double, 3> lo{}, hi{};
        f(mid - d, lo);
        f(mid + d, hi);
        for (int ch = 0; ch < 3; ++ch) {
            const double s = lo[ch] + hi[ch];
            q15[ch] += kGkWeights[i] * s;
            if (i % 2 == 1) q7[ch] += kGaussWeights[i / 2] * s;
        }
    }
    f(mid, fx);
    Panel p{a, b};
    for (int ch = 0; ch < 3; ++ch) {
        q15[ch] += kGkWeights[7] * fx[ch];
        q7[ch] += kGaussWeights[3] * fx[ch];
        p.q[ch] = q15[ch] * h;
        p.err[ch] = std::abs(q15[ch] - q7[ch]) * h;
        p.worst = std::max(p.worst, p.err[ch]);
    }
    return p;
}

struct AdaptiveResult {
    std::array<double, 3> value{};
    std::array<double, 3> err{};
    int panels = 0;
};

// Worst-panel bisection until every channel meets max(rel*|I|, abs).
template <class F>
AdaptiveResult integrate_adaptive(F&& f, const std::vector<double>& seeds,
                                  const QuadratureControl& ctrl) {
    std::priority_queue<Panel> heap;
    std::array<double, 3> total{}, errtot{};
    int count = 0;
    auto push = [&](Panel&& p) {
        for (int ch = 0; ch < 3; ++ch) {
            total[ch] += p.q[ch];
            errtot[ch] += p.err[ch];
        }
        heap.push(std::move(p));
        ++count;
    };
    for (std::size_t i = 0; i + 1 < seeds.size(); ++i)
        push(eval_panel(f, seeds[i], seeds[i + 1]));

    const double span = seeds.back() - seeds.front();
    const int budget = std::max<int>(ctrl.max_panels, 2 * static_cast<int>(seeds.size()));
    auto converged = [&]() {
        for (int ch = 0; ch < 3; ++ch)
            if (errtot[ch] > std::max(ctrl.rel_tol * std::abs(total[ch]), ctrl.abs_tol))
                return false;
        return true;
    };
    while (!converged()) {
        if (count >= budget || heap.empty()) {
            if (ctrl.best_effort) break;
            int worst_ch = 0;
            for (int ch = 1; ch < 3; ++ch)
                if (errtot[ch] > errtot[worst_ch]) worst_ch = ch;
            char msg[96];
            std::snprintf(msg, sizeof(msg), "panel budget exhausted; worst channel %d abs err %.3e",
                          worst_ch, errtot[worst_ch]);
            throw QuadratureNoConvergence(msg);
        }
        Panel p = heap.top();
        heap.pop();
        if (p.b - p.a < 1e-15 * span) {
            // cannot refine further; retire the panel but keep its estimate
            --count;  // it no longer occupies a refinable slot
            if (heap.empty()) break;
            continue;
        }
        for (int ch = 0; ch < 3; ++ch) {
            total[ch] -= p.q[ch];
            errtot[ch] -= p.err[ch];
        }
        --count;
        const double mid = 0.5 * (p.a + p.b);
        push(eval_panel(f, p.a, mid));
        push(eval_panel(f, mid, p.b));
    }
    AdaptiveResult r;
    r.value = total;
    r.err = errtot;
    r.panels = count;
    return r;
}

// Propagative-sector weights in the substituted variable s = k_z c/omega
// (k dk / k_z = -(omega/c)^2 ds, which removes the endpoint singularity).
// TE: M = (1,1,0); TM+: (s^2, s^2, 2(1-s^2)); TM-: (-s^2, -s^2, 2(1-s^2)).

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr std::size_t kMaxFringeSeeds = 400000;

// A thick low-loss slab develops Fabry-Perot fringes of period pi in the
// round-trip phase 2 kzm dtil. Panel edges every quarter period keep the
// error estimator from aliasing over them; once the fringes are damped below
// e^{-25}, seeding is pointless and is skipped.
inline bool fringes_alive(const slab_optics::detail::ReducedLayer& L) {
    if (L.semi || L.mirror || L.vacuum || L.dtil <= 0.0) return false;
    const complexd w1 = std::sqrt(L.eps - 1.0);
    const complexd w0 = std::sqrt(L.eps);
    const double min_damp = std::min(std::abs(w1.imag()), std::abs(w0.imag()));
    return 2.0 * min_damp * L.dtil < 25.0;
}

inline std::size_t fringe_seed_cap(const QuadratureControl& ctrl) {
    if (!ctrl.best_effort) return kMaxFringeSeeds;
    return std::max<std::size_t>(32, static_cast<std::size_t>(ctrl.max_panels) / 2);
}

// quarter-period phase grid of Re sqrt(R + s^2) (propagative, R = Re eps - 1)
inline void propagative_fringe_seeds(const slab_optics::detail::ReducedLayer& L,
                                     std::vector<double>& out,
                                     const QuadratureControl& ctrl) {
    if (!fringes_alive(L)) return;
    const double R = L.eps.real() - 1.0;
    const double lo = std::sqrt(std::max(R, 0.0));
    const double hi = std::sqrt(std::max(R + 1.0, 0.0));
    double step = kPi / (4.0 * L.dtil);
    const std::size_t cap = fringe_seed_cap(ctrl);
    const std::size_t n = static_cast<std::size_t>((hi - lo) / step) + 1;
    if (n > cap) {
        if (!ctrl.best_effort)
            throw QuadratureNoConvergence("Fabry-Perot fringe density exceeds the seed budget");
        step *= static_cast<double>(n) / static_cast<double>(cap);
    }
    for (double g = lo + step; g < hi; g += step) {
        const double s2 = g * g - R;
        if (s2 > 0.0 && s2 < 1.0) out.push_back(std::sqrt(s2));
    }
}

// quarter-period grid of Re sqrt(R - u^2) (evanescent guided-mode region)
inline void evanescent_fringe_seeds(const slab_optics::detail::ReducedLayer& L, double u_max,
                                    std::vector<double>& out,
                                    const QuadratureControl& ctrl) {
    if (!fringes_alive(L)) return;
    const double R = L.eps.real() - 1.0;
    if (R <= 0.0) return;
    const double hi = std::sqrt(R);
    double step = kPi / (4.0 * L.dtil);
    const std::size_t cap = fringe_seed_cap(ctrl);
    const std::size_t n = static_cast<std::size_t>(hi / step) + 1;
    if (n > cap) {
        if (!ctrl.best_effort)
            throw QuadratureNoConvergence("guided-mode density exceeds the seed budget");
        step *= static_cast<double>(n) / static_cast<double>(cap);
    }
    for (double g = step; g < hi; g += step) {
        const double u2 = R - g * g;
        if (u2 > 0.0 && u2 < u_max * u_max) out.push_back(std::sqrt(u2));
    }
}

inline std::vector<double> propagative_seeds(const slab_optics::detail::ReducedLayer& L,
                                             double ztil, const QuadratureControl& ctrl) {
    const std::size_t n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(4.0 * ztil / kPi)));
    const std::size_t capped = std::min<std::size_t>(n, 60000);
    std::vector<double> s(capped + 1);
    for (std::size_t i = 0; i <= capped; ++i)
        s[i] = static_cast<double>(i) / static_cast<double>(capped);
    propagative_fringe_seeds(L, s, ctrl);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

inline std::vector<double> evanescent_seeds(double ztil, double u_max,
                                            const slab_optics::detail::ReducedLayer& L,
                                            const QuadratureControl& ctrl) {
    std::vector<double> s{0.0};
    // thin-slab guided modes live near u ~ |eps-1|*dtil; seed panel edges there
    if (!L.semi && !L.mirror && !L.vacuum && L.dtil > 0.0) {
        const double ug = std::abs(L.eps - 1.0) * L.dtil;
        for (double fac : {0.25, 0.5, 1.0, 2.0, 4.0})
            if (ug * fac < u_max && ug * fac > 0.0) s.push_back(ug * fac);
    }
    for (double edge = 1e-3; edge < u_max; edge *= 4.0) s.push_back(edge);
    const double peak = 1.0 / std::max(ztil, 1e-300);
    for (double fac : {0.5, 1.0, 2.0})
        if (peak * fac < u_max) s.push_back(peak * fac);
    evanescent_fringe_seeds(L, u_max, s, ctrl);
    s.push_back(u_max);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

struct ChannelOutcome {
    ChannelSplit split;
    QuadDiagnostics diag;
};

template <class F>
ChannelOutcome run_channels(F&& f, const std::vector<double>& seeds,
                            const QuadratureControl& ctrl) {
    auto r = integrate_adaptive(std::forward<F>(f), seeds, ctrl);
    ChannelOutcome out;
    out.split.te_xy = 0.75 * r.value[0];
    out.split.tm_xy = 0.75 * r.value[1];
    out.split.tm_z = 0.75 * r.value[2];
    out.diag.abs_err = {0.75 * (r.err[0] + r.err[1]), 0.75 * (r.err[0] + r.err[1]),
                        0.75 * r.err[2]};
    out.diag.panels = r.panels;
    return out;
}

inline ChannelOutcome B_channels(const slab_optics::detail::ReducedLayer& L,
                                 const QuadratureControl& ctrl) {
    auto f = [&L](double s, std::array<double, 3>& out) {
        const double ksq = 1.0 - s * s;
        complexd r1, r2, t1, t2;
        L.coefficients(complexd{s, 0.0}, ksq, r1, r2, &t1, &t2);
        const double q1 = std::norm(r1) + std::norm(t1);
        const double q2 = std::norm(r2) + std::norm(t2);
        out[0] = q1;
        out[1] = s * s * q2;
        out[2] = 2.0 * ksq * q2;
    };
    return run_channels(f, propagative_seeds(L, 0.0, ctrl), ctrl);
}

inline ChannelOutcome C_channels(const slab_optics::detail::ReducedLayer& L, double ztil,
                                 const QuadratureControl& ctrl) {
    auto f = [&L, ztil](double s, std::array<double, 3>& out) {
        const double ksq = 1.0 - s * s;
        complexd r1, r2;
        L.coefficients(complexd{s, 0.0}, ksq, r1, r2);
        const complexd ph = std::exp(complexd{0.0, 2.0 * s * ztil});
        const double p1 = (r1 * ph).real();
        const double p2 = (r2 * ph).real();
        out[0] = p1;
        out[1] = -s * s * p2;
        out[2] = 2.0 * ksq * p2;
    };
    return run_channels(f, propagative_seeds(L, ztil, ctrl), ctrl);
}

inline ChannelOutcome D_channels(const slab_optics::detail::ReducedLayer& L, double ztil,
                                 const QuadratureControl& ctrl) {
    const double u_max = std::max(30.0 / ztil, 10.0);
    auto f = [&L, ztil](double u, std::array<double, 3>& out) {
        complexd r1, r2;
        L.coefficients(complexd{0.0, u}, 1.0 + u * u, r1, r2);
        const double damp = std::exp(-2.0 * u * ztil);
        out[0] = damp * r1.imag();
        out[1] = damp * u * u * r2.imag();
        out[2] = damp * 2.0 * (1.0 + u * u) * r2.imag();
    };
    auto out = run_channels(f, evanescent_seeds(ztil, u_max, L, ctrl), ctrl);
    // truncated TE tail is bounded by Im(eps)/(4 u^2) decay
    if (!L.mirror && !L.vacuum) {
        const double tail = 0.75 * 0.25 * std::abs(L.eps.imag()) / u_max *
                            std::exp(-2.0 * u_max * ztil);
        out.diag.abs_err[0] += tail;
        out.diag.abs_err[1] += tail;
    }
    return out;
}

} // namespace detail

// M_1^phi = (1,1,0); M_2^phi = (c/omega)^2 (phi|k_z|^2, phi|k_z|^2, 2k^2).
inline Vec3 angular_weight(Polarization p, int phi, double k, double omega) {
    if (phi != +1 && phi != -1) throw Error("angular_weight: phi must be +1 or -1");
    if (p == Polarization::TE) return {1.0, 1.0, 0.0};
    const double k0 = omega / constants::c_light;
    const auto kin = slab_optics::kinematics(omega, k, complexd{1.0, 0.0});
    const double kz2 = std::norm(kin.k_z) / (k0 * k0);
    const double kt2 = (k / k0) * (k / k0);
    return {phi * kz2, phi * kz2, 2.0 * kt2};
}

inline EnvBodyFactors compute_factors(double omega, const Geometry& geom,
                                      const matprops::PermittivityModel& model,
                                      const QuadratureControl& ctrl = {}) {
    if (!(omega > 0.0)) throw Error("compute_factors: omega must be > 0");
    const auto L = slab_optics::detail::ReducedLayer::make(model, omega, geom);
    const double ztil = omega * geom.z / constants::c_light;

    EnvBodyFactors F;
    F.omega = omega;
    F.geom = geom;

    auto b = detail::B_channels(L, ctrl);
    F.B_pol = b.split;
    F.B = b.split.assemble();
    F.B_diag = b.diag;

    auto c = detail::C_channels(L, ztil, ctrl);
    F.C_pol = c.split;
    F.C = c.split.assemble();
    F.C_diag = c.diag;

    if (!(geom.z > 0.0)) throw DivergentAtContact("D requires z > 0");
    auto d = detail::D_channels(L, ztil, ctrl);
    F.D_pol = d.split;
    F.D = d.split.assemble();
    F.D_diag = d.diag;
    return F;
}

inline Vec3 compute_B(double omega, const Geometry& geom,
                      const matprops::PermittivityModel& model,
                      const QuadratureControl& ctrl = {}) {
    if (!(omega > 0.0)) throw Error("compute_B: omega must be > 0");
    const auto L = slab_optics::detail::ReducedLayer::make(model, omega, geom);
    return detail::B_channels(L, ctrl).split.assemble();
}

inline Vec3 compute_C(double omega, const Geometry& geom,
                      const matprops::PermittivityModel& model,
                      const QuadratureControl& ctrl = {}) {
    if (!(omega > 0.0)) throw Error("compute_C: omega must be > 0");
    const auto L = slab_optics::detail::ReducedLayer::make(model, omega, geom);
    return detail::C_channels(L, omega * geom.z / constants::c_light, ctrl).split.assemble();
}

inline Vec3 compute_D(double omega, const Geometry& geom,
                      const matprops::PermittivityModel& model,
                      const QuadratureControl& ctrl = {}) {
    if (!(omega > 0.0)) throw Error("compute_D: omega must be > 0");
    if (!(geom.z > 0.0)) throw DivergentAtContact("D requires z > 0");
    const auto L = slab_optics::detail::ReducedLayer::make(model, omega, geom);
    return detail::D_channels(L, omega * geom.z / constants::c_light, ctrl).split.assemble();
}

// Perfect-mirror C in closed form; argument of the sin/cos terms is 2 z omega/c.
// A 6th-order series takes over below Z = 1e-3 where the direct form cancels
// catastrophically.
inline Vec3 mirror_C_closed_form(double omega, double z) {
    if (!(omega > 0.0)) throw Error("mirror_C_closed_form: omega must be > 0");
    if (!(z >= 0.0)) throw Error("mirror_C_closed_form: z must be >= 0");
    const double Z = 2.0 * z * omega / constants::c_light;
    double g, s1;  // g = sin Z/Z^3 - cos Z/Z^2, s1 = sin Z/Z
    if (Z < 1e-3) {
        const double Z2 = Z * Z;
        g = 1.0 / 3.0 - Z2 / 30.0 + Z2 * Z2 / 840.0 - Z2 * Z2 * Z2 / 45360.0;
        s1 = 1.0 - Z2 / 6.0 + Z2 * Z2 / 120.0 - Z2 * Z2 * Z2 / 5040.0;
    } else {
        g = std::sin(Z) / (Z * Z * Z) - std::cos(Z) / (Z * Z);
        s1 = std::sin(Z) / Z;
    }
    const double cxy = 1.5 * (g - s1);
    return {cxy, cxy, 3.0 * g};
}

// sum_p int_0^{omega/c} (k dk/k_z) M_p^+ = (4 omega / 3c) * (1,1,1);
// returned normalized, so the engine must reproduce (1,1,1).
inline Vec3 sum_rule(double omega, const QuadratureControl& ctrl = {}) {
    if (!(omega > 0.0)) throw Error("sum_rule: omega must be > 0");
    auto f = [](double s, std::array<double, 3>& out) {
        out[0] = 1.0;
        out[1] = s * s;
        out[2] = 2.0 * (1.0 - s * s);
    };
    auto r = detail::integrate_adaptive(f, {0.0, 1.0}, ctrl);
    return {0.75 * (r.value[0] + r.value[1]), 0.75 * (r.value[0] + r.value[1]),
            0.75 * r.value[2]};
}

enum class AsymptoticRegime {
    large_z,             // Watson laws with f(eps, dtil) at the actual thickness
    small_z,             // contact divergence, thickness-independent
    large_z_thick,       // dtil -> infinity row
    large_z_thin,        // dtil -> 0 row
    contact_thin_first,  // delta -> 0 before z -> 0
    contact_thick_first  // z -> 0 first (or semi-infinite)
};

namespace detail {

inline complexd cot(complexd x) {
    if (x.imag() > 350.0) return {0.0, -1.0};
    if (x.imag() < -350.0) return {0.0, 1.0};
    return std::cos(x) / std::sin(x);
}

} // namespace detail

// Closed-form leading behavior of D. large_z* return the three tabulated
// columns assembled as (xy, xy, z) with xy = TE + TM; contact rows return the
// divergent TM part (the TE piece stays finite and is not part of the law).
inline Vec3 asymptote_D(double omega, const Geometry& geom,
                        const matprops::PermittivityModel& model, AsymptoticRegime regime) {
    if (matprops::is_mirror(model) || matprops::is_vacuum(model))
        throw RegimeParameterMismatch("asymptotes require a finite-permittivity medium");
    const complexd eps = matprops::permittivity(model, omega);
    const double ztil = omega * geom.z / constants::c_light;
    const double dtil = geom.semi_infinite ? 0.0 : omega * geom.delta / constants::c_light;
    const complexd w = std::sqrt(eps - 1.0);

    auto large_z_laws = [&](complexd f) -> Vec3 {
        const double z2 = ztil * ztil, z4 = z2 * z2;
        const double xy = -3.0 / (8.0 * z2) * f.imag() - 9.0 / (16.0 * z4) * (eps * f).imag();
        const double z = -3.0 / (4.0 * z2) * (eps * f).imag();
        return {xy, xy, z};
    };

    switch (regime) {
        case AsymptoticRegime::large_z: {
            if (ztil < 1.0) throw RegimeParameterMismatch("large_z expects ztil >> 1");
            if (!geom.semi_infinite && dtil <= 0.0)
                throw RegimeParameterMismatch("large_z needs a slab or semi-infinite body");
            const complexd f = geom.semi_infinite ? complexd{0.0, -1.0} / w
                                                  : detail::cot(dtil * w) / w;
            return large_z_laws(f);
        }
        case AsymptoticRegime::large_z_thick: {
            if (ztil < 1.0) throw RegimeParameterMismatch("large_z_thick expects ztil >> 1");
            if (!geom.semi_infinite && dtil < 1.0)
                throw RegimeParameterMismatch("large_z_thick expects dtil >> 1");
            return large_z_laws(complexd{0.0, -1.0} / w);
        }
        case AsymptoticRegime::large_z_thin: {
            if (ztil < 1.0) throw RegimeParameterMismatch("large_z_thin expects ztil >> 1");
            if (geom.semi_infinite || dtil <= 0.0 || dtil > 0.25)
                throw RegimeParameterMismatch("large_z_thin expects a thin finite slab");
            // cot(x) -> 1/x turns f into 1/(dtil (eps-1)); the printed table
            // keeps a stray square root, which does not match the integrals.
            return large_z_laws(1.0 / (dtil * (eps - 1.0)));
        }
        case AsymptoticRegime::small_z
            /* same leading law as contact_thick_first */:
        case AsymptoticRegime::contact_thick_first: {
            if (ztil > 0.25) throw RegimeParameterMismatch("contact expects ztil << 1");
            if (!(ztil > 0.0)) throw DivergentAtContact("contact law diverges at z = 0");
            const double I1 = ((eps - 1.0) / (eps + 1.0)).imag();
            const double base = 3.0 / (16.0 * ztil * ztil * ztil) * I1;
            return {base, base, 2.0 * base};
        }
        case AsymptoticRegime::contact_thin_first: {
            if (ztil > 0.25) throw RegimeParameterMismatch("contact expects ztil << 1");
            if (!(ztil > 0.0)) throw DivergentAtContact("contact law diverges at z = 0");
            if (geom.semi_infinite || dtil <= 0.0)
                throw RegimeParameterMismatch("contact_thin_first expects a finite slab");
            const double I2 = ((eps * eps - 1.0) / eps).imag();
            const double z3 = ztil * ztil * ztil;
            return {3.0 / 128.0 * dtil / z3 * I2, 3.0 / 128.0 * dtil / z3 * I2,
                    3.0 / 64.0 * dtil / z3 * I2};
        }
    }
    throw Error("asymptote_D: unknown regime");
}

} // namespace noneq::quadrature
