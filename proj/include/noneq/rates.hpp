#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <thread>
#include <utility>
#include <vector>

#include "noneq/constants.hpp"
#include "noneq/errors.hpp"
#include "noneq/matprops.hpp"
#include "noneq/quadrature.hpp"
#include "noneq/slab_optics.hpp"

namespace noneq::rates {

using quadrature::EnvBodyFactors;
using quadrature::QuadratureControl;
using quadrature::Vec3;
using slab_optics::Geometry;

struct DipoleSpec {
    double magnitude = 0.0;            // |d|, C m
    Vec3 dtilde{1.0 / 3, 1.0 / 3, 1.0 / 3};  // |d_i|^2 / |d|^2

    static DipoleSpec parallel(double magnitude) { return {magnitude, {0.5, 0.5, 0.0}}; }
    static DipoleSpec perpendicular(double magnitude) { return {magnitude, {0.0, 0.0, 1.0}}; }
    static DipoleSpec isotropic(double magnitude) {
        return {magnitude, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
    }

    void validate() const {
        if (!(magnitude >= 0.0)) throw Error("DipoleSpec: |d| must be >= 0");
        double sum = 0.0;
        for (double v : dtilde) {
            if (!(v >= 0.0)) throw Error("DipoleSpec: dtilde components must be >= 0");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw Error("DipoleSpec: dtilde must sum to 1");
    }
};

struct ThermalEnv {
    double T_M = 0.0;  // body, K
    double T_W = 0.0;  // walls, K

    void validate() const {
        if (!(T_M >= 0.0) || !std::isfinite(T_M) || !(T_W >= 0.0) || !std::isfinite(T_W))
            throw Error("ThermalEnv: temperatures must be finite and >= 0");
    }
};

struct RateSet {
    double omega = 0.0;       // rad/s
    double gamma0 = 0.0;      // vacuum spontaneous-emission rate, 1/s
    double alpha_W = 0.0;
    double alpha_M = 0.0;
    double n_eff = 0.0;
    double T_eff = 0.0;       // K
    double gamma_down = 0.0;  // Gamma(omega), 1/s
    double gamma_up = 0.0;    // Gamma(-omega), 1/s
};

struct MarkovDiagnostics {
    double tau_R = 0.0;  // relaxation time, s
    double tau_A = 0.0;  // inverse frequency scale, s
    double tau_B = 0.0;  // bath correlation decay time, s
    bool born_markov_ok = false;
    bool rwa_ok = false;
    // grid used for the correlation-function estimate
    double omega_min = 0.0, omega_max = 0.0;
    int n_samples = 0;
};

inline double mean_photon_n(double omega, double T) {
    if (!(omega > 0.0)) throw Error("mean_photon_n: omega must be > 0");
    if (!(T >= 0.0)) throw Error("mean_photon_n: T must be >= 0");
    if (T == 0.0) return 0.0;
    const double x = constants::hbar * omega / (constants::k_B * T);
    if (x > 700.0) return 0.0;
    return 1.0 / std::expm1(x);
}

inline double gamma0(double omega, double dipole_magnitude) {
    return omega * omega * omega * dipole_magnitude * dipole_magnitude /
           (3.0 * 3.14159265358979323846 * constants::eps0 * constants::hbar *
            constants::c_light * constants::c_light * constants::c_light);
}

namespace detail {

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Quadrature noise can leave a tiny negative alpha; anything visibly negative
// signals a genuine bug upstream.
inline double clamp_alpha(double a, const char* which) {
    if (a < -1e-9)
        throw Error(std::string("alpha_") + which + " came out negative: " + std::to_string(a));
    return std::max(a, 0.0);
}

inline std::pair<double, double> alphas_from_factors(const EnvBodyFactors& F,
                                                     const Vec3& dtilde) {
    Vec3 aw{}, am{};
    for (int i = 0; i < 3; ++i) {
        aw[i] = 0.5 * (1.0 + F.B[i] + 2.0 * F.C[i]);
        am[i] = 0.5 * (1.0 - F.B[i] + 2.0 * F.D[i]);
    }
    return {clamp_alpha(dot(aw, dtilde), "W"), clamp_alpha(dot(am, dtilde), "M")};
}

} // namespace detail

inline std::pair<double, double> alphas(double omega, const Geometry& geom,
                                        const matprops::PermittivityModel& model,
                                        const Vec3& dtilde, const QuadratureControl& ctrl = {},
                                        EnvBodyFactors* factors_out = nullptr) {
    const auto F = quadrature::compute_factors(omega, geom, model, ctrl);
    if (factors_out) *factors_out = F;
    return detail::alphas_from_factors(F, dtilde);
}

inline double effective_temperature(double omega, double n_eff) {
    if (n_eff <= 0.0) return 0.0;  // continuous extension of the defining formula
    return constants::hbar * omega / (constants::k_B * std::log1p(1.0 / n_eff));
}

inline RateSet transition_rates(double omega, const DipoleSpec& dipole, const Geometry& geom,
                                const matprops::PermittivityModel& model, const ThermalEnv& env,
                                const QuadratureControl& ctrl = {},
                                EnvBodyFactors* factors_out = nullptr) {
    if (!(omega > 0.0)) throw Error("transition_rates: omega must be > 0");
    dipole.validate();
    env.validate();
    auto [aW, aM] = alphas(omega, geom, model, dipole.dtilde, ctrl, factors_out);
    // couplings at the double-rounding floor are indistinguishable from zero
    if (aW + aM < 1e-15) throw BothAlphasZero("coupling vanished; steady state undefined");

    RateSet r;
    r.omega = omega;
    r.gamma0 = gamma0(omega, dipole.magnitude);
    r.alpha_W = aW;
    r.alpha_M = aM;
    r.n_eff = (mean_photon_n(omega, env.T_W) * aW + mean_photon_n(omega, env.T_M) * aM) /
              (aW + aM);
    r.T_eff = effective_temperature(omega, r.n_eff);
    r.gamma_down = r.gamma0 * (aW + aM) * (1.0 + r.n_eff);
    r.gamma_up = r.gamma0 * (aW + aM) * r.n_eff;
    return r;
}

// Thermal-equilibrium specialization Gamma(+-omega) = Gamma0 [1 + C.d + D.d] {1+n, n}.
inline RateSet equilibrium_rates(double omega, const DipoleSpec& dipole, const Geometry& geom,
                                 const matprops::PermittivityModel& model, double T,
                                 const QuadratureControl& ctrl = {}) {
    if (!(omega > 0.0)) throw Error("equilibrium_rates: omega must be > 0");
    dipole.validate();
    EnvBodyFactors F;
    auto [aW, aM] = alphas(omega, geom, model, dipole.dtilde, ctrl, &F);
    if (aW + aM < 1e-15) throw BothAlphasZero("coupling vanished; steady state undefined");
    const double body = 1.0 + detail::dot(F.C, dipole.dtilde) + detail::dot(F.D, dipole.dtilde);
    const double n = mean_photon_n(omega, T);
    RateSet r;
    r.omega = omega;
    r.gamma0 = gamma0(omega, dipole.magnitude);
    r.alpha_W = aW;
    r.alpha_M = aM;
    r.n_eff = n;
    r.T_eff = effective_temperature(omega, n);
    r.gamma_down = r.gamma0 * body * (1.0 + n);
    r.gamma_up = r.gamma0 * body * n;
    return r;
}

// Distance where alpha_W = alpha_M: there n_eff is geometry-independent.
// Bisection in log z over [z_lo, z_hi].
inline double crossover_distance(double omega, const matprops::PermittivityModel& model,
                                 const Geometry& geom_template, const Vec3& dtilde,
                                 double z_lo, double z_hi, const QuadratureControl& ctrl = {}) {
    if (!(z_lo > 0.0 && z_hi > z_lo)) throw Error("crossover_distance: need 0 < z_lo < z_hi");
    auto diff = [&](double z) {
        Geometry g = geom_template;
        g.z = z;
        auto [aW, aM] = alphas(omega, g, model, dtilde, ctrl);
        return aW - aM;
    };
    double lo = std::log(z_lo), hi = std::log(z_hi);
    double flo = diff(z_lo), fhi = diff(z_hi);
    if (flo * fhi > 0.0) throw Error("crossover_distance: no sign change in [z_lo, z_hi]");
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = diff(std::exp(mid));
        if (fm == 0.0) return std::exp(mid);
        if (flo * fm < 0.0) { hi = mid; fhi = fm; }
        else { lo = mid; flo = fm; }
    }
    return std::exp(0.5 * (lo + hi));
}

namespace detail {

// Projected spectrum gamma(omega)/|d|^2 at positive and negative arguments.
// Shares the alpha machinery; only used for the correlation-time estimate.
struct SpectrumSampler {
    const Geometry& geom;
    const matprops::PermittivityModel& model;
    const Vec3& dtilde;
    ThermalEnv env;
    QuadratureControl ctrl;

    std::pair<double, double> operator()(double w) const {
        auto [aW, aM] = alphas(w, geom, model, dtilde, ctrl);
        const double sum = aW + aM;
        const double neff =
            sum > 0.0
                ? (mean_photon_n(w, env.T_W) * aW + mean_photon_n(w, env.T_M) * aM) / sum
                : 0.0;
        const double g0 = gamma0(w, 1.0);  // per unit dipole
        return {g0 * sum * (1.0 + neff), g0 * sum * neff};
    }
};

} // namespace detail

// Appendix-A style validity estimates. tau_B is the 1/e decay time of the
// bath correlation C(s) = (hbar^2/2pi) int e^{-i omega s} gamma(omega) d omega
// evaluated by a discrete transform on a capped grid
// omega in [1e-3, 20] x k_B max(T)/hbar. Only the thermal part of gamma
// enters the decay estimate: the T = 0 part has no equal-time limit under the
// grid cap (its mass sits at the cap and rings at the cutoff scale), while the
// bath-memory information lives in the temperature-dependent fluctuations.
inline MarkovDiagnostics markov_diagnostics(double omega, const DipoleSpec& dipole,
                                            const Geometry& geom,
                                            const matprops::PermittivityModel& model,
                                            const ThermalEnv& env,
                                            const QuadratureControl& ctrl = {},
                                            int n_samples = 1 << 14) {
    const RateSet r = transition_rates(omega, dipole, geom, model, env, ctrl);
    MarkovDiagnostics d;
    d.tau_R = 1.0 / (r.gamma_down + r.gamma_up);
    d.tau_A = 1.0 / (2.0 * omega);

    const double Tmax = std::max(env.T_M, env.T_W);
    if (Tmax <= 0.0) {
        d.tau_B = 0.0;
        d.born_markov_ok = true;
        d.rwa_ok = d.tau_A < d.tau_R / 10.0;
        return d;
    }
    const double wth = constants::k_B * Tmax / constants::hbar;
    d.omega_min = 1e-3 * wth;
    d.omega_max = 20.0 * wth;
    d.n_samples = n_samples;

    // a coarse best-effort quadrature is plenty for an order-of-magnitude
    // diagnostic and keeps the 2^14-point sweep affordable
    QuadratureControl fast = ctrl;
    fast.rel_tol = std::max(ctrl.rel_tol, 1e-5);
    fast.abs_tol = std::max(ctrl.abs_tol, 1e-8);
    fast.max_panels = 64;
    fast.best_effort = true;
    detail::SpectrumSampler sampler{geom, model, dipole.dtilde, env, fast};

    std::vector<double> gth(n_samples), wgrid(n_samples);
    const double dw = (d.omega_max - d.omega_min) / (n_samples - 1);
    {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n_samples) return;
                wgrid[i] = d.omega_min + dw * i;
                gth[i] = sampler(wgrid[i]).second;  // gamma(-omega) = W n_eff
            }
        };
        unsigned hc = std::thread::hardware_concurrency();
        const int jobs = std::min<int>(4, hc == 0 ? 1 : static_cast<int>(hc));
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs - 1; ++t) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
    }

    // modulus of the one-sided transform: the envelope of the thermal
    // correlation. The two-sided real form would ride the transition-frequency
    // carrier and measure 1/omega instead of the bath memory.
    auto corr_abs = [&](double s) {
        double re = 0.0, im = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            re += std::cos(wgrid[i] * s) * gth[i];
            im += std::sin(wgrid[i] * s) * gth[i];
        }
        return std::hypot(re, im);
    };

    const double c0 = corr_abs(0.0);
    const double target = c0 / 2.718281828459045;
    double tau_B = 0.0;
    double prev_s = 0.0, prev_v = c0;
    for (int i = 0; i <= 480; ++i) {
        const double s = 1e-16 * std::pow(10.0, i / 60.0);  // up to 1e-8 s
        const double v = corr_abs(s);
        if (v < target) {
            // log-linear interpolation of the crossing
            const double t = (prev_v - target) / std::max(prev_v - v, 1e-300);
            tau_B = prev_s + t * (s - prev_s);
            break;
        }
        prev_s = s;
        prev_v = v;
    }
    if (tau_B == 0.0) tau_B = prev_s;  // never crossed within the window
    d.tau_B = tau_B;
    d.born_markov_ok = d.tau_B < d.tau_R / 10.0;
    d.rwa_ok = d.tau_A < d.tau_R / 10.0;
    return d;
}

} // namespace noneq::rates
