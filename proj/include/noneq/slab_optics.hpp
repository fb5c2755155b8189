#pragma once

#include <cmath>
#include <complex>

#include "noneq/constants.hpp"
#include "noneq/errors.hpp"
#include "noneq/matprops.hpp"

namespace noneq::slab_optics {

using complexd = std::complex<double>;

enum class Polarization { TE = 1, TM = 2 };
enum class Sector { propagative, evanescent };

// Atom at z > 0; slab occupies -delta < z' < 0. z = 0 is allowed so the
// finite contact limits of the propagative integrals can be probed; the
// evanescent integral rejects it separately (DivergentAtContact).
struct Geometry {
    double z = 0.0;          // atom-slab distance, m
    double delta = 0.0;      // slab thickness, m (ignored when semi_infinite)
    bool semi_infinite = false;

    static Geometry slab(double z, double delta) {
        if (!(z >= 0.0)) throw Error("Geometry: z must be >= 0");
        if (!(delta >= 0.0)) throw Error("Geometry: delta must be >= 0");
        return Geometry{z, delta, false};
    }
    static Geometry semi_infinite_slab(double z) {
        if (!(z >= 0.0)) throw Error("Geometry: z must be >= 0");
        return Geometry{z, 0.0, true};
    }
};

struct ModeKinematics {
    double omega = 0.0;   // rad/s
    double k = 0.0;       // transverse wavenumber, rad/m
    complexd k_z;         // vacuum z-wavevector
    complexd k_zm;        // z-wavevector inside the medium
    Sector sector = Sector::propagative;
};

struct FresnelCoefficients {
    complexd r_TE, r_TM;
    complexd t_TE, t_TM;       // vacuum -> medium
    complexd tbar_TE, tbar_TM; // medium -> vacuum
};

struct SlabCoefficients {
    complexd rho_TE, rho_TM;
    complexd tau_TE, tau_TM;
};

namespace detail {

// Branch rule for the medium wavevector: principal square root, then force
// Im >= 0 (decay into the slab); for a real result force Re >= 0.
inline complexd kzm_branch(complexd val) {
    complexd r = std::sqrt(val);
    if (r.imag() < 0.0) r = -r;
    if (r.imag() == 0.0 && r.real() < 0.0) r = -r;
    return r;
}

inline complexd clamped_exp(complexd ex) {
    if (ex.real() < -700.0) return {0.0, 0.0};  // physically zero transmission
    if (ex.real() > 700.0) ex = complexd{700.0, ex.imag()};
    return std::exp(ex);
}

// Everything the quadratures need, in reduced units: lengths are scaled by
// omega/c, so kz, kzm and dtil = omega*delta/c are dimensionless. Appendix-
// style variables s = kz (propagative) and u = Im kz (evanescent) plug in
// directly.
struct ReducedLayer {
    complexd eps{1.0, 0.0};
    double dtil = 0.0;
    bool semi = false;
    bool mirror = false;
    bool vacuum = false;

    static ReducedLayer make(const matprops::PermittivityModel& model, double omega,
                             const Geometry& geom) {
        ReducedLayer L;
        L.semi = geom.semi_infinite;
        L.dtil = geom.semi_infinite ? 0.0 : omega * geom.delta / constants::c_light;
        if (matprops::is_mirror(model)) {
            L.mirror = true;
        } else if (matprops::is_vacuum(model)) {
            L.vacuum = true;
            L.eps = {1.0, 0.0};
        } else {
            L.eps = matprops::permittivity(model, omega);
        }
        return L;
    }

    static ReducedLayer from_eps(complexd eps, double dtil, bool semi) {
        ReducedLayer L;
        L.eps = eps;
        L.dtil = dtil;
        L.semi = semi;
        return L;
    }

    complexd kzm(double ksq) const { return kzm_branch(eps - ksq); }

    complexd fresnel_r(Polarization p, complexd kz, complexd kzm) const {
        if (p == Polarization::TE) return (kz - kzm) / (kz + kzm);
        return (eps * kz - kzm) / (eps * kz + kzm);
    }

    // rho_p for a reduced mode (kz, k^2); tau_p optionally via ttbar product.
    void coefficients(complexd kz, double ksq, complexd& rho1, complexd& rho2,
                      complexd* tau1 = nullptr, complexd* tau2 = nullptr) const {
        if (mirror) {
            rho1 = {-1.0, 0.0};  // (-1)^p, p = 1 for TE
            rho2 = {+1.0, 0.0};
            if (tau1) *tau1 = 0.0;
            if (tau2) *tau2 = 0.0;
            return;
        }
        if (vacuum || (!semi && dtil == 0.0)) {
            rho1 = rho2 = 0.0;
            if (tau1) *tau1 = 1.0;
            if (tau2) *tau2 = 1.0;
            return;
        }
        const complexd km = kzm(ksq);
        const complexd r1 = fresnel_r(Polarization::TE, kz, km);
        const complexd r2 = fresnel_r(Polarization::TM, kz, km);
        if (semi) {
            rho1 = r1;
            rho2 = r2;
            if (tau1) *tau1 = 0.0;
            if (tau2) *tau2 = 0.0;
            return;
        }
        const complexd E = clamped_exp(complexd{0.0, 2.0} * km * dtil);
        const complexd den1 = 1.0 - r1 * r1 * E;
        const complexd den2 = 1.0 - r2 * r2 * E;
        if (std::abs(den1) < 1e-14 || std::abs(den2) < 1e-14)
            throw ResonantDenominator("lossless slab at Fabry-Perot resonance");
        rho1 = r1 * (1.0 - E) / den1;
        rho2 = r2 * (1.0 - E) / den2;
        if (tau1 || tau2) {
            const complexd ph = clamped_exp(complexd{0.0, 1.0} * (km - kz) * dtil);
            const complexd s1 = kz + km;
            const complexd s2 = eps * kz + km;
            if (tau1) *tau1 = 4.0 * kz * km / (s1 * s1) * ph / den1;
            if (tau2) *tau2 = 4.0 * eps * kz * km / (s2 * s2) * ph / den2;
        }
    }
};

} // namespace detail

// k_z = sqrt(omega^2/c^2 - k^2): real >= 0 in the propagative sector
// (ck < omega), +i|k_z| in the evanescent one. The branch point ck = omega
// belongs to the propagative sector with k_z = 0.
inline ModeKinematics kinematics(double omega, double k, complexd eps) {
    if (!(omega > 0.0)) throw Error("kinematics: omega must be > 0");
    if (!(k >= 0.0)) throw Error("kinematics: k must be >= 0");
    const double k0 = omega / constants::c_light;
    ModeKinematics kin;
    kin.omega = omega;
    kin.k = k;
    if (k <= k0) {
        kin.k_z = std::sqrt(k0 * k0 - k * k);
        kin.sector = Sector::propagative;
    } else {
        kin.k_z = complexd{0.0, std::sqrt(k * k - k0 * k0)};
        kin.sector = Sector::evanescent;
    }
    kin.k_zm = detail::kzm_branch(eps * k0 * k0 - k * k);
    return kin;
}

inline FresnelCoefficients fresnel(const ModeKinematics& kin, complexd eps) {
    const complexd kz = kin.k_z, km = kin.k_zm;
    const complexd dTE = kz + km;
    const complexd dTM = eps * kz + km;
    const double scale = std::abs(kz) + std::abs(km);
    if (std::abs(dTE) < 1e-140 * std::max(1.0, scale) ||
        std::abs(dTM) < 1e-140 * std::max(1.0, scale))
        throw DegenerateDenominator("vanishing Fresnel denominator");
    const complexd sq = std::sqrt(eps);
    FresnelCoefficients f;
    f.r_TE = (kz - km) / dTE;
    f.r_TM = (eps * kz - km) / dTM;
    f.t_TE = 2.0 * kz / dTE;
    f.t_TM = 2.0 * sq * kz / dTM;
    f.tbar_TE = 2.0 * km / dTE;
    f.tbar_TM = 2.0 * sq * km / dTM;
    return f;
}

// Exact idealized-mirror limit: rho_p = (-1)^p, tau_p = 0 for any thickness.
inline SlabCoefficients mirror_coefficients() {
    return SlabCoefficients{{-1.0, 0.0}, {+1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
}

inline SlabCoefficients slab_coefficients(const ModeKinematics& kin, complexd eps,
                                          const Geometry& geom) {
    const double k0 = kin.omega / constants::c_light;
    auto L = detail::ReducedLayer::from_eps(eps, geom.semi_infinite ? 0.0 : kin.omega * geom.delta / constants::c_light,
                                            geom.semi_infinite);
    SlabCoefficients out;
    L.coefficients(kin.k_z / k0, (kin.k / k0) * (kin.k / k0), out.rho_TE, out.rho_TM,
                   &out.tau_TE, &out.tau_TM);
    return out;
}

inline SlabCoefficients slab_coefficients(const ModeKinematics& kin,
                                          const matprops::PermittivityModel& model,
                                          const Geometry& geom) {
    if (matprops::is_mirror(model)) return mirror_coefficients();
    return slab_coefficients(kin, matprops::permittivity(model, kin.omega), geom);
}

} // namespace noneq::slab_optics
