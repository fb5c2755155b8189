#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "noneq/constants.hpp"
#include "noneq/matprops.hpp"
#include "noneq/rates.hpp"

using namespace noneq;
using namespace noneq::rates;
using Catch::Approx;
using noneq::constants::c_light;
using noneq::constants::hbar;
using noneq::constants::k_B;
using slab_optics::Geometry;

namespace {
const double wr = 0.506e14;
const double wp_gaas = 5.463372030049e13;
} // namespace

TEST_CASE("mean photon number") {
    REQUIRE(mean_photon_n(wr, 0.0) == 0.0);
    SECTION("n = 1 when hbar omega = kB T ln 2") {
        const double T = 300.0;
        const double w = k_B * T * std::log(2.0) / hbar;
        REQUIRE(mean_photon_n(w, T) == Approx(1.0).epsilon(1e-14));
    }
    SECTION("reference temperature of the GaAs resonance") {
        // hbar omega_r / kB is about 387 K, so n(omega_r, 387 K) ~ 1/(e - 1)
        REQUIRE(mean_photon_n(wr, 387.0) == Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(0.005));
    }
    SECTION("classical limit uses expm1") {
        const double T = 300.0;
        const double w = 1e-8 * k_B * T / hbar;  // x = 1e-8
        REQUIRE(mean_photon_n(w, T) == Approx(1e8 - 0.5).epsilon(1e-6));
    }
}

TEST_CASE("dipole presets") {
    REQUIRE(DipoleSpec::parallel(1e-29).dtilde == quadrature::Vec3{0.5, 0.5, 0.0});
    REQUIRE(DipoleSpec::perpendicular(1e-29).dtilde == quadrature::Vec3{0.0, 0.0, 1.0});
    REQUIRE_NOTHROW(DipoleSpec::isotropic(1e-29).validate());
    DipoleSpec bad{1e-29, {0.5, 0.5, 0.5}};
    REQUIRE_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("alphas in limiting bodies") {
    const Geometry geom = Geometry::slab(1e-6, 2e-6);
    SECTION("vacuum") {
        auto [aW, aM] = alphas(wr, geom, matprops::Vacuum{}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
        REQUIRE(aW == Approx(1.0).margin(1e-9));
        REQUIRE(aM == Approx(0.0).margin(1e-9));
    }
    SECTION("perfect mirror couples only to the walls") {
        quadrature::EnvBodyFactors F;
        auto [aW, aM] = alphas(wr, Geometry::semi_infinite_slab(1e-6), matprops::PerfectMirror{},
                               {1.0 / 3, 1.0 / 3, 1.0 / 3}, {}, &F);
        const double cdot = (F.C[0] + F.C[1] + F.C[2]) / 3.0;
        REQUIRE(aM == Approx(0.0).margin(1e-9));
        REQUIRE(aW == Approx(1.0 + cdot).margin(1e-9));
    }
    SECTION("pinned pair for GaAs at the surface resonance") {
        auto [aW, aM] = alphas(wp_gaas, Geometry::slab(1e-6, 1.4e-6), matprops::gaas(),
                               {1.0 / 3, 1.0 / 3, 1.0 / 3});
        REQUIRE(aW == Approx(0.63855493058521073).epsilon(1e-7));
        REQUIRE(aM == Approx(91.720373444484508).epsilon(1e-7));
    }
}

TEST_CASE("transition rates") {
    const auto gaas = matprops::gaas();
    const auto dip = DipoleSpec::isotropic(1e-29);
    SECTION("vacuum rates carry only the wall temperature") {
        const auto r = transition_rates(wr, dip, Geometry::slab(1e-6, 1e-6),
                                        matprops::Vacuum{}, ThermalEnv{431.0, 296.0});
        const double n = mean_photon_n(wr, 296.0);
        REQUIRE(r.gamma_down == Approx(r.gamma0 * (1.0 + n)).epsilon(1e-9));
        REQUIRE(r.gamma_up == Approx(r.gamma0 * n).epsilon(1e-9));
    }
    SECTION("free-space spontaneous emission scale") {
        const auto r = transition_rates(wr, dip, Geometry::slab(1e-6, 1e-6),
                                        matprops::Vacuum{}, ThermalEnv{0.0, 0.0});
        const double g0 = wr * wr * wr * 1e-58 /
                          (3.0 * 3.14159265358979323846 * constants::eps0 * hbar *
                           c_light * c_light * c_light);
        REQUIRE(r.gamma0 == Approx(g0).epsilon(1e-12));
        REQUIRE(r.gamma_up == 0.0);
        REQUIRE(r.T_eff == 0.0);
    }
    SECTION("equilibrium erases the body from n_eff") {
        const auto r = transition_rates(wp_gaas, dip, Geometry::slab(0.3e-6, 2e-6), gaas,
                                        ThermalEnv{350.0, 350.0});
        REQUIRE(r.n_eff == Approx(mean_photon_n(wp_gaas, 350.0)).epsilon(1e-13));
        REQUIRE(r.T_eff == Approx(350.0).epsilon(1e-10));
    }
    SECTION("detailed-balance construction identity") {
        const auto r = transition_rates(wp_gaas, dip, Geometry::slab(0.3e-6, 2e-6), gaas,
                                        ThermalEnv{100.0, 500.0});
        REQUIRE(r.gamma_up / r.gamma_down == Approx(r.n_eff / (1.0 + r.n_eff)).epsilon(1e-14));
    }
    SECTION("paper effective temperatures at z = 0.54 um") {
        const auto geom = Geometry::semi_infinite_slab(0.54e-6);
        const ThermalEnv env{50.0, 600.0};  // T_M, T_W
        const auto r32 = transition_rates(1.02 * wr, dip, geom, gaas, env);
        const auto r31 = transition_rates(wp_gaas, dip, geom, gaas, env);
        REQUIRE(r32.T_eff == Approx(145.0).epsilon(0.10));
        REQUIRE(r31.T_eff == Approx(59.0).epsilon(0.10));
    }
    SECTION("n_eff clamping over random parameters") {
        std::mt19937_64 rng(123);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const matprops::PermittivityModel mats[2] = {gaas, matprops::gold()};
        const double wref[2] = {wr, 0.392e14};
        for (int m = 0; m < 2; ++m) {
            for (int i = 0; i < 50; ++i) {
                const double w = wref[m] * std::pow(10.0, uni(rng) - 0.5);
                const double z = 1e-8 * std::pow(1e4, uni(rng));
                const double dl = 1e-8 * std::pow(1e6, uni(rng));
                const double TW = 50.0 + 550.0 * uni(rng);
                const double TM = 50.0 + 550.0 * uni(rng);
                const auto r = transition_rates(w, dip, Geometry::slab(z, dl), mats[m],
                                                ThermalEnv{TM, TW});
                const double nlo = mean_photon_n(w, std::min(TW, TM));
                const double nhi = mean_photon_n(w, std::max(TW, TM));
                REQUIRE(r.n_eff >= nlo - 1e-9);
                REQUIRE(r.n_eff <= nhi + 1e-9);
                REQUIRE(r.T_eff >= std::min(TW, TM) - 1e-6);
                REQUIRE(r.T_eff <= std::max(TW, TM) + 1e-6);
                REQUIRE(r.gamma_down > 0.0);
                REQUIRE(r.gamma_up >= 0.0);
            }
        }
    }
    SECTION("contact thermalization to the body temperature") {
        const double w = 1.2 * wr;
        const double z = 1e-3 * c_light / w;
        for (auto [TW, TM] : {std::pair{600.0, 100.0}, std::pair{100.0, 600.0}}) {
            const auto r = transition_rates(w, dip, Geometry::semi_infinite_slab(z), gaas,
                                            ThermalEnv{TM, TW});
            REQUIRE(std::abs(r.T_eff - TM) < 1.0);
        }
    }
}

TEST_CASE("equilibrium_rates reduction") {
    const auto gaas = matprops::gaas();
    const auto dip = DipoleSpec::isotropic(1e-29);
    SECTION("agrees with transition_rates at equal temperatures") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int i = 0; i < 30; ++i) {
            const double w = wr * std::pow(10.0, uni(rng) - 0.5);
            const double z = 1e-8 * std::pow(1e4, uni(rng));
            const double dl = 1e-8 * std::pow(1e5, uni(rng));
            const double T = 50.0 + 550.0 * uni(rng);
            const auto a = transition_rates(w, dip, Geometry::slab(z, dl), gaas, ThermalEnv{T, T});
            const auto b = equilibrium_rates(w, dip, Geometry::slab(z, dl), gaas, T);
            REQUIRE(b.gamma_down == Approx(a.gamma_down).epsilon(1e-12));
            REQUIRE(b.gamma_up == Approx(a.gamma_up).epsilon(1e-12));
        }
    }
    SECTION("mirror contact limits at zero temperature") {
        const double z = 1e-3 * c_light / wr;  // ztil = 1e-3
        const auto geom = Geometry::semi_infinite_slab(z);
        const auto par = equilibrium_rates(wr, DipoleSpec::parallel(1e-29), geom,
                                           matprops::PerfectMirror{}, 0.0);
        REQUIRE(par.gamma_down / par.gamma0 < 1e-2);
        const auto perp = equilibrium_rates(wr, DipoleSpec::perpendicular(1e-29), geom,
                                            matprops::PerfectMirror{}, 0.0);
        REQUIRE(perp.gamma_down / perp.gamma0 == Approx(2.0).epsilon(0.01));
        const auto vac = equilibrium_rates(wr, dip, Geometry::slab(1e-6, 1e-6),
                                           matprops::Vacuum{}, 0.0);
        REQUIRE(vac.gamma_down == Approx(vac.gamma0).epsilon(1e-9));
        REQUIRE(vac.gamma_up == 0.0);
    }
}

TEST_CASE("crossover distance where the two couplings match") {
    const auto geom = Geometry::semi_infinite_slab(1.0);
    const double z = crossover_distance(1.2 * wr, matprops::gaas(), geom,
                                        {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-9, 1e-3);
    auto [aW, aM] = alphas(1.2 * wr, Geometry::semi_infinite_slab(z), matprops::gaas(),
                           {1.0 / 3, 1.0 / 3, 1.0 / 3});
    REQUIRE(aW == Approx(aM).epsilon(1e-6));
}

TEST_CASE("markov diagnostics orders of magnitude") {
    const auto dip = DipoleSpec::isotropic(1e-29);
    SECTION("no body at room temperature") {
        const auto d = markov_diagnostics(wr, dip, Geometry::slab(1e-6, 1e-6),
                                          matprops::Vacuum{}, ThermalEnv{300.0, 300.0}, {},
                                          1 << 12);
        REQUIRE(d.tau_B > 1e-15);
        REQUIRE(d.tau_B < 1e-12);
        REQUIRE(d.born_markov_ok);
        REQUIRE(d.rwa_ok);
        REQUIRE(d.tau_A == Approx(1.0 / (2.0 * wr)));
    }
    SECTION("grid metadata is reported") {
        const auto d = markov_diagnostics(wr, dip, Geometry::slab(1e-6, 1e-6),
                                          matprops::Vacuum{}, ThermalEnv{300.0, 300.0}, {},
                                          1 << 12);
        REQUIRE(d.n_samples == (1 << 12));
        REQUIRE(d.omega_max == Approx(20.0 * k_B * 300.0 / hbar));
    }
}

TEST_CASE("degenerate coupling is flagged") {
    // parallel dipole at exact mirror contact: alpha_W = alpha_M = 0
    REQUIRE_THROWS_AS(transition_rates(wr, DipoleSpec::parallel(1e-29),
                                       Geometry::semi_infinite_slab(1e-30),
                                       matprops::PerfectMirror{}, ThermalEnv{300.0, 300.0}),
                      BothAlphasZero);
}
