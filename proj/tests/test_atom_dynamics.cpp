#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "noneq/atom_dynamics.hpp"
#include "noneq/constants.hpp"
#include "noneq/matprops.hpp"
#include "noneq/rates.hpp"
#include "support/oracles.hpp"

using namespace noneq;
using namespace noneq::atom_dynamics;
using Catch::Approx;
using noneq::constants::hbar;
using noneq::constants::k_B;
using rates::DipoleSpec;
using rates::RateSet;
using rates::ThermalEnv;
using slab_optics::Geometry;

namespace {

const double wr = 0.506e14;
const double wp_gaas = 5.463372030049e13;

// detached rate bundle for closed-form tests
RateSet synthetic_rates(double omega, double alpha_sum, double n_eff, double gamma0 = 1.0) {
    RateSet r;
    r.omega = omega;
    r.gamma0 = gamma0;
    r.alpha_W = alpha_sum;
    r.alpha_M = 0.0;
    r.n_eff = n_eff;
    r.T_eff = rates::effective_temperature(omega, n_eff);
    r.gamma_down = gamma0 * alpha_sum * (1.0 + n_eff);
    r.gamma_up = gamma0 * alpha_sum * n_eff;
    return r;
}

} // namespace

TEST_CASE("density matrix validation") {
    auto rho = DensityMatrix::diagonal({0.6, 0.4});
    REQUIRE_NOTHROW(rho.validate());
    rho(0, 1) = {0.2, 0.1};
    REQUIRE_THROWS_AS(rho.validate(), InvalidState);  // not Hermitian
    rho(1, 0) = std::conj(rho(0, 1));
    REQUIRE_NOTHROW(rho.validate());
    rho(0, 1) = {0.6, 0.0};  // |coherence| beyond positivity
    rho(1, 0) = {0.6, 0.0};
    REQUIRE_THROWS_AS(rho.validate(), InvalidState);
    REQUIRE_THROWS_AS(DensityMatrix::diagonal({0.7, 0.4}).validate(), InvalidState);
}

TEST_CASE("purity") {
    REQUIRE(purity(DensityMatrix::ground(3)) == Approx(1.0));
    REQUIRE(purity(DensityMatrix::maximally_mixed(3)) == Approx(1.0 / 3.0));
    REQUIRE(purity(DensityMatrix::diagonal({0.6, 0.3, 0.1})) == Approx(0.46));
}

TEST_CASE("two-level evolution closed form") {
    const auto r = synthetic_rates(wr, 1.0, 0.35, 2.0e7);
    DensityMatrix rho0(2);
    rho0(0, 0) = 0.5;
    rho0(1, 1) = 0.5;
    rho0(0, 1) = {0.5, 0.0};
    rho0(1, 0) = {0.5, 0.0};

    SECTION("identity at t = 0") {
        const auto rho = two_level_evolve(rho0, 0.0, r, 0.0);
        REQUIRE(rho(0, 0) == rho0(0, 0));
        REQUIRE(rho(0, 1) == rho0(0, 1));
    }
    SECTION("pure decay reaches the ground state") {
        const auto vac = synthetic_rates(wr, 1.0, 0.0, 2.0e7);
        const auto rho = two_level_evolve(DensityMatrix::excited(2), 50.0 / vac.gamma_down,
                                          vac, 0.0);
        REQUIRE(rho(0, 0).real() == Approx(1.0).margin(1e-10));
        REQUIRE(rho(1, 1).real() == Approx(0.0).margin(1e-10));
    }
    SECTION("coherence envelope |rho12(2/gamma)| = e^{-1}/2") {
        const double gamma = r.gamma_down + r.gamma_up;
        const auto rho = two_level_evolve(rho0, 2.0 / gamma, r, 0.0);
        REQUIRE(std::abs(rho(0, 1)) == Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));
    }
    SECTION("matches an RK4 integration of the Bloch equations") {
        const double gamma = r.gamma_down + r.gamma_up;
        const double delta = 0.3 * gamma;
        for (double t : {0.1 / gamma, 1.0 / gamma, 4.0 / gamma}) {
            const auto mine = two_level_evolve(rho0, t, r, delta);
            const auto ref = testoracle::rk4_two_level(
                {rho0(0, 0), rho0(1, 1), rho0(0, 1)}, t, 4000, r.gamma_down, r.gamma_up, delta);
            REQUIRE(std::abs(mine(0, 0) - ref[0]) < 1e-8);
            REQUIRE(std::abs(mine(1, 1) - ref[1]) < 1e-8);
            REQUIRE(std::abs(mine(0, 1) - ref[2]) < 1e-8);
        }
    }
    SECTION("semigroup property and monotone coherence decay") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const double gamma = r.gamma_down + r.gamma_up;
        double prev = 1.0;
        for (int i = 0; i < 50; ++i) {
            const double t1 = 3.0 * uni(rng) / gamma, t2 = 3.0 * uni(rng) / gamma;
            const auto once = two_level_evolve(rho0, t1 + t2, r, 0.4 * gamma);
            const auto twice = two_level_evolve(two_level_evolve(rho0, t1, r, 0.4 * gamma), t2,
                                                r, 0.4 * gamma);
            REQUIRE(std::abs(once(0, 0) - twice(0, 0)) < 1e-10);
            REQUIRE(std::abs(once(0, 1) - twice(0, 1)) < 1e-10);
            const double env = std::abs(two_level_evolve(rho0, i * 0.1 / gamma, r, 0.0)(0, 1));
            REQUIRE(env <= prev + 1e-15);
            prev = env;
        }
    }
    SECTION("steady state is a fixed point") {
        const auto steady = two_level_steady(r);
        for (double t : {0.3, 1.7, 9.0}) {
            const auto rho = two_level_evolve(steady, t / (r.gamma_down + r.gamma_up), r, 0.0);
            REQUIRE(rho(0, 0).real() == Approx(steady(0, 0).real()).margin(1e-10));
        }
    }
    SECTION("input validation") {
        REQUIRE_THROWS_AS(two_level_evolve(DensityMatrix::diagonal({2.0, -1.0}), 1.0, r, 0.0),
                          InvalidState);
        REQUIRE_THROWS_AS(two_level_evolve(rho0, -1.0, r, 0.0), Error);
    }
}

TEST_CASE("two-level steady state") {
    SECTION("thermal form") {
        const auto r = synthetic_rates(wr, 1.0, 0.25);
        const auto rho = two_level_steady(r);
        REQUIRE(rho(0, 0).real() == Approx(1.25 / 1.5));
        REQUIRE(rho(1, 1).real() == Approx(0.25 / 1.5));
        REQUIRE(rho(1, 1).real() < 0.5);
    }
    SECTION("ground state at zero effective temperature") {
        const auto rho = two_level_steady(synthetic_rates(wr, 1.0, 0.0));
        REQUIRE(rho(0, 0).real() == 1.0);
    }
    SECTION("zero total rate is an error") {
        REQUIRE_THROWS_AS(two_level_steady(synthetic_rates(wr, 0.0, 0.0)), ZeroTotalRate);
    }
    SECTION("near-contact steady state matches equilibrium at the slab temperature") {
        // reference configuration: delta = 1 cm, (T_W, T_M) = (200, 500) K,
        // omega0 at the surface resonance, z = 0.05 um
        const auto dip = DipoleSpec::isotropic(1e-29);
        const auto r = rates::transition_rates(wp_gaas, dip, Geometry::slab(0.05e-6, 1e-2),
                                               matprops::gaas(), ThermalEnv{500.0, 200.0});
        const double n500 = rates::mean_photon_n(wp_gaas, 500.0);
        REQUIRE(two_level_steady(r)(1, 1).real() ==
                Approx(n500 / (1.0 + 2.0 * n500)).epsilon(0.01));
    }
}

TEST_CASE("three-level steady state") {
    SECTION("thermal equilibrium gives the Gibbs state of the Lambda system") {
        const double T = 320.0;
        const double n31 = rates::mean_photon_n(wp_gaas, T);
        const double n32 = rates::mean_photon_n(1.02 * wr, T);
        const auto rho = three_level_steady(synthetic_rates(wp_gaas, 1.3, n31),
                                            synthetic_rates(1.02 * wr, 0.8, n32));
        const double Z = 3.0 * n31 * n32 + n31 + n32;
        REQUIRE(rho(0, 0).real() == Approx(n32 * (1.0 + n31) / Z).epsilon(1e-12));
        REQUIRE(rho(1, 1).real() == Approx(n31 * (1.0 + n32) / Z).epsilon(1e-12));
        REQUIRE(rho(2, 2).real() == Approx(n31 * n32 / Z).epsilon(1e-12));
        // detailed balance against the level energies
        const double w21 = wp_gaas - 1.02 * wr;
        REQUIRE(rho(1, 1).real() / rho(0, 0).real() ==
                Approx(std::exp(-hbar * w21 / (k_B * T))).epsilon(1e-9));
    }
    SECTION("both channels dark is an error") {
        REQUIRE_THROWS_AS(three_level_steady(synthetic_rates(wp_gaas, 1.0, 0.0),
                                             synthetic_rates(1.02 * wr, 1.0, 0.0)),
                          BothChannelsDark);
    }
    SECTION("population inversion at the reference point") {
        const auto dip = DipoleSpec::isotropic(1e-29);
        const ThermalEnv env{50.0, 300.0};
        const double w32 = 1.02 * wr, w31 = wp_gaas;
        const auto thin = Geometry::slab(0.5e-6, 0.01e-6);
        const auto r31a = rates::transition_rates(w31, dip, thin, matprops::gaas(), env);
        const auto r32a = rates::transition_rates(w32, dip, thin, matprops::gaas(), env);
        const auto rho_a = three_level_steady(r31a, r32a);
        REQUIRE(rho_a(1, 1).real() > rho_a(0, 0).real());

        const auto thick = Geometry::slab(0.5e-6, 2e-6);
        const auto r31b = rates::transition_rates(w31, dip, thick, matprops::gaas(), env);
        const auto r32b = rates::transition_rates(w32, dip, thick, matprops::gaas(), env);
        const auto rho_b = three_level_steady(r31b, r32b);
        REQUIRE(rho_b(0, 0).real() > rho_b(1, 1).real());
    }
    SECTION("steady population extremum under pinned effective occupations") {
        // n32 at T_max and n31 at T_min maximizes rho11 over any common T
        const double Tmin = 100.0, Tmax = 600.0;
        const double w31 = wp_gaas, w32 = 1.02 * wr;
        const auto pinned = three_level_steady(
            synthetic_rates(w31, 1.0, rates::mean_photon_n(w31, Tmin)),
            synthetic_rates(w32, 1.0, rates::mean_photon_n(w32, Tmax)));
        for (int i = 0; i <= 100; ++i) {
            const double T = Tmin + (Tmax - Tmin) * i / 100.0;
            const auto eq = three_level_steady(
                synthetic_rates(w31, 1.0, rates::mean_photon_n(w31, T)),
                synthetic_rates(w32, 1.0, rates::mean_photon_n(w32, T)));
            REQUIRE(pinned(0, 0).real() >= eq(0, 0).real() - 1e-12);
        }
    }
}

TEST_CASE("three-level evolution") {
    const auto r31 = synthetic_rates(wp_gaas, 1.4, 0.02, 3.0e6);
    const auto r32 = synthetic_rates(1.02 * wr, 0.7, 0.3, 3.0e6);
    DensityMatrix rho0(3);
    rho0(0, 0) = 0.5;
    rho0(1, 1) = 0.2;
    rho0(2, 2) = 0.3;
    rho0(0, 1) = {0.1, 0.05};
    rho0(1, 0) = std::conj(rho0(0, 1));
    rho0(1, 2) = {0.0, 0.1};
    rho0(2, 1) = std::conj(rho0(1, 2));

    SECTION("identity at t = 0") {
        const auto rho = three_level_evolve(rho0, 0.0, r31, r32);
        REQUIRE(rho(1, 1).real() == Approx(rho0(1, 1).real()).margin(1e-14));
        REQUIRE(std::abs(rho(0, 1) - rho0(0, 1)) < 1e-14);
    }
    SECTION("long-time limit is the steady state") {
        // slowest nonzero population eigenvalue of the Lambda rate matrix
        const double a = r31.gamma_up + r32.gamma_up + r31.gamma_down + r32.gamma_down;
        const double b = r31.gamma_up * r32.gamma_up + r31.gamma_up * r32.gamma_down +
                         r32.gamma_up * r31.gamma_down;
        const double slowest = 0.5 * (a - std::sqrt(a * a - 4.0 * b));
        const auto rho = three_level_evolve(rho0, 50.0 / slowest, r31, r32);
        const auto steady = three_level_steady(r31, r32);
        for (int i = 0; i < 3; ++i)
            REQUIRE(rho(i, i).real() == Approx(steady(i, i).real()).margin(1e-8));
    }
    SECTION("matches an RK4 integration of the printed equations at checkpoints") {
        const atom_dynamics::LambPhases ph{1.1e6, -0.7e6, 0.4e6};
        const double scale = 1.0 / (r32.gamma_down + r32.gamma_up);
        for (int chk = 1; chk <= 10; ++chk) {
            const double t = chk * scale;
            const auto mine = three_level_evolve(rho0, t, r31, r32, ph);
            const auto ref = testoracle::rk4_three_level(
                {rho0(0, 0), rho0(1, 1), rho0(2, 2), rho0(0, 1), rho0(0, 2), rho0(1, 2)}, t,
                6000, r31.gamma_down, r31.gamma_up, r32.gamma_down, r32.gamma_up, ph.delta21,
                ph.delta31, ph.delta32);
            REQUIRE(std::abs(mine(0, 0) - ref[0]) < 1e-8);
            REQUIRE(std::abs(mine(1, 1) - ref[1]) < 1e-8);
            REQUIRE(std::abs(mine(2, 2) - ref[2]) < 1e-8);
            REQUIRE(std::abs(mine(0, 1) - ref[3]) < 1e-8);
            REQUIRE(std::abs(mine(0, 2) - ref[4]) < 1e-8);
            REQUIRE(std::abs(mine(1, 2) - ref[5]) < 1e-8);
        }
    }
    SECTION("trace and Hermiticity preserved on random states and times") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            double p1 = uni(rng), p2 = uni(rng), p3 = uni(rng);
            const double norm = p1 + p2 + p3;
            DensityMatrix rho = DensityMatrix::diagonal({p1 / norm, p2 / norm, p3 / norm});
            const double t = 5.0 * uni(rng) / (r32.gamma_down + r32.gamma_up);
            const auto out = three_level_evolve(rho, t, r31, r32);
            REQUIRE_NOTHROW(out.validate());
        }
    }
    SECTION("defective rate matrix falls back to the matrix exponential") {
        // both channels dark: eigenvalue zero is doubly degenerate
        const auto d31 = synthetic_rates(wp_gaas, 1.0, 0.0, 3.0e6);
        const auto d32 = synthetic_rates(1.02 * wr, 1.0, 0.0, 3.0e6);
        const auto rho = three_level_evolve(DensityMatrix::excited(3), 40.0 / d31.gamma_down,
                                            d31, d32);
        // population splits between the two dark lower levels by branching ratio
        REQUIRE(rho(2, 2).real() == Approx(0.0).margin(1e-10));
        REQUIRE(rho(0, 0).real() ==
                Approx(d31.gamma_down / (d31.gamma_down + d32.gamma_down)).epsilon(1e-8));
    }
}

TEST_CASE("N-level steady state") {
    const auto dip = DipoleSpec::isotropic(1e-29);
    SECTION("two-level specialization") {
        const auto r = synthetic_rates(wr, 1.0, 0.4);
        const auto scheme = LevelScheme::two_level(wr, dip);
        const auto rho = nlevel_steady(scheme, {r});
        const auto direct = two_level_steady(r);
        REQUIRE(rho(0, 0).real() == Approx(direct(0, 0).real()).margin(1e-10));
        REQUIRE(rho(1, 1).real() == Approx(direct(1, 1).real()).margin(1e-10));
    }
    SECTION("lambda specialization") {
        const auto r31 = synthetic_rates(wp_gaas, 1.4, 0.02);
        const auto r32 = synthetic_rates(1.02 * wr, 0.7, 0.3);
        const auto scheme = LevelScheme::lambda(wp_gaas, 1.02 * wr, dip, dip);
        const auto rho = nlevel_steady(scheme, {r31, r32});
        const auto direct = three_level_steady(r31, r32);
        for (int i = 0; i < 3; ++i)
            REQUIRE(rho(i, i).real() == Approx(direct(i, i).real()).margin(1e-10));
    }
    SECTION("four-level ladder thermalizes to the Gibbs state") {
        const double T = 440.0;
        LevelScheme scheme;
        scheme.level_freqs = {0.0, 0.8 * wr, 1.9 * wr, 3.3 * wr};
        scheme.transitions = {{0, 1, dip}, {1, 2, dip}, {2, 3, dip}};
        std::vector<RateSet> rs;
        for (const auto& t : scheme.transitions) {
            const double w = scheme.transition_frequency(t);
            rs.push_back(synthetic_rates(w, 0.5 + 0.3 * t.lower, rates::mean_photon_n(w, T)));
        }
        const auto rho = nlevel_steady(scheme, rs);
        // brute-force detailed-balance oracle
        double Z = 0.0;
        std::vector<double> gibbs(4);
        for (int i = 0; i < 4; ++i) {
            gibbs[i] = std::exp(-hbar * scheme.level_freqs[i] / (k_B * T));
            Z += gibbs[i];
        }
        for (int i = 0; i < 4; ++i) REQUIRE(rho(i, i).real() == Approx(gibbs[i] / Z).margin(1e-10));
        // per-transition detailed balance
        for (const auto& t : scheme.transitions) {
            const double w = scheme.transition_frequency(t);
            REQUIRE(rho(t.upper, t.upper).real() / rho(t.lower, t.lower).real() ==
                    Approx(std::exp(-hbar * w / (k_B * T))).epsilon(1e-9));
        }
    }
    SECTION("disconnected levels are rejected") {
        LevelScheme scheme;
        scheme.level_freqs = {0.0, 0.8 * wr, 1.9 * wr, 3.3 * wr};
        scheme.transitions = {{0, 1, dip}, {2, 3, dip}};
        const auto r01 = synthetic_rates(0.8 * wr, 1.0, 0.1);
        const auto r23 = synthetic_rates(1.4 * wr, 1.0, 0.1);
        REQUIRE_THROWS_AS(nlevel_steady(scheme, {r01, r23}), DisconnectedLevels);
    }
    SECTION("degenerate schemes are rejected") {
        REQUIRE_THROWS_AS(LevelScheme::lambda(wr, wr, dip, dip), DegenerateScheme);
        LevelScheme equidistant;
        equidistant.level_freqs = {0.0, wr, 2.0 * wr};
        equidistant.transitions = {{0, 1, dip}, {1, 2, dip}};
        REQUIRE_THROWS_AS(equidistant.validate(), DegenerateScheme);
    }
}

TEST_CASE("closest thermal state") {
    const auto dip = DipoleSpec::isotropic(1e-29);
    const auto scheme = LevelScheme::lambda(wp_gaas, 1.02 * wr, dip, dip);
    SECTION("self-retrieval of an exact thermal state") {
        const double T = 300.0;
        std::vector<double> p(3);
        double Z = 0.0;
        for (int i = 0; i < 3; ++i) {
            p[i] = std::exp(-hbar * scheme.level_freqs[i] / (k_B * T));
            Z += p[i];
        }
        for (double& v : p) v /= Z;
        const auto ct = closest_thermal(DensityMatrix::diagonal(p), scheme);
        REQUIRE(ct.temperature == Approx(300.0).margin(0.1));
        REQUIRE(ct.distance < 1e-8);
    }
    SECTION("interior minimum for a non-thermal state, against a dense scan") {
        const auto rho = DensityMatrix::diagonal({0.5, 0.5, 0.0});
        const auto ct = closest_thermal(rho, scheme);
        REQUIRE(ct.distance > 0.0);
        double best = 1e9, bestT = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const double T = 0.1 * std::pow(1e5, i / 9999.0);
            if (T > 1e4) break;  // search window of the implementation
            double Z = 0.0, d = 0.0;
            std::vector<double> q(3);
            for (int k = 0; k < 3; ++k) {
                q[k] = std::exp(-hbar * scheme.level_freqs[k] / (k_B * T));
                Z += q[k];
            }
            d = std::abs(0.5 - q[0] / Z) + std::abs(0.5 - q[1] / Z) + std::abs(q[2] / Z);
            if (d < best) {
                best = d;
                bestT = T;
            }
        }
        REQUIRE(ct.distance <= best + 1e-9);
        REQUIRE(ct.temperature == Approx(bestT).epsilon(0.01));
    }
    SECTION("non-diagonal input is rejected") {
        DensityMatrix rho = DensityMatrix::diagonal({0.6, 0.3, 0.1});
        rho(0, 1) = {0.05, 0.0};
        rho(1, 0) = {0.05, 0.0};
        REQUIRE_THROWS_AS(closest_thermal(rho, scheme), NonDiagonalInput);
    }
}
