#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "noneq/constants.hpp"
#include "noneq/errors.hpp"
#include "noneq/rates.hpp"

namespace noneq::atom_dynamics {

using complexd = std::complex<double>;
using rates::DipoleSpec;
using rates::RateSet;

namespace detail {

// Cyclic Jacobi eigenvalues for a small Hermitian matrix; used only for the
// positive-semidefiniteness bound in state validation.
inline std::vector<double> hermitian_eigenvalues(std::vector<complexd> a, int n) {
    auto at = [&](int i, int j) -> complexd& { return a[i * n + j]; };
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(at(p, q));
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const complexd apq = at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double app = at(p, p).real(), aqq = at(q, q).real();
                const double phi = std::arg(apq);
                const double m = std::abs(apq);
                const double theta = 0.5 * std::atan2(2.0 * m, app - aqq);
                const double cs = std::cos(theta), sn = std::sin(theta);
                const complexd ei{std::cos(phi), std::sin(phi)};
                // rotation: p' = cs p + sn e^{i phi} q ; q' = -sn e^{-i phi} p + cs q
                for (int k = 0; k < n; ++k) {
                    const complexd akp = at(k, p), akq = at(k, q);
                    at(k, p) = cs * akp + sn * ei * akq;
                    at(k, q) = -sn * std::conj(ei) * akp + cs * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const complexd apk = at(p, k), aqk = at(q, k);
                    at(p, k) = cs * apk + sn * std::conj(ei) * aqk;
                    at(q, k) = -sn * ei * apk + cs * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = at(i, i).real();
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace detail

class DensityMatrix {
  public:
    DensityMatrix() = default;
    explicit DensityMatrix(int dim) : dim_(dim), a_(dim * dim, complexd{0.0, 0.0}) {
        if (dim < 2) throw InvalidState("dimension must be >= 2");
    }

    static DensityMatrix diagonal(const std::vector<double>& pops) {
        DensityMatrix r(static_cast<int>(pops.size()));
        for (int i = 0; i < r.dim_; ++i) r(i, i) = pops[i];
        return r;
    }
    static DensityMatrix ground(int dim) {
        DensityMatrix r(dim);
        r(0, 0) = 1.0;
        return r;
    }
    static DensityMatrix excited(int dim) {
        DensityMatrix r(dim);
        r(dim - 1, dim - 1) = 1.0;
        return r;
    }
    static DensityMatrix maximally_mixed(int dim) {
        DensityMatrix r(dim);
        for (int i = 0; i < dim; ++i) r(i, i) = 1.0 / dim;
        return r;
    }

    int dim() const { return dim_; }
    complexd& operator()(int i, int j) { return a_[i * dim_ + j]; }
    const complexd& operator()(int i, int j) const { return a_[i * dim_ + j]; }

    double population(int i) const { return (*this)(i, i).real(); }

    void validate() const {
        if (dim_ < 2) throw InvalidState("uninitialized state");
        complexd tr = 0.0;
        for (int i = 0; i < dim_; ++i) {
            tr += (*this)(i, i);
            if ((*this)(i, i).real() < -1e-12 || (*this)(i, i).real() > 1.0 + 1e-12)
                throw InvalidState("diagonal entry outside [0, 1]");
            if (std::abs((*this)(i, i).imag()) > 1e-12)
                throw InvalidState("diagonal entry not real");
            for (int j = i + 1; j < dim_; ++j)
                if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > 1e-12)
                    throw InvalidState("not Hermitian");
        }
        if (std::abs(tr - 1.0) > 1e-12) throw InvalidState("trace != 1");
        auto ev = detail::hermitian_eigenvalues(a_, dim_);
        if (ev.front() < -1e-10) throw InvalidState("not positive semidefinite");
    }

    bool is_diagonal(double tol = 1e-10) const {
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                if (i != j && std::abs((*this)(i, j)) > tol) return false;
        return true;
    }

  private:
    int dim_ = 0;
    std::vector<complexd> a_;
};

inline double purity(const DensityMatrix& rho) {
    rho.validate();
    double s = 0.0;
    for (int i = 0; i < rho.dim(); ++i)
        for (int j = 0; j < rho.dim(); ++j) s += std::norm(rho(i, j));
    return s;
}

struct Transition {
    int lower = 0;
    int upper = 0;
    DipoleSpec dipole;
};

// Non-degenerate, non-equidistant level scheme: every dipole-allowed
// transition must carry its own distinct frequency for the secular master
// equation to apply.
class LevelScheme {
  public:
    std::vector<double> level_freqs;   // omega_n, strictly increasing, rad/s
    std::vector<Transition> transitions;

    static LevelScheme two_level(double omega0, const DipoleSpec& d) {
        if (!(omega0 > 0.0)) throw DegenerateScheme("omega0 must be > 0");
        LevelScheme s;
        s.level_freqs = {0.0, omega0};
        s.transitions = {{0, 1, d}};
        s.validate();
        return s;
    }

    // Lambda configuration: |1>,|2> both couple to |3>; 1<->2 is forbidden.
    static LevelScheme lambda(double omega31, double omega32, const DipoleSpec& d31,
                              const DipoleSpec& d32) {
        if (!(omega31 > omega32 && omega32 > 0.0))
            throw DegenerateScheme("lambda scheme requires omega31 > omega32 > 0");
        LevelScheme s;
        s.level_freqs = {0.0, omega31 - omega32, omega31};
        s.transitions = {{0, 2, d31}, {1, 2, d32}};
        s.validate();
        return s;
    }

    double transition_frequency(const Transition& t) const {
        return level_freqs[t.upper] - level_freqs[t.lower];
    }

    void validate() const {
        const int n = static_cast<int>(level_freqs.size());
        if (n < 2) throw DegenerateScheme("need at least two levels");
        for (int i = 1; i < n; ++i)
            if (!(level_freqs[i] > level_freqs[i - 1]))
                throw DegenerateScheme("level frequencies must be strictly increasing");
        for (const auto& t : transitions) {
            if (t.lower < 0 || t.upper >= n || t.lower >= t.upper)
                throw DegenerateScheme("bad transition indices");
            t.dipole.validate();
        }
        for (std::size_t i = 0; i < transitions.size(); ++i)
            for (std::size_t j = i + 1; j < transitions.size(); ++j) {
                const double wi = transition_frequency(transitions[i]);
                const double wj = transition_frequency(transitions[j]);
                if (std::abs(wi - wj) <= 1e-9 * std::max(wi, wj))
                    throw DegenerateScheme("transition frequencies must be pairwise distinct");
            }
    }
};

// ---------------------------------------------------------------------------
// two-level atom

inline DensityMatrix two_level_steady(const RateSet& r) {
    if (!(r.gamma_down > 0.0)) throw ZeroTotalRate("gamma_down must be > 0");
    const double n = r.n_eff;
    return DensityMatrix::diagonal({(1.0 + n) / (1.0 + 2.0 * n), n / (1.0 + 2.0 * n)});
}

inline DensityMatrix two_level_evolve(const DensityMatrix& rho0, double t, const RateSet& r,
                                      double delta_omega) {
    if (rho0.dim() != 2) throw InvalidState("two_level_evolve needs a 2x2 state");
    rho0.validate();
    if (!(t >= 0.0)) throw Error("two_level_evolve: t must be >= 0");
    const double gamma = r.gamma_down + r.gamma_up;
    const double decay = std::exp(-gamma * t);
    DensityMatrix out(2);
    if (gamma > 0.0) {
        const double relax = (1.0 - decay) / gamma;
        out(0, 0) = rho0(0, 0).real() * decay + relax * r.gamma_down;
        out(1, 1) = rho0(1, 1).real() * decay + relax * r.gamma_up;
    } else {
        out(0, 0) = rho0(0, 0);
        out(1, 1) = rho0(1, 1);
    }
    const complexd phase = std::exp(complexd{-0.5 * gamma * t, delta_omega * t});
    out(0, 1) = rho0(0, 1) * phase;
    out(1, 0) = std::conj(out(0, 1));
    return out;
}

// ---------------------------------------------------------------------------
// three-level Lambda atom

namespace detail {

// Population rate matrix of the Lambda system in the basis (rho11, rho22, rho33).
inline std::array<double, 9> lambda_rate_matrix(const RateSet& r31, const RateSet& r32) {
    return {-r31.gamma_up, 0.0,           r31.gamma_down,
            0.0,           -r32.gamma_up, r32.gamma_down,
            r31.gamma_up,  r32.gamma_up,  -(r31.gamma_down + r32.gamma_down)};
}

inline std::array<double, 3> matvec3(const std::array<double, 9>& m,
                                     const std::array<double, 3>& v) {
    return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
            m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
            m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

// exp(M t) v by scaling and squaring with a Taylor kernel; 3x3 only, used as
// the fallback when the rate matrix is (nearly) defective.
inline std::array<double, 3> expm_times(const std::array<double, 9>& m, double t,
                                        std::array<double, 3> v) {
    double norm = 0.0;
    for (int i = 0; i < 3; ++i) {
        double row = 0.0;
        for (int j = 0; j < 3; ++j) row += std::abs(m[i * 3 + j]) * t;
        norm = std::max(norm, row);
    }
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.5 && squarings < 60) {
        scale *= 0.5;
        ++squarings;
    }
    std::array<double, 9> a{};
    for (int i = 0; i < 9; ++i) a[i] = m[i] * t * scale;
    // T = exp(a) via Taylor
    std::array<double, 9> T{1, 0, 0, 0, 1, 0, 0, 0, 1}, term{1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (int k = 1; k <= 18; ++k) {
        std::array<double, 9> nt{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int l = 0; l < 3; ++l) s += term[i * 3 + l] * a[l * 3 + j];
                nt[i * 3 + j] = s / k;
            }
        term = nt;
        for (int i = 0; i < 9; ++i) T[i] += term[i];
    }
    for (int q = 0; q < squarings; ++q) {
        std::array<double, 9> sq{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int l = 0; l < 3; ++l) s += T[i * 3 + l] * T[l * 3 + j];
                sq[i * 3 + j] = s;
            }
        T = sq;
    }
    return matvec3(T, v);
}

} // namespace detail

inline DensityMatrix three_level_steady(const RateSet& r31, const RateSet& r32) {
    if (!(r31.gamma_down > 0.0) || !(r32.gamma_down > 0.0))
        throw ZeroTotalRate("both downward rates must be > 0");
    if (r31.gamma_up <= 0.0 && r32.gamma_up <= 0.0)
        throw BothChannelsDark("T = 0 on both channels: steady state not unique");
    const double Zt = r31.gamma_down * r32.gamma_up + r31.gamma_up * r32.gamma_down +
                      r31.gamma_up * r32.gamma_up;
    const double p11 = r31.gamma_down * r32.gamma_up / Zt;
    const double p22 = r31.gamma_up * r32.gamma_down / Zt;
    const double p33 = r31.gamma_up * r32.gamma_up / Zt;

    // algebraically identical n_eff form, kept as a structural cross-check
    const double n1 = r31.n_eff, n2 = r32.n_eff;
    const double Zn = 3.0 * n1 * n2 + n1 + n2;
    if (Zn > 0.0) {
        const double q11 = n2 * (1.0 + n1) / Zn;
        if (std::abs(q11 - p11) > 1e-12 * std::max(1.0, std::abs(p11)))
            throw Error("three_level_steady: Gamma-product and n_eff forms disagree");
    }
    return DensityMatrix::diagonal({p11, p22, p33});
}

struct LambPhases {
    double delta21 = 0.0;
    double delta31 = 0.0;
    double delta32 = 0.0;
};

inline DensityMatrix three_level_evolve(const DensityMatrix& rho0, double t, const RateSet& r31,
                                        const RateSet& r32, const LambPhases& deltas = {}) {
    if (rho0.dim() != 3) throw InvalidState("three_level_evolve needs a 3x3 state");
    rho0.validate();
    if (!(t >= 0.0)) throw Error("three_level_evolve: t must be >= 0");

    const auto M = detail::lambda_rate_matrix(r31, r32);
    const std::array<double, 3> p0{rho0(0, 0).real(), rho0(1, 1).real(), rho0(2, 2).real()};

    // eigenvalues 0, lambda± of M; the quadratic factor has
    // a = sum of all rates, b = u1 u2 + u1 d2 + u2 d1  (u = up, d = down)
    const double u1 = r31.gamma_up, u2 = r32.gamma_up;
    const double d1 = r31.gamma_down, d2 = r32.gamma_down;
    const double a = u1 + u2 + d1 + d2;
    const double b = u1 * u2 + u1 * d2 + u2 * d1;
    const double disc = a * a - 4.0 * b;

    std::array<double, 3> pt{};
    bool solved = false;
    if (disc > 1e-12 * a * a && b > 0.0) {
        const double sq = std::sqrt(disc);
        const double l1 = 0.5 * (-a + sq), l2 = 0.5 * (-a - sq);
        // steady direction (unnormalized null vector)
        const std::array<double, 3> v0{d1 * u2, u1 * d2, u1 * u2};
        const double v0sum = v0[0] + v0[1] + v0[2];
        if (v0sum > 0.0) {
            auto eigvec = [&](double l) -> std::array<double, 3> {
                // rows of (M - l I); null vector from the cross product of two rows
                const std::array<double, 3> r0{M[0] - l, M[1], M[2]};
                const std::array<double, 3> r1{M[3], M[4] - l, M[5]};
                const std::array<double, 3> r2{M[6], M[7], M[8] - l};
                auto cross = [](const std::array<double, 3>& x, const std::array<double, 3>& y) {
                    return std::array<double, 3>{x[1] * y[2] - x[2] * y[1],
                                                 x[2] * y[0] - x[0] * y[2],
                                                 x[0] * y[1] - x[1] * y[0]};
                };
                auto c01 = cross(r0, r1), c02 = cross(r0, r2), c12 = cross(r1, r2);
                auto n2 = [](const std::array<double, 3>& v) {
                    return v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                };
                if (n2(c01) >= n2(c02) && n2(c01) >= n2(c12)) return c01;
                if (n2(c02) >= n2(c12)) return c02;
                return c12;
            };
            const auto v1 = eigvec(l1), v2 = eigvec(l2);
            // solve [v0 v1 v2] c = p0 by Cramer
            auto det3 = [](const std::array<double, 3>& x, const std::array<double, 3>& y,
                           const std::array<double, 3>& z) {
                return x[0] * (y[1] * z[2] - y[2] * z[1]) - y[0] * (x[1] * z[2] - x[2] * z[1]) +
                       z[0] * (x[1] * y[2] - x[2] * y[1]);
            };
            auto norm3 = [](const std::array<double, 3>& v) {
                return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            };
            const double det = det3(v0, v1, v2);
            const double vmag = norm3(v0) * norm3(v1) * norm3(v2);
            if (std::abs(det) > 1e-8 * std::max(vmag, 1e-300)) {
                const double c0 = det3(p0, v1, v2) / det;
                const double c1 = det3(v0, p0, v2) / det;
                const double c2 = det3(v0, v1, p0) / det;
                const double e1 = std::exp(l1 * t), e2 = std::exp(l2 * t);
                for (int i = 0; i < 3; ++i) pt[i] = c0 * v0[i] + c1 * e1 * v1[i] + c2 * e2 * v2[i];
                solved = true;
            }
        }
    }
    if (!solved) pt = detail::expm_times(M, t, p0);  // defective rate matrix

    DensityMatrix out(3);
    for (int i = 0; i < 3; ++i) out(i, i) = std::max(0.0, pt[i]);
    // renormalize away accumulated roundoff in the trace
    const double tr = out(0, 0).real() + out(1, 1).real() + out(2, 2).real();
    if (tr > 0.0)
        for (int i = 0; i < 3; ++i) out(i, i) /= tr;

    // coherence envelopes and Lamb-shifted phases
    const complexd ph12 =
        std::exp(complexd{-0.5 * (u1 + u2) * t, deltas.delta21 * t});
    const complexd ph13 =
        std::exp(complexd{-0.5 * (d1 + u1 + d2) * t, deltas.delta31 * t});
    const complexd ph23 =
        std::exp(complexd{-0.5 * (d2 + u2 + d1) * t, deltas.delta32 * t});
    out(0, 1) = rho0(0, 1) * ph12;
    out(0, 2) = rho0(0, 2) * ph13;
    out(1, 2) = rho0(1, 2) * ph23;
    out(1, 0) = std::conj(out(0, 1));
    out(2, 0) = std::conj(out(0, 2));
    out(2, 1) = std::conj(out(1, 2));
    return out;
}

// ---------------------------------------------------------------------------
// N-level steady state: classical master equation on the populations

inline DensityMatrix nlevel_steady(const LevelScheme& scheme,
                                   const std::vector<RateSet>& transition_rates) {
    scheme.validate();
    const int n = static_cast<int>(scheme.level_freqs.size());
    if (transition_rates.size() != scheme.transitions.size())
        throw Error("nlevel_steady: one RateSet per transition required");

    // connectivity of the undirected transition graph
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& t : scheme.transitions) parent[find(t.lower)] = find(t.upper);
    for (int i = 1; i < n; ++i)
        if (find(i) != find(0)) throw DisconnectedLevels("levels not connected by transitions");

    std::vector<double> M(n * n, 0.0);
    bool any_up = false;
    for (std::size_t k = 0; k < scheme.transitions.size(); ++k) {
        const auto& t = scheme.transitions[k];
        const auto& r = transition_rates[k];
        if (!(r.gamma_down > 0.0)) throw ZeroTotalRate("downward rate must be > 0");
        if (r.gamma_up > 0.0) any_up = true;
        M[t.upper * n + t.lower] += r.gamma_up;     // lower -> upper
        M[t.lower * n + t.lower] -= r.gamma_up;
        M[t.lower * n + t.upper] += r.gamma_down;   // upper -> lower
        M[t.upper * n + t.upper] -= r.gamma_down;
    }
    if (!any_up) {
        // at zero temperature population funnels into the levels with no
        // downward escape; more than one such sink leaves the split between
        // them fixed by the initial state, not by the rates
        std::vector<int> escape(n, 0);
        for (const auto& t : scheme.transitions) ++escape[t.upper];
        int sinks = 0;
        for (int i = 0; i < n; ++i)
            if (escape[i] == 0) ++sinks;
        if (sinks > 1) throw BothChannelsDark("multiple dark levels at zero temperature");
    }

    // replace the first equation by the trace condition and solve
    std::vector<double> A(n * n), rhs(n, 0.0);
    for (int j = 0; j < n; ++j) A[j] = 1.0;
    rhs[0] = 1.0;
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < n; ++j) A[i * n + j] = M[i * n + j];

    // Gaussian elimination with partial pivoting
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[best * n + col])) best = r;
        if (std::abs(A[best * n + col]) < 1e-300)
            throw Error("nlevel_steady: singular rate matrix");
        if (best != col) {
            for (int j = 0; j < n; ++j) std::swap(A[col * n + j], A[best * n + j]);
            std::swap(rhs[col], rhs[best]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = A[r * n + col] / A[col * n + col];
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) A[r * n + j] -= f * A[col * n + j];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> p(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = rhs[i];
        for (int j = i + 1; j < n; ++j) s -= A[i * n + j] * p[j];
        p[i] = s / A[i * n + i];
    }
    double sum = 0.0;
    for (double& v : p) {
        if (v < 0.0 && v > -1e-12) v = 0.0;
        sum += v;
    }
    for (double& v : p) v /= sum;
    return DensityMatrix::diagonal(p);
}

// ---------------------------------------------------------------------------
// closest thermal state (trace-norm on populations of diagonal states)

struct ClosestThermal {
    double temperature = 0.0;  // K
    double distance = 0.0;     // L1 on populations
};

namespace detail {

inline std::vector<double> thermal_populations(const LevelScheme& scheme, double T) {
    const int n = static_cast<int>(scheme.level_freqs.size());
    std::vector<double> p(n);
    double Z = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = constants::hbar * (scheme.level_freqs[i] - scheme.level_freqs[0]) /
                         (constants::k_B * T);
        p[i] = std::exp(-std::min(x, 700.0));
        Z += p[i];
    }
    for (double& v : p) v /= Z;
    return p;
}

} // namespace detail

// Golden-section refinement of a coarse global scan over T in [0.1, 1e4] K.
// The 0.05 K accuracy contract is exceeded on purpose: the L1 distance has a
// kink at an exact-thermal input, and self-retrieval should come back with a
// near-zero distance.
inline ClosestThermal closest_thermal(const DensityMatrix& rho, const LevelScheme& scheme) {
    rho.validate();
    scheme.validate();
    if (!rho.is_diagonal(1e-10)) throw NonDiagonalInput("closest_thermal needs a diagonal state");
    if (rho.dim() != static_cast<int>(scheme.level_freqs.size()))
        throw Error("closest_thermal: state and scheme dimensions differ");

    std::vector<double> pops(rho.dim());
    for (int i = 0; i < rho.dim(); ++i) pops[i] = rho.population(i);
    auto dist = [&](double T) {
        const auto q = detail::thermal_populations(scheme, T);
        double d = 0.0;
        for (int i = 0; i < rho.dim(); ++i) d += std::abs(pops[i] - q[i]);
        return d;
    };

    const double Tlo = 0.1, Thi = 1e4;
    const int nscan = 400;
    double best_T = Tlo, best_d = dist(Tlo);
    std::vector<double> Ts(nscan), ds(nscan);
    for (int i = 0; i < nscan; ++i) {
        Ts[i] = Tlo * std::pow(Thi / Tlo, static_cast<double>(i) / (nscan - 1));
        ds[i] = dist(Ts[i]);
        if (ds[i] < best_d) {
            best_d = ds[i];
            best_T = Ts[i];
        }
    }
    int ib = 0;
    for (int i = 0; i < nscan; ++i)
        if (ds[i] == best_d && Ts[i] == best_T) ib = i;
    double a = Ts[std::max(0, ib - 1)], b = Ts[std::min(nscan - 1, ib + 1)];

    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = dist(x1), f2 = dist(x2);
    while (b - a > 1e-9 * std::max(1.0, a)) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = dist(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = dist(x2);
        }
    }
    const double T = 0.5 * (a + b);
    return {T, dist(T)};
}

} // namespace noneq::atom_dynamics
