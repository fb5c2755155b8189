#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "noneq/errors.hpp"

namespace noneq::matprops {

using complexd = std::complex<double>;

struct Vacuum {};

// Idealized eps -> infinity limit. Kept as its own variant because the limit
// rho_p = (-1)^p is exact and a large finite eps cannot reproduce it.
struct PerfectMirror {};

struct DrudeLorentz {
    double eps_inf;   // dimensionless
    double omega_l;   // rad/s, longitudinal resonance
    double omega_r;   // rad/s, transverse resonance
    double gamma;     // rad/s, damping
};

struct Drude {
    double omega_pl;  // rad/s, plasma frequency
    double gamma;     // rad/s, damping
};

// Linear interpolation in omega on Re and Im separately. Queries outside the
// tabulated range are errors, never extrapolations.
struct Tabulated {
    std::vector<std::pair<double, complexd>> samples;  // sorted by omega
};

using PermittivityModel = std::variant<Vacuum, PerfectMirror, DrudeLorentz, Drude, Tabulated>;

inline bool is_mirror(const PermittivityModel& m) { return std::holds_alternative<PerfectMirror>(m); }
inline bool is_vacuum(const PermittivityModel& m) { return std::holds_alternative<Vacuum>(m); }

// GaAs Drude-Lorentz parameters (Palik); resonance at 0.506e14 rad/s.
inline PermittivityModel gaas() {
    return DrudeLorentz{11.0, 0.550e14, 0.506e14, 0.00452e14};
}

// Gold Drude parameters; plasma frequency 137.2e14 rad/s.
inline PermittivityModel gold() {
    return Drude{137.2e14, 0.4059e14};
}

inline complexd permittivity(const PermittivityModel& model, double omega) {
    if (!(omega > 0.0)) throw Error("permittivity: omega must be > 0");
    return std::visit(
        [omega](const auto& m) -> complexd {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Vacuum>) {
                return {1.0, 0.0};
            } else if constexpr (std::is_same_v<T, PerfectMirror>) {
                throw MirrorHasNoFinitePermittivity{};
            } else if constexpr (std::is_same_v<T, DrudeLorentz>) {
                const complexd iw{0.0, m.gamma * omega};
                return m.eps_inf * (omega * omega - m.omega_l * m.omega_l + iw) /
                       (omega * omega - m.omega_r * m.omega_r + iw);
            } else if constexpr (std::is_same_v<T, Drude>) {
                return 1.0 - m.omega_pl * m.omega_pl / (omega * omega + complexd{0.0, m.gamma * omega});
            } else {
                const auto& s = m.samples;
                if (s.size() < 2) throw TabulatedOutOfRange("fewer than two samples");
                if (omega < s.front().first || omega > s.back().first)
                    throw TabulatedOutOfRange("omega outside tabulated range");
                auto it = std::lower_bound(s.begin(), s.end(), omega,
                                           [](const auto& a, double w) { return a.first < w; });
                if (it == s.begin()) return it->second;
                auto lo = std::prev(it);
                const double t = (omega - lo->first) / (it->first - lo->first);
                return lo->second + t * (it->second - lo->second);
            }
        },
        model);
}

namespace detail {

inline double max_model_frequency(const PermittivityModel& model) {
    if (const auto* dl = std::get_if<DrudeLorentz>(&model))
        return std::max(dl->omega_l, dl->omega_r);
    if (const auto* d = std::get_if<Drude>(&model)) return d->omega_pl;
    throw Error("surface_resonance: model must be DrudeLorentz or Drude");
}

} // namespace detail

// Root of Re eps(omega) = -1 (surface phonon-polariton / plasmon condition).
// A lossy Drude-Lorentz crosses -1 twice around the transverse resonance; the
// physical surface mode is the upper crossing, so the bracket scan runs from
// high frequency downward.
inline double surface_resonance(const PermittivityModel& model) {
    const double whi = 10.0 * detail::max_model_frequency(model);
    const double wlo = 1e-4 * whi;
    auto f = [&](double w) { return permittivity(model, w).real() + 1.0; };

    const int nscan = 8000;
    const double ratio = std::pow(wlo / whi, 1.0 / nscan);
    double a = whi, fa = f(a), b = 0.0;
    bool found = false;
    for (int i = 0; i < nscan; ++i) {
        b = a * ratio;
        const double fb = f(b);
        if (fa == 0.0) return a;
        if (fa * fb < 0.0) { found = true; break; }
        a = b;
        fa = fb;
    }
    if (!found) throw NoSurfaceResonance{};

    double lo = std::min(a, b), hi = std::max(a, b);
    double flo = f(lo);
    for (int i = 0; i < 200 && (hi - lo) > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) hi = mid;
        else { lo = mid; flo = fm; }
    }
    return 0.5 * (lo + hi);
}

// Two- or three-column text: omega_rad_per_s eps_real [eps_imag], '#' comments.
// Commas or whitespace separate columns. Malformed rows are hard errors.
inline Tabulated load_tabulated(std::istream& in) {
    Tabulated tab;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        double w, re;
        if (!(ls >> w)) {
            std::string rest;
            if (ls.clear(), std::getline(ls, rest) && rest.find_first_not_of(" \t\r") != std::string::npos)
                throw TabulatedOutOfRange("parse error at line " + std::to_string(lineno));
            continue;  // blank / comment-only line
        }
        if (!(ls >> re))
            throw TabulatedOutOfRange("parse error at line " + std::to_string(lineno) +
                                      ": missing eps_real");
        double im = 0.0;
        if (!(ls >> im)) { ls.clear(); im = 0.0; }
        std::string trailing;
        if (ls >> trailing)
            throw TabulatedOutOfRange("parse error at line " + std::to_string(lineno) +
                                      ": trailing data '" + trailing + "'");
        if (!(w > 0.0))
            throw TabulatedOutOfRange("parse error at line " + std::to_string(lineno) +
                                      ": omega must be > 0");
        if (!tab.samples.empty() && w <= tab.samples.back().first)
            throw TabulatedOutOfRange("samples must be strictly increasing in omega (line " +
                                      std::to_string(lineno) + ")");
        tab.samples.emplace_back(w, complexd{re, im});
    }
    if (tab.samples.size() < 2)
        throw TabulatedOutOfRange("need at least two samples");
    return tab;
}

inline Tabulated load_tabulated(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TabulatedOutOfRange("cannot open '" + path + "'");
    return load_tabulated(in);
}

} // namespace noneq::matprops
