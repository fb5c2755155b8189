#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace noneq::constants {

// CODATA 2018, pinned to 12 significant digits so that regression values
// reproduce bit-for-bit across builds.
inline constexpr double c_light = 2.99792458e8;        // m/s (exact)
inline constexpr double hbar    = 1.05457181765e-34;   // J s
inline constexpr double k_B     = 1.380649e-23;        // J/K (exact)
inline constexpr double eps0    = 8.85418781280e-12;   // F/m

// FNV-1a over the formatted constants table; emitted in CSV metadata so
// outputs produced with different constant pins never diff silently.
inline std::string constants_hash() {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "c=%.12e;hbar=%.12e;kB=%.12e;eps0=%.12e",
                  c_light, hbar, k_B, eps0);
    std::uint64_t h = 1469598103934665603ull;
    for (const char* p = buf; *p; ++p) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*p));
        h *= 1099511628211ull;
    }
    char out[20];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

} // namespace noneq::constants
