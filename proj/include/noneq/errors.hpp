#pragma once

#include <stdexcept>
#include <string>

namespace noneq {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define NONEQ_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                               \
        Name() : Error(#Name) {}                                        \
        explicit Name(const std::string& msg) : Error(std::string(#Name) + ": " + msg) {} \
    }

// matprops
NONEQ_DEFINE_ERROR(MirrorHasNoFinitePermittivity);
NONEQ_DEFINE_ERROR(TabulatedOutOfRange);
NONEQ_DEFINE_ERROR(NoSurfaceResonance);

// slab_optics
NONEQ_DEFINE_ERROR(DegenerateDenominator);
NONEQ_DEFINE_ERROR(ResonantDenominator);

// quadrature
NONEQ_DEFINE_ERROR(QuadratureNoConvergence);
NONEQ_DEFINE_ERROR(DivergentAtContact);
NONEQ_DEFINE_ERROR(RegimeParameterMismatch);

// rates
NONEQ_DEFINE_ERROR(BothAlphasZero);

// atom_dynamics
NONEQ_DEFINE_ERROR(ZeroTotalRate);
NONEQ_DEFINE_ERROR(InvalidState);
NONEQ_DEFINE_ERROR(DisconnectedLevels);
NONEQ_DEFINE_ERROR(DegenerateScheme);
NONEQ_DEFINE_ERROR(BothChannelsDark);
NONEQ_DEFINE_ERROR(NonDiagonalInput);

// sweep
NONEQ_DEFINE_ERROR(ConfigError);

#undef NONEQ_DEFINE_ERROR

} // namespace noneq
