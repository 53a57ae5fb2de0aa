#pragma once

#include <string>

#include "zpc/errors.hpp"

namespace zpc {

/// Which optomechanical scattering process is driven.
enum class Interaction { antiStokes, stokes };

inline std::string to_string(Interaction kind) {
    return kind == Interaction::antiStokes ? "antiStokes" : "stokes";
}

/// Rates of the continuously driven, continuously monitored system.
/// All rates share one arbitrary time unit; kappa is always derived.
struct SystemParams {
    double coupling = 0.0;   // G
    double kappa_ex = 0.0;   // external cavity amplitude decay
    double kappa_in = 0.0;   // intrinsic cavity amplitude decay
    double gamma = 0.0;      // mechanical amplitude decay
    double bath_occupation = 0.0;  // Nbar

    double kappa() const { return kappa_ex + kappa_in; }

    /// G^2 / (kappa * gamma)
    double cooperativity() const { return coupling * coupling / (kappa() * gamma); }

    void validate() const {
        if (coupling < 0.0 || kappa_ex < 0.0 || kappa_in < 0.0 || gamma < 0.0)
            throw DomainError("SystemParams: rates must be non-negative");
        if (bath_occupation < 0.0)
            throw DomainError("SystemParams: bath occupation must be non-negative");
    }
};

inline void validate_efficiency(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw DomainError("detection efficiency must lie in [0, 1]");
}

} // namespace zpc
