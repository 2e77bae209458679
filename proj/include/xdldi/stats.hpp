#pragma once

// Per-component and liability summary statistics consumed by the
// allocation formulas.

#include "signed_log.hpp"
#include "series.hpp"

#include <cmath>
#include <string>

namespace xdldi {

// Risk-penalty coefficient lambda of the 2k-moment objective.
struct RiskAppetite {
    double lambda = 0.01;

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw InvalidInputError("RiskAppetite: lambda must be positive and finite");
    }
};

// Liability-side summary in per-period return units.
struct LiabilityStats {
    double sigma_L = 0.0;  // stdev of liability returns
    double r_L = 0.0;      // funding (drift) rate of the liability
};

// Everything the closed-form weights need to know about one component
// against one liability, at one fixed moment order k.
struct ComponentStats {
    int k = 1;              // moment order: penalty uses E[.]^{2k}
    double mu = 0.0;        // mean per-period return of the component
    double r = 0.0;         // funding rate attributed to the component
    double sigma = 0.0;     // stdev of component returns
    double rho = 0.0;       // correlation with liability returns
    double sigma_L = 0.0;   // liability return stdev (copied for hedge terms)
    SignedLogValue own_moment_2k;        // E[(dC - mu)^{2k}]
    SignedLogValue cross_moment_2k1;     // E[(dC - mu)(dL - r_L)^{2k-1}]
    SignedLogValue residual_moment_2k2;  // E[hedge-residual^{2k-2}]

    void validate() const {
        if (k < 1) throw InvalidInputError("ComponentStats: k must be >= 1");
        if (!(sigma >= 0.0) || !std::isfinite(sigma))
            throw InvalidInputError("ComponentStats: sigma must be finite and >= 0");
        if (!(sigma_L >= 0.0) || !std::isfinite(sigma_L))
            throw InvalidInputError("ComponentStats: sigma_L must be finite and >= 0");
        if (std::abs(rho) > 1.0 + 1e-12)
            throw InvalidInputError("ComponentStats: |rho| must be <= 1");
    }
};

}  // namespace xdldi
