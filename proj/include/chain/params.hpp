#pragma once

#include <Eigen/Core>

#include <cmath>

#include "chain/errors.hpp"

namespace chain {

using StateVector = Eigen::VectorXd;

// Coupling threshold 1/(2 sin^2(pi/n)): above it the only stationary points
// are the two uniform minima and the origin saddle.
inline double gamma_threshold(int n) {
    if (n < 2) throw ConfigError("gamma_threshold requires n >= 2");
    const double s = std::sin(M_PI / n);
    return 1.0 / (2.0 * s * s);
}

// Problem instance. n = 1 is the degenerate uncoupled case (gamma = 0, always
// in regime); it exists so the 1D oracle chain can run through the same API.
struct ChainParams {
    int n = 0;
    double mu = 0.0;       // gamma / gamma_threshold(n); 0 means "raw gamma" instance
    double gamma = 0.0;
    double epsilon = 0.0;
    bool canonical = true;  // false when constructed from a raw gamma

    static ChainParams from_mu(int n, double mu, double epsilon) {
        validate_common(n, epsilon);
        if (n == 1) {
            return ChainParams{1, mu, 0.0, epsilon, true};
        }
        if (!(mu > 1.0)) throw RegimeError("mu must exceed 1 (coupling below threshold)");
        return ChainParams{n, mu, mu * gamma_threshold(n), epsilon, true};
    }

    static ChainParams with_gamma(int n, double gamma, double epsilon) {
        validate_common(n, epsilon);
        if (n == 1) return ChainParams{1, 0.0, 0.0, epsilon, false};
        const double g1 = gamma_threshold(n);
        if (!(gamma > g1)) throw RegimeError("gamma below synchronization threshold");
        return ChainParams{n, gamma / g1, gamma, epsilon, false};
    }

  private:
    static void validate_common(int n, double epsilon) {
        if (n < 1) throw ConfigError("n must be >= 1");
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be > 0");
    }
};

inline void require_dimension(const ChainParams& p, const StateVector& x) {
    if (x.size() != p.n) throw DimensionError("state length does not match instance dimension");
}

}  // namespace chain
