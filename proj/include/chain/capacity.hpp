#pragma once

#include <cstdint>
#include <string>

#include "chain/fourier.hpp"
#include "chain/params.hpp"

namespace chain {

// log of N^{N/2-1} eps (2 pi eps)^{(N-2)/2} / sqrt|det Hessian(O)|.
double capacity_asymptotic(const ChainParams& p);

// Committor profile along the mean mode: f = 1 left of the strip, 0 right of
// it, error-function ramp inside [-delta, delta].
double f_profile(double z0, double delta, double epsilon);

struct CapacityBudget {
    long long mc_samples = 20000;   // Monte Carlo samples (transverse dim > 3)
    int gh_nodes = 40;              // transverse Gauss-Hermite order per dim
    int gl_nodes = 32;              // transverse Gauss-Legendre order per dim
    int theta_nodes = 32;           // angular nodes per conjugate-pair disk
    double z0_rel_tol = 1e-7;       // adaptive quadrature tolerance along w_0
    std::uint64_t seed = 20240601;
};

struct CapacityEstimate {
    double log_value = 0.0;
    double stderr_log = 0.0;   // statistical error (MC) or node-doubling shift
    long long samples = 0;     // MC samples, 0 for pure quadrature
    std::string method;
};

// Dirichlet energy of the mean-mode profile h(x) = f_profile(z_0(x)); an
// upper bound for the capacity in expectation. Transverse integral by tensor
// Gauss-Hermite for at most 3 transverse dimensions, otherwise by plain
// Gaussian importance sampling over the whole space (never truncated, which
// would break the upper-bound property).
CapacityEstimate capacity_upper(const ChainParams& p, const NeighborhoodSpec& spec,
                                const CapacityBudget& budget = {});

// Flow bound through the corridor: restricts the form to the box, drops all
// but the w_0 gradient component and uses the explicit 1D minimizer per
// transverse fiber; a lower bound in expectation. Outer integral by tensor
// quadrature (disks in polar form) for at most 3 transverse dimensions,
// otherwise by truncated-Gaussian importance sampling over the box.
CapacityEstimate capacity_lower(const ChainParams& p, const NeighborhoodSpec& spec,
                                const CapacityBudget& budget = {});

struct CapacityBracket {
    double log_lower = 0.0;
    double log_upper = 0.0;
    double log_asymptotic = 0.0;
    CapacityEstimate lower;
    CapacityEstimate upper;
    ChainParams params;
    NeighborhoodSpec spec;
};

CapacityBracket capacity_bracket(const ChainParams& p, const NeighborhoodSpec& spec,
                                 const CapacityBudget& budget = {});

// Finite-difference committor oracle on a uniform grid, N in {1, 2} only:
// solves div(e^{-G/eps} grad h) = 0 with h = 1 on the left ball, 0 on the
// right ball, reflecting outer box, and returns log(eps * energy).
struct GridSpec {
    double h = 0.01;
    double L = 2.0;    // half-width of the box; must cover both balls (L >= 2)
    double rho = 0.2;  // ball radius in z-coordinates, matching the simulator
};

double capacity_oracle_smallN(const ChainParams& p, const GridSpec& grid = {});

}  // namespace chain
