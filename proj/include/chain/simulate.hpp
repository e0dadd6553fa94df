#pragma once

#include <cstdint>
#include <vector>

#include "chain/params.hpp"

namespace chain {

// Batch configuration for Euler-Maruyama first-hitting runs.
// max_time <= 0 requests the default cap of 50x the determinant-form
// predicted mean. workers <= 0 uses all hardware threads; results are
// bit-identical for any worker count.
struct SimConfig {
    double dt = 1e-3;
    double rho = 0.2;
    long n_traj = 1000;
    std::uint64_t seed = 0;
    double max_time = 0.0;
    int workers = 0;
    // Sample the start uniformly in B_- instead of starting at I_- exactly.
    // The start point comes from a stream independent of the step noise, so
    // runs with either setting share driving noise per trajectory index.
    bool start_uniform_in_ball = false;
};

struct HittingBatch {
    std::vector<double> times;  // uncensored first-hitting times, trajectory order
    double mean = 0.0;
    double variance = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    double cv = 0.0;  // sqrt(variance)/mean, spread diagnostic
    long censored_count = 0;
    ChainParams params;  // echo
    SimConfig config;    // echo, with max_time resolved
};

// Euler-Maruyama first-hitting times of B_+ = B_{rho sqrt(n)}(I_+) for
// dX = -grad G dt + sqrt(2 eps) dB started at I_-. Censored trajectories are
// excluded from the statistics but counted. Per-trajectory randomness is
// keyed (seed, trajectory index).
HittingBatch simulate_hitting(const ChainParams& p, const SimConfig& c);

// Exact mean hitting time of b for the 1d double well G = x^4/4 - x^2/2
// started at a: (1/eps) int_a^b e^{G(y)/eps} int_{-inf}^y e^{-G(u)/eps} du dy.
double mean_hitting_1d(double epsilon, double a, double b);

// Self-convergence check: integrates the same driving noise at dt and dt/2
// (the dt path sums consecutive normal pairs from the shared fine lattice),
// so the mean shift is estimated from paired differences. Passes when
// |shift| < 2 paired SE + 3%.
struct DtRefinementReport {
    HittingBatch coarse;
    HittingBatch fine;
    double relative_shift = 0.0;     // (mean_coarse - mean_fine)/mean_fine over pairs
    double paired_rel_stderr = 0.0;  // standard error of relative_shift
    long pairs = 0;                  // trajectories uncensored at both resolutions
    bool passed = false;
};

DtRefinementReport dt_refinement_check(const ChainParams& p, const SimConfig& c);

}  // namespace chain
