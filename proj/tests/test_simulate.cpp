#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>

#include "chain/errors.hpp"
#include "chain/simulate.hpp"
#include "chain/spectral.hpp"

using chain::ChainParams;
using chain::SimConfig;

namespace {

// Kramers asymptotic mean time for the 1d double well at noise eps.
double kramers_1d(double eps) {
    return 2.0 * M_PI / std::sqrt(2.0) * std::exp(1.0 / (4.0 * eps));
}

double two_se(const chain::HittingBatch& b) {
    return 2.0 * std::sqrt(b.variance / static_cast<double>(b.times.size()));
}

bool identical(const chain::HittingBatch& a, const chain::HittingBatch& b) {
    if (a.times.size() != b.times.size()) return false;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        if (std::memcmp(&a.times[i], &b.times[i], sizeof(double)) != 0) return false;
    }
    return std::memcmp(&a.mean, &b.mean, sizeof(double)) == 0 &&
           std::memcmp(&a.variance, &b.variance, sizeof(double)) == 0 &&
           a.censored_count == b.censored_count;
}

}  // namespace

TEST_CASE("1d mean hitting time quadrature values") {
    // Reference values from an independent high-precision evaluation of the
    // same double integral.
    const double t008 = chain::mean_hitting_1d(0.08, -1.0, 0.8);
    CHECK(t008 == doctest::Approx(117.755891).epsilon(1e-6));
    const double t005 = chain::mean_hitting_1d(0.05, -1.0, 0.8);
    CHECK(t005 == doctest::Approx(726.816215).epsilon(1e-6));

    // Moderate noise sits near the asymptotic prediction.
    CHECK(t008 / kramers_1d(0.08) == doctest::Approx(1.16452).epsilon(1e-4));
    CHECK(t008 / kramers_1d(0.08) > 0.8);
    CHECK(t008 / kramers_1d(0.08) < 1.2);

    // Large noise is diffusive; the barrier formula overshoots badly.
    const double t10 = chain::mean_hitting_1d(10.0, -1.0, 0.8);
    CHECK(t10 > 0.0);
    CHECK(t10 / kramers_1d(10.0) < 0.5);

    // A farther target takes longer.
    CHECK(chain::mean_hitting_1d(0.08, -1.0, 0.9) > t008);
}

TEST_CASE("1d prefactor limit by Richardson extrapolation") {
    // T(eps) e^{-1/4eps} = 2 pi / sqrt(2) + O(eps); extrapolate the O(eps)
    // term away from eps = 0.02, 0.01.
    const auto pref = [](double eps) {
        return chain::mean_hitting_1d(eps, -1.0, 0.8) * std::exp(-1.0 / (4.0 * eps));
    };
    const double extrap = 2.0 * pref(0.01) - pref(0.02);
    CHECK(extrap == doctest::Approx(2.0 * M_PI / std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("1d quadrature rejects bad arguments") {
    CHECK_THROWS_AS(chain::mean_hitting_1d(0.0, -1.0, 0.8), chain::ConfigError);
    CHECK_THROWS_AS(chain::mean_hitting_1d(-0.1, -1.0, 0.8), chain::ConfigError);
    CHECK_THROWS_AS(chain::mean_hitting_1d(0.1, 0.8, -1.0), chain::ConfigError);
}

TEST_CASE("empirical mean matches the 1d oracle") {
    const auto p = ChainParams::from_mu(1, 2.0, 0.08);
    SimConfig c;
    c.dt = 1e-3;
    c.rho = 0.2;
    c.n_traj = 4000;
    c.seed = 20240601;
    const auto batch = chain::simulate_hitting(p, c);

    CHECK(batch.censored_count == 0);
    CHECK(batch.times.size() == 4000);
    for (double t : batch.times) CHECK(t > 0.0);
    CHECK(batch.ci95_low <= batch.mean);
    CHECK(batch.mean <= batch.ci95_high);
    CHECK(batch.cv == std::sqrt(batch.variance) / batch.mean);
    CHECK(batch.cv > 0.3);
    CHECK(batch.cv < 2.0);

    const double oracle = chain::mean_hitting_1d(0.08, -1.0, 0.8);
    const double tol = std::max(0.05 * oracle, two_se(batch));
    CHECK(std::abs(batch.mean - oracle) <= tol);
}

TEST_CASE("batches are bit-identical across reruns and worker counts") {
    const auto p = ChainParams::from_mu(2, 2.0, 0.3);
    SimConfig c;
    c.dt = 1e-3;
    c.rho = 0.2;
    c.n_traj = 300;
    c.seed = 99;

    c.workers = 1;
    const auto one = chain::simulate_hitting(p, c);
    const auto one_again = chain::simulate_hitting(p, c);
    c.workers = 8;
    const auto eight = chain::simulate_hitting(p, c);

    CHECK(identical(one, one_again));
    CHECK(identical(one, eight));
    CHECK(one.times.size() + static_cast<std::size_t>(one.censored_count) == 300);
}

TEST_CASE("state blowup is reported with the trajectory index") {
    // dt passes the stability heuristic but the noise at eps = 400 kicks the
    // state out of the integrator's basin within a few steps.
    const auto p = ChainParams::from_mu(1, 2.0, 400.0);
    SimConfig c;
    c.dt = 0.2;
    c.rho = 0.2;
    c.n_traj = 8;
    c.seed = 5;
    try {
        chain::simulate_hitting(p, c);
        FAIL("expected a blowup");
    } catch (const chain::NumericalBlowupError& e) {
        CHECK(e.code == chain::ExitCode::blowup);
        CHECK(std::string(e.what()).find("trajectory 0") != std::string::npos);
    }
}

TEST_CASE("config validation") {
    const auto p = ChainParams::from_mu(4, 5.0, 0.1);
    SimConfig c;
    c.dt = 0.2;  // dt*max(nu)/n = 0.2*12/4 = 0.6
    CHECK_THROWS_AS(chain::simulate_hitting(p, c), chain::ConfigError);

    SimConfig bad;
    bad.dt = 0.0;
    CHECK_THROWS_AS(chain::simulate_hitting(p, bad), chain::ConfigError);
    bad = SimConfig{};
    bad.rho = 1.2;
    CHECK_THROWS_AS(chain::simulate_hitting(p, bad), chain::ConfigError);
    bad = SimConfig{};
    bad.n_traj = 0;
    CHECK_THROWS_AS(chain::simulate_hitting(p, bad), chain::ConfigError);
}

TEST_CASE("censoring is counted and never silently dropped") {
    const auto p = ChainParams::from_mu(1, 2.0, 0.08);
    SimConfig c;
    c.dt = 1e-3;
    c.rho = 0.2;
    c.n_traj = 400;
    c.seed = 7;
    c.max_time = 150.0;  // mean is ~118, so a visible fraction gets cut
    const auto batch = chain::simulate_hitting(p, c);
    CHECK(batch.censored_count > 0);
    CHECK(batch.censored_count < 400);
    CHECK(batch.times.size() + static_cast<std::size_t>(batch.censored_count) == 400);
    for (double t : batch.times) CHECK(t <= 150.0);
    CHECK(batch.mean < 150.0);

    c.max_time = 0.5;  // far below any crossing
    c.n_traj = 50;
    CHECK_THROWS_AS(chain::simulate_hitting(p, c), chain::InconclusiveError);
}

TEST_CASE("default time cap is 50x the determinant-form prediction") {
    const auto p = ChainParams::from_mu(1, 2.0, 0.08);
    SimConfig c;
    c.dt = 1e-3;
    c.rho = 0.2;
    c.n_traj = 20;
    c.seed = 3;
    c.max_time = 0.0;
    const auto batch = chain::simulate_hitting(p, c);
    const double want = 50.0 * chain::predict_mean_time_rescaled(p).det_form.time;
    CHECK(batch.config.max_time == want);
    CHECK(batch.censored_count == 0);
}

TEST_CASE("dt refinement shifts the 1d mean by well under 3 percent") {
    const auto p = ChainParams::from_mu(1, 2.0, 0.08);
    SimConfig c;
    c.dt = 1e-3;
    c.rho = 0.2;
    c.n_traj = 1500;
    c.seed = 11;
    const auto rep = chain::dt_refinement_check(p, c);
    CHECK(rep.pairs == 1500);
    CHECK(rep.coarse.censored_count == 0);
    CHECK(rep.fine.censored_count == 0);
    CHECK(rep.passed);
    CHECK(std::abs(rep.relative_shift) < 0.03);
    CHECK(rep.fine.config.dt == 0.5e-3);
    // Both resolutions sit near the exact value.
    const double oracle = chain::mean_hitting_1d(0.08, -1.0, 0.8);
    CHECK(std::abs(rep.fine.mean / oracle - 1.0) < 0.1);
    CHECK(std::abs(rep.coarse.mean / oracle - 1.0) < 0.1);
}

TEST_CASE("dt refinement on the three-site chain") {
    const auto p = ChainParams::from_mu(3, 2.0, 0.05);
    SimConfig c;
    c.dt = 1e-3;
    c.rho = 0.2;
    c.n_traj = 500;
    c.seed = 13;
    const auto rep = chain::dt_refinement_check(p, c);
    CHECK(rep.pairs == 500);
    CHECK(std::abs(rep.relative_shift) < 0.05);
    CHECK(rep.coarse.censored_count == rep.fine.censored_count);
}

TEST_CASE("start point inside the well ball barely moves the mean") {
    const auto p = ChainParams::from_mu(1, 2.0, 0.05);
    SimConfig c;
    c.dt = 1e-3;
    c.rho = 0.2;
    c.n_traj = 600;
    c.seed = 17;
    const auto sharp = chain::simulate_hitting(p, c);
    c.start_uniform_in_ball = true;
    const auto spread = chain::simulate_hitting(p, c);

    CHECK(spread.censored_count == 0);
    for (double t : spread.times) CHECK(t > 0.0);
    const double se2 = std::sqrt(sharp.variance / static_cast<double>(sharp.times.size()) +
                                 spread.variance / static_cast<double>(spread.times.size()));
    CHECK(std::abs(sharp.mean - spread.mean) < 2.0 * se2);
}
