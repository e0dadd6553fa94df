#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "chain/accumulate.hpp"
#include "chain/potential.hpp"
#include "chain/spectral.hpp"

using chain::ChainParams;
using chain::StateVector;

namespace {

// Reference value of the infinite product at mu = 2, 30-digit evaluation.
constexpr double kV2 = 0.0974374849353253;

std::vector<double> sorted_dense_eigs(const Eigen::MatrixXd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + H.rows());
    return v;
}

}  // namespace

TEST_CASE("closed-form spectrum matches the dense eigensolver") {
    for (int n : {2, 3, 4, 7, 16, 33}) {
        for (double mu : {1.5, 2.0, 5.0}) {
            const auto p = ChainParams::from_mu(n, mu, 0.1);
            const auto s = chain::spectrum(p);
            std::vector<double> lam(s.lambda.data(), s.lambda.data() + n);
            std::vector<double> nu(s.nu.data(), s.nu.data() + n);
            std::sort(lam.begin(), lam.end());
            std::sort(nu.begin(), nu.end());
            const auto st = chain::stationary_points(p);
            const auto lam_ref = sorted_dense_eigs(chain::hessian_F(p, st.O));
            const auto nu_ref = sorted_dense_eigs(chain::hessian_F(p, st.I_minus));
            for (int k = 0; k < n; ++k) {
                CHECK(std::abs(lam[k] - lam_ref[k]) < 1e-9);
                CHECK(std::abs(nu[k] - nu_ref[k]) < 1e-9);
            }
        }
    }
}

TEST_CASE("spectrum hand examples") {
    {
        const auto p = ChainParams::from_mu(4, 2.0, 0.1);
        const auto s = chain::spectrum(p);
        CHECK(s.lambda[0] == doctest::Approx(-1.0).epsilon(1e-14));
        CHECK(s.lambda[1] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(s.lambda[2] == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(s.lambda[3] == doctest::Approx(1.0).epsilon(1e-14));
    }
    {
        const auto p = ChainParams::from_mu(2, 2.0, 0.1);
        const auto s = chain::spectrum(p);
        CHECK(p.gamma == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(s.lambda[0] == doctest::Approx(-1.0));
        CHECK(s.lambda[1] == doctest::Approx(1.0));
        CHECK(s.nu[0] == doctest::Approx(2.0));
        CHECK(s.nu[1] == doctest::Approx(4.0));
    }
}

TEST_CASE("spectrum symmetry and regime positivity") {
    for (int n : {5, 8, 64}) {
        const auto p = ChainParams::from_mu(n, 1.5, 0.1);
        const auto s = chain::spectrum(p);
        for (int k = 1; k < n; ++k) {
            CHECK(s.lambda[k] == doctest::Approx(s.lambda[n - k]).epsilon(1e-14));
            CHECK(s.lambda[k] > 0.0);
            CHECK(s.nu[k] == doctest::Approx(s.lambda[k] + 3.0).epsilon(1e-15));
        }
        CHECK(s.nu[0] == doctest::Approx(2.0));
    }
}

TEST_CASE("mode thresholds") {
    CHECK(chain::gamma_threshold(2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(chain::gamma_threshold(4) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(chain::gamma_threshold(6) == doctest::Approx(2.0).epsilon(1e-15));
    const auto p = ChainParams::from_mu(6, 2.0, 0.1);
    const auto s = chain::spectrum(p);
    CHECK(s.gamma_k[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::isinf(s.gamma_k[0]));
}

TEST_CASE("eigenvalue sandwich in the rescaled parametrization") {
    for (int n : {4, 16, 128, 1024}) {
        for (double mu : {1.5, 2.0, 5.0}) {
            const auto p = ChainParams::from_mu(n, mu, 0.1);
            const auto s = chain::spectrum(p);
            for (int k = 1; k <= n / 2; ++k) {
                const double kk = static_cast<double>(k) * k;
                const double lo = mu * (1.0 - M_PI * M_PI / 12.0) * kk - 1.0;
                const double hi = mu * kk / (1.0 - M_PI * M_PI / (3.0 * n * n)) - 1.0;
                CHECK(s.lambda[k] >= lo - 1e-12);
                CHECK(s.lambda[k] <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("prefactor hand examples") {
    {
        const auto r = chain::prefactor(ChainParams::from_mu(2, 2.0, 0.1), 0.0);
        CHECK(r.c_n_product == doctest::Approx(0.5).epsilon(1e-14));
    }
    {
        const auto r = chain::prefactor(ChainParams::from_mu(3, 2.0, 0.1), 0.0);
        CHECK(r.c_n_product == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(r.det_ratio == doctest::Approx(std::sqrt(1.0 / 32.0)).epsilon(1e-12));
        CHECK(r.c_n_product / r.det_ratio == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("product and determinant forms differ by exactly sqrt(2)") {
    for (int n = 2; n <= 512; n = (n < 8) ? n + 1 : n * 2) {
        for (double mu : {1.5, 2.0, 5.0}) {
            const auto r = chain::prefactor(ChainParams::from_mu(n, mu, 0.1), 0.0);
            CHECK(r.c_n_product > 0.0);
            CHECK(r.c_n_product < 1.0);
            CHECK(r.c_n_product ==
                  doctest::Approx(std::sqrt(2.0) * r.det_ratio).epsilon(1e-10));
        }
    }
}

TEST_CASE("log determinants match the dense eigensolver") {
    for (int n : {3, 8, 31}) {
        const auto p = ChainParams::from_mu(n, 2.0, 0.1);
        const auto st = chain::stationary_points(p);
        const auto r = chain::prefactor(p, 0.0);
        const auto lam = sorted_dense_eigs(chain::hessian_F(p, st.O));
        const auto nu = sorted_dense_eigs(chain::hessian_F(p, st.I_minus));
        double lo = 0.0, li = 0.0;
        for (int k = 0; k < n; ++k) {
            lo += std::log(std::abs(lam[k]));
            li += std::log(nu[k]);
        }
        CHECK(r.half_logdet_O == doctest::Approx(0.5 * lo).epsilon(1e-11));
        CHECK(r.half_logdet_Imin == doctest::Approx(0.5 * li).epsilon(1e-11));
    }
}

TEST_CASE("log-determinant accumulation is permutation independent") {
    const int n = 257;
    const auto p = ChainParams::from_mu(n, 2.0, 0.1);
    const auto s = chain::spectrum(p);
    const auto r = chain::prefactor(p, 0.0);
    std::vector<int> idx(n);
    for (int k = 0; k < n; ++k) idx[k] = k;
    std::mt19937_64 gen(42);
    for (int rep = 0; rep < 5; ++rep) {
        std::shuffle(idx.begin(), idx.end(), gen);
        chain::NeumaierSum acc;
        for (int k : idx) acc.add(std::log(std::abs(s.lambda[k])));
        CHECK(std::abs(0.5 * acc.value() - r.half_logdet_O) < 1e-12);
    }
}

TEST_CASE("infinite product value at mu 2") {
    const auto v = chain::v_mu(2.0, 1e-7);
    CHECK(v.tail_bound <= 1e-7 * 1.5);
    CHECK(std::abs(v.value - kV2) < v.value * v.tail_bound + 1e-12);
    // The partial product decreases to the limit from above.
    CHECK(v.value >= kV2 - 1e-12);
}

TEST_CASE("infinite product approaches 1 for huge mu") {
    const auto v = chain::v_mu(1e6, 1e-9);
    // 1 - V(mu) ~ (3/mu) sum 1/k^2 = pi^2/(2 mu) = 4.9348e-6 at mu = 1e6.
    CHECK(1.0 - v.value > 4.5e-6);
    CHECK(1.0 - v.value < 5.5e-6);
}

TEST_CASE("infinite product domain and truncation rules") {
    CHECK_THROWS_AS((void)chain::v_mu(1.0, 1e-6), chain::ConfigError);
    CHECK_THROWS_AS((void)chain::v_mu(0.5, 1e-6), chain::ConfigError);
    CHECK_THROWS_AS((void)chain::v_mu(2.0, 0.0), chain::ConfigError);
    // Coarse tolerance still uses at least 1e4 factors.
    const auto v = chain::v_mu(2.0, 1e-1);
    CHECK(v.tail_bound <= 3.0 / (2.0 * 1e4) + 1e-18);
}

TEST_CASE("prefactor report carries the product limit") {
    const auto r = chain::prefactor(ChainParams::from_mu(8, 2.0, 0.1), 1e-6);
    CHECK(r.v_mu > 0.0);
    CHECK(std::abs(r.v_mu - kV2) < 1e-6 * r.v_mu + 1e-12);
    CHECK(r.v_mu_tail_bound <= 1e-6 * 1.5);
}

TEST_CASE("distance to the limit shrinks like 1/N^2") {
    const double v2 = chain::v_mu(2.0, 1e-8).value;
    double prev = 1e9;
    double prev_scaled = 1e18;
    for (int n = 8; n <= 1024; n *= 2) {
        const auto r = chain::prefactor(ChainParams::from_mu(n, 2.0, 0.1), 0.0);
        const double d = std::abs(r.c_n_product - v2);
        CHECK(d < prev);
        const double scaled = n * d;
        CHECK(scaled < prev_scaled + 1e-15);
        prev = d;
        prev_scaled = scaled;
    }
}

TEST_CASE("mean time prediction for the unrescaled dynamics") {
    const auto p = ChainParams::from_mu(3, 2.0, 0.05);
    const auto m = chain::predict_mean_time_fixed_N(p);
    const double want = std::log(2.0 * M_PI * std::sqrt(1.0 / 32.0)) + 3.0 / (4.0 * 0.05);
    CHECK(m.log_time == doctest::Approx(want).epsilon(1e-12));
    CHECK(!m.overflow);
    CHECK(m.time == doctest::Approx(std::exp(want)).epsilon(1e-12));
}

TEST_CASE("overflow is flagged and the log value survives") {
    const auto p = ChainParams::from_mu(16, 2.0, 1e-4);
    const auto m = chain::predict_mean_time_fixed_N(p);
    CHECK(m.overflow);
    CHECK(std::isfinite(m.log_time));
    CHECK(m.log_time > 700.0);
}

TEST_CASE("rescaled predictions in both forms") {
    const auto p = ChainParams::from_mu(3, 2.0, 0.05);
    const auto r = chain::predict_mean_time_rescaled(p);
    CHECK(r.det_form.time == doctest::Approx(494.5367).epsilon(2e-4));
    CHECK(r.literal_cn.time == doctest::Approx(699.3805).epsilon(2e-4));
    CHECK(r.literal_cn.time / r.det_form.time ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("epsilon dominance of the log prediction") {
    const int n = 5;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
        const auto p = ChainParams::from_mu(n, 2.0, eps);
        const auto m = chain::predict_mean_time_fixed_N(p);
        CHECK(m.log_time * eps == doctest::Approx(n / 4.0).epsilon(1e-1 * eps / 1e-3 + 1e-2));
    }
}

TEST_CASE("mass asymptotic hand example") {
    const auto p = ChainParams::from_mu(2, 2.0, 0.1);
    const double want =
        std::log(2.0) + std::log(2.0 * M_PI * 0.1) + 2.5 - 0.5 * std::log(8.0);
    CHECK(chain::mass_asymptotic(p) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("single-site degenerate prefactor") {
    const auto p = ChainParams::from_mu(1, 2.0, 0.08);
    const auto r = chain::prefactor(p, 0.0);
    CHECK(r.c_n_product == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.det_ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    const auto m = chain::predict_mean_time_fixed_N(p);
    CHECK(std::exp(m.log_time - 1.0 / (4.0 * 0.08)) ==
          doctest::Approx(2.0 * M_PI * std::sqrt(0.5)).epsilon(1e-12));
}
