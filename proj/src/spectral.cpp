#include "chain/spectral.hpp"

#include <cmath>
#include <limits>

#include "chain/accumulate.hpp"
#include "chain/errors.hpp"

namespace chain {

Spectrum spectrum(const ChainParams& p) {
    const int n = p.n;
    Spectrum s;
    s.lambda.resize(n);
    s.nu.resize(n);
    s.gamma_k.resize(n);
    s.gamma_k[0] = std::numeric_limits<double>::infinity();
    s.lambda[0] = -1.0;
    s.nu[0] = 2.0;
    for (int k = 1; k < n; ++k) {
        const double sk = std::sin(k * M_PI / n);
        s.gamma_k[k] = 1.0 / (2.0 * sk * sk);
        s.lambda[k] = -1.0 + 2.0 * p.gamma * sk * sk;
        s.nu[k] = s.lambda[k] + 3.0;
    }
    return s;
}

VmuResult v_mu(double mu, double rel_tol) {
    if (!(mu > 1.0)) throw ConfigError("v_mu requires mu > 1");
    if (!(rel_tol > 0.0)) throw ConfigError("v_mu requires rel_tol > 0");
    const double k_needed = std::ceil(3.0 / (mu * rel_tol));
    const long long K = static_cast<long long>(std::max(1e4, k_needed));
    NeumaierSum log_sum;
    for (long long k = 1; k <= K; ++k) {
        const double kk = static_cast<double>(k) * static_cast<double>(k);
        log_sum.add(std::log1p(-3.0 / (mu * kk + 2.0)));
    }
    VmuResult r;
    r.value = std::exp(log_sum.value());
    r.tail_bound = 3.0 / (mu * static_cast<double>(K));
    return r;
}

PrefactorReport prefactor(const ChainParams& p, double v_rel_tol) {
    const Spectrum s = spectrum(p);
    const int n = p.n;

    NeumaierSum logdet_O, logdet_I;
    for (int k = 0; k < n; ++k) {
        logdet_O.add(std::log(std::abs(s.lambda[k])));
        logdet_I.add(std::log(s.nu[k]));
    }

    // Product form: paired modes k and N-k share one factor, the factor for
    // the even-N middle mode enters with exponent 1/2.
    NeumaierSum log_prod;
    if (n % 2 == 0) {
        log_prod.add(0.5 * std::log1p(-3.0 / (2.0 + 2.0 * p.gamma)));
    }
    for (int k = 1; k <= (n - 1) / 2; ++k) {
        log_prod.add(std::log1p(-3.0 / (2.0 + p.gamma / s.gamma_k[k])));
    }

    PrefactorReport r;
    r.half_logdet_O = 0.5 * logdet_O.value();
    r.half_logdet_Imin = 0.5 * logdet_I.value();
    r.det_ratio = std::exp(r.half_logdet_O - r.half_logdet_Imin);
    r.c_n_product = std::exp(log_prod.value());
    if (v_rel_tol > 0.0 && p.mu > 1.0) {
        const VmuResult v = v_mu(p.mu, v_rel_tol);
        r.v_mu = v.value;
        r.v_mu_tail_bound = v.tail_bound;
    }
    return r;
}

namespace {

MeanTimePrediction from_log(double log_time) {
    MeanTimePrediction m;
    m.log_time = log_time;
    if (log_time < std::log(std::numeric_limits<double>::max())) {
        m.time = std::exp(log_time);
    } else {
        m.overflow = true;
        m.time = std::numeric_limits<double>::infinity();
    }
    return m;
}

}  // namespace

MeanTimePrediction predict_mean_time_fixed_N(const ChainParams& p) {
    const PrefactorReport r = prefactor(p, 0.0);
    return from_log(std::log(2.0 * M_PI) + (r.half_logdet_O - r.half_logdet_Imin) +
                    p.n / (4.0 * p.epsilon));
}

RescaledPrediction predict_mean_time_rescaled(const ChainParams& p) {
    const PrefactorReport r = prefactor(p, 0.0);
    RescaledPrediction out;
    out.det_form = from_log(std::log(static_cast<double>(p.n)) + std::log(2.0 * M_PI) +
                            (r.half_logdet_O - r.half_logdet_Imin) + 1.0 / (4.0 * p.epsilon));
    out.literal_cn = from_log(std::log(2.0 * M_PI * p.n * r.c_n_product) + 1.0 / (4.0 * p.epsilon));
    return out;
}

double mass_asymptotic(const ChainParams& p) {
    const PrefactorReport r = prefactor(p, 0.0);
    const double n = p.n;
    return 0.5 * n * std::log(n) + 0.5 * n * std::log(2.0 * M_PI * p.epsilon) +
           1.0 / (4.0 * p.epsilon) - r.half_logdet_Imin;
}

}  // namespace chain
