#pragma once

#include <Eigen/Core>

#include "chain/params.hpp"

namespace chain {

// Hessian spectra at the origin saddle (lambda) and the uniform minima (nu).
// gamma_k[k] is the mode threshold 1/(2 sin^2(k pi / n)); gamma_k[0] = +inf,
// so lambda_k = -1 + gamma/gamma_k holds for every k including k = 0.
struct Spectrum {
    Eigen::VectorXd lambda;
    Eigen::VectorXd nu;
    Eigen::VectorXd gamma_k;
};

Spectrum spectrum(const ChainParams& p);

struct PrefactorReport {
    double c_n_product = 0.0;
    double half_logdet_O = 0.0;
    double half_logdet_Imin = 0.0;
    double det_ratio = 0.0;
    double v_mu = 0.0;
    double v_mu_tail_bound = 0.0;
};

// v_rel_tol controls the truncation of the infinite product for V(mu); it
// only affects the v_mu fields of the report. Pass v_rel_tol <= 0 to skip
// the V(mu) evaluation (fields stay 0), e.g. inside per-N sweeps.
PrefactorReport prefactor(const ChainParams& p, double v_rel_tol = 1e-6);

// Partial product for V(mu) = prod_{k>=1} (mu k^2 - 1)/(mu k^2 + 2) with a
// guaranteed tail bound: true value lies in [value*exp(-tail), value].
struct VmuResult {
    double value = 0.0;
    double tail_bound = 0.0;
};

VmuResult v_mu(double mu, double rel_tol);

struct MeanTimePrediction {
    double log_time = 0.0;
    double time = 0.0;      // valid only when !overflow
    bool overflow = false;
};

// Mean transition time prediction for the dynamics driven by F.
MeanTimePrediction predict_mean_time_fixed_N(const ChainParams& p);

// Predictions for the dynamics driven by G = F/N, in both algebraic forms.
// The two differ by a factor sqrt(2); simulation arbitrates between them.
struct RescaledPrediction {
    MeanTimePrediction det_form;
    MeanTimePrediction literal_cn;
};

RescaledPrediction predict_mean_time_rescaled(const ChainParams& p);

// log of N^{N/2} (2 pi eps)^{N/2} e^{1/(4 eps)} / sqrt(det Hessian(I_-)).
double mass_asymptotic(const ChainParams& p);

}  // namespace chain
