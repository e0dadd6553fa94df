#pragma once

#include <Eigen/Core>

#include "chain/params.hpp"

namespace chain {

struct StationaryPoints {
    StateVector I_minus;
    StateVector I_plus;
    StateVector O;
};

// F(x) = sum_i (x_i^4/4 - x_i^2/2) + (gamma/4) sum_i (x_i - x_{i+1})^2, cyclic.
double eval_F(const ChainParams& p, const StateVector& x);

// G = F/N, the per-site energy the dynamics uses.
double eval_G(const ChainParams& p, const StateVector& x);

StateVector grad_F(const ChainParams& p, const StateVector& x);
StateVector grad_G(const ChainParams& p, const StateVector& x);

Eigen::MatrixXd hessian_F(const ChainParams& p, const StateVector& x);

// Newton iteration on grad_F from x0; used to certify stationary points.
StateVector newton_refine(const ChainParams& p, const StateVector& x0, int max_iter = 50);

// The three stationary points in the synchronization regime.
StationaryPoints stationary_points(const ChainParams& p);

}  // namespace chain
