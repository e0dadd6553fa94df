#include "chain/potential.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "chain/errors.hpp"

namespace chain {

double eval_F(const ChainParams& p, const StateVector& x) {
    require_dimension(p, x);
    const int n = p.n;
    double site = 0.0;
    double coup = 0.0;
    for (int i = 0; i < n; ++i) {
        const double xi = x[i];
        site += 0.25 * xi * xi * xi * xi - 0.5 * xi * xi;
        const double d = xi - x[(i + 1) % n];
        coup += d * d;
    }
    return site + 0.25 * p.gamma * coup;
}

double eval_G(const ChainParams& p, const StateVector& x) {
    return eval_F(p, x) / p.n;
}

StateVector grad_F(const ChainParams& p, const StateVector& x) {
    require_dimension(p, x);
    const int n = p.n;
    StateVector g(n);
    for (int i = 0; i < n; ++i) {
        const double xi = x[i];
        const double left = x[(i + n - 1) % n];
        const double right = x[(i + 1) % n];
        g[i] = xi * xi * xi - xi + 0.5 * p.gamma * (2.0 * xi - left - right);
    }
    return g;
}

StateVector grad_G(const ChainParams& p, const StateVector& x) {
    return grad_F(p, x) / p.n;
}

Eigen::MatrixXd hessian_F(const ChainParams& p, const StateVector& x) {
    require_dimension(p, x);
    const int n = p.n;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        H(i, i) += 3.0 * x[i] * x[i] - 1.0;
        // Edge i -> i+1 of the cyclic coupling; for n=2 both edges hit the
        // same pair and the off-diagonal accumulates to -gamma, for n=1 the
        // edge is a self-loop and cancels itself.
        const int j = (i + 1) % n;
        H(i, i) += 0.5 * p.gamma;
        H(j, j) += 0.5 * p.gamma;
        H(i, j) -= 0.5 * p.gamma;
        H(j, i) -= 0.5 * p.gamma;
    }
    return H;
}

StateVector newton_refine(const ChainParams& p, const StateVector& x0, int max_iter) {
    require_dimension(p, x0);
    StateVector x = x0;
    for (int it = 0; it < max_iter; ++it) {
        const StateVector g = grad_F(p, x);
        if (g.lpNorm<Eigen::Infinity>() < 1e-14) return x;
        const Eigen::MatrixXd H = hessian_F(p, x);
        const StateVector step = H.fullPivLu().solve(g);
        x -= step;
        if (step.lpNorm<Eigen::Infinity>() < 1e-15) return x;
    }
    return x;
}

StationaryPoints stationary_points(const ChainParams& p) {
    if (p.n >= 2 && !(p.gamma > gamma_threshold(p.n))) {
        throw RegimeError("stationary_points requires the synchronization regime");
    }
    StationaryPoints s;
    s.I_plus = StateVector::Ones(p.n);
    s.I_minus = -s.I_plus;
    s.O = StateVector::Zero(p.n);
    return s;
}

}  // namespace chain
