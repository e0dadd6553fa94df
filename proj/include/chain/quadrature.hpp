#pragma once

#include <functional>
#include <vector>

namespace chain {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [-1,1], computed by Golub-Welsch. Cached per order.
const QuadRule& gauss_legendre(int order);

// Gauss-Hermite rule for weight exp(-t^2) on R, Golub-Welsch. Cached per order.
const QuadRule& gauss_hermite(int order);

// Adaptive Simpson. Throws SolverError when the recursion cannot reach the
// requested tolerance. Tolerances combine as |err| <= abs_tol + rel_tol*|I|.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol = 0.0, int max_depth = 60);

}  // namespace chain
