#include "chain/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "chain/errors.hpp"

namespace chain {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 * (first eigenvector component)^2.
QuadRule golub_welsch(int order, const std::function<double(int)>& offdiag, double mu0) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double b = offdiag(k);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadRule r;
    r.nodes.resize(order);
    r.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        r.nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        r.weights[i] = mu0 * v0 * v0;
    }
    return r;
}

const QuadRule& cached(std::map<int, QuadRule>& cache, std::mutex& m, int order,
                       const std::function<QuadRule(int)>& make) {
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make(order)).first;
    return it->second;
}

}  // namespace

const QuadRule& gauss_legendre(int order) {
    static std::map<int, QuadRule> cache;
    static std::mutex m;
    if (order < 1) throw ConfigError("quadrature order must be >= 1");
    return cached(cache, m, order, [](int n) {
        return golub_welsch(
            n, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
    });
}

const QuadRule& gauss_hermite(int order) {
    static std::map<int, QuadRule> cache;
    static std::mutex m;
    if (order < 1) throw ConfigError("quadrature order must be >= 1");
    return cached(cache, m, order, [](int n) {
        return golub_welsch(
            n, [](int k) { return std::sqrt(k / 2.0); }, std::sqrt(M_PI));
    });
}

namespace {

double simpson(double fa, double fm, double fb, double h) { return h / 6.0 * (fa + 4.0 * fm + fb); }

double adaptive_step(const std::function<double(double)>& f, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth, bool* ok) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol || (b - a) < 1e-300) {
        return left + right + err / 15.0;
    }
    if (depth <= 0) {
        *ok = false;
        return left + right + err / 15.0;
    }
    return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok) +
           adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol, int max_depth) {
    if (!(b > a)) {
        if (a == b) return 0.0;
        throw ConfigError("adaptive_simpson: bad interval");
    }
    // Seed with a fixed 16-panel pass so the tolerance has a sane scale even
    // for sharply peaked integrands.
    const int seed_panels = 16;
    double coarse = 0.0;
    std::vector<double> fx(2 * seed_panels + 1);
    for (int i = 0; i <= 2 * seed_panels; ++i) fx[i] = f(a + (b - a) * i / (2.0 * seed_panels));
    for (int i = 0; i < seed_panels; ++i) {
        coarse += simpson(fx[2 * i], fx[2 * i + 1], fx[2 * i + 2], (b - a) / seed_panels);
    }
    const double tol0 = abs_tol + rel_tol * std::abs(coarse);
    bool ok = true;
    double total = 0.0;
    for (int i = 0; i < seed_panels; ++i) {
        const double pa = a + (b - a) * i / seed_panels;
        const double pb = a + (b - a) * (i + 1) / seed_panels;
        const double whole = simpson(fx[2 * i], fx[2 * i + 1], fx[2 * i + 2], pb - pa);
        total += adaptive_step(f, pa, pb, fx[2 * i], fx[2 * i + 1], fx[2 * i + 2], whole,
                               tol0 / seed_panels, max_depth, &ok);
    }
    if (!ok) throw SolverError("adaptive_simpson: tolerance not reached");
    return total;
}

}  // namespace chain
