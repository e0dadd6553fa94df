#include "chain/capacity.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "chain/accumulate.hpp"
#include "chain/errors.hpp"
#include "chain/potential.hpp"
#include "chain/quadrature.hpp"
#include "chain/rng.hpp"
#include "chain/spectral.hpp"

namespace chain {

namespace {

// Transverse w-coordinate layout: one slot per real degree of freedom beyond
// w_0. A conjugate mode pair contributes two slots (u_k, v_k) = sqrt(2)(Re,
// Im) z_k sharing lambda_k; the even-N middle mode contributes one.
struct TransverseLayout {
    std::vector<double> lambda;  // per slot
    std::vector<int> mode;       // owning mode index k
    std::vector<bool> is_real;   // true: middle slot, false: half of a pair
};

TransverseLayout transverse_layout(const Spectrum& s) {
    const int n = static_cast<int>(s.lambda.size());
    TransverseLayout t;
    for (int k = 1; k <= n / 2; ++k) {
        if (n % 2 == 0 && k == n / 2) {
            t.lambda.push_back(s.lambda[k]);
            t.mode.push_back(k);
            t.is_real.push_back(true);
        } else {
            for (int c = 0; c < 2; ++c) {
                t.lambda.push_back(s.lambda[k]);
                t.mode.push_back(k);
                t.is_real.push_back(false);
            }
        }
    }
    return t;
}

ModeVector mode_from_w(int n, double w0, const TransverseLayout& t,
                       const std::vector<double>& wperp) {
    ModeVector z(n);
    z.set_z0(w0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::size_t i = 0;
    while (i < wperp.size()) {
        const int k = t.mode[i];
        if (t.is_real[i]) {
            z.set_mode(k, {wperp[i], 0.0});
            i += 1;
        } else {
            z.set_mode(k, {wperp[i] * inv_sqrt2, wperp[i + 1] * inv_sqrt2});
            i += 2;
        }
    }
    return z;
}

double logsumexp(const std::vector<double>& log_terms) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : log_terms) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    NeumaierSum s;
    for (double v : log_terms) s.add(std::exp(v - m));
    return m + std::log(s.value());
}

void check_geometry(const ChainParams& p, const NeighborhoodSpec& spec) {
    if (static_cast<int>(spec.r.size()) != p.n) {
        throw DimensionError("neighborhood spec length does not match instance");
    }
    if (!(spec.rho > 0.0) || !(spec.rho < 1.0)) {
        throw GeometryError("ball radius must lie in (0, 1)");
    }
    if (spec.delta + spec.rho >= 1.0) {
        throw GeometryError("strip and target balls overlap (delta + rho >= 1)");
    }
}

// log of int_{-1+rho}^{1-rho} exp(G~(w0, wperp)/eps) dw0 for a fixed fiber,
// stabilized by a probe of the fiber maximum.
double log_inner_fiber(const ChainParams& p, const TransverseLayout& t,
                       const std::vector<double>& wperp, double rho, double eps,
                       double rel_tol) {
    const double a = -1.0 + rho;
    const double b = 1.0 - rho;
    double ref = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 32; ++i) {
        const double w0 = a + (b - a) * i / 32.0;
        const ModeVector z = mode_from_w(p.n, w0, t, wperp);
        ref = std::max(ref, g_tilde(z, p));
    }
    const double integral = adaptive_simpson(
        [&](double w0) {
            const ModeVector z = mode_from_w(p.n, w0, t, wperp);
            return std::exp((g_tilde(z, p) - ref) / eps);
        },
        a, b, rel_tol, 0.0);
    return ref / eps + std::log(integral);
}

// Outer tensor grid over the box: polar nodes per conjugate-pair disk,
// Gauss-Legendre per real slot. Returns (wperp, log weight) pairs.
struct OuterNode {
    std::vector<double> w;
    double log_weight;
};

std::vector<OuterNode> tensor_box_nodes(const TransverseLayout& t,
                                        const NeighborhoodSpec& spec, int gl_nodes,
                                        int theta_nodes) {
    struct Factor {
        std::vector<std::vector<double>> coords;  // slot values per node
        std::vector<double> log_w;
    };
    std::vector<Factor> factors;
    const QuadRule& gl = gauss_legendre(gl_nodes);
    std::size_t i = 0;
    while (i < t.lambda.size()) {
        Factor f;
        const int k = t.mode[i];
        const double hw = spec.delta * spec.r[k] / std::sqrt(t.lambda[i]);
        if (t.is_real[i]) {
            for (int a = 0; a < gl_nodes; ++a) {
                f.coords.push_back({hw * gl.nodes[a]});
                f.log_w.push_back(std::log(hw * gl.weights[a]));
            }
            i += 1;
        } else {
            const double R = std::sqrt(2.0) * hw;
            for (int a = 0; a < gl_nodes; ++a) {
                const double r = 0.5 * R * (gl.nodes[a] + 1.0);
                const double wr = 0.5 * R * gl.weights[a] * r;  // r dr
                for (int b = 0; b < theta_nodes; ++b) {
                    const double th = 2.0 * M_PI * b / theta_nodes;
                    f.coords.push_back({r * std::cos(th), r * std::sin(th)});
                    f.log_w.push_back(std::log(wr * 2.0 * M_PI / theta_nodes));
                }
            }
            i += 2;
        }
        factors.push_back(std::move(f));
    }

    std::vector<OuterNode> nodes;
    nodes.push_back({{}, 0.0});
    for (const Factor& f : factors) {
        std::vector<OuterNode> next;
        next.reserve(nodes.size() * f.coords.size());
        for (const OuterNode& base : nodes) {
            for (std::size_t a = 0; a < f.coords.size(); ++a) {
                OuterNode nn;
                nn.w = base.w;
                nn.w.insert(nn.w.end(), f.coords[a].begin(), f.coords[a].end());
                nn.log_weight = base.log_weight + f.log_w[a];
                next.push_back(std::move(nn));
            }
        }
        nodes = std::move(next);
    }
    return nodes;
}

double lower_tensor_pass(const ChainParams& p, const NeighborhoodSpec& spec,
                         const TransverseLayout& t, const CapacityBudget& budget,
                         int gl_nodes, int theta_nodes) {
    const std::vector<OuterNode> nodes =
        tensor_box_nodes(t, spec, gl_nodes, theta_nodes);
    std::vector<double> log_terms;
    log_terms.reserve(nodes.size());
    for (const OuterNode& nd : nodes) {
        const double log_inner = log_inner_fiber(p, t, nd.w, spec.rho, p.epsilon,
                                                 budget.z0_rel_tol);
        log_terms.push_back(nd.log_weight + std::log(p.epsilon) - log_inner);
    }
    return logsumexp(log_terms);
}

double upper_tensor_pass(const ChainParams& p, const NeighborhoodSpec& spec,
                         const TransverseLayout& t, const CapacityBudget& budget,
                         int gh_nodes) {
    const double eps = p.epsilon;
    const int dim = static_cast<int>(t.lambda.size());
    const QuadRule& gh = gauss_hermite(gh_nodes);

    // Tensor Gauss-Hermite nodes for int exp(-sum lambda_i w_i^2 / 2 eps) g dw.
    std::vector<std::vector<double>> coords;
    std::vector<double> weights;
    coords.push_back({});
    weights.push_back(1.0);
    double log_norm = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double scale = std::sqrt(2.0 * eps / t.lambda[i]);
        log_norm += std::log(scale);
        std::vector<std::vector<double>> next_c;
        std::vector<double> next_w;
        next_c.reserve(coords.size() * gh_nodes);
        next_w.reserve(coords.size() * gh_nodes);
        for (std::size_t b = 0; b < coords.size(); ++b) {
            for (int a = 0; a < gh_nodes; ++a) {
                std::vector<double> c = coords[b];
                c.push_back(scale * gh.nodes[a]);
                next_c.push_back(std::move(c));
                next_w.push_back(weights[b] * gh.weights[a]);
            }
        }
        coords = std::move(next_c);
        weights = std::move(next_w);
    }

    const double D = std::sqrt(2.0 * M_PI * eps) * std::erf(spec.delta / std::sqrt(2.0 * eps));
    const auto integrand = [&](double w0) {
        NeumaierSum s;
        for (std::size_t j = 0; j < coords.size(); ++j) {
            const ModeVector z = mode_from_w(p.n, w0, t, coords[j]);
            s.add(weights[j] * std::exp(-remainder_quartic(z, p) / eps));
        }
        // f'(w0)^2 e^{w0^2/(2 eps)} S(w0), with the Gaussian normalizations
        // folded in outside the integral.
        return std::exp(-w0 * w0 / (2.0 * eps)) / (D * D) * s.value();
    };
    const double integral =
        adaptive_simpson(integrand, -spec.delta, spec.delta, budget.z0_rel_tol, 0.0);
    return std::log(eps) + (0.5 * p.n - 1.0) * std::log(static_cast<double>(p.n)) +
           log_norm + std::log(integral);
}

struct EdgeAccumulator {
    NeumaierSum energy;
    void add(double w, double dh) { energy.add(w * dh * dh); }
};

}  // namespace

double capacity_asymptotic(const ChainParams& p) {
    const PrefactorReport r = prefactor(p, 0.0);
    const double n = p.n;
    return (0.5 * n - 1.0) * std::log(n) + std::log(p.epsilon) +
           0.5 * (n - 2.0) * std::log(2.0 * M_PI * p.epsilon) - r.half_logdet_O;
}

double f_profile(double z0, double delta, double epsilon) {
    if (!(delta > 0.0) || !(epsilon > 0.0)) {
        throw ConfigError("f_profile requires delta > 0 and epsilon > 0");
    }
    if (z0 <= -delta) return 1.0;
    if (z0 >= delta) return 0.0;
    const double s = std::sqrt(2.0 * epsilon);
    return (std::erf(delta / s) - std::erf(z0 / s)) / (2.0 * std::erf(delta / s));
}

CapacityEstimate capacity_upper(const ChainParams& p, const NeighborhoodSpec& spec,
                                const CapacityBudget& budget) {
    check_geometry(p, spec);
    const double eps = p.epsilon;
    CapacityEstimate est;

    if (p.n == 1) {
        const double D =
            std::sqrt(2.0 * M_PI * eps) * std::erf(spec.delta / std::sqrt(2.0 * eps));
        const double integral = adaptive_simpson(
            [&](double w0) {
                const double g = 0.25 * w0 * w0 * w0 * w0 - 0.5 * w0 * w0;
                return std::exp(-g / eps) * std::exp(-w0 * w0 / eps) / (D * D);
            },
            -spec.delta, spec.delta, budget.z0_rel_tol, 0.0);
        est.log_value = std::log(eps * integral);
        est.stderr_log = budget.z0_rel_tol;
        est.method = "quadrature-1d";
        return est;
    }

    const Spectrum s = spectrum(p);
    const TransverseLayout t = transverse_layout(s);
    const int dim = static_cast<int>(t.lambda.size());

    if (dim <= 3) {
        const double pass1 = upper_tensor_pass(p, spec, t, budget, budget.gh_nodes);
        const double pass2 = upper_tensor_pass(p, spec, t, budget, budget.gh_nodes + 12);
        est.log_value = pass2;
        est.stderr_log = std::abs(pass1 - pass2) + budget.z0_rel_tol;
        est.method = "tensor-gauss-hermite";
        return est;
    }

    // Monte Carlo transverse integral with untruncated per-slot Gaussians.
    const int n_nodes = 64;
    const QuadRule& gl = gauss_legendre(n_nodes);
    const long long per_node = std::max<long long>(200, budget.mc_samples / n_nodes);
    double log_gauss_norm = 0.0;
    for (int i = 0; i < dim; ++i) {
        log_gauss_norm += 0.5 * std::log(2.0 * M_PI * eps / t.lambda[i]);
    }
    const double D =
        std::sqrt(2.0 * M_PI * eps) * std::erf(spec.delta / std::sqrt(2.0 * eps));

    std::vector<double> log_terms(n_nodes);
    std::vector<double> rel_var(n_nodes);
    std::vector<double> wperp(dim);
    for (int m = 0; m < n_nodes; ++m) {
        const double w0 = spec.delta * gl.nodes[m];
        NeumaierSum sum_y, sum_y2;
        for (long long j = 0; j < per_node; ++j) {
            Philox rng(budget.seed,
                       (static_cast<std::uint64_t>(m) << 40) + static_cast<std::uint64_t>(j));
            for (int i = 0; i < dim; ++i) {
                wperp[i] = rng.normal() * std::sqrt(eps / t.lambda[i]);
            }
            const ModeVector z = mode_from_w(p.n, w0, t, wperp);
            const double y = std::exp(-remainder_quartic(z, p) / eps);
            sum_y.add(y);
            sum_y2.add(y * y);
        }
        const double mean_y = sum_y.value() / per_node;
        const double var_y =
            std::max(0.0, sum_y2.value() / per_node - mean_y * mean_y) / per_node;
        const double log_fp2 = -w0 * w0 / eps - 2.0 * std::log(D);
        log_terms[m] = std::log(spec.delta * gl.weights[m]) + log_fp2 +
                       w0 * w0 / (2.0 * eps) + log_gauss_norm + std::log(mean_y);
        rel_var[m] = var_y / (mean_y * mean_y);
    }
    const double lse = logsumexp(log_terms);
    double rv = 0.0;
    for (int m = 0; m < n_nodes; ++m) {
        rv += std::exp(2.0 * (log_terms[m] - lse)) * rel_var[m];
    }
    est.log_value = std::log(eps) +
                    (0.5 * p.n - 1.0) * std::log(static_cast<double>(p.n)) + lse;
    est.stderr_log = std::sqrt(rv);
    est.samples = per_node * n_nodes;
    est.method = "gaussian-importance-mc";
    return est;
}

CapacityEstimate capacity_lower(const ChainParams& p, const NeighborhoodSpec& spec,
                                const CapacityBudget& budget) {
    check_geometry(p, spec);
    const double eps = p.epsilon;
    CapacityEstimate est;

    if (p.n == 1) {
        const double a = -1.0 + spec.rho;
        const double b = 1.0 - spec.rho;
        const double integral = adaptive_simpson(
            [&](double w0) {
                const double g = 0.25 * w0 * w0 * w0 * w0 - 0.5 * w0 * w0;
                return std::exp(g / eps);
            },
            a, b, budget.z0_rel_tol, 0.0);
        est.log_value = std::log(eps) - std::log(integral);
        est.stderr_log = budget.z0_rel_tol;
        est.method = "exact-1d";
        return est;
    }

    const Spectrum s = spectrum(p);
    const TransverseLayout t = transverse_layout(s);
    const int dim = static_cast<int>(t.lambda.size());
    const double log_prefac =
        (0.5 * p.n - 1.0) * std::log(static_cast<double>(p.n));

    if (dim <= 3) {
        const double pass1 = lower_tensor_pass(p, spec, t, budget, budget.gl_nodes,
                                               budget.theta_nodes);
        const double pass2 = lower_tensor_pass(p, spec, t, budget, budget.gl_nodes + 12,
                                               budget.theta_nodes + 8);
        est.log_value = log_prefac + pass2;
        est.stderr_log = std::abs(pass1 - pass2) + budget.z0_rel_tol;
        est.method = "tensor-polar-quadrature";
        return est;
    }

    // Truncated-Gaussian importance sampling over the box.
    const long long M = budget.mc_samples;
    std::vector<double> log_terms(M);
    std::vector<double> wperp(dim);
    for (long long j = 0; j < M; ++j) {
        Philox rng(budget.seed, static_cast<std::uint64_t>(j));
        double log_q = 0.0;
        std::size_t i = 0;
        while (i < t.lambda.size()) {
            const int k = t.mode[i];
            const double lam = t.lambda[i];
            const double hw = spec.delta * spec.r[k] / std::sqrt(lam);
            if (t.is_real[i]) {
                const double sigma = std::sqrt(eps / lam);
                const double mass = std::erf(hw / (sigma * std::sqrt(2.0)));
                double v;
                do {
                    v = sigma * rng.normal();
                } while (std::abs(v) > hw);
                log_q += -0.5 * std::log(2.0 * M_PI) - std::log(sigma) -
                         v * v / (2.0 * sigma * sigma) - std::log(mass);
                wperp[i] = v;
                i += 1;
            } else {
                const double R2 = 2.0 * hw * hw;
                const double mass = -std::expm1(-lam * R2 / (2.0 * eps));
                const double u = rng.uniform();
                const double s2 = -(2.0 * eps / lam) * std::log1p(-u * mass);
                const double th = 2.0 * M_PI * rng.uniform();
                const double r = std::sqrt(s2);
                wperp[i] = r * std::cos(th);
                wperp[i + 1] = r * std::sin(th);
                log_q += std::log(lam / (2.0 * M_PI * eps)) - lam * s2 / (2.0 * eps) -
                         std::log(mass);
                i += 2;
            }
        }
        const double log_inner =
            log_inner_fiber(p, t, wperp, spec.rho, eps, budget.z0_rel_tol);
        log_terms[j] = std::log(eps) - log_inner - log_q;
    }
    const double lse = logsumexp(log_terms);
    const double log_mean = lse - std::log(static_cast<double>(M));
    // Relative standard error of the sample mean: with Y_j the linear terms,
    // SE/mean = sqrt(M sum Y^2 / (sum Y)^2 - 1) / sqrt(M - 1).
    double ssq = 0.0;
    for (long long j = 0; j < M; ++j) {
        ssq += std::exp(2.0 * (log_terms[j] - lse));
    }
    const double rel_se = std::sqrt(std::max(0.0, ssq * M - 1.0) /
                                    std::max<long long>(1, M - 1));
    est.log_value = log_prefac + log_mean;
    est.stderr_log = rel_se;
    est.samples = M;
    est.method = "truncated-gaussian-mc";
    return est;
}

CapacityBracket capacity_bracket(const ChainParams& p, const NeighborhoodSpec& spec,
                                 const CapacityBudget& budget) {
    CapacityBracket b;
    b.params = p;
    b.spec = spec;
    b.lower = capacity_lower(p, spec, budget);
    b.upper = capacity_upper(p, spec, budget);
    b.log_lower = b.lower.log_value;
    b.log_upper = b.upper.log_value;
    b.log_asymptotic = capacity_asymptotic(p);
    return b;
}

double capacity_oracle_smallN(const ChainParams& p, const GridSpec& grid) {
    if (p.n != 1 && p.n != 2) {
        throw ConfigError("grid oracle supports n in {1, 2} only");
    }
    if (!(grid.h > 0.0)) throw ConfigError("grid step must be positive");
    if (!(grid.L >= 2.0)) throw ConfigError("grid box half-width must be at least 2");
    if (!(grid.rho > 0.0) || !(grid.rho < 1.0)) {
        throw ConfigError("ball radius must lie in (0, 1)");
    }

    const double eps = p.epsilon;
    const double rho_ball = grid.rho * std::sqrt(static_cast<double>(p.n));

    if (p.n == 1) {
        const int M = static_cast<int>(std::lround(2.0 * grid.L / grid.h));
        const double h = 2.0 * grid.L / M;
        const auto G = [](double x) { return 0.25 * x * x * x * x - 0.5 * x * x; };
        // Node values: 1 near -1, 0 near +1, harmonic in between; the 1D
        // committor minimizes sum w_i (h_i - h_{i+1})^2 which has the exact
        // solution h_i = (sum_{j>=i} 1/w_j) / (sum_all 1/w_j) between the balls.
        std::vector<double> x(M + 1);
        for (int i = 0; i <= M; ++i) x[i] = -grid.L + i * h;
        std::vector<double> w(M);
        for (int i = 0; i < M; ++i) {
            w[i] = std::exp(-G(0.5 * (x[i] + x[i + 1])) / eps);
        }
        int left = 0, right = M;
        for (int i = 0; i <= M; ++i) {
            if (std::abs(x[i] + 1.0) <= rho_ball) left = i;
        }
        for (int i = M; i >= 0; --i) {
            if (std::abs(x[i] - 1.0) <= rho_ball) right = i;
        }
        NeumaierSum inv;
        for (int i = left; i < right; ++i) inv.add(1.0 / w[i]);
        // Series conductance between the two Dirichlet plates.
        const double energy = 1.0 / inv.value();
        return std::log(eps * energy / h);
    }

    // n == 2
    const int M = static_cast<int>(std::lround(2.0 * grid.L / grid.h));
    const double h = 2.0 * grid.L / M;
    const int side = M + 1;
    const auto node_index = [side](int i, int j) { return i * side + j; };
    const auto coord = [&](int i) { return -grid.L + i * h; };
    const double gamma = p.gamma;
    const auto G2 = [&](double x, double y) {
        const double site =
            0.25 * x * x * x * x - 0.5 * x * x + 0.25 * y * y * y * y - 0.5 * y * y;
        const double d = x - y;
        return 0.5 * (site + 0.5 * gamma * d * d);
    };

    // Classification: 1 = fixed one, 0 = fixed zero, -1 = unknown.
    std::vector<int> cls(side * side, -1);
    std::vector<int> unknown_id(side * side, -1);
    int n_unknown = 0;
    const double r2 = rho_ball * rho_ball;
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            const double x = coord(i), y = coord(j);
            const double dm = (x + 1.0) * (x + 1.0) + (y + 1.0) * (y + 1.0);
            const double dp = (x - 1.0) * (x - 1.0) + (y - 1.0) * (y - 1.0);
            if (dm <= r2) {
                cls[node_index(i, j)] = 1;
            } else if (dp <= r2) {
                cls[node_index(i, j)] = 0;
            } else {
                unknown_id[node_index(i, j)] = n_unknown++;
            }
        }
    }

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknown);
    trip.reserve(static_cast<std::size_t>(n_unknown) * 5);
    std::vector<double> diag(n_unknown, 0.0);

    const auto visit_edge = [&](int ia, int ja, int ib, int jb) {
        const double mx = 0.5 * (coord(ia) + coord(ib));
        const double my = 0.5 * (coord(ja) + coord(jb));
        const double w = std::exp(-G2(mx, my) / eps);
        const int a = node_index(ia, ja);
        const int b = node_index(ib, jb);
        const int ca = cls[a], cb = cls[b];
        if (ca == -1 && cb == -1) {
            const int ua = unknown_id[a], ub = unknown_id[b];
            diag[ua] += w;
            diag[ub] += w;
            trip.emplace_back(ua, ub, -w);
            trip.emplace_back(ub, ua, -w);
        } else if (ca == -1) {
            diag[unknown_id[a]] += w;
            rhs[unknown_id[a]] += w * cb;
        } else if (cb == -1) {
            diag[unknown_id[b]] += w;
            rhs[unknown_id[b]] += w * ca;
        }
    };
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            if (i + 1 < side) visit_edge(i, j, i + 1, j);
            if (j + 1 < side) visit_edge(i, j, i, j + 1);
        }
    }
    for (int u = 0; u < n_unknown; ++u) trip.emplace_back(u, u, diag[u]);

    Eigen::SparseMatrix<double> A(n_unknown, n_unknown);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success) {
        throw SolverError("committor system factorization failed");
    }
    const Eigen::VectorXd sol = solver.solve(rhs);
    if (solver.info() != Eigen::Success) {
        throw SolverError("committor system solve failed");
    }

    const auto value_at = [&](int i, int j) {
        const int c = cls[node_index(i, j)];
        if (c >= 0) return static_cast<double>(c);
        return sol[unknown_id[node_index(i, j)]];
    };
    EdgeAccumulator acc;
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            if (i + 1 < side) {
                const double w = std::exp(-G2(coord(i) + 0.5 * h, coord(j)) / eps);
                acc.add(w, value_at(i + 1, j) - value_at(i, j));
            }
            if (j + 1 < side) {
                const double w = std::exp(-G2(coord(i), coord(j) + 0.5 * h) / eps);
                acc.add(w, value_at(i, j + 1) - value_at(i, j));
            }
        }
    }
    // d = 2: the h^{d-2} factor is 1.
    return std::log(eps * acc.energy.value());
}

}  // namespace chain
