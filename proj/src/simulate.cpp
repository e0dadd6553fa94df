#include "chain/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "chain/accumulate.hpp"
#include "chain/errors.hpp"
#include "chain/quadrature.hpp"
#include "chain/rng.hpp"
#include "chain/spectral.hpp"

namespace chain {

namespace {

constexpr double kBlowupAbs = 1e6;
constexpr double kInvSqrt2 = 0.70710678118654752440;
// Start-point sampling draws from its own stream so the step noise stays
// aligned between I_- starts and sampled starts of the same trajectory.
constexpr std::uint64_t kStartSalt = 0x7374617274ull;

struct TrajOutcome {
    double time = 0.0;
    bool censored = false;
    bool blowup = false;
};

// One Euler-Maruyama path of dX = -grad G dt + sqrt(2 eps) dB. pair_noise
// replaces each step's normals by the scaled sum of two consecutive draws,
// so a dt path and its dt/2 refinement consume one shared stream.
TrajOutcome run_path(const ChainParams& p, double dt, double rho, double max_time,
                     Philox& gauss, const std::vector<double>& start, bool pair_noise) {
    const int n = p.n;
    const double gamma = p.gamma;
    const double inv_n = 1.0 / n;
    const double sigma = std::sqrt(2.0 * p.epsilon * dt);
    const double hit2 = rho * rho * n;

    const double step_budget = max_time / dt;
    const long long max_steps = (step_budget >= 9.0e18)
                                    ? std::numeric_limits<long long>::max()
                                    : static_cast<long long>(std::ceil(step_budget));

    std::vector<double> x = start;
    std::vector<double> xn(n), xi(n);

    for (long long step = 1; step <= max_steps; ++step) {
        for (int i = 0; i < n; ++i) xi[i] = gauss.normal();
        if (pair_noise) {
            for (int i = 0; i < n; ++i) xi[i] = (xi[i] + gauss.normal()) * kInvSqrt2;
        }
        double dist2 = 0.0;
        double amax = 0.0;
        for (int i = 0; i < n; ++i) {
            const double c = x[i];
            const double l = x[i == 0 ? n - 1 : i - 1];
            const double r = x[i + 1 == n ? 0 : i + 1];
            const double drift = -(c * c * c - c + 0.5 * gamma * (2.0 * c - l - r)) * inv_n;
            const double v = c + drift * dt + sigma * xi[i];
            xn[i] = v;
            const double d = v - 1.0;
            dist2 += d * d;
            amax = std::max(amax, std::abs(v));
        }
        x.swap(xn);
        // NaN fails the comparison and lands here too.
        if (!(amax <= kBlowupAbs)) return {0.0, false, true};
        if (dist2 <= hit2) return {static_cast<double>(step) * dt, false, false};
    }
    return {max_time, true, false};
}

void validate_config(const ChainParams& p, const SimConfig& c) {
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("dt must be > 0");
    if (!(c.rho > 0.0 && c.rho < 1.0)) throw ConfigError("rho must lie in (0,1)");
    if (c.n_traj < 1) throw ConfigError("n_traj must be >= 1");
    const double numax = spectrum(p).nu.maxCoeff();
    if (!(c.dt * numax / p.n < 0.5)) {
        throw ConfigError("dt too large for stable integration: dt*max(nu)/n = " +
                          std::to_string(c.dt * numax / p.n) + " must stay below 0.5");
    }
}

double resolve_max_time(const ChainParams& p, const SimConfig& c) {
    if (c.max_time > 0.0) return c.max_time;
    const MeanTimePrediction pred = predict_mean_time_rescaled(p).det_form;
    if (pred.overflow) return std::numeric_limits<double>::max();
    return 50.0 * pred.time;
}

std::vector<double> start_point(const ChainParams& p, const SimConfig& c, long traj) {
    std::vector<double> start(p.n, -1.0);
    if (!c.start_uniform_in_ball) return start;
    Philox g(mix_seed(c.seed, kStartSalt), static_cast<std::uint64_t>(traj));
    std::vector<double> dir(p.n);
    double norm2 = 0.0;
    for (int i = 0; i < p.n; ++i) {
        dir[i] = g.normal();
        norm2 += dir[i] * dir[i];
    }
    const double radius =
        c.rho * std::sqrt(static_cast<double>(p.n)) * std::pow(g.uniform(), 1.0 / p.n);
    if (norm2 > 0.0) {
        const double scale = radius / std::sqrt(norm2);
        for (int i = 0; i < p.n; ++i) start[i] += scale * dir[i];
    }
    return start;
}

// Runs fn(traj_index) over [0, n_traj) on the requested worker count. Results
// must be written into per-index slots; the scheduling order never matters.
template <typename Fn>
void parallel_for(long n_traj, int workers, Fn fn) {
    int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    w = std::max(1, static_cast<int>(std::min<long>(w, n_traj)));
    if (w == 1) {
        for (long j = 0; j < n_traj; ++j) fn(j);
        return;
    }
    std::atomic<long> next{0};
    auto loop = [&]() {
        for (;;) {
            const long j = next.fetch_add(1);
            if (j >= n_traj) return;
            fn(j);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int t = 0; t < w; ++t) pool.emplace_back(loop);
    for (auto& th : pool) th.join();
}

HittingBatch assemble_batch(const ChainParams& p, const SimConfig& c,
                            const std::vector<TrajOutcome>& out) {
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (out[j].blowup) {
            throw NumericalBlowupError("state blew up (NaN or |x| > 1e6) in trajectory " +
                                       std::to_string(j));
        }
    }
    HittingBatch b;
    b.params = p;
    b.config = c;
    NeumaierSum sum;
    for (const TrajOutcome& o : out) {
        if (o.censored) {
            ++b.censored_count;
        } else {
            b.times.push_back(o.time);
            sum.add(o.time);
        }
    }
    if (b.times.empty()) {
        throw InconclusiveError("all " + std::to_string(out.size()) +
                                " trajectories censored at max_time " +
                                std::to_string(c.max_time));
    }
    const double k = static_cast<double>(b.times.size());
    b.mean = sum.value() / k;
    NeumaierSum sq;
    for (double t : b.times) {
        const double d = t - b.mean;
        sq.add(d * d);
    }
    b.variance = b.times.size() > 1 ? sq.value() / (k - 1.0) : 0.0;
    const double se = std::sqrt(b.variance / k);
    b.ci95_low = b.mean - 1.959963984540054 * se;
    b.ci95_high = b.mean + 1.959963984540054 * se;
    b.cv = b.mean > 0.0 ? std::sqrt(b.variance) / b.mean : 0.0;
    return b;
}

}  // namespace

HittingBatch simulate_hitting(const ChainParams& p, const SimConfig& c) {
    validate_config(p, c);
    SimConfig resolved = c;
    resolved.max_time = resolve_max_time(p, c);

    std::vector<TrajOutcome> out(static_cast<std::size_t>(c.n_traj));
    parallel_for(c.n_traj, c.workers, [&](long j) {
        Philox g(c.seed, static_cast<std::uint64_t>(j));
        const std::vector<double> start = start_point(p, resolved, j);
        out[static_cast<std::size_t>(j)] =
            run_path(p, resolved.dt, resolved.rho, resolved.max_time, g, start, false);
    });
    return assemble_batch(p, resolved, out);
}

double mean_hitting_1d(double epsilon, double a, double b) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be > 0");
    if (!(a < b)) throw ConfigError("mean_hitting_1d requires a < b");
    const auto G = [](double x) { return 0.25 * x * x * x * x - 0.5 * x * x; };
    // Truncation point where exp(-G/eps) has decayed ~750 e-folds below the
    // well weight, far under the quadrature tolerance.
    const double cut = std::max(2.0, std::pow(6000.0 * epsilon, 0.25)) + 1.0;
    const double lower = std::min(a, -cut);
    const auto inner = [&](double y) {
        return adaptive_simpson([&](double u) { return std::exp(-G(u) / epsilon); }, lower, y,
                                1e-8);
    };
    const double outer = adaptive_simpson(
        [&](double y) { return std::exp(G(y) / epsilon) * inner(y); }, a, b, 1e-8);
    return outer / epsilon;
}

DtRefinementReport dt_refinement_check(const ChainParams& p, const SimConfig& c) {
    validate_config(p, c);
    SimConfig coarse_cfg = c;
    coarse_cfg.max_time = resolve_max_time(p, c);
    SimConfig fine_cfg = coarse_cfg;
    fine_cfg.dt = 0.5 * c.dt;

    const auto n = static_cast<std::size_t>(c.n_traj);
    std::vector<TrajOutcome> oc(n), of(n);
    parallel_for(c.n_traj, c.workers, [&](long j) {
        const std::vector<double> start = start_point(p, coarse_cfg, j);
        Philox gc(c.seed, static_cast<std::uint64_t>(j));
        oc[static_cast<std::size_t>(j)] =
            run_path(p, coarse_cfg.dt, coarse_cfg.rho, coarse_cfg.max_time, gc, start, true);
        Philox gf(c.seed, static_cast<std::uint64_t>(j));
        of[static_cast<std::size_t>(j)] =
            run_path(p, fine_cfg.dt, fine_cfg.rho, fine_cfg.max_time, gf, start, false);
    });

    DtRefinementReport rep;
    rep.coarse = assemble_batch(p, coarse_cfg, oc);
    rep.fine = assemble_batch(p, fine_cfg, of);

    std::vector<double> diffs;
    NeumaierSum dsum, fsum;
    for (std::size_t j = 0; j < n; ++j) {
        if (oc[j].censored || of[j].censored) continue;
        diffs.push_back(oc[j].time - of[j].time);
        dsum.add(oc[j].time - of[j].time);
        fsum.add(of[j].time);
    }
    rep.pairs = static_cast<long>(diffs.size());
    if (rep.pairs == 0) {
        throw InconclusiveError("no trajectory ran uncensored at both resolutions");
    }
    const double m = static_cast<double>(rep.pairs);
    const double mean_d = dsum.value() / m;
    const double mean_f = fsum.value() / m;
    NeumaierSum vsum;
    for (double d : diffs) vsum.add((d - mean_d) * (d - mean_d));
    const double var_d = rep.pairs > 1 ? vsum.value() / (m - 1.0) : 0.0;
    rep.relative_shift = mean_d / mean_f;
    rep.paired_rel_stderr = std::sqrt(var_d / m) / mean_f;
    rep.passed = std::abs(rep.relative_shift) < 2.0 * rep.paired_rel_stderr + 0.03;
    return rep;
}

}  // namespace chain
