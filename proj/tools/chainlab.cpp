#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "chain/capacity.hpp"
#include "chain/errors.hpp"
#include "chain/fourier.hpp"
#include "chain/params.hpp"
#include "chain/rng.hpp"
#include "chain/simulate.hpp"
#include "chain/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Fixed column order; results are plot-ready CSV, one row per instance.
constexpr const char* kCsvHeader =
    "n,mu,gamma,epsilon,rho,dt,c_n_product,det_ratio,v_mu,log_cap_lower,log_cap_upper,"
    "log_cap_asymptotic,mean_emp,ci95_low,ci95_high,censored,pred_det_form,pred_literal_cn,"
    "ratio_emp_over_pred_det,ratio_emp_over_pred_literal,seed";

// Shortest round-trip decimal form; the reason CSV bytes are reproducible.
std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string cell(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hash_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
    return std::string(buf);
}

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string(buf);
}

json versions_json() {
    return json{{"chainlab", kVersion},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"compiler", __VERSION__}};
}

struct RecordRow {
    int n = 0;
    double mu = 0.0;
    double gamma = 0.0;
    double epsilon = 0.0;
    std::optional<double> rho, dt;
    std::optional<double> c_n_product, det_ratio, v_mu;
    std::optional<double> log_cap_lower, log_cap_upper, log_cap_asymptotic;
    std::optional<double> mean_emp, ci95_low, ci95_high;
    std::optional<long> censored;
    std::optional<double> pred_det_form, pred_literal_cn;
    std::optional<double> ratio_emp_over_pred_det, ratio_emp_over_pred_literal;
    std::uint64_t seed = 0;

    std::string to_csv() const {
        std::string s;
        s += std::to_string(n);
        s += ',';
        s += fmt(mu);
        s += ',';
        s += fmt(gamma);
        s += ',';
        s += fmt(epsilon);
        s += ',';
        s += cell(rho);
        s += ',';
        s += cell(dt);
        s += ',';
        s += cell(c_n_product);
        s += ',';
        s += cell(det_ratio);
        s += ',';
        s += cell(v_mu);
        s += ',';
        s += cell(log_cap_lower);
        s += ',';
        s += cell(log_cap_upper);
        s += ',';
        s += cell(log_cap_asymptotic);
        s += ',';
        s += cell(mean_emp);
        s += ',';
        s += cell(ci95_low);
        s += ',';
        s += cell(ci95_high);
        s += ',';
        s += censored ? std::to_string(*censored) : std::string();
        s += ',';
        s += cell(pred_det_form);
        s += ',';
        s += cell(pred_literal_cn);
        s += ',';
        s += cell(ratio_emp_over_pred_det);
        s += ',';
        s += cell(ratio_emp_over_pred_literal);
        s += ',';
        s += std::to_string(seed);
        return s;
    }
};

struct TaskSet {
    bool prefactor = true;
    bool capacity = true;
    bool simulate = true;
};

struct InstanceJob {
    chain::ChainParams p;
    double rho = 0.2;
    double dt = 0.0;  // <= 0 requests the default 1e-3 * min(1, 1/max lambda)
    double max_time = 0.0;
    long trajectories = 2000;
    long long samples = 20000;
    double grid_h = 0.01;
    std::uint64_t seed = 1;
    TaskSet tasks;
    bool pred_det = true;
    bool pred_lit = true;
    bool pred_vmu = true;
    int workers = 0;
};

struct InstanceResult {
    RecordRow row;
    json meta = json::object();
    bool ok = true;
};

double resolve_dt(const chain::ChainParams& p, double requested) {
    if (requested > 0.0) return requested;
    const double lmax = chain::spectrum(p).lambda.maxCoeff();
    return 1e-3 / std::max(1.0, lmax);
}

InstanceResult run_instance(const InstanceJob& job) {
    const auto t0 = std::chrono::steady_clock::now();
    InstanceResult res;
    RecordRow& row = res.row;
    const chain::ChainParams& p = job.p;
    row.n = p.n;
    row.mu = p.mu;
    row.gamma = p.gamma;
    row.epsilon = p.epsilon;
    row.rho = job.rho;
    row.seed = job.seed;
    json flags = json::object();
    json logs = json::object();
    try {
        if (job.tasks.prefactor || job.tasks.simulate) {
            const bool want_v = job.pred_vmu && p.mu > 1.0;
            const auto rep = chain::prefactor(p, want_v ? 1e-6 : 0.0);
            row.c_n_product = rep.c_n_product;
            row.det_ratio = rep.det_ratio;
            if (want_v) row.v_mu = rep.v_mu;
            flags["sqrt2_identity"] =
                std::abs(rep.c_n_product / rep.det_ratio - std::sqrt(2.0)) <=
                1e-10 * std::sqrt(2.0);

            const auto pred = chain::predict_mean_time_rescaled(p);
            logs["log_pred_det_form"] = pred.det_form.log_time;
            logs["log_pred_literal_cn"] = pred.literal_cn.log_time;
            if (job.pred_det && !pred.det_form.overflow) row.pred_det_form = pred.det_form.time;
            if (job.pred_lit && !pred.literal_cn.overflow) {
                row.pred_literal_cn = pred.literal_cn.time;
            }
        }
        if (job.tasks.capacity) {
            const auto spec =
                chain::NeighborhoodSpec::capacity_default(p.n, p.epsilon, job.rho);
            chain::CapacityBudget budget;
            budget.mc_samples = job.samples;
            budget.seed = job.seed;
            const auto br = chain::capacity_bracket(p, spec, budget);
            row.log_cap_lower = br.log_lower;
            row.log_cap_upper = br.log_upper;
            row.log_cap_asymptotic = br.log_asymptotic;
            logs["cap_lower_stderr_log"] = br.lower.stderr_log;
            logs["cap_upper_stderr_log"] = br.upper.stderr_log;
            logs["cap_lower_method"] = br.lower.method;
            logs["cap_upper_method"] = br.upper.method;
            flags["bracket_ordered"] = br.log_lower <= br.log_upper;
            if (p.n <= 2) {
                chain::GridSpec g;
                g.h = job.grid_h;
                g.rho = job.rho;
                const double oracle = chain::capacity_oracle_smallN(p, g);
                logs["log_cap_oracle"] = oracle;
                const double slack = 2.0 * (br.lower.stderr_log + br.upper.stderr_log);
                flags["oracle_within_bracket"] =
                    oracle >= br.log_lower - slack && oracle <= br.log_upper + slack;
            }
        }
        if (job.tasks.simulate) {
            chain::SimConfig sc;
            sc.dt = job.dt;
            sc.rho = job.rho;
            sc.n_traj = job.trajectories;
            sc.seed = job.seed;
            sc.max_time = job.max_time;
            sc.workers = job.workers;
            row.dt = job.dt;
            const auto batch = chain::simulate_hitting(p, sc);
            row.mean_emp = batch.mean;
            row.ci95_low = batch.ci95_low;
            row.ci95_high = batch.ci95_high;
            row.censored = batch.censored_count;
            logs["cv"] = batch.cv;
            logs["max_time"] = batch.config.max_time;
            if (row.pred_det_form) {
                row.ratio_emp_over_pred_det = batch.mean / *row.pred_det_form;
                flags["within_15pct_det"] = std::abs(*row.ratio_emp_over_pred_det - 1.0) <= 0.15;
            }
            if (row.pred_literal_cn) {
                row.ratio_emp_over_pred_literal = batch.mean / *row.pred_literal_cn;
                flags["within_15pct_literal"] =
                    std::abs(*row.ratio_emp_over_pred_literal - 1.0) <= 0.15;
            }
            if (p.n == 1) {
                const double oracle = chain::mean_hitting_1d(p.epsilon, -1.0, 1.0 - job.rho);
                logs["oracle_mean_1d"] = oracle;
                const double se =
                    std::sqrt(batch.variance / static_cast<double>(batch.times.size()));
                flags["oracle_within_tol"] =
                    std::abs(batch.mean - oracle) <= std::max(0.05 * oracle, 2.0 * se);
            }
        }
    } catch (const chain::Error& e) {
        res.ok = false;
        res.meta["error"] = e.what();
        res.meta["exit_code"] = static_cast<int>(e.code);
    }
    const auto t1 = std::chrono::steady_clock::now();
    res.meta["status"] = res.ok ? "ok" : "failed";
    res.meta["flags"] = flags;
    res.meta["log"] = logs;
    res.meta["wall_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    res.meta["n"] = p.n;
    res.meta["mu"] = p.mu;
    res.meta["epsilon"] = p.epsilon;
    res.meta["seed"] = job.seed;
    return res;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw chain::ConfigError("cannot open output file: " + path);
    out << content;
    out.flush();
    if (!out) throw chain::ConfigError("failed writing output file: " + path);
}

void append_line(const std::string& path, const std::string& line) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw chain::ConfigError("cannot open output file: " + path);
    out << line << '\n';
    out.flush();
    if (!out) throw chain::ConfigError("failed writing output file: " + path);
}

json meta_skeleton(const std::string& command, std::uint64_t seed, const json& config,
                   const std::string& config_hash) {
    return json{{"artifact", {{"name", "chainlab"}, {"version", kVersion}}},
                {"command", command},
                {"created", iso_now()},
                {"versions", versions_json()},
                {"seed", seed},
                {"config", config},
                {"config_hash", config_hash},
                {"records", json::array()}};
}

void emit_single(const std::string& command, const std::string& out_path,
                 const InstanceJob& job, const json& config_echo, const InstanceResult& res) {
    if (out_path.empty()) return;
    const std::string cfg_bytes = config_echo.dump();
    json meta = meta_skeleton(command, job.seed, config_echo, hash_hex(cfg_bytes));
    meta["records"].push_back(res.meta);
    write_text(out_path, std::string(kCsvHeader) + "\n" + res.row.to_csv() + "\n");
    write_text(out_path + ".meta.json", meta.dump(2) + "\n");
}

// ---- spectrum ----------------------------------------------------------

int run_spectrum(int n, double mu) {
    const auto p = chain::ChainParams::from_mu(n, mu, 1.0);
    const auto s = chain::spectrum(p);
    std::printf("%4s  %16s  %16s  %16s\n", "k", "gamma_k", "lambda_k", "nu_k");
    for (int k = 0; k < n; ++k) {
        std::printf("%4d  %16s  %16s  %16s\n", k, fmt(s.gamma_k[k]).c_str(),
                    fmt(s.lambda[k]).c_str(), fmt(s.nu[k]).c_str());
    }
    return 0;
}

// ---- prefactor ---------------------------------------------------------

int run_prefactor(const std::vector<int>& ns, double mu) {
    const double v = chain::v_mu(mu, 1e-8).value;
    std::printf("%6s  %22s  %22s  %22s  %22s  %22s\n", "N", "c_N", "det_ratio", "V(mu)",
                "|c_N-V(mu)|", "N*|c_N-V(mu)|");
    for (int n : ns) {
        const auto p = chain::ChainParams::from_mu(n, mu, 1.0);
        const auto rep = chain::prefactor(p, 0.0);
        const double d = std::abs(rep.c_n_product - v);
        std::printf("%6d  %22s  %22s  %22s  %22s  %22s\n", n, fmt(rep.c_n_product).c_str(),
                    fmt(rep.det_ratio).c_str(), fmt(v).c_str(), fmt(d).c_str(),
                    fmt(n * d).c_str());
    }
    return 0;
}

// ---- simulate ----------------------------------------------------------

json single_config_echo(const char* command, const InstanceJob& job) {
    return json{{"command", command},
                {"n", job.p.n},
                {"mu", job.p.mu},
                {"gamma", job.p.gamma},
                {"epsilon", job.p.epsilon},
                {"rho", job.rho},
                {"dt", job.dt},
                {"max_time", job.max_time},
                {"trajectories", job.trajectories},
                {"samples", job.samples},
                {"grid_h", job.grid_h},
                {"seed", job.seed}};
}

int run_simulate(InstanceJob job, const std::string& out_path) {
    job.tasks = TaskSet{true, false, true};
    job.dt = resolve_dt(job.p, job.dt);
    const InstanceResult res = run_instance(job);
    if (!res.ok) throw chain::Error(static_cast<chain::ExitCode>(res.meta["exit_code"].get<int>()),
                                    res.meta["error"].get<std::string>());
    const RecordRow& r = res.row;
    std::printf("n=%d mu=%s eps=%s dt=%s rho=%s trajectories=%ld seed=%llu\n", r.n,
                fmt(r.mu).c_str(), fmt(r.epsilon).c_str(), fmt(*r.dt).c_str(),
                fmt(*r.rho).c_str(), job.trajectories,
                static_cast<unsigned long long>(r.seed));
    std::printf("mean_emp=%s ci95=[%s, %s] censored=%ld cv=%s\n", fmt(*r.mean_emp).c_str(),
                fmt(*r.ci95_low).c_str(), fmt(*r.ci95_high).c_str(), *r.censored,
                fmt(res.meta["log"]["cv"].get<double>()).c_str());
    if (r.pred_det_form) {
        std::printf("pred_det_form=%s ratio_emp_over_pred_det=%s\n",
                    fmt(*r.pred_det_form).c_str(), fmt(*r.ratio_emp_over_pred_det).c_str());
    }
    if (r.pred_literal_cn) {
        std::printf("pred_literal_cn=%s ratio_emp_over_pred_literal=%s\n",
                    fmt(*r.pred_literal_cn).c_str(),
                    fmt(*r.ratio_emp_over_pred_literal).c_str());
    }
    if (res.meta["log"].contains("oracle_mean_1d")) {
        std::printf("oracle_mean_1d=%s within_tol=%s\n",
                    fmt(res.meta["log"]["oracle_mean_1d"].get<double>()).c_str(),
                    res.meta["flags"]["oracle_within_tol"].get<bool>() ? "yes" : "no");
    }
    emit_single("simulate", out_path, job, single_config_echo("simulate", job), res);
    return 0;
}

// ---- capacity ----------------------------------------------------------

int run_capacity(InstanceJob job, const std::string& out_path) {
    job.tasks = TaskSet{true, true, false};
    const InstanceResult res = run_instance(job);
    if (!res.ok) throw chain::Error(static_cast<chain::ExitCode>(res.meta["exit_code"].get<int>()),
                                    res.meta["error"].get<std::string>());
    const RecordRow& r = res.row;
    std::printf("n=%d mu=%s eps=%s rho=%s samples=%lld seed=%llu\n", r.n, fmt(r.mu).c_str(),
                fmt(r.epsilon).c_str(), fmt(*r.rho).c_str(), job.samples,
                static_cast<unsigned long long>(r.seed));
    std::printf("log_cap_lower=%s (se %s, %s)\n", fmt(*r.log_cap_lower).c_str(),
                fmt(res.meta["log"]["cap_lower_stderr_log"].get<double>()).c_str(),
                res.meta["log"]["cap_lower_method"].get<std::string>().c_str());
    std::printf("log_cap_upper=%s (se %s, %s)\n", fmt(*r.log_cap_upper).c_str(),
                fmt(res.meta["log"]["cap_upper_stderr_log"].get<double>()).c_str(),
                res.meta["log"]["cap_upper_method"].get<std::string>().c_str());
    std::printf("log_cap_asymptotic=%s\n", fmt(*r.log_cap_asymptotic).c_str());
    if (res.meta["log"].contains("log_cap_oracle")) {
        std::printf("log_cap_oracle=%s within_bracket=%s\n",
                    fmt(res.meta["log"]["log_cap_oracle"].get<double>()).c_str(),
                    res.meta["flags"]["oracle_within_bracket"].get<bool>() ? "yes" : "no");
    }
    emit_single("capacity", out_path, job, single_config_echo("capacity", job), res);
    return 0;
}

// ---- campaign ----------------------------------------------------------

struct CampaignSpec {
    std::uint64_t seed = 1;
    std::string output = "results.csv";
    TaskSet tasks;
    long trajectories = 2000;
    long long samples = 20000;
    double grid_h = 0.01;
    bool pred_det = true;
    bool pred_lit = true;
    bool pred_vmu = true;
    double rho = 0.2;
    double dt = 0.0;
    double max_time = 0.0;
    std::vector<chain::ChainParams> instances;
};

double need_number(const json& inst, std::size_t idx, const char* key) {
    if (!inst.contains(key)) {
        throw chain::ConfigError("instance " + std::to_string(idx) + ": missing field '" +
                                 key + "'");
    }
    if (!inst.at(key).is_number()) {
        throw chain::ConfigError("instance " + std::to_string(idx) + ": field '" + key +
                                 "' must be a number");
    }
    return inst.at(key).get<double>();
}

template <typename T>
T config_field(const json& j, const char* key, T def) {
    if (!j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw chain::ConfigError(std::string("config field '") + key + "': wrong type");
    }
}

CampaignSpec parse_campaign(const json& doc) {
    CampaignSpec spec;
    spec.seed = config_field<std::uint64_t>(doc, "seed", 1);
    spec.output = config_field<std::string>(doc, "output", "results.csv");
    spec.rho = config_field<double>(doc, "rho", 0.2);
    spec.dt = config_field<double>(doc, "dt", 0.0);
    spec.max_time = config_field<double>(doc, "max_time", 0.0);
    if (doc.contains("tasks")) {
        spec.tasks = TaskSet{false, false, false};
        const auto names = config_field<std::vector<std::string>>(doc, "tasks", {});
        for (const auto& t : names) {
            if (t == "prefactor") {
                spec.tasks.prefactor = true;
            } else if (t == "capacity") {
                spec.tasks.capacity = true;
            } else if (t == "simulate") {
                spec.tasks.simulate = true;
            } else {
                throw chain::ConfigError("config field 'tasks': unknown task '" + t + "'");
            }
        }
    }
    if (doc.contains("budgets")) {
        const json& b = doc.at("budgets");
        if (!b.is_object()) throw chain::ConfigError("config field 'budgets': wrong type");
        spec.trajectories = config_field<long>(b, "trajectories", spec.trajectories);
        spec.samples = config_field<long long>(b, "samples", spec.samples);
        spec.grid_h = config_field<double>(b, "grid_h", spec.grid_h);
    }
    if (spec.trajectories < 1) throw chain::ConfigError("config budgets.trajectories must be >= 1");
    if (spec.samples < 1) throw chain::ConfigError("config budgets.samples must be >= 1");
    if (!(spec.grid_h > 0.0)) throw chain::ConfigError("config budgets.grid_h must be > 0");
    if (doc.contains("predictions")) {
        const json& t = doc.at("predictions");
        if (!t.is_object()) throw chain::ConfigError("config field 'predictions': wrong type");
        spec.pred_det = config_field<bool>(t, "det_form", true);
        spec.pred_lit = config_field<bool>(t, "literal_cn", true);
        spec.pred_vmu = config_field<bool>(t, "v_mu", true);
    }
    if (!doc.contains("instances")) throw chain::ConfigError("config missing field 'instances'");
    if (!doc.at("instances").is_array()) {
        throw chain::ConfigError("config field 'instances': must be an array");
    }
    std::size_t idx = 0;
    for (const json& inst : doc.at("instances")) {
        if (!inst.is_object()) {
            throw chain::ConfigError("instance " + std::to_string(idx) + ": must be an object");
        }
        const int n = static_cast<int>(need_number(inst, idx, "n"));
        const double eps = need_number(inst, idx, "epsilon");
        // Regime is validated for every instance up front, before any work runs.
        if (inst.contains("gamma")) {
            spec.instances.push_back(
                chain::ChainParams::with_gamma(n, need_number(inst, idx, "gamma"), eps));
        } else {
            spec.instances.push_back(
                chain::ChainParams::from_mu(n, need_number(inst, idx, "mu"), eps));
        }
        ++idx;
    }
    return spec;
}

std::size_t count_csv_rows(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t rows = 0;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            if (line != kCsvHeader) {
                throw chain::ConfigError(
                    "existing result file has an unexpected header; rerun with --force");
            }
            first = false;
            continue;
        }
        if (!line.empty()) ++rows;
    }
    if (first) {
        throw chain::ConfigError("existing result file is empty; rerun with --force");
    }
    return rows;
}

int run_campaign(const std::string& config_path, const std::string& out_override, bool force,
                 int workers) {
    std::ifstream cfg(config_path);
    if (!cfg) throw chain::ConfigError("cannot open config file: " + config_path);
    std::stringstream buf;
    buf << cfg.rdbuf();
    const std::string bytes = buf.str();
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw chain::ConfigError(std::string("config parse error: ") + e.what());
    }
    const CampaignSpec spec = parse_campaign(doc);
    const std::string out = out_override.empty() ? spec.output : out_override;
    const std::string meta_path = out + ".meta.json";
    const std::string hash = hash_hex(bytes);
    const std::size_t total = spec.instances.size();

    json meta = meta_skeleton("campaign", spec.seed, doc, hash);
    meta["instances_total"] = total;
    std::size_t start = 0;

    const bool have_prior = fs::exists(out) || fs::exists(meta_path);
    if (have_prior && force) {
        fs::remove(out);
        fs::remove(meta_path);
    } else if (have_prior) {
        if (!fs::exists(out) || !fs::exists(meta_path)) {
            throw chain::ConfigError(
                "found a result file without its sidecar (or vice versa); rerun with --force");
        }
        json prior;
        try {
            std::ifstream min(meta_path);
            prior = json::parse(min);
        } catch (const json::exception& e) {
            throw chain::ConfigError(std::string("cannot parse existing sidecar: ") + e.what());
        }
        if (config_field<std::string>(prior, "config_hash", "") != hash) {
            throw chain::ConfigError(
                "existing results come from a different config (hash mismatch); "
                "rerun with --force to overwrite");
        }
        if (!prior.contains("records") || !prior.at("records").is_array()) {
            throw chain::ConfigError("existing sidecar has no records; rerun with --force");
        }
        meta["records"] = prior.at("records");
        start = meta["records"].size();
        if (start > total || count_csv_rows(out) != start) {
            throw chain::ConfigError(
                "existing results do not line up with the config; rerun with --force");
        }
    }
    if (!fs::exists(out)) {
        write_text(out, std::string(kCsvHeader) + "\n");
        write_text(meta_path, meta.dump(2) + "\n");
    }

    auto make_job = [&](std::size_t i) {
        InstanceJob job;
        job.p = spec.instances[i];
        job.rho = spec.rho;
        job.dt = resolve_dt(job.p, spec.dt);
        job.max_time = spec.max_time;
        job.trajectories = spec.trajectories;
        job.samples = spec.samples;
        job.grid_h = spec.grid_h;
        job.seed = chain::mix_seed(spec.seed, i);
        job.tasks = spec.tasks;
        job.pred_det = spec.pred_det;
        job.pred_lit = spec.pred_lit;
        job.pred_vmu = spec.pred_vmu;
        job.workers = workers > 1 ? 1 : 0;
        return job;
    };

    if (workers > 1 && start < total) {
        // Instance-level parallelism: compute the missing suffix, then append
        // in index order so the file bytes match a sequential run.
        std::vector<InstanceResult> results(total - start);
        std::atomic<std::size_t> next{start};
        auto loop = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= total) return;
                results[i - start] = run_instance(make_job(i));
            }
        };
        std::vector<std::thread> pool;
        const int w = std::min<std::size_t>(workers, total - start);
        pool.reserve(w);
        for (int t = 0; t < w; ++t) pool.emplace_back(loop);
        for (auto& th : pool) th.join();
        for (std::size_t i = start; i < total; ++i) {
            InstanceResult& res = results[i - start];
            res.meta["index"] = i;
            append_line(out, res.row.to_csv());
            meta["records"].push_back(res.meta);
        }
        write_text(meta_path, meta.dump(2) + "\n");
    } else {
        for (std::size_t i = start; i < total; ++i) {
            InstanceResult res = run_instance(make_job(i));
            res.meta["index"] = i;
            append_line(out, res.row.to_csv());
            meta["records"].push_back(res.meta);
            write_text(meta_path, meta.dump(2) + "\n");
        }
    }

    std::size_t failed = 0;
    for (const json& r : meta["records"]) {
        if (config_field<std::string>(r, "status", "ok") != "ok") ++failed;
    }
    std::printf("campaign: %zu instances, %zu new, %zu failed, results in %s\n", total,
                total - start, failed, out.c_str());
    if (failed > 0) {
        std::fprintf(stderr, "campaign: %zu of %zu instances failed\n", failed, total);
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled bistable chain toolkit: spectra, prefactors, capacity bounds, "
                 "transition-time simulation"};
    app.require_subcommand(1);

    int n = 0;
    std::vector<int> n_list;
    double mu = 2.0;
    double eps = 0.0;
    double rho = 0.2;
    double dt = 0.0;
    double max_time = 0.0;
    long trajectories = 2000;
    long long samples = 20000;
    std::uint64_t seed = 1;
    std::string out_path;
    std::string config_path;
    bool force = false;
    int workers = 0;

    auto* sp = app.add_subcommand("spectrum", "print the mode table (k, gamma_k, lambda_k, nu_k)");
    sp->add_option("--n", n, "number of sites")->required();
    sp->add_option("--mu", mu, "coupling in threshold units (default 2)");

    auto* pf = app.add_subcommand("prefactor", "tabulate c_N, det ratio and the V(mu) limit");
    pf->add_option("--n", n_list, "site counts (comma separated)")->required()->delimiter(',');
    pf->add_option("--mu", mu, "coupling in threshold units (default 2)");

    auto* sim = app.add_subcommand("simulate", "measure first-hitting times and compare with "
                                               "both predictions");
    sim->add_option("--n", n, "number of sites")->required();
    sim->add_option("--mu", mu, "coupling in threshold units (default 2)");
    sim->add_option("--eps", eps, "noise strength")->required();
    sim->add_option("--rho", rho, "hitting radius (default 0.2)");
    sim->add_option("--dt", dt, "time step (default 1e-3 * min(1, 1/max lambda))");
    sim->add_option("--max-time", max_time, "per-trajectory cap (default 50x prediction)");
    sim->add_option("--trajectories", trajectories, "trajectory count (default 2000)");
    sim->add_option("--seed", seed, "RNG seed (default 1)");
    sim->add_option("--out", out_path, "CSV output path (sidecar written alongside)");
    sim->add_option("--workers", workers, "worker threads (default: all cores)");

    auto* cap = app.add_subcommand("capacity", "bracket the capacity and compare with the "
                                               "asymptotic form");
    cap->add_option("--n", n, "number of sites")->required();
    cap->add_option("--mu", mu, "coupling in threshold units (default 2)");
    cap->add_option("--eps", eps, "noise strength")->required();
    cap->add_option("--rho", rho, "ball radius (default 0.2)");
    cap->add_option("--samples", samples, "Monte Carlo samples (default 20000)");
    cap->add_option("--seed", seed, "RNG seed (default 1)");
    cap->add_option("--out", out_path, "CSV output path (sidecar written alongside)");
    cap->add_option("--workers", workers, "accepted for symmetry; estimators are sequential");

    auto* camp = app.add_subcommand("campaign", "run a JSON-configured batch, resumable");
    camp->add_option("--config", config_path, "campaign config (JSON)")->required();
    camp->add_option("--out", out_path, "override the config's output path");
    camp->add_flag("--force", force, "discard existing results that do not match");
    camp->add_option("--workers", workers, "instance-level parallelism (default sequential)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(chain::ExitCode::config);
    }

    try {
        if (*sp) return run_spectrum(n, mu);
        if (*pf) return run_prefactor(n_list, mu);
        if (*sim || *cap) {
            InstanceJob job;
            job.p = chain::ChainParams::from_mu(n, mu, eps);
            job.rho = rho;
            job.dt = dt;
            job.max_time = max_time;
            job.trajectories = trajectories;
            job.samples = samples;
            job.seed = seed;
            job.workers = workers;
            return *sim ? run_simulate(job, out_path) : run_capacity(job, out_path);
        }
        if (*camp) return run_campaign(config_path, out_path, force, workers);
    } catch (const chain::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(e.code);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(chain::ExitCode::failure);
    }
    return 0;
}
