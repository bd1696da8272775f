#include "hetpol/run.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hetpol/errors.hpp"
#include "hetpol/parallel.hpp"
#include "hetpol/partition.hpp"
#include "hetpol/path_sampler.hpp"
#include "hetpol/phase.hpp"
#include "hetpol/verify.hpp"
#include "hetpol/walk_kernel.hpp"

#ifndef HETPOL_VERSION
#define HETPOL_VERSION "unknown"
#endif

namespace hetpol {

namespace {

using nlohmann::ordered_json;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class T>
std::vector<std::string> fmt_all(const std::vector<T>& xs) {
    std::vector<std::string> out;
    for (const auto& x : xs) {
        if constexpr (std::is_floating_point_v<T>)
            out.push_back(fmt(x));
        else
            out.push_back(std::to_string(x));
    }
    return out;
}

/// CSV writer with 17 significant digits for every double.
class Csv {
public:
    Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw Error("cannot write " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    Csv& operator<<(double x) { return cell(fmt(x)); }
    Csv& operator<<(int x) { return cell(std::to_string(x)); }
    Csv& operator<<(std::int64_t x) { return cell(std::to_string(x)); }
    Csv& operator<<(std::uint64_t x) { return cell(std::to_string(x)); }
    Csv& operator<<(const std::string& s) { return cell(s); }
    Csv& operator<<(const char* s) { return cell(s); }
    void end() {
        out_ << '\n';
        first_ = true;
    }

private:
    Csv& cell(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }
    std::ofstream out_;
    bool first_ = true;
};

void write_json(const std::filesystem::path& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

ordered_json interval_json(const Interval& i) { return ordered_json::array({i.lower, i.upper}); }

ModelParams single_params(const RunConfig& c) {
    ModelParams p;
    p.lambda = c.lambda.front();
    p.h = c.h.front();
    p.p = c.p.front();
    p.d = c.d.front();
    p.n = c.n.front();
    p.validate();
    return p;
}

std::string params_text(const ModelParams& p) {
    return "lambda=" + fmt(p.lambda) + " h=" + fmt(p.h) + " p=" + fmt(p.p) + " d=" + std::to_string(p.d) +
           " n=" + std::to_string(p.n);
}

/// A failing job: carries the job's seed and parameters for the log.
class JobFailure : public Error {
public:
    using Error::Error;
};

[[noreturn]] void job_failed(const std::string& what, std::uint64_t seed, const std::string& params) {
    throw JobFailure("job failed (seed " + std::to_string(seed) + ", " + params + "): " + what);
}

struct Output {
    std::filesystem::path dir;
    ordered_json aggregate = ordered_json::object();
    ordered_json seeds = ordered_json::object();
    int status = 0;
};

void run_kernel(const RunConfig& c, Output& o, std::ostream& log) {
    const int d = c.d.front();
    const auto kernel = build_kernel(d, c.n_max);
    const auto growth = ratio_growth_check(kernel, c.n_max);
    Csv csv(o.dir / "results.csv", {"k", "p_k", "b_k", "a_2k"});
    for (int k = 0; k <= c.n_max; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        csv << k << kernel.p[ku] << kernel.b[ku] << kernel.a[2 * ku];
        csv.end();
    }
    o.aggregate = {{"d", d},
                   {"n_max", c.n_max},
                   {"alpha", kernel.escape.alpha},
                   {"alpha_error", kernel.escape.error},
                   {"alpha_tolerance_met", kernel.escape.tolerance_met},
                   {"clamped", kernel.clamped},
                   {"ratio_c1", growth.c1},
                   {"ratio_slope", growth.slope},
                   {"axis_avoidance_exponent", axis_avoidance_exponent(d == 1 ? kernel : build_kernel(1, c.n_max), d)}};
    log << "kernel d=" << d << " n_max=" << c.n_max << " alpha=" << fmt(kernel.escape.alpha) << '\n';
}

void run_free_energy(const RunConfig& c, Output& o, std::ostream& log) {
    const std::uint64_t base = *c.base_seed;
    const int workers = resolve_workers(c.workers);
    Csv csv(o.dir / "results.csv",
            {"point", "replica", "seed", "lambda", "h", "p", "d", "n", "log_z_n", "log_zhat_n", "log_psi_n", "phi"});
    ordered_json points = ordered_json::array();
    ordered_json point_seeds = ordered_json::array();
    int g = 0;
    for (double lambda : c.lambda)
        for (double h : c.h)
            for (double p : c.p)
                for (int d : c.d)
                    for (int n : c.n) {
                        const ModelParams params{lambda, h, p, d, n};
                        const std::uint64_t seed = derive_seed(base, static_cast<std::uint64_t>(g), StreamTag::job);
                        FreeEnergyEstimate est;
                        try {
                            params.validate();
                            est = free_energy_estimate(params, c.replicas, seed, workers);
                        } catch (const Error& e) {
                            job_failed(e.what(), seed, params_text(params));
                        }
                        for (std::size_t r = 0; r < est.records.size(); ++r) {
                            const auto& rec = est.records[r];
                            csv << g << static_cast<int>(r) << rec.seed << lambda << h << p << d << n << rec.log_z_n << rec.log_zhat_n
                                << rec.log_psi_n << rec.phi;
                            csv.end();
                        }
                        points.push_back({{"point", g},
                                          {"lambda", lambda},
                                          {"h", h},
                                          {"p", p},
                                          {"d", d},
                                          {"n", n},
                                          {"replicas", est.replicas},
                                          {"phi_hat", est.phi_hat},
                                          {"std_err", est.std_err},
                                          {"psi_p_hat", est.psi_p_hat},
                                          {"excess_hat", est.excess_hat},
                                          {"excess_std_err", est.excess_std_err},
                                          {"pinned_n", est.pinned_n},
                                          {"pinned_hat", est.pinned_hat},
                                          {"pinned_std_err", est.pinned_std_err}});
                        point_seeds.push_back(seed);
                        log << "free-energy " << params_text(params) << " phi_hat=" << fmt(est.phi_hat) << " +- "
                            << fmt(est.std_err) << '\n';
                        ++g;
                    }
    o.aggregate = {{"points", points}};
    o.seeds["points"] = point_seeds;
}

void run_phase_scan(const RunConfig& c, Output& o, std::ostream& log) {
    const std::uint64_t base = *c.base_seed;
    const double p = c.p.front();
    const int d = c.d.front();
    const int n = c.n.front();
    const ClassifierSettings settings{c.kappa, c.shrink_ratio};
    std::vector<PhasePoint> points;
    try {
        points = phase_scan(c.lambda, c.h, p, d, n, c.replicas, base, settings, resolve_workers(c.workers));
    } catch (const Error& e) {
        job_failed(e.what(), base, "phase-scan p=" + fmt(p) + " d=" + std::to_string(d) + " n=" + std::to_string(n));
    }

    Csv csv(o.dir / "results.csv", {"lambda", "h", "p", "d", "n", "replicas", "psi_p_hat", "stderr", "verdict", "psi_p_hat_2n",
                                    "stderr_2n", "bound_localized", "bound_delocalized", "simulated"});
    int counts[3] = {0, 0, 0};
    bool envelope_ok = true;
    ordered_json point_seeds = ordered_json::array();
    ordered_json raw = ordered_json::array();
    for (std::size_t g = 0; g < points.size(); ++g) {
        const auto& pt = points[g];
        raw.push_back({{"lambda", pt.lambda}, {"h", pt.h}, {"raw_psi_p_hat", pt.raw_psi_p_hat}, {"raw_stderr", pt.raw_std_err}});
        const bool has_lower = pt.lambda > 0.0 && p > 0.0;
        const double lower = has_lower ? bound_localized(pt.lambda, p, d) : 0.0;
        const double upper = bound_delocalized(pt.lambda);
        if (has_lower && pt.h < lower && pt.verdict != Verdict::localized) envelope_ok = false;
        if (pt.h >= upper && pt.verdict != Verdict::delocalized) envelope_ok = false;
        ++counts[static_cast<int>(pt.verdict)];
        csv << pt.lambda << pt.h << pt.p << pt.d << pt.n << pt.replicas << pt.psi_p_hat << pt.std_err << to_string(pt.verdict)
            << pt.psi_p_hat_2n << pt.std_err_2n << (has_lower ? fmt(lower) : std::string("nan")) << upper
            << (pt.simulated ? "true" : "false");
        csv.end();
        point_seeds.push_back(derive_seed(base, g, StreamTag::job));
    }
    o.aggregate = {{"points", static_cast<int>(points.size())},
                   {"localized", counts[0]},
                   {"delocalized", counts[1]},
                   {"uncertain", counts[2]},
                   {"envelope_consistent", envelope_ok},
                   {"raw_estimates", raw}};
    o.seeds["points"] = point_seeds;
    log << "phase-scan " << points.size() << " points: " << counts[0] << " Localized, " << counts[1] << " Delocalized, "
        << counts[2] << " Uncertain; envelopes " << (envelope_ok ? "respected" : "VIOLATED") << '\n';
}

void run_critical_curve(const RunConfig& c, Output& o, std::ostream& log) {
    const std::uint64_t base = *c.base_seed;
    const double p = c.p.front();
    const int d = c.d.front();
    const int n = c.n.front();
    const ClassifierSettings settings{c.kappa, c.shrink_ratio};
    CriticalCurve curve;
    try {
        curve = critical_curve(c.lambda, p, d, n, c.replicas, c.tol, base, settings, resolve_workers(c.workers));
    } catch (const Error& e) {
        job_failed(e.what(), base, "critical-curve p=" + fmt(p) + " d=" + std::to_string(d) + " n=" + std::to_string(n));
    }
    Csv csv(o.dir / "results.csv",
            {"lambda", "h_c_low", "h_c_high", "bound_localized", "bound_delocalized", "stopped_uncertain", "probes"});
    ordered_json brackets = ordered_json::array();
    ordered_json point_seeds = ordered_json::array();
    for (std::size_t i = 0; i < curve.brackets.size(); ++i) {
        const auto& b = curve.brackets[i];
        csv << b.lambda << b.h_low << b.h_high << b.bound_localized << b.bound_delocalized << (b.stopped_uncertain ? "true" : "false")
            << static_cast<int>(b.probes.size());
        csv.end();
        ordered_json probes = ordered_json::array();
        for (const auto& pt : b.probes)
            probes.push_back({{"h", pt.h}, {"psi_p_hat", pt.psi_p_hat}, {"stderr", pt.std_err}, {"verdict", to_string(pt.verdict)}});
        brackets.push_back({{"lambda", b.lambda}, {"h_c_low", b.h_low}, {"h_c_high", b.h_high}, {"probes", probes}});
        point_seeds.push_back(derive_seed(base, i, StreamTag::job));
        log << "critical-curve lambda=" << fmt(b.lambda) << " h_c in [" << fmt(b.h_low) << ", " << fmt(b.h_high) << "]\n";
    }
    o.aggregate = {{"admits_nondecreasing", curve.admits_nondecreasing()},
                   {"within_envelopes", curve.within_envelopes()},
                   {"brackets", brackets}};
    o.seeds["lambdas"] = point_seeds;
}

void run_sample_paths(const RunConfig& c, Output& o, std::ostream& log) {
    const std::uint64_t base = *c.base_seed;
    const auto params = single_params(c);
    const int workers = resolve_workers(c.workers);
    EndpointHistogram hist;
    try {
        hist = endpoint_distribution(params, params.n, c.replicas, c.samples, c.mode, base, workers);
    } catch (const Error& e) {
        job_failed(e.what(), base, params_text(params));
    }

    Csv csv(o.dir / "results.csv", {"bin_lower", "count", "lower_ci", "upper_ci"});
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const auto ci = hist.interval(i);
        csv << hist.bin_lower[i] << hist.counts[i] << ci.lower << ci.upper;
        csv.end();
    }

    // Full paths from the replica-0 disorder on their own stream family.
    if (c.paths > 0) {
        const std::uint64_t path_seed = derive_seed(base, 1, StreamTag::job);
        const GibbsSampler sampler(sample_disorder(params, replica_seed(base, 0)), params);
        std::vector<std::string> header{"path", "t"};
        for (int k = 1; k <= params.d; ++k) header.push_back("x" + std::to_string(k));
        Csv paths(o.dir / "paths.csv", header);
        for (int i = 0; i < c.paths; ++i) {
            Rng rng(path_seed, static_cast<std::uint64_t>(i), StreamTag::skeleton);
            PathSample s;
            try {
                s = sampler.sample(rng);
            } catch (const Error& e) {
                job_failed(e.what(), path_seed, params_text(params) + " path=" + std::to_string(i));
            }
            for (int t = 0; t <= params.n; ++t) {
                paths << i << t;
                for (auto x : s.path.at(t)) paths << static_cast<int>(x);
                paths.end();
            }
        }
        o.seeds["paths"] = path_seed;
    }

    ordered_json agg = {{"mode", to_string(hist.mode)},
                        {"d", hist.d},
                        {"n", hist.n},
                        {"samples", hist.samples},
                        {"bin_width", hist.bin_width},
                        {"skeleton_retries", hist.skeleton_retries}};
    if (params.d == 1) {
        double delta = 0.0;
        if (params.p > 0.0 && params.lambda > 0.0) {
            const auto tables = compute_tables(sample_disorder(params, replica_seed(base, 0)), params,
                                               kernel_for_horizon(params.d, params.n));
            delta = tables.log_psi.back() / params.n;
        }
        try {
            const auto fit = tail_fit(hist, delta);
            agg["tail_fit"] = {{"accepted", fit.accepted},
                               {"diagnostic", fit.diagnostic},
                               {"epsilon_hat", fit.epsilon_hat},
                               {"epsilon_std_err", fit.epsilon_std_err},
                               {"epsilon_ci", interval_json(fit.epsilon_ci)},
                               {"c_hat", fit.c_hat},
                               {"onset", fit.onset},
                               {"bins_used", fit.bins_used},
                               {"quadratic_t", fit.quadratic_t},
                               {"log_drop", fit.log_drop},
                               {"delta_hat", delta},
                               {"ratio_to_half_delta", fit.ratio_to_half_delta}};
            log << "tail fit: " << (fit.accepted ? "accepted" : "rejected") << ", epsilon_hat=" << fmt(fit.epsilon_hat) << '\n';
        } catch (const InvalidArgument& e) {
            agg["tail_fit"] = {{"accepted", false}, {"diagnostic", e.what()}};
            log << "tail fit: " << e.what() << '\n';
        }
    } else if (params.d >= 3 && (params.lambda == 0.0 || params.h >= diffusive_threshold(params.lambda, params.d,
                                                                                       escape_probability(params.d, kEscapeTerms, 1e-9).alpha))) {
        const auto alpha = escape_probability(params.d, kEscapeTerms, 1e-9).alpha;
        const auto rep = diffusive_check(hist.radii, params, alpha);
        ordered_json lower = ordered_json::array();
        for (const auto& t : rep.lower)
            lower.push_back({{"a", t.threshold}, {"empirical", t.empirical}, {"ci", interval_json(t.ci)}, {"free_walk", t.free_walk}});
        agg["diffusive"] = {{"lower", lower},
                            {"far_tail", {{"c", rep.far_tail.threshold},
                                          {"empirical", rep.far_tail.empirical},
                                          {"ci", interval_json(rep.far_tail.ci)},
                                          {"free_walk", rep.far_tail.free_walk}}},
                            {"floor_holds", rep.floor_holds},
                            {"far_tail_small", rep.far_tail_small},
                            {"ks_distance", rep.ks_distance}};
    }
    o.aggregate = agg;
    o.seeds["disorders"] = hist.disorder_seeds;
    log << "sample-paths " << params_text(params) << " mode=" << to_string(hist.mode) << " samples=" << hist.samples << '\n';
}

void run_observables(const RunConfig& c, Output& o, std::ostream& log) {
    const std::uint64_t base = *c.base_seed;
    auto params = single_params(c);
    std::vector<int> horizons = c.horizons.empty() ? std::vector<int>{params.n} : c.horizons;
    params.n = *std::max_element(horizons.begin(), horizons.end());
    std::vector<ReturnCountSummary> stats;
    try {
        stats = return_count_stats(params, horizons, c.replicas, c.samples, base, resolve_workers(c.workers));
    } catch (const Error& e) {
        job_failed(e.what(), base, params_text(params));
    }
    Csv csv(o.dir / "results.csv", {"n", "mean_returns", "std_err", "ci_lower", "ci_upper"});
    ordered_json points = ordered_json::array();
    for (const auto& s : stats) {
        csv << s.n << s.mean << s.std_err << s.ci.lower << s.ci.upper;
        csv.end();
        points.push_back({{"n", s.n}, {"mean_returns", s.mean}, {"std_err", s.std_err}, {"ci", interval_json(s.ci)}});
        log << "observables n=" << s.n << " E[N_n]=" << fmt(s.mean) << " +- " << fmt(s.std_err) << '\n';
    }
    o.aggregate = {{"points", points}};
}

void run_verify(const RunConfig& c, Output& o, std::ostream& log) {
    const std::uint64_t seed = c.base_seed.value_or(kDefaultVerifySeed);
    const auto results = verify_all(seed);
    Csv csv(o.dir / "results.csv", {"property", "passed", "worst"});
    ordered_json props = ordered_json::array();
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        csv << r.name << (r.passed ? "true" : "false") << r.worst;
        csv.end();
        props.push_back({{"property", r.name}, {"passed", r.passed}, {"worst", r.worst}, {"detail", r.detail}});
        log << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    }
    o.aggregate = {{"all_passed", all}, {"properties", props}};
    o.status = all ? 0 : 1;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

ConfigMap resolved_settings(const RunConfig& c) {
    ConfigMap m;
    m["command"] = {to_string(c.command)};
    m["lambda"] = fmt_all(c.lambda);
    m["h"] = fmt_all(c.h);
    m["p"] = fmt_all(c.p);
    m["d"] = fmt_all(c.d);
    m["n"] = fmt_all(c.n);
    if (!c.horizons.empty()) m["horizons"] = fmt_all(c.horizons);
    m["n_max"] = {std::to_string(c.n_max)};
    m["replicas"] = {std::to_string(c.replicas)};
    m["samples"] = {std::to_string(c.samples)};
    m["paths"] = {std::to_string(c.paths)};
    if (c.base_seed) m["base_seed"] = {std::to_string(*c.base_seed)};
    m["workers"] = {std::to_string(c.workers)};
    m["output"] = {c.output};
    m["kappa"] = {fmt(c.kappa)};
    m["shrink_ratio"] = {fmt(c.shrink_ratio)};
    m["tol"] = {fmt(c.tol)};
    m["mode"] = {to_string(c.mode)};
    return m;
}

int run(const RunConfig& config, std::ostream& log) {
    RunConfig c = config;
    if (c.command == Command::verify && !c.base_seed) c.base_seed = kDefaultVerifySeed;
    const auto started = std::chrono::steady_clock::now();
    const std::string started_utc = utc_now();

    Output o;
    o.dir = c.output;
    try {
        std::filesystem::create_directories(o.dir);
    } catch (const std::filesystem::filesystem_error& e) {
        log << "error: cannot create output directory: " << e.what() << '\n';
        return 2;
    }

    try {
        switch (c.command) {
            case Command::kernel: run_kernel(c, o, log); break;
            case Command::free_energy: run_free_energy(c, o, log); break;
            case Command::phase_scan: run_phase_scan(c, o, log); break;
            case Command::critical_curve: run_critical_curve(c, o, log); break;
            case Command::sample_paths: run_sample_paths(c, o, log); break;
            case Command::observables: run_observables(c, o, log); break;
            case Command::verify: run_verify(c, o, log); break;
        }
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return 2;
    } catch (const JobFailure& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        log << "error: job failed (seed " << (c.base_seed ? std::to_string(*c.base_seed) : "none") << "): " << e.what() << '\n';
        return 1;
    }

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    ordered_json manifest;
    manifest["command"] = to_string(c.command);
    manifest["version"] = HETPOL_VERSION;
    manifest["config"] = resolved_settings(c);
    ordered_json seeds = {{"base_seed", c.base_seed ? *c.base_seed : 0}};
    for (auto& [k, v] : o.seeds.items()) seeds[k] = v;
    manifest["seeds"] = seeds;
    manifest["workers_resolved"] = resolve_workers(c.workers);
    manifest["timing"] = {{"started_utc", started_utc}, {"seconds", seconds}};
    manifest["status"] = o.status;
    write_json(o.dir / "manifest.json", manifest);
    write_json(o.dir / "aggregate.json", o.aggregate);
    return o.status;
}

}  // namespace hetpol
