#pragma once
// Named experiments: each builds models, runs the integrator and condenses the
// result into metrics and pass flags. No file I/O happens here.
//
// Rates enter and leave in ordinary Hz; models run in rad/s (2 pi Hz).

#include "chiralspin/dynamics.hpp"
#include "chiralspin/materials.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <charconv>
#include <exception>
#include <map>
#include <thread>

namespace chiralspin {

using json = nlohmann::json;

inline constexpr double asymmetry_floor = 1e-12;
inline constexpr double asymmetry_cap = 1e12;

struct NamedTrajectory {
    std::string label;
    Trajectory trajectory;
};

struct ExperimentReport {
    std::string name;
    json parameters = json::object();
    std::map<std::string, double> metrics;
    std::map<std::string, bool> pass_flags;
    std::map<std::string, std::string> notes;      ///< per-point failures and remarks
    std::vector<std::string> trajectory_refs;      ///< filled in by the emitter
    std::vector<NamedTrajectory> trajectories;

    /// Sets a pass flag; every metric it is derived from must already be recorded.
    void flag(const std::string& key, bool value, std::initializer_list<std::string> uses = {}) {
        for (const auto& m : uses)
            if (!metrics.count(m)) throw DomainError("pass flag '" + key + "' refers to missing metric '" + m + "'");
        pass_flags[key] = value;
    }

    bool all_pass() const {
        return std::all_of(pass_flags.begin(), pass_flags.end(), [](const auto& kv) { return kv.second; });
    }
};

/// Optional replacements for an experiment's own integrator defaults.
struct IntegratorOverrides {
    std::optional<double> dt, t_final, tolerance;
    std::optional<std::size_t> sample_every;

    IntegratorConfig apply(IntegratorConfig c) const {
        if (dt) c.dt = *dt;
        if (t_final) c.t_final = *t_final;
        if (tolerance) c.tolerance = *tolerance;
        if (sample_every) c.sample_every = *sample_every;
        c.validate();
        return c;
    }
};

struct ExperimentOptions {
    std::size_t threads = 1;
    IntegratorOverrides integrator;
};

inline json integrator_json(const IntegratorConfig& c) {
    return {{"dt", c.dt ? json(*c.dt) : json(nullptr)},
            {"t_final", c.t_final},
            {"rate_scale_rad_s", c.rate_scale},
            {"tolerance", c.tolerance},
            {"step_doubling", c.step_doubling},
            {"sample_every", c.sample_every}};
}

/// f(0..n-1) on up to `threads` workers; results and the first failure come back in index order.
template <class F>
auto parallel_map(std::size_t n, std::size_t threads, F f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::vector<R> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

/// Shortest round-trip decimal form, used for metric keys built from parameter values.
inline std::string number_key(double x) {
    char buf[64];
    const double a = std::abs(x);
    const auto fmt = a == 0.0 || (a >= 1e-4 && a < 1e6) ? std::chars_format::fixed : std::chars_format::scientific;
    const auto res = std::to_chars(buf, buf + sizeof buf, x, fmt);
    return {buf, res.ptr};
}

namespace detail {

/// Worst-case physicality diagnostics over every run of an experiment.
struct PhysicalityTally {
    double trace_error = 0.0, trace_drift = 0.0, hermiticity_error = 0.0;
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    double excitation_violation = 0.0;
    bool excitation_checked = false;
    std::size_t runs = 0;

    void add(const Trajectory& t) {
        const auto& d = t.diagnostics;
        trace_error = std::max(trace_error, d.max_trace_error);
        trace_drift = std::max(trace_drift, d.max_trace_drift);
        hermiticity_error = std::max(hermiticity_error, d.max_hermiticity_error);
        min_eigenvalue = std::min(min_eigenvalue, d.min_eigenvalue);
        ++runs;
    }

    /// Excitation number must stay put (closed) or never grow (decaying cascades).
    void add_excitation(const Trajectory& t, bool conserved) {
        excitation_checked = true;
        const auto n = t.real("N");
        for (std::size_t k = 1; k < n.size(); ++k) {
            const double v = conserved ? std::abs(n[k] - n[0]) : n[k] - n[k - 1];
            excitation_violation = std::max(excitation_violation, v);
        }
    }

    void write(ExperimentReport& r) const {
        r.metrics["max_trace_error"] = trace_error;
        r.metrics["max_trace_drift"] = trace_drift;
        r.metrics["max_hermiticity_error"] = hermiticity_error;
        r.metrics["min_eigenvalue"] = runs ? min_eigenvalue : 0.0;
        r.flag("physical", trace_error <= 1e-9 && hermiticity_error <= 1e-9 && min_eigenvalue >= -1e-8,
               {"max_trace_error", "max_hermiticity_error", "min_eigenvalue"});
        if (excitation_checked) {
            r.metrics["max_excitation_violation"] = excitation_violation;
            r.flag("excitation_number", excitation_violation <= 1e-9, {"max_excitation_violation"});
        }
    }
};

inline std::vector<Observable> spin_watch(const HilbertSpace& space, std::size_t n_spins) {
    std::vector<Observable> w;
    for (std::size_t j = 0; j < n_spins; ++j) w.push_back({"P" + std::to_string(j + 1), spin_population(space, j)});
    w.push_back({"N", excitation_number(space)});
    return w;
}

inline double hz_to_rad(double hz) { return materials::two_pi * hz; }

inline double peak(const Trajectory& t, const std::string& label) {
    const auto v = t.real(label);
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

} // namespace detail

// ---------------------------------------------------------------------------

struct EliminationParams {
    double g_hz = 1.0;
    std::vector<double> delta_over_g{25.0, 50.0, 100.0};
    int cutoff = 2;
};

/**
 * Full two-spin + one-mode model from |up down, 0>, fitted exchange rate per
 * detuning ratio. Reports gamma_fit Delta / g^2 so it can be set against 2.
 */
inline ExperimentReport elimination_validation(const EliminationParams& p, const ExperimentOptions& opt = {}) {
    ExperimentReport r;
    r.name = "elimination_validation";
    r.parameters = {{"g_hz", p.g_hz}, {"delta_over_g", p.delta_over_g}, {"cutoff", p.cutoff},
                    {"dispersive_constant_reference", 2.0}};
    if (!(p.g_hz >= 0.0)) throw DomainError("g must be >= 0");
    if (p.cutoff < 1) throw DomainError("Fock cutoff must be >= 1");
    if (p.delta_over_g.empty()) throw DomainError("delta_over_g list is empty");
    for (double x : p.delta_over_g)
        if (!(x >= 10.0)) throw DomainError("delta_over_g values must be >= 10 (dispersive regime)");
    if (p.g_hz == 0.0) {
        r.notes["null_result"] = "g = 0: the spins are uncoupled and nothing is exchanged";
        r.flag("null_result", true);
        return r;
    }

    std::vector<double> ratios = p.delta_over_g;
    std::sort(ratios.begin(), ratios.end());
    ratios.erase(std::unique(ratios.begin(), ratios.end()), ratios.end());
    const std::vector<SpinSite> spins{{0.5, 0.0, "A"}, {0.5, 1.0, "B"}};

    struct Point {
        Trajectory traj;
        IntegratorConfig cfg;
        std::optional<double> gamma_rad;
        std::string error;
    };
    auto points = parallel_map(ratios.size(), opt.threads, [&](std::size_t i) {
        const double ratio = ratios[i];
        const double g = detail::hz_to_rad(p.g_hz), delta = ratio * g;
        const auto m = build_full_model(spins, {ModeSpec::rotating(delta, g, p.cutoff)});
        IntegratorConfig cfg;
        cfg.rate_scale = delta;
        cfg.dt = 0.05;
        cfg.sample_every = 20;
        cfg.t_final = 1.8 * std::numbers::pi * ratio * ratio / 2.0; // ~1.8 swap times, in 1/Delta
        cfg = opt.integrator.apply(cfg);
        auto watch = detail::spin_watch(m.space, 2);
        watch.push_back({"n_phonon", site_boson(m.space, 2).a_dagger * site_boson(m.space, 2).a});
        Point pt{evolve(m, DensityMatrix::basis(m.space, {0, 1, 0}), cfg, watch), cfg, std::nullopt, {}};
        try {
            pt.gamma_rad = fit_exchange_rate(pt.traj, "P2");
        } catch (const FitError& e) {
            pt.error = e.what();
        }
        return pt;
    });

    detail::PhysicalityTally tally;
    bool bound_ok = true;
    json configs = json::array();
    std::vector<std::optional<double>> constants;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        const auto& pt = points[i];
        const std::string key = number_key(ratios[i]);
        tally.add(pt.traj);
        tally.add_excitation(pt.traj, true);
        configs.push_back(integrator_json(pt.cfg));
        const double max_n = detail::peak(pt.traj, "n_phonon");
        const double bound = 4.0 / (ratios[i] * ratios[i]);
        r.metrics["max_phonon_" + key] = max_n;
        r.metrics["phonon_bound_" + key] = bound;
        bound_ok = bound_ok && max_n <= bound;
        if (pt.gamma_rad) {
            const double gamma_hz = *pt.gamma_rad / materials::two_pi;
            const double delta_hz = ratios[i] * p.g_hz;
            r.metrics["gamma_fit_hz_" + key] = gamma_hz;
            r.metrics["constant_" + key] = gamma_hz * delta_hz / (p.g_hz * p.g_hz);
            constants.push_back(r.metrics["constant_" + key]);
        } else {
            r.notes["fit_" + key] = pt.error;
            constants.push_back(std::nullopt);
        }
        r.trajectories.push_back({"elimination_" + key, pt.traj});
    }
    r.parameters["integrator"] = configs;
    r.flag("phonon_bound", bound_ok);
    if (ratios.size() >= 2) {
        const auto& a = constants[ratios.size() - 2];
        const auto& b = constants.back();
        if (a && b) {
            r.metrics["constant_convergence"] = std::abs(*a - *b) / std::abs(*b);
            r.flag("converged", r.metrics["constant_convergence"] <= 0.1, {"constant_convergence"});
        } else {
            r.flag("converged", false);
        }
    }
    if (constants.back()) r.metrics["constant_over_reference"] = *constants.back() / 2.0;
    tally.write(r);
    return r;
}

// ---------------------------------------------------------------------------

struct TransferParams {
    double gamma_hz = 1.0;
    double gamma_prime_hz = 0.0;
    double kd = 0.0;            ///< k_z d, rad
    double t_final_rate = 8.0;  ///< duration in units of 1 / (2 pi max(gamma, gamma'))
};

namespace detail {

struct TransferRuns {
    Trajectory forward, backward;
    IntegratorConfig cfg;
    double forward_peak = 0.0, backward_peak = 0.0, asymmetry = 0.0, deviation = 0.0;
};

inline TransferRuns run_transfer(const TransferParams& p, const IntegratorOverrides& over) {
    if (!(p.gamma_hz >= 0.0) || !(p.gamma_prime_hz >= 0.0)) throw DomainError("cascade rates must be >= 0");
    const double scale = std::max(p.gamma_hz, p.gamma_prime_hz);
    if (!(scale > 0.0)) throw DomainError("at least one of gamma, gamma' must be > 0");
    const auto spec = CascadeSpec::pair(hz_to_rad(p.gamma_hz), hz_to_rad(p.gamma_prime_hz), p.kd);
    const auto m = build_bidirectional_model(spec);
    IntegratorConfig cfg;
    cfg.rate_scale = hz_to_rad(scale);
    cfg.dt = 2e-3;
    cfg.sample_every = 5;
    cfg.t_final = p.t_final_rate;
    cfg = over.apply(cfg);
    const auto watch = spin_watch(m.space, 2);

    TransferRuns out;
    out.cfg = cfg;
    out.forward = evolve(m, DensityMatrix::basis(m.space, {0, 1}), cfg, watch);
    out.backward = evolve(m, DensityMatrix::basis(m.space, {1, 0}), cfg, watch);
    out.forward_peak = peak(out.forward, "P2");
    out.backward_peak = peak(out.backward, "P1");
    // below the floor the backward channel is indistinguishable from closed
    const double a = out.forward_peak / std::max(out.backward_peak, asymmetry_floor);
    out.asymmetry = out.backward_peak < asymmetry_floor || a > asymmetry_cap
                        ? std::numeric_limits<double>::infinity()
                        : a;
    // A <-> B relabelling: forward P1, P2 against backward P2, P1
    const auto f1 = out.forward.real("P1"), f2 = out.forward.real("P2");
    const auto b1 = out.backward.real("P1"), b2 = out.backward.real("P2");
    for (std::size_t k = 0; k < f1.size(); ++k)
        out.deviation = std::max({out.deviation, std::abs(f1[k] - b2[k]), std::abs(f2[k] - b1[k])});
    return out;
}

} // namespace detail

/// Forward (|up down>) versus backward (|down up>) transfer under the bidirectional model.
inline ExperimentReport transfer_asymmetry(const TransferParams& p, const ExperimentOptions& opt = {}) {
    ExperimentReport r;
    r.name = "transfer_asymmetry";
    r.parameters = {{"gamma_hz", p.gamma_hz}, {"gamma_prime_hz", p.gamma_prime_hz}, {"kd_rad", p.kd},
                    {"t_final_rate", p.t_final_rate}};
    const auto runs = detail::run_transfer(p, opt.integrator);
    r.parameters["integrator"] = integrator_json(runs.cfg);
    r.metrics["forward_peak"] = runs.forward_peak;
    r.metrics["backward_peak"] = runs.backward_peak;
    r.metrics["asymmetry"] = runs.asymmetry;
    r.metrics["reciprocal_deviation"] = runs.deviation;
    r.flag("forward_transfer", runs.forward_peak > 0.1 || p.gamma_hz == 0.0, {"forward_peak"});
    if (p.gamma_prime_hz == 0.0) r.flag("backward_blocked", runs.backward_peak <= 1e-10, {"backward_peak"});
    if (p.gamma_prime_hz == p.gamma_hz) r.flag("reciprocal", runs.deviation <= 1e-9, {"reciprocal_deviation"});

    detail::PhysicalityTally tally;
    for (const auto* t : {&runs.forward, &runs.backward}) {
        tally.add(*t);
        tally.add_excitation(*t, false);
    }
    tally.write(r);
    r.trajectories.push_back({"forward", runs.forward});
    r.trajectories.push_back({"backward", runs.backward});
    return r;
}

// ---------------------------------------------------------------------------

struct SweepParams {
    double gamma_hz = 1.0;
    double kd = 0.0;
    std::vector<double> ratios{0.0, 0.25, 0.5, 0.75, 1.0};
    double t_final_rate = 8.0;
};

/// Asymmetry as gamma'/gamma runs from blocked to reciprocal.
inline ExperimentReport reciprocity_sweep(const SweepParams& p, const ExperimentOptions& opt = {}) {
    ExperimentReport r;
    r.name = "reciprocity_sweep";
    if (p.ratios.empty()) throw DomainError("ratio list is empty");
    if (!(p.gamma_hz > 0.0)) throw DomainError("gamma must be > 0");
    std::vector<double> ratios = p.ratios;
    for (double x : ratios)
        if (!(x >= 0.0)) throw DomainError("gamma'/gamma ratios must be >= 0");
    std::sort(ratios.begin(), ratios.end());
    ratios.erase(std::unique(ratios.begin(), ratios.end()), ratios.end());
    r.parameters = {{"gamma_hz", p.gamma_hz}, {"kd_rad", p.kd}, {"ratios", ratios}, {"t_final_rate", p.t_final_rate}};

    // a common time axis (in 1/gamma) keeps every point comparable
    IntegratorOverrides over = opt.integrator;
    const double max_ratio = std::max(1.0, ratios.back());
    auto runs = parallel_map(ratios.size(), opt.threads, [&](std::size_t i) {
        TransferParams tp{p.gamma_hz, ratios[i] * p.gamma_hz, p.kd, p.t_final_rate * max_ratio};
        return detail::run_transfer(tp, over);
    });

    detail::PhysicalityTally tally;
    bool monotone = true;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        const std::string key = number_key(ratios[i]);
        r.metrics["asymmetry_" + key] = runs[i].asymmetry;
        r.metrics["forward_peak_" + key] = runs[i].forward_peak;
        r.metrics["backward_peak_" + key] = runs[i].backward_peak;
        if (i > 0 && runs[i].asymmetry > runs[i - 1].asymmetry) monotone = false;
        for (const auto* t : {&runs[i].forward, &runs[i].backward}) {
            tally.add(*t);
            tally.add_excitation(*t, false);
        }
        r.trajectories.push_back({"forward_" + key, runs[i].forward});
        r.trajectories.push_back({"backward_" + key, runs[i].backward});
    }
    r.parameters["integrator"] = integrator_json(runs.front().cfg);
    r.flag("monotone", monotone);
    if (ratios.front() == 0.0) r.flag("blocked_limit", std::isinf(r.metrics["asymmetry_0"]), {"asymmetry_0"});
    if (auto it = std::find(ratios.begin(), ratios.end(), 1.0); it != ratios.end()) {
        const double a = r.metrics["asymmetry_1"];
        r.flag("reciprocal_limit", a >= 0.99 && a <= 1.01, {"asymmetry_1"});
    }
    tally.write(r);
    return r;
}

// ---------------------------------------------------------------------------

struct ChainParams {
    std::size_t n = 3;
    double gamma_hz = 1.0;
    double kd = 0.0;
    double t_final_rate = 12.0; ///< in units of 1 / (2 pi gamma)
};

inline constexpr std::size_t max_chain_dimension = 4096;

namespace detail {

/// cos(t)|up> + e^{ip} sin(t)|down> per site, a fixed generic product state.
inline DensityMatrix chain_probe_state(std::size_t n) {
    DensityMatrix rho;
    for (std::size_t j = 0; j < n; ++j) {
        const double t = 0.3 + 0.25 * static_cast<double>(j), ph = 0.7 * static_cast<double>(j + 1);
        Vector v(2);
        v << std::cos(t), std::exp(I * ph) * std::sin(t);
        const auto single = DensityMatrix::pure(HilbertSpace::spins(1), v);
        rho = j == 0 ? single : tensor(rho, single);
    }
    return rho;
}

/// Observables whose expectations are the matrix elements rho_ba of the first `k` spins.
inline std::vector<Observable> prefix_elements(const HilbertSpace& space, std::size_t k) {
    const auto dk = static_cast<Eigen::Index>(std::size_t{1} << k);
    const auto rest = static_cast<Eigen::Index>(space.dim()) / dk;
    std::vector<Observable> out;
    for (Eigen::Index a = 0; a < dk; ++a)
        for (Eigen::Index b = 0; b < dk; ++b) {
            Matrix e = Matrix::Zero(dk, dk);
            e(a, b) = 1.0;
            out.push_back({"e" + std::to_string(b) + "_" + std::to_string(a),
                           Operator(space, kron(e, Matrix::Identity(rest, rest)))});
        }
    return out;
}

} // namespace detail

/**
 * N-spin forward chain: arrival order with spin 1 excited, no-back-action for every
 * prefix from a generic product state, and silence upstream with spin N excited.
 */
inline ExperimentReport cascade_chain(const ChainParams& p, const ExperimentOptions& opt = {}) {
    ExperimentReport r;
    r.name = "cascade_chain";
    r.parameters = {{"n", p.n}, {"gamma_hz", p.gamma_hz}, {"kd_rad", p.kd}, {"t_final_rate", p.t_final_rate}};
    if (p.n < 2 || p.n > 5) throw DomainError("chain length must be in 2..5");
    if ((std::size_t{1} << p.n) > max_chain_dimension) throw DomainError("chain Hilbert space exceeds 4096");
    if (!(p.gamma_hz > 0.0)) throw DomainError("gamma must be > 0");

    const double gamma = detail::hz_to_rad(p.gamma_hz);
    auto spec_for = [&](std::size_t n) { return CascadeSpec::chain(n, gamma, p.kd); };
    IntegratorConfig cfg;
    cfg.rate_scale = gamma;
    cfg.dt = 1e-2;
    cfg.sample_every = 2;
    cfg.t_final = p.t_final_rate;
    cfg = opt.integrator.apply(cfg);
    r.parameters["integrator"] = integrator_json(cfg);

    const auto full = build_chain_model(spec_for(p.n));
    const auto watch = detail::spin_watch(full.space, p.n);
    std::vector<std::size_t> first(p.n, 1), last(p.n, 1);
    first.front() = 0;
    last.back() = 0;

    // tasks: 0 = arrival, 1 = upstream silence, 2.. = prefix comparisons j = 1..n-1
    struct Result {
        Trajectory a, b;
        double sup = 0.0;
    };
    const auto probe = detail::chain_probe_state(p.n);
    auto results = parallel_map(p.n + 1, opt.threads, [&](std::size_t task) {
        Result res;
        if (task == 0) {
            res.a = evolve(full, DensityMatrix::basis(full.space, first), cfg, watch);
        } else if (task == 1) {
            res.a = evolve(full, DensityMatrix::basis(full.space, last), cfg, watch);
        } else {
            const std::size_t j = task - 1;
            std::set<std::size_t> keep;
            for (std::size_t k = 0; k < j; ++k) keep.insert(k);
            const auto reduced0 = partial_trace(probe, keep);
            const auto prefix =
                j == 1 ? build_single_decay_model(0.5, gamma) : build_chain_model(spec_for(j));
            auto w_full = detail::prefix_elements(full.space, j);
            auto w_pref = detail::prefix_elements(prefix.space, j);
            w_full.push_back({"N", excitation_number(full.space)});
            w_pref.push_back({"N", excitation_number(prefix.space)});
            res.a = evolve(full, probe, cfg, w_full);
            res.b = evolve(prefix, reduced0, cfg, w_pref);
            for (std::size_t k = 0; k + 1 < w_full.size(); ++k) {
                const auto& x = res.a.series[k].values;
                const auto& y = res.b.series[k].values;
                for (std::size_t s = 0; s < x.size(); ++s) res.sup = std::max(res.sup, std::abs(x[s] - y[s]));
            }
        }
        return res;
    });

    detail::PhysicalityTally tally;
    auto tally_run = [&](const Trajectory& t) {
        tally.add(t);
        tally.add_excitation(t, false);
    };

    const auto& arrival = results[0].a;
    tally_run(arrival);
    bool ordered = true;
    double prev = -1.0;
    for (std::size_t j = 0; j < p.n; ++j) {
        const auto v = arrival.real("P" + std::to_string(j + 1));
        const auto it = std::max_element(v.begin(), v.end());
        const double t_peak = arrival.times[static_cast<std::size_t>(it - v.begin())] / cfg.rate_scale;
        r.metrics["arrival_time_s_" + std::to_string(j + 1)] = t_peak;
        r.metrics["peak_population_" + std::to_string(j + 1)] = *it;
        if (t_peak < prev) ordered = false;
        prev = t_peak;
    }
    r.flag("arrival_ordered", ordered);

    const auto& silence = results[1].a;
    tally_run(silence);
    double leak = 0.0;
    for (std::size_t j = 0; j + 1 < p.n; ++j) leak = std::max(leak, detail::peak(silence, "P" + std::to_string(j + 1)));
    r.metrics["upstream_leak"] = leak;
    r.flag("upstream_silent", leak <= 1e-10, {"upstream_leak"});

    double worst = 0.0;
    for (std::size_t j = 1; j < p.n; ++j) {
        const auto& res = results[j + 1];
        tally_run(res.a);
        tally_run(res.b);
        r.metrics["back_action_" + std::to_string(j)] = res.sup;
        worst = std::max(worst, res.sup);
    }
    r.metrics["back_action_max"] = worst;
    r.flag("no_back_action", worst <= 1e-8, {"back_action_max"});
    tally.write(r);

    r.trajectories.push_back({"arrival", arrival});
    r.trajectories.push_back({"last_excited", silence});
    return r;
}

// ---------------------------------------------------------------------------

struct DecoherenceParams {
    double gamma0_hz = 1.0;
    std::vector<double> drive_u{1e-5, 3e-5, 1e-4, 3e-4};
    double delta_hz = 1e3;
    std::string material = "alpha-SiO2";
    materials::ResonatorGeometry geometry{1e-3, 1e-4, 1e-4};
};

/// Driven nuclear-spin gamma(u) against an intrinsic decoherence rate gamma0.
inline ExperimentReport decoherence_budget(const DecoherenceParams& p, const materials::MaterialParams& mat) {
    ExperimentReport r;
    r.name = "decoherence_budget";
    r.parameters = {{"gamma0_hz", p.gamma0_hz},
                    {"drive_u", p.drive_u},
                    {"delta_hz", p.delta_hz},
                    {"material", mat.name},
                    {"geometry_m", {p.geometry.l, p.geometry.w, p.geometry.h}}};
    if (!(p.gamma0_hz >= 0.0)) throw DomainError("gamma0 must be >= 0");
    if (p.drive_u.empty()) throw DomainError("drive_u list is empty");

    auto gamma_at = [&](double u) {
        materials::BudgetOptions o;
        o.drive_u = u;
        return materials::coupling_table(mat, p.geometry, materials::SpinKind::nuclear, p.delta_hz, o);
    };
    bool quadratic = true;
    for (double u : p.drive_u) {
        const std::string key = number_key(u);
        const auto b = gamma_at(u);
        const double gamma = b.gamma();
        r.metrics["g_hz_" + key] = b.g();
        r.metrics["gamma_hz_" + key] = gamma;
        r.metrics["ratio_" + key] =
            p.gamma0_hz > 0.0 ? gamma / p.gamma0_hz : std::numeric_limits<double>::infinity();
        const double doubled = gamma_at(2.0 * u).gamma();
        if (gamma > 0.0 && std::abs(doubled / gamma - 4.0) > 1e-12) quadratic = false;
        if (!b.rows[0].flags.empty()) r.notes["flags_" + key] = b.rows[0].flags.front();
    }
    // gamma(u) = 2 (xi u)^2 / delta = gamma0
    const double crossover = p.gamma0_hz > 0.0 && mat.xi_I > 0.0
                                 ? std::sqrt(p.gamma0_hz * std::abs(p.delta_hz) / 2.0) / mat.xi_I
                                 : (p.gamma0_hz == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.metrics["crossover_u"] = crossover;
    r.flag("quadratic_scaling", quadratic);
    const double u_max = *std::max_element(p.drive_u.begin(), p.drive_u.end());
    r.flag("exceeds_gamma0", u_max > crossover, {"crossover_u"});
    return r;
}

// ---------------------------------------------------------------------------

/// The four-row coupling table as a report; row keys pp, mp, pm, mm name (+-k_z, +-L).
inline ExperimentReport coupling_budget(const materials::MaterialParams& mat, const materials::ResonatorGeometry& geom,
                                        materials::SpinKind kind, double delta_hz,
                                        const materials::BudgetOptions& o = {}) {
    ExperimentReport r;
    r.name = "coupling_budget";
    r.parameters = {{"material", mat.name},
                    {"spin_kind", std::string(materials::to_string(kind))},
                    {"delta_hz", delta_hz},
                    {"geometry_m", {geom.l, geom.w, geom.h}},
                    {"mode_index", o.n},
                    {"drive_u", o.drive_u ? json(*o.drive_u) : json(nullptr)},
                    {"g_prime_hz", o.g_prime_hz ? json(*o.g_prime_hz) : json(nullptr)}};
    const auto b = materials::coupling_table(mat, geom, kind, delta_hz, o);
    static constexpr std::array<const char*, 4> keys{"pp", "mp", "pm", "mm"};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& row = b.rows[i];
        const std::string k = keys[i];
        r.metrics["omega_rad_s_" + k] = row.omega;
        r.metrics["k_z_rad_m_" + k] = row.k_z;
        r.metrics["strain_" + k] = row.u_zpf;
        r.metrics["g_hz_" + k] = row.g_hz;
        r.metrics["detuning_hz_" + k] = row.detuning_hz;
        r.metrics["gamma_hz_" + k] = row.gamma_hz;
        std::string flags;
        for (const auto& f : row.flags) flags += (flags.empty() ? "" : ",") + f;
        r.notes["row_" + k] = row.mode + " " + row.spin_phonon + " -> " + row.spin_spin +
                              (flags.empty() ? "" : " [" + flags + "]");
    }
    r.metrics["g_hz"] = b.g();
    r.metrics["gamma_hz"] = b.gamma();
    r.metrics["gamma_prime_hz"] = b.gamma_prime();
    r.metrics["non_reciprocity"] = b.non_reciprocity();
    r.metrics["spin_frequency_hz"] = b.spin_frequency_hz;
    r.metrics["g_hz_ordinary_convention"] = b.g_ordinary_convention;
    r.metrics["gamma_hz_ordinary_convention"] = b.gamma_ordinary_convention;
    r.flag("gamma_prime_below_1hz", b.gamma_prime() < 1.0, {"gamma_prime_hz"});
    r.flag("non_reciprocal", b.non_reciprocity() >= 1e3, {"non_reciprocity"});
    r.flag("observable_coupling", b.g() >= materials::too_weak_g_hz, {"g_hz"});
    return r;
}

enum class ExcitationCheck { none, conserved, non_increasing };

/// A plain run: one model, one initial state, the watched observables.
inline ExperimentReport simulate(const std::string& label, const LindbladModel& model, const DensityMatrix& rho0,
                                 const IntegratorConfig& cfg, const std::vector<Observable>& watch,
                                 ExcitationCheck check = ExcitationCheck::none) {
    ExperimentReport r;
    r.name = "simulate";
    r.parameters["integrator"] = integrator_json(cfg);
    auto w = watch;
    const bool has_n = std::any_of(w.begin(), w.end(), [](const Observable& o) { return o.label == "N"; });
    if (!has_n && check != ExcitationCheck::none) w.push_back({"N", excitation_number(model.space)});
    auto traj = evolve(model, rho0, cfg, w);
    detail::PhysicalityTally tally;
    tally.add(traj);
    if (check != ExcitationCheck::none) tally.add_excitation(traj, check == ExcitationCheck::conserved);
    tally.write(r);
    r.metrics["steps"] = static_cast<double>(traj.diagnostics.steps);
    r.metrics["max_local_error"] = traj.diagnostics.max_local_error;
    r.trajectories.push_back({label, std::move(traj)});
    return r;
}

} // namespace chiralspin
