#pragma once
// Time evolution of Lindblad models and non-Hermitian Hamiltonians.
//
// Every evolution is nondimensionalized by IntegratorConfig::rate_scale: the
// generator is divided by it and times are reported in units of 1/rate_scale.
// Steps are fixed-size classical RK4 with a step-doubling (Richardson) estimate.

#include "chiralspin/core.hpp"
#include "chiralspin/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace chiralspin {

struct IntegratorConfig {
    std::optional<double> dt; ///< dimensionless; default 1e-3 / ||generator||
    double t_final = 1.0;     ///< dimensionless
    double rate_scale = 1.0;  ///< rad/s
    double tolerance = 1e-10; ///< per-step trace drift bound
    bool step_doubling = true;
    std::size_t sample_every = 1;

    void validate() const {
        if (dt && !(*dt > 0.0)) throw DomainError("integrator dt must be > 0");
        if (!(t_final >= 0.0)) throw DomainError("integrator t_final must be >= 0");
        if (!(rate_scale > 0.0)) throw DomainError("integrator rate_scale must be > 0");
        if (!(tolerance > 0.0)) throw DomainError("integrator tolerance must be > 0");
        if (sample_every < 1) throw DomainError("integrator sample_every must be >= 1");
    }
};

struct Observable {
    std::string label;
    Operator op;
};

struct Series {
    std::string label;
    std::vector<cplx> values;
};

struct Diagnostics {
    std::size_t steps = 0;
    double dt = 0.0;
    double max_trace_drift = 0.0;      ///< largest |tr rho_{n+1} - tr rho_n|
    double max_trace_error = 0.0;      ///< largest |tr rho - 1| at samples
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    double max_local_error = 0.0;      ///< step-doubling estimate, sup-norm
    bool flat = false;                 ///< stationary initial state, no steps taken
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Series> series;
    DensityMatrix final_state;
    double rate_scale = 1.0;
    Diagnostics diagnostics;

    const std::vector<cplx>& observable(const std::string& label) const {
        for (const auto& s : series)
            if (s.label == label) return s.values;
        throw DomainError("trajectory has no observable '" + label + "'");
    }

    std::vector<double> real(const std::string& label) const {
        const auto& v = observable(label);
        std::vector<double> out(v.size());
        std::transform(v.begin(), v.end(), out.begin(), [](cplx c) { return c.real(); });
        return out;
    }
};

namespace detail {

/// Precomputed scaled generator  rho -> A rho + rho A^dag + sum_k r_k z_k rho z_k^dag.
struct Generator {
    Matrix a; // -i H_eff / rate_scale
    std::vector<std::pair<double, Matrix>> jumps;

    Matrix operator()(const Matrix& rho) const {
        Matrix out(rho.rows(), rho.cols());
        out.noalias() = a * rho;
        out.noalias() += rho * a.adjoint();
        Matrix tmp(rho.rows(), rho.cols());
        for (const auto& [r, z] : jumps) {
            tmp.noalias() = rho * z.adjoint();
            out.noalias() += r * (z * tmp);
        }
        return out;
    }

    double norm() const {
        double n = a.cwiseAbs().rowwise().sum().maxCoeff();
        for (const auto& [r, z] : jumps) {
            const double zn = z.cwiseAbs().rowwise().sum().maxCoeff();
            n += r * zn * zn;
        }
        return n;
    }
};

inline Generator make_generator(const Operator& h_nh, const std::vector<Jump>& jumps, double scale) {
    Generator g{(-I / scale) * h_nh.matrix(), {}};
    for (const auto& j : jumps)
        if (j.rate != 0.0) g.jumps.emplace_back(j.rate / scale, j.op.matrix());
    return g;
}

template <class State, class Rhs>
State rk4_step(const State& y, double h, const Rhs& f) {
    const State k1 = f(y);
    const State k2 = f((y + (0.5 * h) * k1).eval());
    const State k3 = f((y + (0.5 * h) * k2).eval());
    const State k4 = f((y + h * k3).eval());
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One step; with doubling the returned state is the Richardson-extrapolated value.
template <class State, class Rhs>
State advance(const State& y, double h, const Rhs& f, bool doubling, double& local_error) {
    if (!doubling) return rk4_step(y, h, f);
    const State full = rk4_step(y, h, f);
    const State half = rk4_step(rk4_step(y, 0.5 * h, f), 0.5 * h, f);
    const State diff = half - full;
    local_error = diff.cwiseAbs().maxCoeff() / 15.0;
    return half + diff / 15.0;
}

struct Grid {
    std::size_t steps;
    double dt;
};

inline Grid make_grid(const IntegratorConfig& cfg, double generator_norm) {
    cfg.validate();
    double dt = cfg.dt ? *cfg.dt : (generator_norm > 0.0 ? 1e-3 / generator_norm : cfg.t_final);
    if (cfg.t_final == 0.0) return {0, dt};
    if (!(dt > 0.0)) dt = cfg.t_final;
    const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_final / dt - 1e-9));
    const std::size_t n = std::max<std::size_t>(steps, 1);
    return {n, cfg.t_final / static_cast<double>(n)};
}

inline bool is_sample(std::size_t step, std::size_t total, std::size_t every) {
    return step == 0 || step == total || step % every == 0;
}

inline Trajectory evolve_density(const Generator& gen, const DensityMatrix& rho0, const IntegratorConfig& cfg,
                                 const std::vector<Observable>& watch, bool check_trace) {
    const Grid grid = make_grid(cfg, gen.norm());
    Trajectory traj;
    traj.rate_scale = cfg.rate_scale;
    traj.diagnostics.dt = grid.dt;
    for (const auto& w : watch) {
        require_same_space(w.op.space(), rho0.space(), "watched observable");
        traj.series.push_back({w.label, {}});
    }

    Matrix rho = rho0.matrix();
    const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
    const bool flat = gen(rho).cwiseAbs().maxCoeff() <= 1e-15 * scale;
    traj.diagnostics.flat = flat;

    auto record = [&](std::size_t step) {
        traj.times.push_back(static_cast<double>(step) * grid.dt);
        const DensityMatrix state(rho0.space(), rho);
        for (std::size_t k = 0; k < watch.size(); ++k)
            traj.series[k].values.push_back(expectation(watch[k].op, state));
        auto& d = traj.diagnostics;
        if (check_trace) d.max_trace_error = std::max(d.max_trace_error, std::abs(state.trace() - 1.0));
        d.max_hermiticity_error = std::max(d.max_hermiticity_error, state.hermiticity_error());
        d.min_eigenvalue = std::min(d.min_eigenvalue, state.min_eigenvalue());
    };

    record(0);
    cplx tr = rho.trace();
    for (std::size_t step = 1; step <= grid.steps; ++step) {
        if (!flat) {
            double err = 0.0;
            rho = advance(rho, grid.dt, gen, cfg.step_doubling, err);
            traj.diagnostics.max_local_error = std::max(traj.diagnostics.max_local_error, err);
            const cplx tr_new = rho.trace();
            const double drift = std::abs(tr_new - tr);
            traj.diagnostics.max_trace_drift = std::max(traj.diagnostics.max_trace_drift, drift);
            if (check_trace && drift > cfg.tolerance)
                throw IntegrationError("trace drift " + std::to_string(drift) + " exceeds tolerance", step);
            if (!std::isfinite(std::abs(tr_new))) throw IntegrationError("non-finite state", step);
            tr = tr_new;
            traj.diagnostics.steps = step;
        }
        if (is_sample(step, grid.steps, cfg.sample_every)) record(step);
    }
    traj.final_state = DensityMatrix(rho0.space(), rho);
    return traj;
}

} // namespace detail

/// Integrates d rho/dt = -i[H, rho] + sum rate D[z] rho, recording watched expectations.
inline Trajectory evolve(const LindbladModel& model, const DensityMatrix& rho0, const IntegratorConfig& cfg,
                         const std::vector<Observable>& watch = {}) {
    model.validate();
    require_same_space(model.space, rho0.space(), "evolve");
    rho0.check_physical();
    const auto gen = detail::make_generator(effective_hamiltonian(model), model.jumps, cfg.rate_scale);
    return detail::evolve_density(gen, rho0, cfg, watch, true);
}

/**
 * Evolution under a non-Hermitian Hamiltonian.
 *
 * Without jumps the (unnormalized) pure state follows d psi/dt = -i H_NH psi and the
 * squared norm is recorded as the "norm" series; final_state is |psi><psi|.
 * With jumps the density matrix follows -i(H_NH rho - rho H_NH^dag) + rate z rho z^dag.
 */
inline Trajectory evolve_nonhermitian(const Operator& h_nh, const Vector& psi0, const IntegratorConfig& cfg,
                                      bool include_jumps, const std::optional<Jump>& jump = std::nullopt,
                                      const std::vector<Observable>& watch = {}) {
    const HilbertSpace& space = h_nh.space();
    if (psi0.size() != static_cast<Eigen::Index>(space.dim())) throw DomainError("psi0 dimension mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw DomainError("psi0 must be normalized");

    if (include_jumps) {
        if (!jump) throw DomainError("include_jumps requires a jump operator");
        require_same_space(space, jump->op.space(), "jump operator");
        const auto gen = detail::make_generator(h_nh, {*jump}, cfg.rate_scale);
        return detail::evolve_density(gen, DensityMatrix::pure(space, psi0), cfg, watch, true);
    }

    const Matrix a = (-I / cfg.rate_scale) * h_nh.matrix();
    auto f = [&a](const Vector& psi) -> Vector { return a * psi; };
    const detail::Grid grid = detail::make_grid(cfg, a.cwiseAbs().rowwise().sum().maxCoeff());

    Trajectory traj;
    traj.rate_scale = cfg.rate_scale;
    traj.diagnostics.dt = grid.dt;
    for (const auto& w : watch) {
        require_same_space(w.op.space(), space, "watched observable");
        traj.series.push_back({w.label, {}});
    }
    traj.series.push_back({"norm", {}});

    Vector psi = psi0;
    const bool flat = f(psi).cwiseAbs().maxCoeff() <= 1e-15;
    traj.diagnostics.flat = flat;
    auto record = [&](std::size_t step) {
        traj.times.push_back(static_cast<double>(step) * grid.dt);
        for (std::size_t k = 0; k < watch.size(); ++k)
            traj.series[k].values.push_back(psi.dot(watch[k].op.matrix() * psi));
        traj.series.back().values.push_back(psi.squaredNorm());
    };
    record(0);
    for (std::size_t step = 1; step <= grid.steps; ++step) {
        if (!flat) {
            double err = 0.0;
            psi = detail::advance(psi, grid.dt, f, cfg.step_doubling, err);
            traj.diagnostics.max_local_error = std::max(traj.diagnostics.max_local_error, err);
            if (!std::isfinite(psi.squaredNorm())) throw IntegrationError("non-finite state", step);
            traj.diagnostics.steps = step;
        }
        if (detail::is_sample(step, grid.steps, cfg.sample_every)) record(step);
    }
    traj.final_state = DensityMatrix::pure(space, psi);
    return traj;
}

/**
 * Exchange rate from the first maximum of a transferred population.
 *
 * A full swap under i gamma (S+_A S-_B - h.c.) gives P_B = sin^2(gamma t), so
 * gamma = pi / (2 t*). The first lobe ends once the signal has fallen halfway from
 * its running maximum back toward its running minimum. t* is the vertex of a
 * weighted least-squares parabola over the top 10% of the lobe, which averages out
 * small fast oscillations riding on a slow swap.
 * Returns rad/s (trajectory times are in units of 1/rate_scale).
 */
inline double fit_exchange_rate(const Trajectory& traj, const std::string& label) {
    const auto v = traj.real(label);
    const auto& t = traj.times;
    if (v.size() < 3) throw FitError("trajectory too short to locate a maximum");

    std::size_t arg = 0;
    double vmax = v[0], vmin = v[0];
    bool lobe_closed = false;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > vmax) {
            vmax = v[i];
            arg = i;
        }
        if (arg == 0) vmin = std::min(vmin, v[i]);
        const double rise = vmax - vmin;
        if (arg > 0 && rise > 0.0 && v[i] < vmax - 0.5 * rise) {
            lobe_closed = true;
            break;
        }
    }
    if (!lobe_closed || arg == 0 || arg + 1 >= v.size())
        throw FitError("no interior maximum of '" + label + "' within t_final");

    const double floor = vmax - 0.1 * (vmax - vmin);
    std::size_t lo = arg - 1, hi = arg + 1;
    while (lo > 0 && v[lo - 1] >= floor) --lo;
    while (hi + 1 < v.size() && v[hi + 1] >= floor) ++hi;
    const double half = std::min(t[hi] - t[arg], t[arg] - t[lo]);

    // weighted parabola vertex over samples within `half` of the current estimate;
    // recentring keeps the window symmetric so the quartic part of the lobe does not
    // shift it, and the (1 - x^2)^2 taper stops edge samples from jumping in and out
    auto vertex = [&](double centre) {
        Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
        Eigen::Vector3d aty = Eigen::Vector3d::Zero();
        for (std::size_t i = lo; i <= hi; ++i) {
            const double x = (t[i] - centre) / half;
            if (std::abs(x) >= 1.0) continue;
            const double wt = (1.0 - x * x) * (1.0 - x * x);
            const Eigen::Vector3d row(1.0, x, x * x);
            ata += wt * row * row.transpose();
            aty += wt * row * v[i];
        }
        const Eigen::Vector3d c = ata.ldlt().solve(aty);
        return c(2) < 0.0 ? std::clamp(centre - half * c(1) / (2.0 * c(2)), t[lo], t[hi]) : centre;
    };
    double t_star = t[arg];
    for (int it = 0; it < 4; ++it) t_star = vertex(t_star);
    return std::numbers::pi / (2.0 * t_star) * traj.rate_scale;
}

/// Smallest cutoff c (1..4) whose trajectory of `observable` matches cutoff 2c within 1e-8.
inline int check_cutoff_convergence(const std::function<LindbladModel(int)>& family,
                                    const std::function<DensityMatrix(int)>& rho0, const IntegratorConfig& cfg,
                                    const std::function<Operator(const HilbertSpace&)>& observable,
                                    double threshold = 1e-8) {
    std::map<int, std::vector<cplx>> cache;
    auto run = [&](int c) -> const std::vector<cplx>& {
        auto it = cache.find(c);
        if (it != cache.end()) return it->second;
        const auto model = family(c);
        const auto traj = evolve(model, rho0(c), cfg, {{"obs", observable(model.space)}});
        return cache.emplace(c, traj.observable("obs")).first->second;
    };
    for (int c = 1; 2 * c <= 8; ++c) {
        const auto& a = run(c);
        const auto& b = run(2 * c);
        double sup = 0.0;
        for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) sup = std::max(sup, std::abs(a[i] - b[i]));
        if (sup < threshold) return c;
    }
    throw ConvergenceError("observable not converged in the Fock cutoff by cutoff 8");
}

} // namespace chiralspin
