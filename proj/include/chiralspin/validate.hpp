#pragma once
// Self-check suite behind `chiralspin validate`: algebraic and dynamical
// invariants evaluated on seeded random inputs. Runs in a few seconds.

#include "chiralspin/experiments.hpp"

#include <random>

namespace chiralspin {

namespace detail {

inline DensityMatrix seeded_density(std::mt19937_64& rng, const HilbertSpace& space) {
    std::normal_distribution<double> n;
    const auto d = static_cast<Eigen::Index>(space.dim());
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(n(rng), n(rng));
    Matrix rho = a * a.adjoint();
    rho /= rho.trace();
    return DensityMatrix(space, rho);
}

struct LiouvillianCheck {
    double trace = 0.0, hermiticity = 0.0;
};

inline LiouvillianCheck liouvillian_invariants(const LindbladModel& model, std::mt19937_64& rng, int samples = 5) {
    LiouvillianCheck c;
    const double scale = std::max(1.0, effective_hamiltonian(model).max_abs());
    for (int k = 0; k < samples; ++k) {
        const Matrix l = apply_liouvillian(model, seeded_density(rng, model.space));
        c.trace = std::max(c.trace, std::abs(l.trace()) / scale);
        c.hermiticity = std::max(c.hermiticity, (l - l.adjoint()).cwiseAbs().maxCoeff() / scale);
    }
    return c;
}

} // namespace detail

inline ExperimentReport validate_invariants() {
    ExperimentReport r;
    r.name = "validate";
    r.parameters = {{"seed", 20240611}};
    std::mt19937_64 rng(20240611);

    double comm = 0.0;
    for (double s : {0.5, 1.0, 1.5, 2.0, 3.5}) {
        const auto o = spin_operators(s);
        comm = std::max({comm, max_abs_diff(commutator(o.plus, o.minus), 2.0 * o.z),
                         max_abs_diff(commutator(o.z, o.plus), o.plus)});
    }
    r.metrics["spin_commutator_error"] = comm;
    r.flag("spin_algebra", comm <= 1e-12, {"spin_commutator_error"});

    const auto b = boson_operators(4);
    double ladder = 0.0;
    for (int n = 0; n <= 4; ++n) ladder = std::max(ladder, std::abs((b.a_dagger * b.a)(n, n) - cplx(n)));
    r.metrics["boson_number_error"] = ladder;
    r.flag("boson_algebra", ladder <= 1e-14, {"boson_number_error"});

    const HilbertSpace mixed({Factor::spin(0.5), Factor::boson(2), Factor::spin(1.0)});
    const auto ra = detail::seeded_density(rng, HilbertSpace({mixed[0]}));
    const auto rb = detail::seeded_density(rng, HilbertSpace({mixed[1]}));
    const auto rc = detail::seeded_density(rng, HilbertSpace({mixed[2]}));
    const auto prod = tensor(tensor(ra, rb), rc);
    const double ptrace =
        std::max((partial_trace(prod, {0, 2}).matrix() - tensor(ra, rc).matrix()).cwiseAbs().maxCoeff(),
                 (partial_trace(prod, {1}).matrix() - rb.matrix()).cwiseAbs().maxCoeff());
    r.metrics["partial_trace_error"] = ptrace;
    r.flag("partial_trace", ptrace <= 1e-13, {"partial_trace_error"});

    const double gamma = 1.0;
    const auto pair = CascadeSpec::pair(gamma, 0.3, 0.7);
    auto chain_spec = CascadeSpec::chain(3, gamma, 0.4);
    std::vector<std::pair<std::string, LindbladModel>> models{
        {"forward", build_cascaded_model(pair, Direction::forward)},
        {"backward", build_cascaded_model(pair, Direction::backward)},
        {"bidirectional", build_bidirectional_model(pair)},
        {"chain", build_chain_model(chain_spec)},
        {"full", build_full_model({{0.5, 0.0, "A"}, {0.5, 1e-6, "B"}},
                                  {ModeSpec::rotating(5.0, 0.5, 2, +1), ModeSpec::counter_rotating(9.0, 0.2, 1, -1)})}};
    double ltr = 0.0, lh = 0.0;
    for (const auto& [name, m] : models) {
        const auto c = detail::liouvillian_invariants(m, rng);
        ltr = std::max(ltr, c.trace);
        lh = std::max(lh, c.hermiticity);
    }
    r.metrics["liouvillian_trace_error"] = ltr;
    r.metrics["liouvillian_hermiticity_error"] = lh;
    r.flag("trace_preserving_generators", ltr <= 1e-12, {"liouvillian_trace_error"});
    r.flag("hermiticity_preserving_generators", lh <= 1e-12, {"liouvillian_hermiticity_error"});

    // a two-site chain is the cascaded pair
    auto chain2 = CascadeSpec::pair(gamma, 0.0, 0.7);
    const auto cm = build_chain_model(chain2);
    const auto fm = build_cascaded_model(chain2, Direction::forward);
    const auto probe = detail::seeded_density(rng, cm.space);
    const double chain_pair = (apply_liouvillian(cm, probe) - apply_liouvillian(fm, probe)).cwiseAbs().maxCoeff();
    r.metrics["chain_pair_difference"] = chain_pair;
    r.flag("chain_reduces_to_pair", chain_pair <= 1e-13, {"chain_pair_difference"});

    // the full model with rotating modes conserves the excitation number
    const auto& full = models.back().second;
    const auto rot = build_full_model({{0.5, 0.0, "A"}, {1.0, 1e-6, "B"}}, {ModeSpec::rotating(3.0, 0.7, 2, +1)});
    const double ncomm = commutator(rot.hamiltonian, excitation_number(rot.space)).max_abs();
    const double ncr = commutator(full.hamiltonian, excitation_number(full.space)).max_abs();
    r.metrics["rotating_excitation_commutator"] = ncomm;
    r.metrics["counter_rotating_excitation_commutator"] = ncr;
    r.flag("rotating_conserves_excitations", ncomm <= 1e-12, {"rotating_excitation_commutator"});
    r.flag("counter_rotating_breaks_conservation", ncr > 1e-3, {"counter_rotating_excitation_commutator"});

    // dynamics: physicality, upstream independence, reciprocal symmetry
    IntegratorConfig cfg;
    cfg.t_final = 3.0;
    cfg.dt = 2e-3;
    cfg.sample_every = 10;
    const auto fwd = build_cascaded_model(CascadeSpec::pair(gamma, 0.0, 0.7), Direction::forward);
    auto rho0 = DensityMatrix::pure(fwd.space, [] {
        Vector v(4);
        v << 0.6, cplx(0.3, 0.2), cplx(0.1, -0.5), 0.4;
        return Vector(v / v.norm());
    }());
    const auto pa = partial_trace(rho0, {0});
    const Operator pop_a = spin_population(fwd.space, 0);
    auto traj = evolve(fwd, rho0, cfg, {{"PA", pop_a}});
    const auto single = evolve(build_single_decay_model(0.5, gamma), pa, cfg,
                               {{"PA", spin_population(HilbertSpace::spins(1), 0)}});
    double upstream = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        upstream = std::max(upstream, std::abs(traj.series[0].values[i] - single.series[0].values[i]));
    r.metrics["upstream_independence_error"] = upstream;
    r.flag("no_back_action", upstream <= 1e-8, {"upstream_independence_error"});

    detail::PhysicalityTally tally;
    tally.add(traj);
    tally.write(r);

    const auto recip = detail::run_transfer({1.0, 1.0, 0.9, 6.0}, {});
    r.metrics["reciprocal_deviation"] = recip.deviation;
    r.flag("reciprocal_symmetry", recip.deviation <= 1e-9, {"reciprocal_deviation"});

    // fourth-order convergence of the fixed-step integrator
    auto err_at = [&](double dt) {
        IntegratorConfig c = cfg;
        c.t_final = 1.0;
        c.sample_every = 1;
        c.step_doubling = false;
        c.dt = dt;
        IntegratorConfig ref = c;
        ref.dt = dt / 16.0;
        const auto a = evolve(fwd, rho0, c, {});
        const auto b2 = evolve(fwd, rho0, ref, {});
        return (a.final_state.matrix() - b2.final_state.matrix()).cwiseAbs().maxCoeff();
    };
    const double order = std::log2(err_at(0.1) / err_at(0.05));
    r.metrics["integrator_order"] = order;
    r.flag("fourth_order_integrator", order > 3.5 && order < 4.5, {"integrator_order"});
    return r;
}

} // namespace chiralspin
