#pragma once
// Hamiltonian and master-equation builders for phonon-mediated spin-spin coupling.
//
// All operators are in rad/s. Spin sites come first in every composite space,
// followed by one boson factor per phonon mode (full model only).

#include "chiralspin/core.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chiralspin {

enum class CouplingClass { rotating, counter_rotating };

/// One chiral phonon mode as seen by the spins.
struct ModeSpec {
    int momentum_sign = +1; ///< sign of k_z
    int pam = +1;           ///< pseudoangular momentum L
    /// Energy mismatch of the allowed spin-phonon process in rad/s. For rotating modes
    /// this is omega_spin - omega_mode, for counter-rotating modes omega_spin + omega_mode.
    double detuning = 0.0;
    double g = 0.0; ///< rad/s
    int fock_cutoff = 1;
    CouplingClass coupling_class = CouplingClass::rotating;

    void validate() const {
        if (momentum_sign != 1 && momentum_sign != -1) throw DomainError("momentum_sign must be +-1");
        if (pam != 1 && pam != -1) throw DomainError("pam must be +-1");
        if ((pam == 1) != (coupling_class == CouplingClass::rotating))
            throw DomainError("coupling class must be rotating iff pam = +1");
        if (!(g >= 0.0)) throw DomainError("mode coupling g must be >= 0");
        if (fock_cutoff < 1) throw DomainError("mode fock_cutoff must be >= 1");
    }

    static ModeSpec rotating(double detuning, double g, int cutoff, int momentum_sign = +1) {
        return {momentum_sign, +1, detuning, g, cutoff, CouplingClass::rotating};
    }
    static ModeSpec counter_rotating(double detuning, double g, int cutoff, int momentum_sign = +1) {
        return {momentum_sign, -1, detuning, g, cutoff, CouplingClass::counter_rotating};
    }
};

struct SpinSite {
    double s = 0.5;
    double position_z = 0.0; ///< m
    std::string label;
};

/// Parameters of the Markovian cascaded (chiral-channel) description.
struct CascadeSpec {
    double gamma = 0.0;       ///< forward rate, rad/s
    double gamma_prime = 0.0; ///< backward rate, rad/s
    double k_z = 0.0;         ///< rad/m
    std::vector<SpinSite> sites;

    void validate(std::size_t min_sites = 2) const {
        if (!(gamma >= 0.0) || !(gamma_prime >= 0.0)) throw DomainError("cascade rates must be >= 0");
        if (sites.size() < min_sites)
            throw DomainError("cascade needs at least " + std::to_string(min_sites) + " sites");
        for (std::size_t j = 1; j < sites.size(); ++j)
            if (!(sites[j].position_z > sites[j - 1].position_z))
                throw DomainError("spin positions must be strictly increasing along the chain");
    }

    HilbertSpace space() const {
        std::vector<Factor> f;
        for (const auto& site : sites) f.push_back(Factor::spin(site.s));
        return HilbertSpace(std::move(f));
    }

    /// k_z * (z_B - z_A) for the first pair.
    double phase() const { return k_z * (sites.at(1).position_z - sites.at(0).position_z); }

    /// Two spin-1/2 sites separated by `d` with k_z chosen so that k_z d = kd.
    static CascadeSpec pair(double gamma, double gamma_prime, double kd, double d = 1.0) {
        return {gamma, gamma_prime, kd / d, {{0.5, 0.0, "A"}, {0.5, d, "B"}}};
    }

    /// n spin-1/2 sites spaced by d.
    static CascadeSpec chain(std::size_t n, double gamma, double k_z, double d = 1.0) {
        CascadeSpec spec{gamma, 0.0, k_z, {}};
        for (std::size_t j = 0; j < n; ++j)
            spec.sites.push_back({0.5, static_cast<double>(j) * d, "S" + std::to_string(j + 1)});
        return spec;
    }
};

enum class Direction { forward, backward };

inline Direction parse_direction(std::string_view s) {
    if (s == "forward") return Direction::forward;
    if (s == "backward") return Direction::backward;
    throw DomainError("invalid cascade direction '" + std::string(s) + "'");
}

inline std::string_view to_string(Direction d) {
    return d == Direction::forward ? "forward" : "backward";
}

struct Jump {
    double rate; ///< rad/s, multiplies D[op]
    Operator op;
};

struct LindbladModel {
    HilbertSpace space;
    Operator hamiltonian;
    std::vector<Jump> jumps;

    void validate() const {
        require_same_space(space, hamiltonian.space(), "model hamiltonian");
        for (const auto& j : jumps) {
            require_same_space(space, j.op.space(), "model jump");
            if (!(j.rate >= 0.0)) throw DomainError("jump rates must be >= 0");
        }
    }
};

// ---------------------------------------------------------------------------
// site operators

/// S+, S-, Sz of factor `site`, embedded in `space`.
inline SpinOperators site_spin(const HilbertSpace& space, std::size_t site) {
    if (site >= space.size() || space[site].kind != FactorKind::spin)
        throw DomainError("factor " + std::to_string(site) + " is not a spin");
    const auto ops = spin_operators(space[site].label());
    return {embed(ops.plus, site, space), embed(ops.minus, site, space), embed(ops.z, site, space)};
}

inline BosonOperators site_boson(const HilbertSpace& space, std::size_t site) {
    if (site >= space.size() || space[site].kind != FactorKind::boson)
        throw DomainError("factor " + std::to_string(site) + " is not a boson");
    const auto ops = boson_operators(static_cast<int>(space[site].label()));
    return {embed(ops.a, site, space), embed(ops.a_dagger, site, space)};
}

/// S+ S- of one site, the excited-population observable for spin-1/2.
inline Operator spin_population(const HilbertSpace& space, std::size_t site) {
    const auto s = site_spin(space, site);
    return s.plus * s.minus;
}

/// sum_j Sz_j + sum_m a_m^dagger a_m
inline Operator excitation_number(const HilbertSpace& space) {
    Operator n = Operator::zero(space);
    for (std::size_t k = 0; k < space.size(); ++k) {
        if (space[k].kind == FactorKind::spin) {
            n += site_spin(space, k).z;
        } else {
            const auto b = site_boson(space, k);
            n += b.a_dagger * b.a;
        }
    }
    return n;
}

// ---------------------------------------------------------------------------
// builders

/**
 * Two spins coupled to one or more phonon modes, closed system.
 *
 * The frame rotates with the conserved charge sum_j Sz_j + sum_m sigma_m n_m
 * (sigma = +1 rotating, -1 counter-rotating) at the first mode's detuning, so
 * for a single rotating mode this is exactly
 *     H = Delta (Sz_A + Sz_B) + g sum_j (S-_j a^dagger + S+_j a).
 * Additional modes pick up sigma_m (Delta_0 - Delta_m) a_m^dagger a_m.
 */
inline LindbladModel build_full_model(const std::vector<SpinSite>& spins,
                                      const std::vector<ModeSpec>& modes) {
    if (spins.size() != 2) throw DomainError("full model takes exactly two spins");
    if (modes.empty()) throw DomainError("full model needs at least one phonon mode");
    for (const auto& m : modes) m.validate();

    std::vector<Factor> factors;
    for (const auto& s : spins) factors.push_back(Factor::spin(s.s));
    for (const auto& m : modes) factors.push_back(Factor::boson(m.fock_cutoff));
    HilbertSpace space(std::move(factors));

    const double delta_ref = modes.front().detuning;
    Operator h = Operator::zero(space);
    std::vector<SpinOperators> spin_ops;
    for (std::size_t j = 0; j < spins.size(); ++j) {
        spin_ops.push_back(site_spin(space, j));
        h += delta_ref * spin_ops.back().z;
    }
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const auto& mode = modes[m];
        const auto b = site_boson(space, spins.size() + m);
        const bool rot = mode.coupling_class == CouplingClass::rotating;
        const double sigma = rot ? 1.0 : -1.0;
        const double energy = sigma * (delta_ref - mode.detuning);
        if (energy != 0.0) h += energy * (b.a_dagger * b.a);
        for (const auto& s : spin_ops) {
            if (rot)
                h += mode.g * (s.minus * b.a_dagger + s.plus * b.a);
            else
                h += mode.g * (s.plus * b.a_dagger + s.minus * b.a);
        }
    }
    return {space, std::move(h), {}};
}

namespace detail {

struct CascadePair {
    std::size_t src, dst; // excitation flows src -> dst
    double rate;
};

inline CascadePair cascade_pair(const CascadeSpec& spec, Direction dir) {
    spec.validate();
    if (dir == Direction::forward) return {0, 1, spec.gamma};
    return {1, 0, spec.gamma_prime};
}

} // namespace detail

/// Forward: i gamma (e^{-ikd} S+_A S-_B - e^{ikd} S-_A S+_B). Backward swaps A and B, gamma -> gamma'.
inline Operator build_cascade_hamiltonian(const CascadeSpec& spec, Direction dir) {
    const auto p = detail::cascade_pair(spec, dir);
    const HilbertSpace space = spec.space();
    const auto src = site_spin(space, p.src);
    const auto dst = site_spin(space, p.dst);
    const cplx ph = std::exp(-I * spec.phase());
    Operator h = (I * p.rate * ph) * (src.plus * dst.minus) -
                 (I * p.rate * std::conj(ph)) * (src.minus * dst.plus);
    return h;
}

/// Forward: z = S-_A + e^{-ikd} S-_B. Backward: z = S-_B + e^{-ikd} S-_A.
inline Operator build_collective_jump(const CascadeSpec& spec, Direction dir) {
    const auto p = detail::cascade_pair(spec, dir);
    const HilbertSpace space = spec.space();
    return site_spin(space, p.src).minus + std::exp(-I * spec.phase()) * site_spin(space, p.dst).minus;
}

inline LindbladModel build_cascaded_model(const CascadeSpec& spec, Direction dir) {
    const auto p = detail::cascade_pair(spec, dir);
    return {spec.space(), build_cascade_hamiltonian(spec, dir),
            {{2.0 * p.rate, build_collective_jump(spec, dir)}}};
}

/// Expanded form -i gamma (S+_A S-_A + S+_B S-_B + 2 e^{ikd} S-_A S+_B), assembled
/// term by term rather than from H_AB - i gamma z^dagger z.
inline Operator build_nonhermitian_hamiltonian(const CascadeSpec& spec, Direction dir) {
    const auto p = detail::cascade_pair(spec, dir);
    const HilbertSpace space = spec.space();
    const auto src = site_spin(space, p.src);
    const auto dst = site_spin(space, p.dst);
    Operator h = src.plus * src.minus + dst.plus * dst.minus +
                 (2.0 * std::exp(I * spec.phase())) * (src.minus * dst.plus);
    return (-I * p.rate) * h;
}

/// Forward (rate gamma) plus backward (rate gamma') generators.
inline LindbladModel build_bidirectional_model(const CascadeSpec& spec) {
    auto fwd = build_cascaded_model(spec, Direction::forward);
    if (spec.gamma_prime == 0.0) return fwd;
    auto bwd = build_cascaded_model(spec, Direction::backward);
    fwd.hamiltonian += bwd.hamiltonian;
    fwd.jumps.push_back(std::move(bwd.jumps.front()));
    return fwd;
}

/**
 * N-spin forward cascade along a chain of increasing positions:
 *     H = i gamma sum_{j<l} (e^{-ik(z_l - z_j)} S+_j S-_l - h.c.)
 *     z = sum_j e^{-ik(z_j - z_1)} S-_j,  jumps = [(2 gamma, z)].
 * Phases are measured from the first site so N = 2 matches build_cascaded_model exactly.
 */
inline LindbladModel build_chain_model(const CascadeSpec& spec, Direction dir = Direction::forward) {
    if (dir != Direction::forward) throw DomainError("chain model is only defined for the forward direction");
    spec.validate();
    const HilbertSpace space = spec.space();
    const std::size_t n = spec.sites.size();
    std::vector<SpinOperators> ops;
    for (std::size_t j = 0; j < n; ++j) ops.push_back(site_spin(space, j));

    Operator h = Operator::zero(space);
    Operator z = Operator::zero(space);
    const double z0 = spec.sites.front().position_z;
    for (std::size_t j = 0; j < n; ++j) {
        z += std::exp(-I * spec.k_z * (spec.sites[j].position_z - z0)) * ops[j].minus;
        for (std::size_t l = j + 1; l < n; ++l) {
            const cplx ph = std::exp(-I * spec.k_z * (spec.sites[l].position_z - spec.sites[j].position_z));
            h += (I * spec.gamma * ph) * (ops[j].plus * ops[l].minus) -
                 (I * spec.gamma * std::conj(ph)) * (ops[j].minus * ops[l].plus);
        }
    }
    return {space, std::move(h), {{2.0 * spec.gamma, std::move(z)}}};
}

/// Single spin decaying at rate 2 gamma: the reduced dynamics expected of the most upstream spin.
inline LindbladModel build_single_decay_model(double s, double gamma) {
    const HilbertSpace space({Factor::spin(s)});
    return {space, Operator::zero(space), {{2.0 * gamma, spin_operators(s).minus}}};
}

// ---------------------------------------------------------------------------
// generators

/// -i[H, rho] + sum_k rate_k D[z_k] rho, with D[o]rho = o rho o^dag - {o^dag o, rho}/2.
inline Matrix apply_liouvillian(const LindbladModel& model, const Matrix& rho) {
    const Matrix& h = model.hamiltonian.matrix();
    Matrix out = -I * (h * rho - rho * h);
    for (const auto& j : model.jumps) {
        const Matrix& z = j.op.matrix();
        const Matrix zdz = z.adjoint() * z;
        out += j.rate * (z * rho * z.adjoint() - 0.5 * (zdz * rho + rho * zdz));
    }
    return out;
}

inline Matrix apply_liouvillian(const LindbladModel& model, const DensityMatrix& rho) {
    require_same_space(model.space, rho.space(), "liouvillian");
    return apply_liouvillian(model, rho.matrix());
}

/// -i(H_NH rho - rho H_NH^dag) + sum_k rate_k z_k rho z_k^dag
inline Matrix apply_nonhermitian_generator(const Operator& h_nh, const std::vector<Jump>& jumps,
                                           const Matrix& rho) {
    const Matrix& h = h_nh.matrix();
    Matrix out = -I * (h * rho - rho * h.adjoint());
    for (const auto& j : jumps) out += j.rate * (j.op.matrix() * rho * j.op.matrix().adjoint());
    return out;
}

/// H - (i/2) sum_k rate_k z_k^dag z_k
inline Operator effective_hamiltonian(const LindbladModel& model) {
    Operator h = model.hamiltonian;
    for (const auto& j : model.jumps) h -= (0.5 * I * j.rate) * (j.op.dagger() * j.op);
    return h;
}

} // namespace chiralspin
