#pragma once
// Material constants and resonator geometry -> spin-phonon coupling budget.
//
// Unit boundary: wavenumbers and mode frequencies are angular (rad/m, rad/s);
// every user-facing rate (g, detuning, gamma) is ordinary Hz.

#include "chiralspin/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace chiralspin::materials {

inline constexpr double hbar = 1.054571817e-34; // J s
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Couplings below this are reported as too weak to be observable.
inline constexpr double too_weak_g_hz = 1.0;

struct MaterialParams {
    std::string name;
    double density = 0.0; ///< kg/m^3
    double v_plus = 0.0;  ///< m/s, (+k_z,+L) and (-k_z,-L)
    double v_minus = 0.0; ///< m/s, (-k_z,+L) and (+k_z,-L)
    double xi_S = 0.0;    ///< Hz per unit strain, electron spin
    double xi_I = 0.0;    ///< Hz per unit strain, nuclear spin
    std::string provenance;

    void validate() const {
        if (!(density > 0.0)) throw DomainError("material density must be > 0");
        if (!(v_plus > 0.0) || !(v_minus > 0.0)) throw DomainError("material velocities must be > 0");
        if (!(xi_S >= 0.0) || !(xi_I >= 0.0)) throw DomainError("strain responses must be >= 0");
    }
};

/// Shipped as data/materials.csv; the two must stay identical (checked by the tests).
inline constexpr std::string_view builtin_table_csv =
    R"(# chiralspin material table, format version 1
# columns: name,density_kg_m3,v_plus_m_s,v_minus_m_s,xi_S_hz,xi_I_hz,provenance
# v_plus: (+k_z,+L)/(-k_z,-L) TA velocity; v_minus: (-k_z,+L)/(+k_z,-L) TA velocity
alpha-SiO2,2650,4200,5000,1e10,1e6,velocities from ab initio TA dispersion; density handbook value; strain responses order-of-magnitude estimates
alpha-HgS,8100,1300,1600,1e10,1e6,velocities from ab initio TA dispersion; density external handbook input; strain responses order-of-magnitude estimates
alpha-TeO2,6000,2500,2400,1e10,1e6,velocities from ab initio TA dispersion; density external handbook input; strain responses order-of-magnitude estimates
)";

inline std::vector<MaterialParams> parse_material_table(std::string_view csv) {
    std::vector<MaterialParams> out;
    std::istringstream in{std::string(csv)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cols;
        std::size_t pos = 0;
        for (int k = 0; k < 6; ++k) {
            const auto comma = line.find(',', pos);
            if (comma == std::string::npos) throw DomainError("material table row has too few columns: " + line);
            cols.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        cols.push_back(line.substr(pos));
        MaterialParams m{cols[0],          std::stod(cols[1]), std::stod(cols[2]), std::stod(cols[3]),
                         std::stod(cols[4]), std::stod(cols[5]), cols[6]};
        m.validate();
        out.push_back(std::move(m));
    }
    return out;
}

inline const std::vector<MaterialParams>& builtin_materials() {
    static const std::vector<MaterialParams> table = parse_material_table(builtin_table_csv);
    return table;
}

inline MaterialParams lookup_material(std::string_view name) {
    for (const auto& m : builtin_materials())
        if (m.name == name) return m;
    throw DomainError("unknown material '" + std::string(name) + "' (give explicit parameters)");
}

struct ResonatorGeometry {
    double l = 0.0, w = 0.0, h = 0.0; ///< m

    void validate() const {
        if (!(l > 0.0) || !(w > 0.0) || !(h > 0.0)) throw DomainError("resonator dimensions must be > 0");
        if (l < w || l < h) throw DomainError("resonator must be elongated along the chiral axis (l >= w, h)");
    }
    double volume() const { return l * w * h; }
};

struct ModeFrequency {
    double k_z;   ///< rad/m
    double omega; ///< rad/s
};

/// k_z = n pi / l, omega = v k_z
inline ModeFrequency resonator_mode(const ResonatorGeometry& geom, double velocity, int n) {
    geom.validate();
    if (n < 1) throw DomainError("mode index n must be >= 1");
    if (!(velocity > 0.0)) throw DomainError("velocity must be > 0");
    const double k = n * std::numbers::pi / geom.l;
    return {k, velocity * k};
}

/// sqrt(hbar omega / (2 rho v^2 V))
inline double zero_point_strain(double omega, double density, double velocity, double volume) {
    if (!(omega > 0.0) || !(density > 0.0) || !(velocity > 0.0) || !(volume > 0.0))
        throw DomainError("zero_point_strain inputs must be > 0");
    return std::sqrt(hbar * omega / (2.0 * density * velocity * velocity * volume));
}

inline double coupling_g(double xi_hz, double u) {
    if (!(u >= 0.0)) throw DomainError("strain amplitude must be >= 0");
    return xi_hz * u;
}

struct GammaResult {
    double value = 0.0; ///< Hz
    std::optional<std::string> warning;
};

/// 2 g^2 / delta, valid in the dispersive limit |delta| >> g.
inline GammaResult effective_gamma(double g_hz, double delta_hz) {
    if (delta_hz == 0.0) throw ResonanceError("effective_gamma: zero detuning, dispersive formula invalid");
    GammaResult r{2.0 * g_hz * g_hz / delta_hz, std::nullopt};
    if (std::abs(delta_hz) < 10.0 * g_hz) r.warning = "weak_dispersion: |delta| < 10 g";
    return r;
}

/// Detuning of the (-k_z,+L) mode when the spin sits delta above the (+k_z,+L) mode.
inline double detuning_prime(double delta_hz, double omega_plus, double omega_minus) {
    return delta_hz + (omega_minus - omega_plus) / two_pi;
}

enum class SpinKind { electron, nuclear };

inline SpinKind parse_spin_kind(std::string_view s) {
    if (s == "electron") return SpinKind::electron;
    if (s == "nuclear") return SpinKind::nuclear;
    throw DomainError("spin kind must be 'electron' or 'nuclear', got '" + std::string(s) + "'");
}

inline std::string_view to_string(SpinKind k) { return k == SpinKind::electron ? "electron" : "nuclear"; }

enum class RowRole { gamma, gamma_prime, suppressed };

struct BudgetRow {
    std::string mode;            ///< "(+k_z,+L)" etc.
    std::string spin_phonon;     ///< allowed term for spin A
    std::string spin_spin;       ///< induced spin-spin term
    bool counter_rotating = false;
    RowRole role = RowRole::gamma;
    double velocity = 0.0;    ///< m/s
    double k_z = 0.0;         ///< rad/m
    double omega = 0.0;       ///< rad/s
    double u_zpf = 0.0;       ///< strain used for g (zero-point or driven)
    double g_hz = 0.0;
    double detuning_hz = 0.0;
    double gamma_hz = 0.0;    ///< dispersive rate; a suppression estimate for counter-rotating rows
    std::vector<std::string> flags;
};

struct BudgetOptions {
    int n = 1;
    std::optional<double> drive_u;       ///< driven strain amplitude replacing u_zpf
    std::optional<double> g_prime_hz;    ///< override for the (-k_z,+L) coupling; default g' = g
};

struct CouplingBudget {
    std::string material;
    SpinKind spin_kind = SpinKind::electron;
    double delta_hz = 0.0;
    double spin_frequency_hz = 0.0;
    std::array<BudgetRow, 4> rows;

    double g() const { return rows[0].g_hz; }
    double gamma() const { return rows[0].gamma_hz; }
    double gamma_prime() const { return rows[1].gamma_hz; }
    double non_reciprocity() const {
        return gamma_prime() > 0.0 ? gamma() / gamma_prime() : std::numeric_limits<double>::infinity();
    }
    /// g of the (+k_z,+L) row had hbar*omega been evaluated with the ordinary frequency.
    double g_ordinary_convention = 0.0;
    double gamma_ordinary_convention = 0.0;
};

/**
 * Four TA mode classes (+-k_z, +-L) of the fundamental resonator mode.
 *
 * The spin is tuned delta above the (+k_z,+L) mode. (-k_z,+L) sees delta' from the
 * velocity splitting. The -L rows need counter-rotating terms; their detuning is
 * modeled as 2 f_spin + delta and their gamma is only a suppression estimate.
 */
inline CouplingBudget coupling_table(const MaterialParams& mat, const ResonatorGeometry& geom, SpinKind kind,
                                     double delta_hz, const BudgetOptions& opt = {}) {
    mat.validate();
    geom.validate();
    if (opt.drive_u && !(*opt.drive_u >= 0.0)) throw DomainError("drive amplitude must be >= 0");
    const double xi = kind == SpinKind::electron ? mat.xi_S : mat.xi_I;
    const double volume = geom.volume();

    const auto plus = resonator_mode(geom, mat.v_plus, opt.n);
    const auto minus = resonator_mode(geom, mat.v_minus, opt.n);

    CouplingBudget b;
    b.material = mat.name;
    b.spin_kind = kind;
    b.delta_hz = delta_hz;
    b.spin_frequency_hz = plus.omega / two_pi + delta_hz;

    auto strain = [&](const ModeFrequency& f, double v) {
        return opt.drive_u ? *opt.drive_u : zero_point_strain(f.omega, mat.density, v, volume);
    };

    const double u_plus = strain(plus, mat.v_plus);
    const double u_minus = strain(minus, mat.v_minus);
    const double g = coupling_g(xi, u_plus);
    const double g_prime = opt.g_prime_hz ? *opt.g_prime_hz : g;
    const double delta_p = detuning_prime(delta_hz, plus.omega, minus.omega);
    const double delta_cr = 2.0 * b.spin_frequency_hz + delta_hz;

    auto make_row = [&](std::string mode, std::string sp, std::string ss, bool cr, RowRole role, double v,
                        const ModeFrequency& f, double u, double gg, double det) {
        BudgetRow r{std::move(mode), std::move(sp), std::move(ss), cr, role, v, f.k_z, f.omega, u, gg, det, 0.0, {}};
        const auto gr = effective_gamma(gg, det);
        r.gamma_hz = gr.value;
        if (gr.warning) r.flags.push_back(*gr.warning);
        if (cr) r.flags.push_back("suppression_estimate");
        if (gg < too_weak_g_hz) r.flags.push_back("too_weak");
        return r;
    };

    b.rows[0] = make_row("(+k_z,+L)", "S-_A a+", "S-_A S+_B", false, RowRole::gamma, mat.v_plus, plus, u_plus, g,
                         delta_hz);
    b.rows[1] = make_row("(-k_z,+L)", "S+_A a", "S+_A S-_B", false, RowRole::gamma_prime, mat.v_minus, minus,
                         u_minus, g_prime, delta_p);
    b.rows[2] = make_row("(+k_z,-L)", "S+_A a+", "S+_A S-_B", true, RowRole::suppressed, mat.v_minus, minus,
                         u_minus, g_prime, delta_cr);
    b.rows[3] = make_row("(-k_z,-L)", "S-_A a", "S-_A S+_B", true, RowRole::suppressed, mat.v_plus, plus, u_plus,
                         g, delta_cr);

    if (!opt.drive_u) {
        const double u_ord = zero_point_strain(plus.omega / two_pi, mat.density, mat.v_plus, volume);
        b.g_ordinary_convention = coupling_g(xi, u_ord);
        b.gamma_ordinary_convention = effective_gamma(b.g_ordinary_convention, delta_hz).value;
    } else {
        b.g_ordinary_convention = g;
        b.gamma_ordinary_convention = b.rows[0].gamma_hz;
    }
    return b;
}

} // namespace chiralspin::materials
