#include "chiralspin/materials.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace chiralspin::materials;
using chiralspin::DomainError;
using chiralspin::ResonanceError;

namespace {

constexpr double pi = std::numbers::pi;

const ResonatorGeometry quartz_beam{1e-6, 1e-7, 1e-7};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST(ResonatorMode, MicronQuartzBeam) {
    const auto m = resonator_mode(quartz_beam, 4.2e3, 1);
    EXPECT_DOUBLE_EQ(m.k_z, pi * 1e6);
    EXPECT_LE(rel(m.omega, 4.2e3 * pi * 1e6), 1e-15);
    EXPECT_NEAR(m.omega, 1.32e10, 0.01e10);
    EXPECT_NEAR(m.omega / two_pi, 2.1e9, 0.01e9);
}

TEST(ResonatorMode, HarmonicIndexScalesExactly) {
    const auto m1 = resonator_mode(quartz_beam, 4.2e3, 1);
    const auto m2 = resonator_mode(quartz_beam, 4.2e3, 2);
    EXPECT_EQ(m2.omega, 2.0 * m1.omega);
    EXPECT_EQ(m2.k_z, 2.0 * m1.k_z);
}

TEST(ResonatorMode, MillimetreBeamIsMegahertz) {
    const auto m = resonator_mode({1e-3, 1e-4, 1e-4}, 4.2e3, 1);
    EXPECT_NEAR(m.omega / two_pi, 2.1e6, 0.01e6);
}

TEST(ResonatorMode, Errors) {
    EXPECT_THROW(resonator_mode(quartz_beam, 4.2e3, 0), DomainError);
    EXPECT_THROW(resonator_mode(quartz_beam, -1.0, 1), DomainError);
    EXPECT_THROW(resonator_mode({1e-7, 1e-6, 1e-7}, 4.2e3, 1), DomainError); // not elongated
    EXPECT_THROW(resonator_mode({0.0, 0.0, 0.0}, 4.2e3, 1), DomainError);
}

TEST(ZeroPointStrain, QuartzNumbers) {
    const double omega = 4.2e3 * pi * 1e6;
    const double u = zero_point_strain(omega, 2650, 4.2e3, 1e-20);
    const double oracle = std::sqrt(1.054571817e-34 * omega / (2.0 * 2650 * 4.2e3 * 4.2e3 * 1e-20));
    EXPECT_LE(rel(u, oracle), 1e-14);
    EXPECT_NEAR(u, 3.9e-8, 0.1e-8);
    EXPECT_NEAR(coupling_g(1e10, u), 390.0, 10.0);
}

TEST(ZeroPointStrain, Scaling) {
    const double u1 = zero_point_strain(1e10, 2650, 4.2e3, 1e-20);
    EXPECT_LE(rel(zero_point_strain(1e10, 2650, 4.2e3, 4e-20), 0.5 * u1), 1e-15);
    EXPECT_LT(zero_point_strain(1e-30, 2650, 4.2e3, 1e-20), 1e-27);
    EXPECT_THROW(zero_point_strain(0.0, 2650, 4.2e3, 1e-20), DomainError);
    EXPECT_THROW(zero_point_strain(1e10, -1.0, 4.2e3, 1e-20), DomainError);
    EXPECT_THROW(zero_point_strain(1e10, 2650, 4.2e3, 0.0), DomainError);
}

TEST(CouplingG, Values) {
    EXPECT_DOUBLE_EQ(coupling_g(1e6, 1e-4), 100.0);
    EXPECT_EQ(coupling_g(1e6, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(coupling_g(1e10, 1e-7), 1e3);
    EXPECT_THROW(coupling_g(1e6, -1e-4), DomainError);
}

TEST(EffectiveGamma, Values) {
    const auto r = effective_gamma(1e3, 1e4);
    EXPECT_DOUBLE_EQ(r.value, 200.0);
    EXPECT_FALSE(r.warning);
    EXPECT_EQ(effective_gamma(0.0, 1e4).value, 0.0);
    EXPECT_DOUBLE_EQ(effective_gamma(1e3, 1e8).value, 0.02);
    EXPECT_LT(effective_gamma(1e3, 1e8).value, 1.0);
}

TEST(EffectiveGamma, ResonanceAndWeakDispersion) {
    EXPECT_THROW(effective_gamma(1e3, 0.0), ResonanceError);
    const auto r = effective_gamma(1e3, 5e3);
    ASSERT_TRUE(r.warning);
    EXPECT_NE(r.warning->find("weak_dispersion"), std::string::npos);
}

TEST(EffectiveGamma, QuadraticInGInverseInDelta) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> decade(-3.0, 6.0);
    for (int k = 0; k < 50; ++k) {
        const double g = std::pow(10.0, decade(rng)), delta = std::pow(10.0, decade(rng) + 3.0);
        const double base = effective_gamma(g, delta).value;
        EXPECT_LE(rel(effective_gamma(3.0 * g, delta).value, 9.0 * base), 1e-14);
        EXPECT_LE(rel(effective_gamma(g, 7.0 * delta).value, base / 7.0), 1e-14);
        EXPECT_LE(rel(base, 2.0 * g * g / delta), 1e-12);
    }
}

TEST(DetuningPrime, Values) {
    EXPECT_EQ(detuning_prime(1e4, 1e10, 1e10), 1e4);
    const auto plus = resonator_mode(quartz_beam, 4.2e3, 1);
    const auto minus = resonator_mode(quartz_beam, 5.0e3, 1);
    const double dp = detuning_prime(1e4, plus.omega, minus.omega);
    EXPECT_LE(rel(dp - 1e4, 0.8e3 * pi * 1e6 / two_pi), 1e-12);
    EXPECT_NEAR(dp, 4e8, 0.01e8);
    EXPECT_NEAR(dp / 1e4, 4e4, 0.01e4);
}

TEST(MaterialTable, BuiltinVelocities) {
    const auto q = lookup_material("alpha-SiO2");
    EXPECT_EQ(q.v_plus, 4.2e3);
    EXPECT_EQ(q.v_minus, 5.0e3);
    EXPECT_EQ(q.density, 2650.0);
    EXPECT_EQ(q.xi_S, 1e10);
    EXPECT_EQ(q.xi_I, 1e6);
    EXPECT_EQ(lookup_material("alpha-HgS").v_plus, 1.3e3);
    EXPECT_EQ(lookup_material("alpha-HgS").v_minus, 1.6e3);
    EXPECT_EQ(lookup_material("alpha-TeO2").v_plus, 2.5e3);
    EXPECT_EQ(lookup_material("alpha-TeO2").v_minus, 2.4e3);
    EXPECT_THROW(lookup_material("unobtainium"), DomainError);
}

TEST(MaterialTable, DataFileMatchesEmbeddedTable) {
    std::ifstream in(std::string(CHIRALSPIN_SOURCE_DIR) + "/data/materials.csv");
    ASSERT_TRUE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), builtin_table_csv);
}

TEST(MaterialTable, MalformedRows) {
    EXPECT_THROW(parse_material_table("x,1,2\n"), DomainError);
    EXPECT_THROW(parse_material_table("x,-1,2,3,4,5,note\n"), DomainError);
    EXPECT_EQ(parse_material_table("# only a comment\n").size(), 0u);
}

TEST(CouplingTable, QuartzElectronBudget) {
    const auto b = coupling_table(lookup_material("alpha-SiO2"), quartz_beam, SpinKind::electron, 1e4);
    // independent arithmetic chain
    const double omega = 4.2e3 * pi / 1e-6;
    const double u = std::sqrt(1.054571817e-34 * omega / (2.0 * 2650 * 4.2e3 * 4.2e3 * 1e-20));
    const double g = 1e10 * u;
    EXPECT_LE(rel(b.g(), g), 1e-12);
    EXPECT_LE(rel(b.gamma(), 2.0 * g * g / 1e4), 1e-12);
    EXPECT_NEAR(b.g(), 385.8, 0.1);
    EXPECT_NEAR(b.gamma(), 29.77, 0.01);
    EXPECT_LT(b.gamma_prime(), 1.0);
    EXPECT_GE(b.non_reciprocity(), 1e3);

    ASSERT_EQ(b.rows.size(), 4u);
    EXPECT_EQ(b.rows[0].mode, "(+k_z,+L)");
    EXPECT_EQ(b.rows[0].spin_phonon, "S-_A a+");
    EXPECT_EQ(b.rows[1].spin_phonon, "S+_A a");
    EXPECT_EQ(b.rows[2].spin_phonon, "S+_A a+");
    EXPECT_EQ(b.rows[3].spin_phonon, "S-_A a");
    EXPECT_FALSE(b.rows[0].counter_rotating);
    EXPECT_FALSE(b.rows[1].counter_rotating);
    EXPECT_TRUE(b.rows[2].counter_rotating);
    EXPECT_TRUE(b.rows[3].counter_rotating);
    // time-reversal pairing of velocities
    EXPECT_EQ(b.rows[0].velocity, b.rows[3].velocity);
    EXPECT_EQ(b.rows[1].velocity, b.rows[2].velocity);
    // counter-rotating detuning ~ 2 f_spin, the ~10 GHz scale for GHz spins
    for (int r : {2, 3}) {
        EXPECT_GT(b.rows[r].detuning_hz, 1e9);
        EXPECT_LT(b.rows[r].detuning_hz, 1e11);
    }
    for (const auto& row : b.rows) {
        EXPECT_GE(row.g_hz, 0.0);
        EXPECT_GE(row.gamma_hz, 0.0);
        EXPECT_GE(row.detuning_hz, 0.0);
        EXPECT_GE(row.omega, 0.0);
        EXPECT_LE(rel(row.gamma_hz, 2.0 * row.g_hz * row.g_hz / row.detuning_hz), 1e-12);
    }
    // the ordinary-frequency reading of the zero-point formula
    EXPECT_LE(rel(b.g_ordinary_convention, g / std::sqrt(two_pi)), 1e-12);
}

TEST(CouplingTable, NonChiralControlRestoresReciprocity) {
    auto m = lookup_material("alpha-SiO2");
    m.v_minus = m.v_plus;
    const auto b = coupling_table(m, quartz_beam, SpinKind::electron, 1e4);
    EXPECT_EQ(b.gamma_prime(), b.gamma());
    EXPECT_EQ(b.non_reciprocity(), 1.0);
}

TEST(CouplingTable, ChiralMaterialsAreNonReciprocal) {
    for (const auto& m : builtin_materials()) {
        const auto b = coupling_table(m, quartz_beam, SpinKind::electron, 1e4);
        EXPECT_GE(b.non_reciprocity(), 1e3) << m.name;
    }
}

TEST(CouplingTable, UndrivenNuclearIsTooWeak) {
    const auto b = coupling_table(lookup_material("alpha-SiO2"), {1e-3, 1e-4, 1e-4}, SpinKind::nuclear, 1e4);
    EXPECT_LE(b.g(), 1e-4);
    EXPECT_GT(b.g(), 0.0);
    const auto& f = b.rows[0].flags;
    EXPECT_NE(std::find(f.begin(), f.end(), "too_weak"), f.end());
}

TEST(CouplingTable, DrivenNuclearScalesAsStrainSquared) {
    const auto q = lookup_material("alpha-SiO2");
    const ResonatorGeometry mm{1e-3, 1e-4, 1e-4};
    BudgetOptions o1, o2;
    o1.drive_u = 1e-4;
    o2.drive_u = 2e-4;
    const auto b1 = coupling_table(q, mm, SpinKind::nuclear, 1e3, o1);
    const auto b2 = coupling_table(q, mm, SpinKind::nuclear, 1e3, o2);
    EXPECT_DOUBLE_EQ(b1.g(), 100.0);
    EXPECT_DOUBLE_EQ(b1.gamma(), 20.0);
    EXPECT_EQ(b2.gamma() / b1.gamma(), 4.0);
    const auto& f = b1.rows[0].flags;
    EXPECT_EQ(std::find(f.begin(), f.end(), "too_weak"), f.end());
}

TEST(CouplingTable, GPrimeOverrideAndErrors) {
    const auto q = lookup_material("alpha-SiO2");
    BudgetOptions o;
    o.g_prime_hz = 0.0;
    const auto b = coupling_table(q, quartz_beam, SpinKind::electron, 1e4, o);
    EXPECT_EQ(b.gamma_prime(), 0.0);
    EXPECT_TRUE(std::isinf(b.non_reciprocity()));
    EXPECT_THROW(coupling_table(q, quartz_beam, SpinKind::electron, 0.0), ResonanceError);
    BudgetOptions bad;
    bad.drive_u = -1.0;
    EXPECT_THROW(coupling_table(q, quartz_beam, SpinKind::electron, 1e4, bad), DomainError);
    EXPECT_THROW(parse_spin_kind("muon"), DomainError);
}
