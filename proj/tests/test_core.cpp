#include "chiralspin/core.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace chiralspin;

namespace {

Matrix diag(std::initializer_list<double> v) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) m(i, i) = x, ++i;
    return m;
}

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

} // namespace

TEST(SpinOperators, SpinHalfDefiningRepresentation) {
    const auto s = spin_operators(0.5);
    Matrix plus(2, 2);
    plus << 0, 1, 0, 0;
    EXPECT_EQ(max_diff(s.plus.matrix(), plus), 0.0);
    EXPECT_EQ(max_diff(s.z.matrix(), diag({0.5, -0.5})), 0.0);
    EXPECT_EQ(max_diff(s.minus.matrix(), plus.transpose()), 0.0);
}

TEST(SpinOperators, SpinOneLadderElements) {
    const auto s = spin_operators(1.0);
    ASSERT_EQ(s.plus.dim(), 3u);
    EXPECT_DOUBLE_EQ(s.plus(0, 1).real(), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(s.plus(1, 2).real(), std::sqrt(2.0));
    EXPECT_EQ(s.plus(0, 2), cplx{});
    EXPECT_EQ(max_diff(s.z.matrix(), diag({1, 0, -1})), 0.0);
}

TEST(SpinOperators, CommutationRelationsForManySpins) {
    for (double s : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.5}) {
        const auto o = spin_operators(s);
        const Operator two_sz = 2.0 * o.z;
        EXPECT_LE(max_abs_diff(commutator(o.plus, o.minus), two_sz), 1e-12) << "s=" << s;
        EXPECT_LE(max_abs_diff(commutator(o.z, o.plus), o.plus), 1e-12) << "s=" << s;
        EXPECT_LE(max_abs_diff(commutator(o.z, o.minus), -o.minus), 1e-12) << "s=" << s;
        EXPECT_EQ(max_abs_diff(o.plus.dagger(), o.minus), 0.0);
    }
}

TEST(SpinOperators, RejectsNonHalfInteger) {
    EXPECT_THROW(spin_operators(0.3), DomainError);
    EXPECT_THROW(spin_operators(-0.5), DomainError);
}

TEST(BosonOperators, LadderAndNumber) {
    const auto b1 = boson_operators(1);
    Matrix a(2, 2);
    a << 0, 1, 0, 0;
    EXPECT_EQ(max_diff(b1.a.matrix(), a), 0.0);

    const auto b2 = boson_operators(2);
    EXPECT_LE(max_abs_diff(b2.a_dagger * b2.a, Operator(b2.a.space(), diag({0, 1, 2}))), 1e-15);
}

TEST(BosonOperators, TruncationArtifactInCommutator) {
    // [a, a^dag] = diag(1, 1, -2) at cutoff 2, the truncated-space artifact
    const auto b = boson_operators(2);
    EXPECT_LE(max_abs_diff(commutator(b.a, b.a_dagger), Operator(b.a.space(), diag({1, 1, -2}))), 1e-14);
}

TEST(BosonOperators, RejectsZeroCutoff) { EXPECT_THROW(boson_operators(0), DomainError); }

TEST(Embed, SpinZOnEachSite) {
    const auto space = HilbertSpace::spins(2);
    const auto sz = spin_operators(0.5).z;
    EXPECT_EQ(max_diff(embed(sz, 0, space).matrix(), diag({0.5, 0.5, -0.5, -0.5})), 0.0);
    EXPECT_EQ(max_diff(embed(sz, 1, space).matrix(), diag({0.5, -0.5, 0.5, -0.5})), 0.0);
}

TEST(Embed, BosonLoweringOnThirdFactor) {
    const HilbertSpace space({Factor::spin(0.5), Factor::spin(0.5), Factor::boson(1)});
    const auto a = embed(boson_operators(1).a, 2, space);
    Vector psi = Vector::Zero(8);
    psi(static_cast<Eigen::Index>(space.index({0, 1, 1}))) = 1.0; // |up down, 1>
    const Vector out = a.matrix() * psi;
    Vector expected = Vector::Zero(8);
    expected(static_cast<Eigen::Index>(space.index({0, 1, 0}))) = 1.0;
    EXPECT_EQ((out - expected).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Embed, DimensionMismatchIsDomainError) {
    const auto space = HilbertSpace::spins(2);
    EXPECT_THROW(embed(spin_operators(1.0).z, 0, space), DomainError);
    EXPECT_THROW(embed(spin_operators(0.5).z, 2, space), DomainError);
}

TEST(Embed, IsMultiplicativeOnRandomOperators) {
    std::mt19937_64 rng(11);
    const HilbertSpace space({Factor::spin(1.0), Factor::boson(2), Factor::spin(0.5)});
    for (std::size_t site = 0; site < space.size(); ++site) {
        const HilbertSpace single({space[site]});
        const auto a = fixtures::random_operator(rng, single);
        const auto b = fixtures::random_operator(rng, single);
        const auto lhs = embed(a * b, site, space);
        const auto rhs = embed(a, site, space) * embed(b, site, space);
        EXPECT_LE(max_abs_diff(lhs, rhs), 1e-12 * lhs.max_abs());
    }
}

TEST(Operator, DaggerIsAnInvolution) {
    std::mt19937_64 rng(3);
    const HilbertSpace space({Factor::spin(0.5), Factor::boson(3)});
    for (int k = 0; k < 20; ++k) {
        const auto a = fixtures::random_operator(rng, space);
        EXPECT_EQ(max_abs_diff(a.dagger().dagger(), a), 0.0);
    }
}

TEST(Operator, MixedSpacesAreRejected) {
    const auto a = Operator::identity(HilbertSpace::spins(1));
    const auto b = Operator::identity(HilbertSpace::spins(2));
    EXPECT_THROW(a * b, DomainError);
    EXPECT_THROW(a + b, DomainError);
    EXPECT_THROW(Operator(HilbertSpace::spins(1), Matrix::Zero(3, 3)), DomainError);
}

TEST(PartialTrace, ProductStateFactorizes) {
    std::mt19937_64 rng(5);
    const auto ra = fixtures::random_density(rng, HilbertSpace::spins(1, 1.0));
    const auto rb = fixtures::random_density(rng, HilbertSpace({Factor::boson(2)}));
    const auto rho = tensor(ra, rb);
    EXPECT_LE(max_diff(partial_trace(rho, {0}).matrix(), ra.matrix()), 1e-14);
    EXPECT_LE(max_diff(partial_trace(rho, {1}).matrix(), rb.matrix()), 1e-14);
}

TEST(PartialTrace, MaximallyMixedAndBellState) {
    const auto mixed = DensityMatrix::maximally_mixed(HilbertSpace::spins(2));
    EXPECT_LE(max_diff(partial_trace(mixed, {1}).matrix(), diag({0.5, 0.5})), 1e-15);

    Vector psi = Vector::Zero(4);
    psi(1) = psi(2) = 1.0 / std::sqrt(2.0); // (|up down> + |down up>)/sqrt2
    const auto bell = DensityMatrix::pure(HilbertSpace::spins(2), psi);
    EXPECT_LE(max_diff(partial_trace(bell, {0}).matrix(), diag({0.5, 0.5})), 1e-15);
}

TEST(PartialTrace, KeepingEverythingIsIdentityAndTraceIsPreserved) {
    std::mt19937_64 rng(9);
    const HilbertSpace space({Factor::spin(0.5), Factor::boson(2), Factor::spin(1.0)});
    for (int k = 0; k < 10; ++k) {
        const auto rho = fixtures::random_density(rng, space);
        EXPECT_EQ(max_diff(partial_trace(rho, {0, 1, 2}).matrix(), rho.matrix()), 0.0);
        for (const std::set<std::size_t>& keep :
             {std::set<std::size_t>{0}, {1}, {2}, {0, 2}, {1, 2}, {0, 1}}) {
            const auto red = partial_trace(rho, keep);
            EXPECT_NEAR(std::abs(red.trace() - 1.0), 0.0, 1e-13);
            EXPECT_LE(red.hermiticity_error(), 1e-14);
        }
    }
}

TEST(PartialTrace, ReducedFactorOrderFollowsSpace) {
    // keep {0, 2} of A (x) B (x) C must be A (x) C, not C (x) A
    std::mt19937_64 rng(21);
    const auto ra = fixtures::random_density(rng, HilbertSpace::spins(1));
    const auto rb = fixtures::random_density(rng, HilbertSpace::spins(1));
    const auto rc = fixtures::random_density(rng, HilbertSpace::spins(1, 1.0));
    const auto red = partial_trace(tensor(tensor(ra, rb), rc), {0, 2});
    EXPECT_LE(max_diff(red.matrix(), tensor(ra, rc).matrix()), 1e-14);
}

TEST(PartialTrace, InvalidKeepSets) {
    const auto rho = DensityMatrix::maximally_mixed(HilbertSpace::spins(2));
    EXPECT_THROW(partial_trace(rho, {}), DomainError);
    EXPECT_THROW(partial_trace(rho, {2}), DomainError);
}

TEST(Expectation, BasicValues) {
    const auto up = DensityMatrix::basis(HilbertSpace::spins(1), {0});
    EXPECT_EQ(expectation(spin_operators(0.5).z, up), cplx(0.5));

    std::mt19937_64 rng(1);
    const HilbertSpace space({Factor::spin(0.5), Factor::boson(3)});
    const auto rho = fixtures::random_density(rng, space);
    EXPECT_NEAR(std::abs(expectation(Operator::identity(space), rho) - 1.0), 0.0, 1e-14);

    const auto b = boson_operators(4);
    const auto vac = DensityMatrix::basis(b.a.space(), {0});
    EXPECT_EQ(expectation(b.a_dagger * b.a, vac), cplx(0.0));
}

TEST(Expectation, HermitianObservablesAreReal) {
    std::mt19937_64 rng(4);
    const HilbertSpace space({Factor::spin(1.5), Factor::boson(2)});
    for (int k = 0; k < 10; ++k) {
        const auto rho = fixtures::random_density(rng, space);
        const auto x = fixtures::random_operator(rng, space);
        const Operator h = x + x.dagger();
        EXPECT_LE(std::abs(expectation(h, rho).imag()), 1e-10);
    }
}

TEST(Expectation, SpaceMismatch) {
    EXPECT_THROW(expectation(Operator::identity(HilbertSpace::spins(2)),
                             DensityMatrix::maximally_mixed(HilbertSpace::spins(1))),
                 DomainError);
}

TEST(DensityMatrix, PhysicalityChecks) {
    const auto space = HilbertSpace::spins(1);
    EXPECT_NO_THROW(DensityMatrix::maximally_mixed(space).check_physical());
    Matrix bad(2, 2);
    bad << 1.5, 0, 0, -0.5;
    EXPECT_THROW(DensityMatrix(space, bad).check_physical(), DomainError);
    Matrix nonherm(2, 2);
    nonherm << 0.5, 0.1, 0.0, 0.5;
    EXPECT_THROW(DensityMatrix(space, nonherm).check_physical(), DomainError);
}

TEST(HilbertSpace, DimensionAndIndexing) {
    const HilbertSpace space({Factor::spin(0.5), Factor::spin(1.0), Factor::boson(3)});
    EXPECT_EQ(space.dim(), 2u * 3u * 4u);
    for (std::size_t i = 0; i < space.dim(); ++i) EXPECT_EQ(space.index(space.digits(i)), i);
    EXPECT_THROW(HilbertSpace(std::vector<Factor>{}), DomainError);
}
