#include "chiralspin/experiments.hpp"

#include <gtest/gtest.h>

using namespace chiralspin;

namespace {

ExperimentOptions threads(std::size_t n) {
    ExperimentOptions o;
    o.threads = n;
    return o;
}

void expect_identical(const ExperimentReport& a, const ExperimentReport& b) {
    EXPECT_EQ(a.parameters, b.parameters);
    EXPECT_EQ(a.metrics, b.metrics); // bitwise: std::map<string, double> ==
    EXPECT_EQ(a.pass_flags, b.pass_flags);
    ASSERT_EQ(a.trajectories.size(), b.trajectories.size());
    for (std::size_t k = 0; k < a.trajectories.size(); ++k) {
        EXPECT_EQ(a.trajectories[k].label, b.trajectories[k].label);
        EXPECT_EQ(a.trajectories[k].trajectory.times, b.trajectories[k].trajectory.times);
        for (std::size_t s = 0; s < a.trajectories[k].trajectory.series.size(); ++s)
            EXPECT_EQ(a.trajectories[k].trajectory.series[s].values, b.trajectories[k].trajectory.series[s].values);
    }
}

} // namespace

TEST(ParallelMap, KeepsIndexOrderForAnyWorkerCount) {
    for (std::size_t t : {1u, 2u, 5u, 16u}) {
        const auto out = parallel_map(9, t, [](std::size_t i) { return static_cast<int>(i * i); });
        ASSERT_EQ(out.size(), 9u);
        for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
    }
    EXPECT_TRUE(parallel_map(0, 4, [](std::size_t) { return 1; }).empty());
}

TEST(ParallelMap, RethrowsLowestFailingIndex) {
    try {
        parallel_map(6, 3, [](std::size_t i) -> int {
            if (i == 4) throw FitError("four");
            if (i == 2) throw FitError("two");
            return 0;
        });
        FAIL();
    } catch (const FitError& e) {
        EXPECT_STREQ(e.what(), "two");
    }
}

TEST(Report, FlagsMustReferToRecordedMetrics) {
    ExperimentReport r;
    EXPECT_THROW(r.flag("x", true, {"missing"}), DomainError);
    r.metrics["present"] = 1.0;
    EXPECT_NO_THROW(r.flag("x", true, {"present"}));
    EXPECT_TRUE(r.all_pass());
}

TEST(Report, NumberKeysAreShortest) {
    EXPECT_EQ(number_key(100.0), "100");
    EXPECT_EQ(number_key(0.25), "0.25");
    EXPECT_EQ(number_key(1e-4), "0.0001");
    EXPECT_EQ(number_key(3e-5), "3e-05");
    EXPECT_EQ(number_key(0.0), "0");
}

TEST(EliminationValidation, ZeroCouplingIsANullResult) {
    EliminationParams p;
    p.g_hz = 0.0;
    const auto r = elimination_validation(p);
    EXPECT_TRUE(r.pass_flags.at("null_result"));
    EXPECT_TRUE(r.metrics.empty());
    EXPECT_TRUE(r.trajectories.empty());
}

TEST(EliminationValidation, RejectsNonDispersiveRatios) {
    EliminationParams p;
    p.delta_over_g = {5.0, 50.0};
    EXPECT_THROW(elimination_validation(p), DomainError);
    p.delta_over_g = {};
    EXPECT_THROW(elimination_validation(p), DomainError);
}

TEST(EliminationValidation, ConstantAgainstExactSwapRate) {
    EliminationParams p;
    p.g_hz = 3.0;
    p.delta_over_g = {20.0, 10.0};
    const auto r = elimination_validation(p, threads(2));
    for (double ratio : {10.0, 20.0}) {
        const std::string key = number_key(ratio);
        // one-excitation sector: the swap completes at pi / lambda with
        // lambda = (sqrt(Delta^2 + 8 g^2) - Delta) / 2
        const double lambda = (std::sqrt(ratio * ratio + 8.0) - ratio) / 2.0; // units of g
        const double exact = lambda / 2.0 * ratio;                            // gamma Delta / g^2
        EXPECT_NEAR(r.metrics.at("constant_" + key), exact, 1e-4 * exact) << key;
        EXPECT_NEAR(r.metrics.at("gamma_fit_hz_" + key), exact * p.g_hz / ratio, 1e-4 * p.g_hz / ratio);
        EXPECT_LE(r.metrics.at("max_phonon_" + key), 4.0 / (ratio * ratio));
    }
    EXPECT_TRUE(r.pass_flags.at("converged"));
    EXPECT_TRUE(r.pass_flags.at("phonon_bound"));
    EXPECT_TRUE(r.pass_flags.at("physical"));
    EXPECT_TRUE(r.pass_flags.at("excitation_number"));
    EXPECT_EQ(r.trajectories.size(), 2u);
    EXPECT_EQ(r.trajectories[0].label, "elimination_10"); // sorted parameter order
}

TEST(EliminationValidation, ShortRunRecordsFitFailureWithoutThrowing) {
    EliminationParams p;
    p.delta_over_g = {10.0};
    ExperimentOptions o;
    o.integrator.t_final = 20.0;
    const auto r = elimination_validation(p, o);
    EXPECT_TRUE(r.notes.count("fit_10"));
    EXPECT_FALSE(r.metrics.count("constant_10"));
    EXPECT_TRUE(r.metrics.count("max_phonon_10"));
}

TEST(TransferAsymmetry, ForwardOnlyBlocksBackwardTransfer) {
    const auto r = transfer_asymmetry({1.0, 0.0, 0.4});
    EXPECT_LE(r.metrics.at("backward_peak"), 1e-10);
    // P_B = 4 x^2 e^{-2x}, x = gamma t, peaks at 4 e^{-2}
    EXPECT_NEAR(r.metrics.at("forward_peak"), 4.0 * std::exp(-2.0), 1e-4);
    EXPECT_TRUE(std::isinf(r.metrics.at("asymmetry")));
    EXPECT_TRUE(r.pass_flags.at("backward_blocked"));
    EXPECT_TRUE(r.pass_flags.at("forward_transfer"));
    EXPECT_TRUE(r.pass_flags.at("physical"));
    EXPECT_TRUE(r.pass_flags.at("excitation_number"));
}

TEST(TransferAsymmetry, EqualRatesAreReciprocal) {
    for (double kd : {0.0, 0.9, 2.5}) {
        const auto r = transfer_asymmetry({2.0, 2.0, kd});
        EXPECT_LE(r.metrics.at("reciprocal_deviation"), 1e-9) << kd;
        EXPECT_TRUE(r.pass_flags.at("reciprocal"));
        EXPECT_NEAR(r.metrics.at("asymmetry"), 1.0, 1e-9);
    }
}

TEST(TransferAsymmetry, BudgetRatesAreStronglyNonReciprocal) {
    const auto b = materials::coupling_table(materials::lookup_material("alpha-SiO2"), {1e-6, 1e-7, 1e-7},
                                             materials::SpinKind::electron, 1e4);
    const auto r = transfer_asymmetry({b.gamma(), b.gamma_prime(), 0.0});
    EXPECT_GE(r.metrics.at("asymmetry"), 1e3);
    EXPECT_GT(r.metrics.at("forward_peak"), 0.1);
}

TEST(ReciprocitySweep, MonotoneBetweenBlockedAndReciprocal) {
    SweepParams p;
    p.kd = 0.7;
    p.ratios = {1.0, 0.0, 0.5, 0.2};
    const auto r = reciprocity_sweep(p, threads(3));
    EXPECT_TRUE(r.pass_flags.at("monotone"));
    EXPECT_TRUE(r.pass_flags.at("blocked_limit"));
    EXPECT_TRUE(r.pass_flags.at("reciprocal_limit"));
    EXPECT_GE(r.metrics.at("asymmetry_1"), 0.99);
    EXPECT_LE(r.metrics.at("asymmetry_1"), 1.01);
    EXPECT_GT(r.metrics.at("asymmetry_0.2"), r.metrics.at("asymmetry_0.5"));
    EXPECT_EQ(r.trajectories.size(), 8u);
}

TEST(ReciprocitySweep, WorkerCountDoesNotChangeResults) {
    SweepParams p;
    p.ratios = {0.0, 0.3, 1.0};
    p.t_final_rate = 3.0;
    expect_identical(reciprocity_sweep(p, threads(1)), reciprocity_sweep(p, threads(3)));
}

TEST(CascadeChain, ThreeSpins) {
    const auto r = cascade_chain({3, 1.0, 0.8, 12.0});
    EXPECT_TRUE(r.pass_flags.at("no_back_action"));
    EXPECT_TRUE(r.pass_flags.at("upstream_silent"));
    EXPECT_TRUE(r.pass_flags.at("arrival_ordered"));
    EXPECT_TRUE(r.pass_flags.at("physical"));
    EXPECT_LE(r.metrics.at("back_action_1"), 1e-8);
    EXPECT_LE(r.metrics.at("back_action_2"), 1e-8);
    EXPECT_LE(r.metrics.at("upstream_leak"), 1e-10);
    EXPECT_GE(r.metrics.at("arrival_time_s_3"), r.metrics.at("arrival_time_s_2"));
    // spin 2 follows the pair result: peak at gamma t = 1, t = 1 / (2 pi gamma_hz)
    EXPECT_NEAR(r.metrics.at("arrival_time_s_2"), 1.0 / materials::two_pi, 0.02 / materials::two_pi);
}

TEST(CascadeChain, PairIsTheModuleInvariant) {
    const auto r = cascade_chain({2, 1.0, 0.3, 6.0});
    EXPECT_LE(r.metrics.at("back_action_1"), 1e-8);
    EXPECT_FALSE(r.metrics.count("back_action_2"));
}

TEST(CascadeChain, LengthGuard) {
    EXPECT_THROW(cascade_chain({1, 1.0, 0.0, 1.0}), DomainError);
    EXPECT_THROW(cascade_chain({6, 1.0, 0.0, 1.0}), DomainError);
    EXPECT_THROW(cascade_chain({3, 0.0, 0.0, 1.0}), DomainError);
}

TEST(DecoherenceBudget, DrivenNuclearNumbers) {
    DecoherenceParams p;
    p.gamma0_hz = 5.0;
    p.drive_u = {1e-4, 2e-4};
    const auto r = decoherence_budget(p, materials::lookup_material("alpha-SiO2"));
    EXPECT_DOUBLE_EQ(r.metrics.at("g_hz_0.0001"), 100.0);
    EXPECT_DOUBLE_EQ(r.metrics.at("gamma_hz_0.0001"), 20.0);
    EXPECT_DOUBLE_EQ(r.metrics.at("ratio_0.0001"), 4.0);
    EXPECT_EQ(r.metrics.at("gamma_hz_0.0002") / r.metrics.at("gamma_hz_0.0001"), 4.0);
    EXPECT_TRUE(r.pass_flags.at("quadratic_scaling"));
    // at the crossover amplitude gamma equals gamma0
    DecoherenceParams at = p;
    at.drive_u = {r.metrics.at("crossover_u")};
    const auto rc = decoherence_budget(at, materials::lookup_material("alpha-SiO2"));
    EXPECT_NEAR(rc.metrics.at("ratio_" + number_key(at.drive_u[0])), 1.0, 1e-12);
}

TEST(DecoherenceBudget, ZeroIntrinsicRate) {
    DecoherenceParams p;
    p.gamma0_hz = 0.0;
    p.drive_u = {1e-4};
    const auto r = decoherence_budget(p, materials::lookup_material("alpha-SiO2"));
    EXPECT_TRUE(std::isinf(r.metrics.at("ratio_0.0001")));
    EXPECT_EQ(r.metrics.at("crossover_u"), 0.0);
}

TEST(Simulate, CarriesTrajectoryAndDiagnostics) {
    const auto m = build_cascaded_model(CascadeSpec::pair(1.0, 0.0, 0.2), Direction::forward);
    IntegratorConfig cfg;
    cfg.dt = 0.01;
    cfg.t_final = 2.0;
    cfg.sample_every = 10;
    const auto r = simulate("run", m, DensityMatrix::basis(m.space, {0, 1}), cfg,
                            {{"PB", spin_population(m.space, 1)}}, ExcitationCheck::non_increasing);
    ASSERT_EQ(r.trajectories.size(), 1u);
    EXPECT_EQ(r.trajectories[0].trajectory.times.size(), 21u);
    EXPECT_TRUE(r.pass_flags.at("physical"));
    EXPECT_TRUE(r.pass_flags.at("excitation_number"));
    EXPECT_EQ(r.metrics.at("steps"), 200.0);
}

TEST(Determinism, RepeatedRunsAreBitIdentical) {
    expect_identical(transfer_asymmetry({1.0, 0.3, 1.1}), transfer_asymmetry({1.0, 0.3, 1.1}));
    expect_identical(cascade_chain({3, 1.0, 0.5, 4.0}, threads(1)), cascade_chain({3, 1.0, 0.5, 4.0}, threads(4)));
}
