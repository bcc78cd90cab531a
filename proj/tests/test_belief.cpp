#include <gtest/gtest.h>

#include <cmath>

#include "pcr/belief.hpp"

using namespace pcr;

TEST(Categorical, UninformativeObservationKeepsPrior) {
    const auto b = update_categorical(CategoricalBelief::uniform(2), std::vector<double>{1.0, 1.0});
    EXPECT_DOUBLE_EQ(b.prob(0), 0.5);
    EXPECT_DOUBLE_EQ(b.prob(1), 0.5);
}

TEST(Categorical, OneHotLikelihoodCollapses) {
    const auto b = update_categorical(CategoricalBelief::uniform(2, true), std::vector<double>{1.0, 0.0});
    EXPECT_EQ(b.prob(0), 1.0);
    EXPECT_EQ(b.prob(1), 0.0);
    EXPECT_EQ(belief_state_index(b), 1u);
}

TEST(Categorical, HandBayesArithmetic) {
    const auto b = update_categorical(CategoricalBelief::prior({0.2, 0.8}), std::vector<double>{0.5, 0.25});
    EXPECT_NEAR(b.prob(0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(b.prob(1), 2.0 / 3.0, 1e-15);
}

TEST(Categorical, ImpossibleObservationRejected) {
    const auto b = CategoricalBelief::prior({1.0, 0.0});
    EXPECT_THROW(update_categorical(b, std::vector<double>{0.0, 1.0}), Error);
    EXPECT_THROW(update_categorical(b, std::vector<double>{-1.0, 1.0}), Error);
}

TEST(Categorical, InvalidPriorRejected) {
    EXPECT_THROW(CategoricalBelief::prior({0.5, 0.6}), Error);
    EXPECT_THROW(CategoricalBelief::prior({-0.1, 1.1}), Error);
}

TEST(Categorical, NormalizationPreservedOverManyUpdates) {
    Rng rng(3);
    CategoricalBelief b = CategoricalBelief::prior({0.1, 0.2, 0.3, 0.4});
    for (int i = 0; i < 200; ++i) {
        std::vector<double> lik(4);
        for (double& l : lik) l = 0.5 + rng.uniform();
        b = update_categorical(b, lik);
        double s = 0.0;
        for (double p : b.probs()) s += p;
        ASSERT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(BeliefIndex, PriorAndCollapsed) {
    const auto prior = CategoricalBelief::uniform(2, true);
    EXPECT_EQ(belief_state_index(prior), 0u);
    const auto right = update_categorical(prior, std::vector<double>{0.0, 1.0});
    EXPECT_EQ(belief_state_index(right), 2u);
    EXPECT_EQ(belief_from_index(prior, 2), right);
    EXPECT_EQ(belief_from_index(prior, 0), prior);
}

TEST(BeliefIndex, NonDeterministicBeliefRejected) {
    const auto prior = CategoricalBelief::uniform(2, true);
    const auto mixed = update_categorical(prior, std::vector<double>{0.6, 0.4});
    EXPECT_THROW(belief_state_index(mixed), Error);
    EXPECT_THROW(belief_state_index(CategoricalBelief::uniform(2, false)), Error);
}

TEST(Beta, ConjugateIncrements) {
    const BetaGridBelief b(1, 0.1, 1.0);
    const auto one = update_beta(b, 0, 1, 0);
    EXPECT_DOUBLE_EQ(one.alpha()[0], 1.1);
    EXPECT_DOUBLE_EQ(one.beta()[0], 1.0);
    EXPECT_EQ(update_beta(b, 0, 0, 0), b);
    const auto five = update_beta(b, 0, 2, 3);
    EXPECT_DOUBLE_EQ(five.alpha()[0], 2.1);
    EXPECT_DOUBLE_EQ(five.beta()[0], 4.0);
    EXPECT_NEAR(mean_env(five)[0], 2.1 / 6.1, 1e-15);
}

TEST(Beta, OnlyTouchedCellChanges) {
    const BetaGridBelief b(9, 0.1, 1.0);
    const auto u = update_beta(b, 4, 3, 7);
    for (std::size_t c = 0; c < 9; ++c) {
        if (c == 4) continue;
        EXPECT_EQ(u.alpha()[c], b.alpha()[c]);
        EXPECT_EQ(u.beta()[c], b.beta()[c]);
    }
}

TEST(Beta, UpdatesCommute) {
    const BetaGridBelief b(4, 0.1, 1.0);
    const auto ab = update_beta(update_beta(b, 1, 2, 5), 1, 4, 1);
    const auto joint = update_beta(b, 1, 6, 6);
    EXPECT_EQ(ab, joint);
}

TEST(Beta, RejectsNegativeCountsAndBadParameters) {
    const BetaGridBelief b(4, 0.1, 1.0);
    EXPECT_THROW(update_beta(b, 0, -1, 0), Error);
    EXPECT_THROW(update_beta(b, 7, 0, 0), Error);
    EXPECT_THROW(BetaGridBelief(4, 0.0, 1.0), Error);
}

TEST(Beta, MeanEnv) {
    EXPECT_NEAR(mean_env(BetaGridBelief(1, 0.1, 1.0))[0], 0.1 / 1.1, 1e-15);
    EXPECT_DOUBLE_EQ(mean_env(BetaGridBelief(1, 1.0, 1.0))[0], 0.5);
    EXPECT_NEAR(mean_env(BetaGridBelief({2.1}, {4.2}))[0], 1.0 / 3.0, 1e-15);
}

TEST(Sampling, DiracAlwaysSame) {
    Rng rng(1);
    const DiracBelief d{EnvParams::finite(1)};
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_env(d, rng).index(), 1u);
    const auto c = d.to_categorical(3);
    EXPECT_EQ(c.one_hot_index(), 1u);
}

TEST(Sampling, CategoricalFrequency) {
    Rng rng(2);
    const auto b = CategoricalBelief::uniform(2);
    int first = 0;
    for (int i = 0; i < 10000; ++i) first += sample_env(b, rng).index() == 0 ? 1 : 0;
    EXPECT_NEAR(first / 10000.0, 0.5, 0.02);
}

TEST(Sampling, BetaGridMeanWithinThreeSe) {
    Rng rng(4);
    const BetaGridBelief b(3, 0.1, 1.0);
    const int n = 10000;
    std::vector<double> sum(3, 0.0);
    for (int i = 0; i < n; ++i) {
        const EnvParams e = sample_env(b, rng);
        ASSERT_TRUE(e.is_grid());
        for (std::size_t c = 0; c < 3; ++c) {
            ASSERT_GE(e.probs()[c], 0.0);
            ASSERT_LE(e.probs()[c], 1.0);
            sum[c] += e.probs()[c];
        }
    }
    const double mean = 0.1 / 1.1;
    const double var = 0.1 / (1.1 * 1.1 * 2.1);
    for (double s : sum) EXPECT_NEAR(s / n, mean, 3.0 * std::sqrt(var / n));
}

TEST(Sampling, VariantDispatch) {
    Rng a(9), b(9);
    const Belief v = BetaGridBelief(2, 1.0, 1.0);
    EXPECT_EQ(sample_env(v, a), sample_env(std::get<BetaGridBelief>(v), b));
}
