#include <gtest/gtest.h>

#include <cmath>

#include "pcr/dp_engine.hpp"
#include "pcr/oracles.hpp"
#include "pcr/tasks.hpp"

using namespace pcr;

namespace {

const EnvParams E0 = EnvParams::finite(0);
const EnvParams E1 = EnvParams::finite(1);

// Deterministic two-state MDP whose only reward is for staying in state 1.
TabularFamily zero_reward_family() {
    using Row = TabularFamily::Row;
    std::vector<Row> rows{{0.0, {{StateId{1}, 1.0}}}, {0.0, {{StateId{0}, 1.0}}}, {0.0, {{StateId{1}, 1.0}}}};
    return TabularFamily({1, 2}, {rows}, 0.8);
}

}  // namespace

TEST(ValueIteration, BanditGeometricSeries) {
    const ValueTable v = value_iteration(two_arm_bandit(), E0, 0.9);
    EXPECT_NEAR(v.at(0), 10.0, 1e-8);
    EXPECT_LE(v.residual, kDefaultTolerance);
}

TEST(ValueIteration, TinyChainMatchesEnumeration) {
    const TabularFamily f = tiny_chain();
    const ValueTable v = value_iteration(f, E0, 0.5);
    const auto oracle = oracle::enumerate_policies(compile_model(f, E0), 0.5);
    for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(v.at(x), oracle.values[x], 1e-8);
    // Occupancy reward at the right end: 1/(1-0.5) there, halved per step away.
    EXPECT_NEAR(v.at(2), 2.0, 1e-8);
    EXPECT_NEAR(v.at(1), 1.0, 1e-8);
    EXPECT_NEAR(v.at(0), 0.5, 1e-8);
}

TEST(ValueIteration, ZeroRewardGivesZeros) {
    const ValueTable v = value_iteration(zero_reward_family(), E0, 0.8);
    for (double x : v.values) EXPECT_EQ(x, 0.0);
}

TEST(ValueIteration, ContractionRate) {
    const ValueTable v = value_iteration(tiny_chain(), E0, 0.5);
    for (std::size_t i = 1; i < v.residual_history.size(); ++i) {
        if (v.residual_history[i - 1] == 0.0) break;
        EXPECT_LE(v.residual_history[i], 0.5 * v.residual_history[i - 1] * (1 + 1e-12) + 1e-300);
    }
}

TEST(ValueIteration, BadArgumentsRejected) {
    EXPECT_THROW(value_iteration(two_arm_bandit(), E0, 1.0), Error);
    EXPECT_THROW(value_iteration(two_arm_bandit(), E0, 0.9, 0.0), Error);
    EXPECT_THROW(value_iteration(two_arm_bandit(), E0, 0.9, 1e-12, 3), ConvergenceError);
}

TEST(FiniteCross, SelfCrossEqualsOptimal) {
    const TMazeFamily maze;
    const auto [opt, cross] = finite_horizon_cross_values(maze, E0, E0, 20, 0.95);
    EXPECT_EQ(opt.values, cross.values);
    for (std::size_t x = 0; x < maze.state_count(); ++x) EXPECT_EQ(opt.at(20, x), 0.0);
}

TEST(FiniteCross, BanditWrongPlannerEarnsNothing) {
    for (std::size_t T : {1u, 5u, 17u}) {
        const auto tabs = finite_horizon_cross_values(two_arm_bandit(), E1, E0, T, 0.9);
        EXPECT_EQ(tabs.second.at(0, 0), 0.0);
    }
}

TEST(FiniteCross, MazeWrongPlannerMatchesExhaustiveSearch) {
    const TMazeFamily maze;
    const oracle::MazeOracle mo;
    const auto tabs = finite_horizon_cross_values(maze, E0, E1, 20, 0.95);
    for (std::size_t t : {0u, 7u, 19u}) {
        for (std::size_t x = 0; x < maze.state_count(); ++x) {
            EXPECT_NEAR(tabs.second.at(t, x), mo.cross_value(0, 1, t, x, 0.95), 1e-9);
        }
    }
    EXPECT_LT(tabs.second.at(0, maze.junction()), 0.0);
    EXPECT_LT(tabs.second.at(0, maze.left_arm()), 0.0);
}

TEST(FiniteCross, SmallMdpsMatchTreeEnumerationExactly) {
    const TabularFamily fams[] = {two_arm_bandit(), tiny_chain()};
    for (const TabularFamily& f : fams) {
        for (std::size_t p = 0; p < f.env_count(); ++p) {
            for (std::size_t w = 0; w < f.env_count(); ++w) {
                for (std::size_t T = 1; T <= 6; ++T) {
                    const auto tabs = finite_horizon_cross_values(f, EnvParams::finite(p), EnvParams::finite(w), T,
                                                                  f.discount());
                    const auto mp = compile_model(f, EnvParams::finite(p));
                    const auto mw = compile_model(f, EnvParams::finite(w));
                    for (std::size_t x = 0; x < f.state_count(); ++x) {
                        EXPECT_NEAR(tabs.second.at(0, x), oracle::tree_cross(mp, mw, x, T, f.discount()), 1e-12);
                    }
                }
            }
        }
    }
}

TEST(InfiniteCross, BanditExamples) {
    EXPECT_NEAR(infinite_horizon_cross_values(two_arm_bandit(), E1, E0, 0.9).at(0), 0.0, 1e-12);
    EXPECT_NEAR(infinite_horizon_cross_values(two_arm_bandit(), E0, E0, 0.9).at(0), 10.0, 1e-8);
}

TEST(InfiniteCross, IdenticalEnvironmentsEqualValueIteration) {
    const TabularFamily f = tiny_chain();
    const auto c = infinite_horizon_cross_values(f, E0, E0, 0.5, 1e-10);
    const auto v = value_iteration(f, E0, 0.5, 1e-10);
    for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(c.at(x), v.at(x), 1e-9);
}

TEST(InfiniteCross, TreasurePairsMatchPolicyIterationAndDominate) {
    TreasureSpec spec;
    const TreasureFamily f = treasure_planning_family(spec);
    Rng rng(21);
    for (int k = 0; k < 100; ++k) {
        const EnvParams w = treasure_prior_sample(spec, rng);
        const EnvParams p = treasure_prior_sample(spec, rng);
        const auto got = infinite_horizon_cross_values(f, p, w, spec.gamma);
        const auto want = oracle::infinite_cross(compile_model(f, p), compile_model(f, w), spec.gamma, false);
        const auto opt = oracle::policy_iteration(compile_model(f, w), spec.gamma).values;
        for (std::size_t x = 0; x < 9; ++x) {
            EXPECT_NEAR(got.at(x), want[x], 1e-6);
            EXPECT_GE(opt[x] + 1e-9, got.at(x));
        }
    }
}

TEST(Batch, SingletonAndDuplicates) {
    TreasureSpec spec;
    const TreasureFamily f = treasure_planning_family(spec);
    Rng rng(2);
    const EnvParams a = treasure_prior_sample(spec, rng), b = treasure_prior_sample(spec, rng);
    const EnvPair pair{a, b};
    const auto single = batch_cross_values(f, std::span(&pair, 1), StateId{3}, spec.gamma);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0], infinite_horizon_cross_values(f, b, a, spec.gamma).at(3));
    const std::vector<EnvPair> dup{pair, pair, {b, a}, pair};
    const auto out = batch_cross_values(f, dup, StateId{3}, spec.gamma);
    EXPECT_EQ(out[0], out[1]);
    EXPECT_EQ(out[0], out[3]);
    EXPECT_EQ(out[0], single[0]);
}

TEST(Batch, FortyPairsBitIdenticalToLoop) {
    TreasureSpec spec;
    const TreasureFamily f = treasure_planning_family(spec);
    Rng rng(8);
    std::vector<EnvPair> pairs;
    for (int i = 0; i < 40; ++i) pairs.push_back({treasure_prior_sample(spec, rng), treasure_prior_sample(spec, rng)});
    const auto tables = batch_cross_value_tables(f, pairs, spec.gamma, 1e-6);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto one = infinite_horizon_cross_values(f, pairs[p].planner, pairs[p].world, spec.gamma, 1e-6);
        for (std::size_t x = 0; x < 9; ++x) ASSERT_EQ(tables[p * 9 + x], one.at(x)) << p << " " << x;
    }
}

TEST(Batch, NonGridFamilyMatchesLoop) {
    const TabularFamily f = two_arm_bandit();
    const std::vector<EnvPair> pairs{{E0, E0}, {E0, E1}, {E1, E0}, {E1, E1}};
    const auto out = batch_cross_values(f, pairs, StateId{0}, 0.9);
    EXPECT_NEAR(out[0], 10.0, 1e-8);
    EXPECT_NEAR(out[1], 0.0, 1e-12);
    EXPECT_NEAR(out[2], 0.0, 1e-12);
    EXPECT_NEAR(out[3], 10.0, 1e-8);
    const std::vector<EnvParams> envs{E0, E1};
    const auto opt = batch_optimal_value_tables(f, envs, 0.9);
    EXPECT_NEAR(opt[0], 10.0, 1e-8);
    EXPECT_NEAR(opt[1], 10.0, 1e-8);
}

TEST(BaValueIteration, MazeCollapsedRowsMatchFullInformation) {
    const TMazeFamily maze;
    const auto ba = ba_value_iteration(maze, maze.prior(), maze.likelihood(), 0.95, 20);
    for (std::size_t e = 0; e < 2; ++e) {
        const auto tabs = finite_horizon_cross_values(maze, EnvParams::finite(e), EnvParams::finite(e), 20, 0.95);
        for (std::size_t t = 0; t <= 20; ++t) {
            for (std::size_t x = 0; x < maze.state_count(); ++x) {
                EXPECT_NEAR(ba.at(t, e + 1, x), tabs.first.at(t, x), 1e-12);
            }
        }
    }
}

TEST(BaValueIteration, MazePriorStartMatchesExhaustiveSearch) {
    const TMazeFamily maze;
    const oracle::MazeOracle mo;
    const auto ba = ba_value_iteration(maze, maze.prior(), maze.likelihood(), 0.95, 20);
    EXPECT_NEAR(ba.at(0, 0, 2), mo.bayes_value(0.95), 1e-12);
    EXPECT_NEAR(ba.at(0, 0, 2), 6.797027, 1e-6);
    const auto undiscounted = ba_value_iteration(maze, maze.prior(), maze.likelihood(), 1.0, 20);
    EXPECT_NEAR(undiscounted.at(0, 0, 2), 13.0, 1e-12);
}

TEST(BaValueIteration, SandwichAtPrior) {
    const TMazeFamily maze;
    const auto ba = ba_value_iteration(maze, maze.prior(), maze.likelihood(), 0.95, 20);
    for (std::size_t x = 0; x < maze.state_count(); ++x) {
        double vc = 0.0, full = 0.0;
        for (std::size_t w = 0; w < 2; ++w) {
            for (std::size_t p = 0; p < 2; ++p) {
                vc += 0.25 * finite_horizon_cross_values(maze, EnvParams::finite(p), EnvParams::finite(w), 20, 0.95)
                                 .second.at(0, x);
            }
            full += 0.5 * finite_horizon_cross_values(maze, EnvParams::finite(w), EnvParams::finite(w), 20, 0.95)
                              .first.at(0, x);
        }
        EXPECT_LE(vc, ba.at(0, 0, x) + 1e-9);
        EXPECT_LE(ba.at(0, 0, x), full + 1e-9);
    }
}

TEST(BaValueIteration, BanditInfiniteHorizon) {
    const TabularFamily f = two_arm_bandit();
    const auto ba =
        ba_value_iteration(f, CategoricalBelief::uniform(2, true), reward_transition_likelihood(f, 2), 0.9, {});
    EXPECT_NEAR(ba.at(1, 0), 10.0, 1e-8);
    EXPECT_NEAR(ba.at(2, 0), 10.0, 1e-8);
    // One informative pull: 1/2 now, then the right arm forever.
    EXPECT_NEAR(ba.at(0, 0), 0.5 + 0.9 * 10.0, 1e-8);
}

TEST(BaValueIteration, NonDeterministicInferenceRejected) {
    const TMazeFamily maze;
    EXPECT_THROW(ba_value_iteration(maze, CategoricalBelief::uniform(2, false), maze.likelihood(), 0.95, 20), Error);
    const LikelihoodFn soft = [](StateId, ActionId, StateId, std::size_t) { return std::vector<double>{0.7, 0.3}; };
    EXPECT_THROW(ba_value_iteration(maze, maze.prior(), soft, 0.95, 20), Error);
}
