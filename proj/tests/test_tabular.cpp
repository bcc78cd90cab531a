#include <gtest/gtest.h>

#include <cmath>

#include "pcr/dp_engine.hpp"
#include "pcr/pcr_core.hpp"
#include "pcr/tabular.hpp"

using namespace pcr;

namespace {

TMazeTrainConfig converge_config() {
    TMazeTrainConfig cfg;
    cfg.schedule = LearningSchedule{0.5, 0.002, 0.5, 100};
    cfg.epochs = 20000;
    return cfg;
}

}  // namespace

TEST(Schedule, DecayAndValidation) {
    const LearningSchedule s;
    EXPECT_DOUBLE_EQ(s.rate(0), 0.01);
    EXPECT_DOUBLE_EQ(s.rate(1000), 0.005);
    for (std::size_t n = 1; n < 100; ++n) EXPECT_LE(s.rate(n), s.rate(n - 1));
    EXPECT_THROW((LearningSchedule{0.0, 0.001, 0.5, 100}).validate(), Error);
    EXPECT_THROW((LearningSchedule{0.1, -1.0, 0.5, 100}).validate(), Error);
    EXPECT_THROW((LearningSchedule{0.1, 0.001, 1.5, 100}).validate(), Error);
}

TEST(Argmax, LowestIndexOnTies) {
    const double q[] = {1.0, 3.0, 3.0, 2.0};
    EXPECT_EQ(argmax(q, 4), 1u);
}

TEST(BaselineUpdate, OneStepBackup) {
    const TabularFamily f = two_arm_bandit();
    AugmentedQTable t(ActionLayout(f), 3);
    const QTransition tr{StateId{0}, 0, ActionId{0}, 1.0, StateId{0}, 1, true};
    EXPECT_EQ(baseline_ba_q_update(t, tr, 1.0, 0.5), 1.0);
    EXPECT_EQ(t.at(0, 0, 0), 1.0);
    const auto before = t.values();
    baseline_ba_q_update(t, tr, 0.0, 0.5);
    EXPECT_EQ(t.values(), before);
}

TEST(BaselineUpdate, UntouchedEntriesBitIdentical) {
    const TMazeFamily maze;
    AugmentedQTable t(ActionLayout(maze), 3);
    Rng rng(0);
    for (int i = 0; i < 50; ++i) {
        const std::size_t x = rng.uniform_index(maze.state_count());
        const std::size_t a = rng.uniform_index(maze.action_count(StateId{x}));
        baseline_ba_q_update(t, {StateId{x}, 0, ActionId{a}, rng.uniform(), maze.successor(StateId{x}, ActionId{a}),
                                 0, false},
                             0.3, 0.9);
    }
    const auto before = t.values();
    baseline_ba_q_update(t, {StateId{1}, 2, ActionId{0}, 1.0, StateId{2}, 2, false}, 0.5, 0.9);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < before.size(); ++i) changed += before[i] != t.values()[i] ? 1 : 0;
    EXPECT_EQ(changed, 1u);
}

TEST(BaselineUpdate, TinyChainConvergesToDp) {
    const TabularFamily f = tiny_chain();
    const EnvParams e = EnvParams::finite(0);
    AugmentedQTable t(ActionLayout(f), 1);
    std::vector<Outcome> out;
    for (int sweep = 0; sweep < 2000; ++sweep) {
        for (std::size_t x = 0; x < 3; ++x) {
            for (std::size_t a = 0; a < 2; ++a) {
                f.transition(StateId{x}, ActionId{a}, e, out);
                baseline_ba_q_update(
                    t, {StateId{x}, 0, ActionId{a}, f.expected_reward(StateId{x}, ActionId{a}, e), out[0].next, 0, false},
                    0.5, 0.5);
            }
        }
    }
    const ValueTable v = value_iteration(f, e, 0.5);
    for (std::size_t x = 0; x < 3; ++x) {
        for (std::size_t a = 0; a < 2; ++a) {
            f.transition(StateId{x}, ActionId{a}, e, out);
            const double q = f.expected_reward(StateId{x}, ActionId{a}, e) + 0.5 * v.at(out[0].next.index);
            EXPECT_NEAR(t.at(0, x, a), q, 1e-3);
        }
    }
}

TEST(FutureUpdate, CollapseTransitionTakesLambda) {
    const TabularFamily f = two_arm_bandit();
    FutureInfoTable t{ActionLayout(f)};
    t.at(0, 1) = 100.0;  // would be picked up by a bootstrap
    const QTransition tr{StateId{0}, 0, ActionId{0}, 0.0, StateId{0}, 1, false};
    pcr_vf_q_update(t, tr, 4.0, 1.0, 0.9);
    EXPECT_NEAR(t.at(0, 0), 4.0, 1e-12);
}

TEST(FutureUpdate, ZeroLambdaKeepsZeroAndRejectsCollapsedSource) {
    const TabularFamily f = two_arm_bandit();
    FutureInfoTable t{ActionLayout(f)};
    for (int i = 0; i < 10; ++i) pcr_vf_q_update(t, {StateId{0}, 0, ActionId{static_cast<std::size_t>(i % 2)}, 0.0, StateId{0}, 0, false}, 0.0, 0.5, 0.9);
    for (double v : t.values()) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(pcr_vf_q_update(t, {StateId{0}, 1, ActionId{0}, 0.0, StateId{0}, 1, false}, 1.0, 0.5, 0.9), Error);
}

TEST(CrossUpdate, SameLabelIsQLearningOnThatEnvironment) {
    const TabularFamily f = tiny_chain();
    CrossQTables c(ActionLayout(f), 1);
    AugmentedQTable q(ActionLayout(f), 1);
    Rng rng(3);
    std::vector<Outcome> out;
    for (int i = 0; i < 500; ++i) {
        const std::size_t x = rng.uniform_index(3), a = rng.uniform_index(2);
        f.transition(StateId{x}, ActionId{a}, EnvParams::finite(0), out);
        const QTransition tr{StateId{x}, 0, ActionId{a}, x == 2 ? 1.0 : 0.0, out[0].next, 0, false};
        const double d1 = cross_q_update(c, 0, 0, tr, 0.3, 0.5);
        const double d2 = baseline_ba_q_update(q, tr, 0.3, 0.5);
        ASSERT_EQ(d1, d2);
    }
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t a = 0; a < 2; ++a) EXPECT_EQ(c.at(0, 0, x, a), q.at(0, x, a));
}

TEST(CrossUpdate, BanditWrongPlannerConvergesToZero) {
    const TabularFamily f = two_arm_bandit();
    CrossQTables c(ActionLayout(f), 2);
    Rng rng(1);
    for (int i = 0; i < 5000; ++i) {
        const std::size_t world = rng.uniform_index(2);
        const std::size_t a = rng.uniform_index(2);
        const double r = a == world ? 1.0 : 0.0;
        const QTransition tr{StateId{0}, 0, ActionId{a}, r, StateId{0}, 0, false};
        for (std::size_t p = 0; p < 2; ++p) cross_q_update(c, world, p, tr, 0.1, 0.9);
    }
    EXPECT_EQ(c.greedy(1, 0), 1u);
    EXPECT_NEAR(c.value(1, 0, 0), 0.0, 1e-3);
    EXPECT_NEAR(c.value(0, 0, 0), 10.0, 0.2);
}

TEST(BeliefHorizon, OneHotAndPriorFrequencies) {
    Trajectory tr;
    TrajectoryRecord rec;
    const auto prior = CategoricalBelief::uniform(2, true);
    rec.next_belief = update_categorical(prior, std::vector<double>{0.0, 1.0});
    tr.records.push_back(rec);
    Rng rng(0);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(belief_horizon_sample(tr, rng).index(), 1u);
    tr.records.back().next_belief = prior;
    int zero = 0;
    for (int i = 0; i < 10000; ++i) zero += belief_horizon_sample(tr, rng).index() == 0 ? 1 : 0;
    EXPECT_NEAR(zero / 10000.0, 0.5, 0.02);
    EXPECT_THROW(belief_horizon_sample(Trajectory{}, rng), Error);
}

TEST(TMaze, TrainRowsAndDeterminism) {
    TMazeTrainConfig cfg;
    cfg.epochs = 150;
    const TMazeRun a = train_tmaze(TabularMethod::Pcr, cfg, 4);
    const TMazeRun b = train_tmaze(TabularMethod::Pcr, cfg, 4);
    EXPECT_EQ(a.rows, b.rows);
    std::size_t ret = 0, loss = 0;
    for (const auto& r : a.rows) {
        ret += r.metric == "greedy_return" ? 1 : 0;
        loss += r.metric == "cross_q_loss" ? 1 : 0;
        EXPECT_EQ(r.method, "pcr-q");
    }
    EXPECT_EQ(ret, 150u);
    EXPECT_EQ(loss, 150u);
    const TMazeRun c = train_tmaze(TabularMethod::Baseline, cfg, 4);
    for (const auto& r : c.rows) EXPECT_EQ(r.metric, "greedy_return");
}

TEST(TMaze, FutureTableUntouchedDuringWarmup) {
    TMazeTrainConfig cfg;
    cfg.epochs = 100;
    const TMazeRun run = train_tmaze(TabularMethod::Pcr, cfg, 1);
    for (double v : run.future.values()) EXPECT_EQ(v, 0.0);
}

TEST(TMaze, ConvergedCrossTablesMatchDp) {
    const TMazeTrainConfig cfg = converge_config();
    const TMazeFamily maze;
    const CrossQTables c = train_cross_q(cfg, 2);
    for (std::size_t p = 0; p < 2; ++p) {
        for (std::size_t w = 0; w < 2; ++w) {
            const auto dp = infinite_horizon_cross_values(maze, EnvParams::finite(p), EnvParams::finite(w), 0.95);
            // States the planner's own greedy policy visits from the start.
            StateId x = maze.start();
            for (int t = 0; t < 12; ++t) {
                EXPECT_NEAR(c.value(p, w, x.index), dp.at(x.index), 0.05) << p << w << " x=" << x.index;
                x = maze.successor(x, ActionId{c.greedy(p, x.index)});
            }
        }
    }
}

TEST(TMaze, BeliefHorizonLabelsMatchGroundTruth) {
    TMazeTrainConfig bh = converge_config();
    TMazeTrainConfig gt = bh;
    gt.labels = CrossLabel::GroundTruth;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const CrossQTables a = train_cross_q(bh, seed);
        const CrossQTables b = train_cross_q(gt, seed);
        double sup = 0.0;
        for (std::size_t i = 0; i < a.values().size(); ++i) sup = std::max(sup, std::abs(a.values()[i] - b.values()[i]));
        EXPECT_LT(sup, 0.1);
        for (std::size_t p = 0; p < 2; ++p)
            for (std::size_t x = 0; x < 7; ++x) EXPECT_EQ(a.greedy(p, x), b.greedy(p, x));
    }
}

TEST(TMaze, GreedyReturnOfOptimalPlan) {
    const TMazeFamily maze;
    // down, down to the cue, then up to the junction and into the cued arm.
    const Policy plan = [&](StateId x, const Belief& b) {
        const auto& cb = std::get<CategoricalBelief>(b);
        const std::size_t k = belief_state_index(cb);
        if (x.index == maze.left_arm() || x.index == maze.right_arm()) return ActionId{1};
        if (k == 0) return x.index == maze.cue() ? ActionId{0} : ActionId{1};
        if (x.index == maze.junction()) return ActionId{k == 1 ? 1u : 2u};
        return ActionId{0};
    };
    EXPECT_DOUBLE_EQ(tmaze_greedy_return(maze, plan), 13.0);
}
