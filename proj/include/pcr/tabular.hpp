#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pcr/belief.hpp"
#include "pcr/env_model.hpp"
#include "pcr/metrics.hpp"
#include "pcr/rng.hpp"
#include "pcr/tasks.hpp"

namespace pcr {

/// eta_n = eta0 / (1 + decay * n), epsilon-greedy exploration, v^f warmup.
struct LearningSchedule {
    double eta0 = 0.01;
    double decay = 0.001;
    double epsilon = 0.5;
    std::size_t warmup_epochs = 100;

    void validate() const;
    double rate(std::size_t n) const { return eta0 / (1.0 + decay * static_cast<double>(n)); }
};

/// Per-state action layout shared by the tables below.
class ActionLayout {
public:
    ActionLayout() = default;
    explicit ActionLayout(const MdpFamily& family);

    std::size_t states() const { return actions_.size(); }
    std::size_t actions(std::size_t x) const { return actions_[x]; }
    std::size_t offset(std::size_t x) const { return offset_[x]; }
    std::size_t size() const { return offset_.back(); }

private:
    std::vector<std::size_t> actions_;
    std::vector<std::size_t> offset_;
};

/// Index of the largest entry; lowest index on ties.
std::size_t argmax(const double* q, std::size_t n);

/// q(b, x, a) over (S+1) belief states.
class AugmentedQTable {
public:
    AugmentedQTable() = default;
    AugmentedQTable(ActionLayout layout, std::size_t belief_states);

    const ActionLayout& layout() const { return layout_; }
    std::size_t belief_states() const { return belief_states_; }
    double& at(std::size_t b, std::size_t x, std::size_t a) { return q_[index(b, x, a)]; }
    double at(std::size_t b, std::size_t x, std::size_t a) const { return q_[index(b, x, a)]; }
    const double* row(std::size_t b, std::size_t x) const { return &q_[index(b, x, 0)]; }
    double max(std::size_t b, std::size_t x) const;
    std::size_t greedy(std::size_t b, std::size_t x) const;
    const std::vector<double>& values() const { return q_; }

private:
    std::size_t index(std::size_t b, std::size_t x, std::size_t a) const {
        return b * layout_.size() + layout_.offset(x) + a;
    }

    ActionLayout layout_;
    std::size_t belief_states_ = 0;
    std::vector<double> q_;
};

/// q^f(x, a) for the prior belief row; collapsed rows are identically zero.
class FutureInfoTable {
public:
    FutureInfoTable() = default;
    explicit FutureInfoTable(ActionLayout layout);

    const ActionLayout& layout() const { return layout_; }
    double& at(std::size_t x, std::size_t a) { return q_[layout_.offset(x) + a]; }
    double at(std::size_t x, std::size_t a) const { return q_[layout_.offset(x) + a]; }
    const double* row(std::size_t x) const { return &q_[layout_.offset(x)]; }
    double max(std::size_t x) const;
    const std::vector<double>& values() const { return q_; }

private:
    ActionLayout layout_;
    std::vector<double> q_;
};

/// q^{planner}(x, a; world) for every ordered pair of a finite environment set.
class CrossQTables {
public:
    CrossQTables() = default;
    CrossQTables(ActionLayout layout, std::size_t envs);

    const ActionLayout& layout() const { return layout_; }
    std::size_t envs() const { return envs_; }
    double& at(std::size_t planner, std::size_t world, std::size_t x, std::size_t a) {
        return q_[index(planner, world, x, a)];
    }
    double at(std::size_t planner, std::size_t world, std::size_t x, std::size_t a) const {
        return q_[index(planner, world, x, a)];
    }
    const double* row(std::size_t planner, std::size_t world, std::size_t x) const {
        return &q_[index(planner, world, x, 0)];
    }
    /// Greedy action of the planner in its own environment.
    std::size_t greedy(std::size_t planner, std::size_t x) const;
    /// Learned v^{planner}(x; world): the world table at the planner's greedy action.
    double value(std::size_t planner, std::size_t world, std::size_t x) const;
    const std::vector<double>& values() const { return q_; }

private:
    std::size_t index(std::size_t planner, std::size_t world, std::size_t x, std::size_t a) const {
        return (planner * envs_ + world) * layout_.size() + layout_.offset(x) + a;
    }

    ActionLayout layout_;
    std::size_t envs_ = 0;
    std::vector<double> q_;
};

/// One tabular transition with belief-state indices.
struct QTransition {
    StateId x;
    std::size_t b = 0;
    ActionId a;
    double reward = 0.0;
    StateId next;
    std::size_t b_next = 0;
    bool terminal = false;
};

/// q(b,x,a) += eta (r + gamma max_a' q(b',x',a') - q(b,x,a)); returns the TD error.
double baseline_ba_q_update(AugmentedQTable& table, const QTransition& tr, double eta, double gamma);

/// q^f(x,a) += eta (lambda + gamma max_a' q^f(x',a') - q^f(x,a)), the bootstrap
/// being zero when b' is collapsed. Source belief must be the prior.
double pcr_vf_q_update(FutureInfoTable& table, const QTransition& tr, double lambda, double eta, double gamma);

/// q^{p}(x,a;label) += eta (r + gamma q^{p}(x', greedy_p(x'); label) - q^{p}(x,a;label)).
double cross_q_update(CrossQTables& tables, std::size_t label, std::size_t planner, const QTransition& tr,
                      double eta, double gamma);

/// Draw from the terminal belief of an episode.
EnvParams belief_horizon_sample(const Trajectory& traj, Rng& rng);

/// Exact v^c and bound from learned cross tables by enumeration over a categorical belief.
double learned_v_current(const CrossQTables& tables, StateId x, const CategoricalBelief& b);

enum class TabularMethod { Pcr, Baseline };
enum class CrossLabel { BeliefHorizon, GroundTruth };

struct TMazeTrainConfig {
    TMazeSpec maze;
    LearningSchedule schedule;
    std::size_t epochs = 5000;
    CrossLabel labels = CrossLabel::BeliefHorizon;
    /// Evaluate the greedy policy every `eval_every` epochs (and at the last).
    std::size_t eval_every = 1;
};

struct TMazeRun {
    MetricsRows rows;
    AugmentedQTable baseline;
    CrossQTables cross;
    FutureInfoTable future;
    double final_return = 0.0;
};

/// One seed of tabular T-maze learning. Emits greedy_return per evaluated epoch
/// and, for pcr, cross_q_loss (mean squared cross TD error of the epoch).
TMazeRun train_tmaze(TabularMethod method, const TMazeTrainConfig& cfg, std::uint64_t seed);

/// Cross-Q learning alone with the chosen labelling, behaviour epsilon-greedy on
/// the Thompson-sampled planner's own table.
CrossQTables train_cross_q(const TMazeTrainConfig& cfg, std::uint64_t seed);

/// Undiscounted return of a greedy T-maze policy averaged over both environments.
double tmaze_greedy_return(const TMazeFamily& maze, const Policy& policy);

/// Greedy policies of trained tables.
Policy pcr_greedy_policy(const TMazeFamily& maze, const CrossQTables& cross, const FutureInfoTable& future);
Policy baseline_greedy_policy(const TMazeFamily& maze, const AugmentedQTable& table);

}  // namespace pcr
