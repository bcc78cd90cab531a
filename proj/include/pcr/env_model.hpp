#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcr/belief.hpp"
#include "pcr/kernels/kernels.hpp"
#include "pcr/rng.hpp"
#include "pcr/types.hpp"

namespace pcr {

struct Outcome {
    StateId next;
    double probability = 0.0;
};

/// A family of finite MDPs indexed by environment parameters.
///
/// Reward timing: the reward for (x_t, a_t) accrues before the transition, so
/// "reward while at a location" is the reward for occupying x_t at step t.
class MdpFamily {
public:
    virtual ~MdpFamily() = default;

    virtual std::size_t state_count() const = 0;
    virtual std::size_t action_count(StateId x) const = 0;
    virtual void transition(StateId x, ActionId a, const EnvParams& e, std::vector<Outcome>& out) const = 0;
    virtual double expected_reward(StateId x, ActionId a, const EnvParams& e) const = 0;

    /// Defaults to the (deterministic) expected reward.
    virtual double sample_reward(StateId x, ActionId a, const EnvParams& e, Rng& rng) const;

    virtual double discount() const = 0;
    /// Episode length; nullopt for infinite horizon.
    virtual std::optional<std::size_t> horizon() const { return std::nullopt; }
    virtual bool is_terminal(StateId /*x*/) const { return false; }
    virtual std::string action_name(StateId x, ActionId a) const;

    /// Families whose transitions are deterministic moves on a fixed successor
    /// table and whose reward depends only on the occupied state return that
    /// table here; the batched grid kernels are used for them.
    virtual const kernels::GridTopology* grid_topology() const { return nullptr; }
    /// Per-state reward for families exposing grid_topology().
    virtual void state_rewards(const EnvParams& /*e*/, std::span<double> /*out*/) const {
        throw Error("state_rewards: family has no grid structure");
    }

    /// Throws Error naming the state and action when `a` is not legal in `x`.
    void check_action(StateId x, ActionId a) const;
};

/// One environment of a family flattened into CSR tables: rows are (state, action)
/// pairs, each owning a contiguous run of outcomes.
struct TabularModel {
    std::size_t states = 0;
    std::vector<std::size_t> row_begin;      // states + 1
    std::vector<double> reward;              // per row
    std::vector<std::size_t> outcome_begin;  // rows + 1
    std::vector<Outcome> outcomes;

    std::size_t actions(std::size_t x) const { return row_begin[x + 1] - row_begin[x]; }
    std::size_t row(std::size_t x, std::size_t a) const { return row_begin[x] + a; }
};

/// Validates that every transition distribution sums to 1 within 1e-12.
TabularModel compile_model(const MdpFamily& family, const EnvParams& e);

/// Explicit per-environment tables with deterministic rewards.
class TabularFamily final : public MdpFamily {
public:
    struct Row {
        double reward = 0.0;
        std::vector<Outcome> outcomes;
    };

    /// rows[env] holds one Row per (state, action) in state-major order.
    TabularFamily(std::vector<std::size_t> actions_per_state, std::vector<std::vector<Row>> rows, double gamma,
                  std::optional<std::size_t> horizon = std::nullopt);

    std::size_t env_count() const { return rows_.size(); }

    std::size_t state_count() const override { return actions_.size(); }
    std::size_t action_count(StateId x) const override { return actions_.at(x.index); }
    void transition(StateId x, ActionId a, const EnvParams& e, std::vector<Outcome>& out) const override;
    double expected_reward(StateId x, ActionId a, const EnvParams& e) const override;
    double discount() const override { return gamma_; }
    std::optional<std::size_t> horizon() const override { return horizon_; }

private:
    const Row& row(StateId x, ActionId a, const EnvParams& e) const;

    std::vector<std::size_t> actions_;
    std::vector<std::size_t> offset_;
    std::vector<std::vector<Row>> rows_;
    double gamma_;
    std::optional<std::size_t> horizon_;
};

/// One state, arms {A, B}; env 0 pays (1, 0), env 1 pays (0, 1); gamma 0.9.
TabularFamily two_arm_bandit();

/// Three states in a line, actions {left, right} (clipped), reward 1 for
/// occupying the rightmost state; gamma 0.5.
TabularFamily tiny_chain();

struct StepResult {
    double reward = 0.0;
    StateId next;
};

StepResult step(const MdpFamily& family, const EnvParams& e, StateId x, ActionId a, Rng& rng);

struct TrajectoryRecord {
    std::size_t t = 0;
    StateId x;
    Belief belief;
    ActionId a;
    double reward = 0.0;
    std::optional<double> cashed;
    StateId next;
    Belief next_belief;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    std::uint64_t seed = 0;
    EnvParams env;
};

/// What a belief updater sees after a transition. `world` is the environment
/// that generated the transition; updaters use it only as the observation source.
struct TransitionView {
    StateId x;
    ActionId a;
    double reward = 0.0;
    StateId next;
    const EnvParams* world = nullptr;
};

using Policy = std::function<ActionId(StateId, const Belief&)>;
using BeliefUpdater = std::function<Belief(const Belief&, const TransitionView&, Rng&)>;

/// Runs one episode of exactly `horizon` steps (fewer only on terminal states).
Trajectory simulate_episode(const MdpFamily& family, const EnvParams& e, const Policy& policy,
                            const BeliefUpdater& update, const Belief& initial, StateId start, std::size_t horizon,
                            Rng& rng);

/// Sum of gamma^t r_t over the records.
double discounted_return(const Trajectory& traj, double gamma);

}  // namespace pcr
