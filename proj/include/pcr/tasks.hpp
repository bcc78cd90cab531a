#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "pcr/belief.hpp"
#include "pcr/dp_engine.hpp"
#include "pcr/env_model.hpp"
#include "pcr/kernels/kernels.hpp"
#include "pcr/rng.hpp"

namespace pcr {

// ---------------------------------------------------------------- T-maze

/// Corridor cells 0..L-1 bottom to top (0 is the cue, L-1 the junction), then
/// the left and right arm cells. Environment 0 rewards the left arm, 1 the right.
struct TMazeSpec {
    std::size_t corridor_length = 5;
    std::optional<std::size_t> start;  // defaults to the corridor middle
    double reward = 1.0;
    double punishment = -7.0;
    std::size_t horizon = 20;
    double gamma = 0.95;

    void validate() const;
    std::size_t start_cell() const { return start.value_or(corridor_length / 2); }
};

class TMazeFamily final : public MdpFamily {
public:
    enum class Move { Up, Down, Left, Right, Stay };

    explicit TMazeFamily(TMazeSpec spec = {});

    const TMazeSpec& spec() const { return spec_; }
    std::size_t cue() const { return 0; }
    std::size_t junction() const { return spec_.corridor_length - 1; }
    std::size_t left_arm() const { return spec_.corridor_length; }
    std::size_t right_arm() const { return spec_.corridor_length + 1; }
    StateId start() const { return StateId{spec_.start_cell()}; }
    std::size_t env_count() const { return 2; }

    Move move(StateId x, ActionId a) const;
    StateId successor(StateId x, ActionId a) const;

    /// Likelihood of what is seen while occupying x in each environment, when the world is `world`.
    std::vector<double> observation_likelihood(StateId x, std::size_t world) const;
    /// Likelihood function in the form consumed by ba_value_iteration.
    LikelihoodFn likelihood() const;
    BeliefUpdater belief_updater() const;
    CategoricalBelief prior() const { return CategoricalBelief::uniform(2, true); }

    std::size_t state_count() const override { return spec_.corridor_length + 2; }
    std::size_t action_count(StateId x) const override;
    void transition(StateId x, ActionId a, const EnvParams& e, std::vector<Outcome>& out) const override;
    double expected_reward(StateId x, ActionId a, const EnvParams& e) const override;
    double discount() const override { return spec_.gamma; }
    std::optional<std::size_t> horizon() const override { return spec_.horizon; }
    std::string action_name(StateId x, ActionId a) const override;

private:
    TMazeSpec spec_;
};

// ---------------------------------------------------------- treasure map

struct TreasureSpec {
    std::size_t size = 3;
    std::size_t pulls_per_visit = 5;
    double alpha0 = 0.1;
    double beta0 = 1.0;
    std::size_t horizon = 25;
    double gamma = 0.96;

    void validate() const;
    std::size_t cells() const { return size * size; }
    std::size_t map_cell() const { return (size / 2) * size + size / 2; }
    BetaGridBelief prior() const { return BetaGridBelief(cells(), alpha0, beta0); }
};

/// Belief increments of one step.
struct TreasureObservation {
    int reward = 0;
    std::vector<long long> successes;
    std::vector<long long> failures;
};

struct TreasureStepResult {
    double reward = 0.0;
    StateId next;
    BetaGridBelief belief;
    TreasureObservation obs;
};

/// Grid world with stay plus eight clipped neighbour moves; environments are
/// per-cell Bernoulli grids and the reward is paid for the occupied cell.
class TreasureFamily final : public MdpFamily {
public:
    static constexpr std::size_t kActions = 9;
    static constexpr std::array<std::array<int, 2>, kActions> kMoves{
        {{0, 0}, {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

    explicit TreasureFamily(TreasureSpec spec = {});

    const TreasureSpec& spec() const { return spec_; }
    StateId successor(StateId x, ActionId a) const { return StateId{topo_.next[x.index * kActions + a.index]}; }
    /// Chebyshev distance between two cells.
    std::size_t distance(StateId a, StateId b) const;

    std::size_t state_count() const override { return spec_.cells(); }
    std::size_t action_count(StateId) const override { return kActions; }
    void transition(StateId x, ActionId a, const EnvParams& e, std::vector<Outcome>& out) const override;
    double expected_reward(StateId x, ActionId a, const EnvParams& e) const override;
    double sample_reward(StateId x, ActionId a, const EnvParams& e, Rng& rng) const override;
    double discount() const override { return spec_.gamma; }
    std::optional<std::size_t> horizon() const override { return spec_.horizon; }
    std::string action_name(StateId x, ActionId a) const override;
    const kernels::GridTopology* grid_topology() const override { return &topo_; }
    void state_rewards(const EnvParams& e, std::span<double> out) const override;

private:
    void check_env(const EnvParams& e) const;

    TreasureSpec spec_;
    kernels::GridTopology topo_;
};

/// Reward draw, belief update from the real pull and the simulated pulls, then the move.
TreasureStepResult treasure_step(const TreasureFamily& family, const EnvParams& e, StateId x, ActionId a,
                                 const BetaGridBelief& b, Rng& rng);

/// Independent Beta(alpha0, beta0) draw per cell.
EnvParams treasure_prior_sample(const TreasureSpec& spec, Rng& rng);

/// The family used for planning on a given grid; the grid is supplied as the EnvParams.
TreasureFamily treasure_planning_family(const TreasureSpec& spec);

StateId treasure_random_start(const TreasureSpec& spec, Rng& rng);

}  // namespace pcr
