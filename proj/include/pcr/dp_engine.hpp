#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcr/belief.hpp"
#include "pcr/env_model.hpp"

namespace pcr {

/// Default DP settings: sup-norm tolerance and iteration cap.
inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr std::size_t kMaxIterations = 100000;

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, std::size_t iterations)
        : Error(what + " (residual " + std::to_string(residual) + " after " + std::to_string(iterations) +
                " iterations)"),
          residual_(residual),
          iterations_(iterations) {}
    double residual() const { return residual_; }
    std::size_t iterations() const { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// Values per state; per time layer (t = 0..T, layer T is zero) when finite horizon.
struct ValueTable {
    std::size_t states = 0;
    std::optional<std::size_t> horizon;
    std::vector<double> values;
    std::string label;
    std::size_t iterations = 0;
    double residual = 0.0;
    /// Sup-norm change of every sweep (infinite horizon only).
    std::vector<double> residual_history;

    double at(std::size_t x) const { return values[x]; }
    double at(std::size_t t, std::size_t x) const { return values[t * states + x]; }
    std::span<const double> layer(std::size_t t) const { return std::span(values).subspan(t * states, states); }
};

/// v^{planner}(x; world): return collected in `world` by the optimal policy of `planner`.
struct CrossValueTable {
    std::size_t states = 0;
    std::optional<std::size_t> horizon;
    std::vector<double> values;
    std::string planner_label;
    std::string world_label;
    std::size_t iterations = 0;

    double at(std::size_t x) const { return values[x]; }
    double at(std::size_t t, std::size_t x) const { return values[t * states + x]; }
};

/// Optimal belief-augmented values indexed by (belief-state index, state),
/// with a leading time index when finite horizon.
struct AugmentedValueTable {
    std::size_t belief_states = 0;
    std::size_t states = 0;
    std::optional<std::size_t> horizon;
    std::vector<double> values;
    double gamma = 0.0;

    double at(std::size_t b, std::size_t x) const { return values[b * states + x]; }
    double at(std::size_t t, std::size_t b, std::size_t x) const {
        return values[(t * belief_states + b) * states + x];
    }
};

/// Environment pair for cross-value batches: value of `planner`'s optimal policy in `world`.
struct EnvPair {
    EnvParams world;
    EnvParams planner;
};

ValueTable value_iteration(const MdpFamily& family, const EnvParams& e, double gamma,
                           double tol = kDefaultTolerance, std::size_t max_iterations = kMaxIterations);

/// Greedy action per state w.r.t. one-step backups of `values`. A later action
/// replaces the incumbent only when better by more than `slack`.
std::vector<std::size_t> greedy_policy(const TabularModel& model, std::span<const double> values, double gamma,
                                       double slack = 0.0);

/// Iterative evaluation of a stationary deterministic policy.
ValueTable evaluate_policy(const TabularModel& model, std::span<const std::size_t> policy, double gamma,
                           double tol = kDefaultTolerance, std::size_t max_iterations = kMaxIterations);

/// Backward recursion over T steps: the planner's argmax action at each (t, x)
/// backs up both the planner's own table and the world table.
std::pair<ValueTable, CrossValueTable> finite_horizon_cross_values(const MdpFamily& family, const EnvParams& planner,
                                                                   const EnvParams& world, std::size_t horizon,
                                                                   double gamma);

/// Greedy policy of the planner's value iteration evaluated in the world.
CrossValueTable infinite_horizon_cross_values(const MdpFamily& family, const EnvParams& planner,
                                              const EnvParams& world, double gamma,
                                              double tol = kDefaultTolerance);

/// v^{planner}(x; world) for every pair. Identical to per-pair calls.
std::vector<double> batch_cross_values(const MdpFamily& family, std::span<const EnvPair> pairs, StateId x,
                                       double gamma, double tol = kDefaultTolerance);

/// Full per-state cross-value tables for a batch, row-major [pair][state].
std::vector<double> batch_cross_value_tables(const MdpFamily& family, std::span<const EnvPair> pairs, double gamma,
                                             double tol = kDefaultTolerance);

/// Optimal per-state values for a batch of environments, row-major [env][state].
std::vector<double> batch_optimal_value_tables(const MdpFamily& family, std::span<const EnvParams> envs,
                                               double gamma, double tol = kDefaultTolerance);

/// Likelihood of the observation produced by transition (x, a, next) in each
/// environment, when the world is `world`.
using LikelihoodFn = std::function<std::vector<double>(StateId x, ActionId a, StateId next, std::size_t world)>;

/// Likelihoods implied by deterministic rewards and transition support alone.
LikelihoodFn reward_transition_likelihood(const MdpFamily& family, std::size_t env_count);

/// Exact optimal belief-augmented values for a finite environment set under
/// deterministic inference. Finite horizon when `horizon` is set; otherwise
/// value iteration to `tol`. Throws if an update leaves the S+1 belief states.
AugmentedValueTable ba_value_iteration(const MdpFamily& family, const CategoricalBelief& prior,
                                       const LikelihoodFn& likelihood, double gamma,
                                       std::optional<std::size_t> horizon, double tol = kDefaultTolerance);

}  // namespace pcr
