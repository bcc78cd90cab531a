#pragma once

// Brute-force reference computations, written independently of the DP engine,
// used by the oracle report and the test suites.

#include <cstddef>
#include <vector>

#include "pcr/env_model.hpp"

namespace pcr::oracle {

/// Solves A x = b (A row-major n x n) by Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, std::size_t n);

/// Exact (I - gamma P_pi) v = r_pi.
std::vector<double> policy_values(const TabularModel& m, const std::vector<std::size_t>& policy, double gamma);

struct PolicySolution {
    std::vector<double> values;
    std::vector<std::size_t> policy;
};

/// Every deterministic stationary policy solved exactly; the optimum is the
/// pointwise maximum. Greedy actions taken lowest-index among exact ties.
PolicySolution enumerate_policies(const TabularModel& m, double gamma);

/// Howard policy iteration with exact linear solves.
PolicySolution policy_iteration(const TabularModel& m, double gamma);

/// v^{planner}(.; world) with the planner's policy from enumeration or policy iteration.
/// The policy is re-extracted from the exact values: a later action replaces the
/// incumbent only when better by more than `slack`.
std::vector<double> infinite_cross(const TabularModel& planner, const TabularModel& world, double gamma,
                                   bool enumerate, double slack = 1e-9);

/// Finite-horizon values by plain recursion over the decision tree (no memo).
double tree_value(const TabularModel& m, std::size_t x, std::size_t steps, double gamma);
/// Planner's tree-argmax action at every node, evaluated in the world tree.
double tree_cross(const TabularModel& planner, const TabularModel& world, std::size_t x, std::size_t steps,
                  double gamma);

/// T-maze built from scratch: corridor 0..L-1 (cue at 0, junction at L-1), arms L and L+1.
struct MazeOracle {
    std::size_t corridor = 5;
    std::size_t start = 2;
    std::size_t horizon = 20;
    double reward = 1.0;
    double punishment = -7.0;

    /// Optimal expected value over both environments from the prior at the start,
    /// under belief-augmented control, with discount gamma (1 for undiscounted).
    double bayes_value(double gamma) const;
    /// Value at (t, cell, belief k) where k = 0 prior, 1 left known, 2 right known.
    double bayes_value_at(std::size_t t, std::size_t cell, std::size_t k, double gamma) const;
    /// Best return in a known environment over all action sequences from (t, cell).
    double full_info_value(std::size_t env, std::size_t t, std::size_t cell, double gamma) const;
    /// Finite-horizon v^{planner}(cell; world) at time t, planner ties to the lowest action.
    double cross_value(std::size_t planner, std::size_t world, std::size_t t, std::size_t cell, double gamma) const;
    /// All successor cells in legal-action order.
    std::vector<std::size_t> moves(std::size_t cell) const;
    double occupancy_reward(std::size_t env, std::size_t cell) const;
    bool informative(std::size_t cell) const;
};

}  // namespace pcr::oracle
