#include "pcr/oracles.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace pcr::oracle {

std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        }
        if (a[piv * n + col] == 0.0) {
            throw Error("solve_linear: singular system");
        }
        if (piv != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
        x[i] = s / a[i * n + i];
    }
    return x;
}

std::vector<double> policy_values(const TabularModel& m, const std::vector<std::size_t>& policy, double gamma) {
    const std::size_t n = m.states;
    std::vector<double> a(n * n, 0.0), r(n);
    for (std::size_t x = 0; x < n; ++x) {
        const std::size_t row = m.row(x, policy[x]);
        a[x * n + x] += 1.0;
        for (std::size_t o = m.outcome_begin[row]; o < m.outcome_begin[row + 1]; ++o) {
            a[x * n + m.outcomes[o].next.index] -= gamma * m.outcomes[o].probability;
        }
        r[x] = m.reward[row];
    }
    return solve_linear(std::move(a), std::move(r), n);
}

namespace {

double q_of(const TabularModel& m, std::size_t x, std::size_t a, const std::vector<double>& v, double gamma) {
    const std::size_t row = m.row(x, a);
    double s = 0.0;
    for (std::size_t o = m.outcome_begin[row]; o < m.outcome_begin[row + 1]; ++o) {
        s += m.outcomes[o].probability * v[m.outcomes[o].next.index];
    }
    return m.reward[row] + gamma * s;
}

std::vector<std::size_t> greedy_of(const TabularModel& m, const std::vector<double>& v, double gamma, double slack) {
    std::vector<std::size_t> pol(m.states, 0);
    for (std::size_t x = 0; x < m.states; ++x) {
        double best = q_of(m, x, 0, v, gamma);
        for (std::size_t a = 1; a < m.actions(x); ++a) {
            const double q = q_of(m, x, a, v, gamma);
            if (q > best + slack) {
                best = q;
                pol[x] = a;
            }
        }
    }
    return pol;
}

}  // namespace

PolicySolution enumerate_policies(const TabularModel& m, double gamma) {
    const std::size_t n = m.states;
    std::vector<std::size_t> pol(n, 0);
    PolicySolution best;
    best.values.assign(n, -std::numeric_limits<double>::infinity());
    for (;;) {
        const std::vector<double> v = policy_values(m, pol, gamma);
        for (std::size_t x = 0; x < n; ++x) best.values[x] = std::max(best.values[x], v[x]);
        std::size_t k = 0;
        while (k < n && ++pol[k] == m.actions(k)) {
            pol[k] = 0;
            ++k;
        }
        if (k == n) break;
    }
    best.policy = greedy_of(m, best.values, gamma, 1e-12);
    return best;
}

PolicySolution policy_iteration(const TabularModel& m, double gamma) {
    std::vector<std::size_t> pol(m.states, 0);
    for (std::size_t it = 0; it < 10000; ++it) {
        const std::vector<double> v = policy_values(m, pol, gamma);
        bool changed = false;
        for (std::size_t x = 0; x < m.states; ++x) {
            double cur = q_of(m, x, pol[x], v, gamma);
            for (std::size_t a = 0; a < m.actions(x); ++a) {
                const double q = q_of(m, x, a, v, gamma);
                if (q > cur + 1e-12 * (1.0 + std::abs(cur))) {
                    cur = q;
                    pol[x] = a;
                    changed = true;
                }
            }
        }
        if (!changed) {
            PolicySolution sol{v, greedy_of(m, v, gamma, 1e-12)};
            return sol;
        }
    }
    throw Error("policy_iteration: no convergence");
}

std::vector<double> infinite_cross(const TabularModel& planner, const TabularModel& world, double gamma,
                                   bool enumerate, double slack) {
    const PolicySolution sol = enumerate ? enumerate_policies(planner, gamma) : policy_iteration(planner, gamma);
    return policy_values(world, greedy_of(planner, sol.values, gamma, slack), gamma);
}

double tree_value(const TabularModel& m, std::size_t x, std::size_t steps, double gamma) {
    if (steps == 0) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m.actions(x); ++a) {
        const std::size_t row = m.row(x, a);
        double s = 0.0;
        for (std::size_t o = m.outcome_begin[row]; o < m.outcome_begin[row + 1]; ++o) {
            s += m.outcomes[o].probability * tree_value(m, m.outcomes[o].next.index, steps - 1, gamma);
        }
        best = std::max(best, m.reward[row] + gamma * s);
    }
    return best;
}

double tree_cross(const TabularModel& planner, const TabularModel& world, std::size_t x, std::size_t steps,
                  double gamma) {
    if (steps == 0) return 0.0;
    std::size_t best_a = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < planner.actions(x); ++a) {
        const std::size_t row = planner.row(x, a);
        double s = 0.0;
        for (std::size_t o = planner.outcome_begin[row]; o < planner.outcome_begin[row + 1]; ++o) {
            s += planner.outcomes[o].probability * tree_value(planner, planner.outcomes[o].next.index, steps - 1, gamma);
        }
        const double q = planner.reward[row] + gamma * s;
        if (q > best) {
            best = q;
            best_a = a;
        }
    }
    const std::size_t row = world.row(x, best_a);
    double s = 0.0;
    for (std::size_t o = world.outcome_begin[row]; o < world.outcome_begin[row + 1]; ++o) {
        s += world.outcomes[o].probability * tree_cross(planner, world, world.outcomes[o].next.index, steps - 1, gamma);
    }
    return world.reward[row] + gamma * s;
}

// ------------------------------------------------------------------ maze

std::vector<std::size_t> MazeOracle::moves(std::size_t cell) const {
    const std::size_t junction = corridor - 1, left = corridor, right = corridor + 1;
    if (cell == 0) return {1, 0};
    if (cell == left || cell == right) return {junction, cell};
    if (cell == junction) return {junction - 1, left, right, junction};
    return {cell + 1, cell - 1, cell};
}

double MazeOracle::occupancy_reward(std::size_t env, std::size_t cell) const {
    const std::size_t good = env == 0 ? corridor : corridor + 1;
    const std::size_t bad = env == 0 ? corridor + 1 : corridor;
    if (cell == good) return reward;
    if (cell == bad) return punishment;
    return 0.0;
}

bool MazeOracle::informative(std::size_t cell) const { return cell == 0 || cell >= corridor; }

double MazeOracle::full_info_value(std::size_t env, std::size_t t, std::size_t cell, double gamma) const {
    std::map<std::pair<std::size_t, std::size_t>, double> memo;
    auto rec = [&](auto&& self, std::size_t tt, std::size_t c) -> double {
        if (tt == horizon) return 0.0;
        const auto key = std::make_pair(tt, c);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t n : moves(c)) best = std::max(best, self(self, tt + 1, n));
        const double v = occupancy_reward(env, c) + gamma * best;
        memo[key] = v;
        return v;
    };
    return rec(rec, t, cell);
}

double MazeOracle::cross_value(std::size_t planner, std::size_t world, std::size_t t, std::size_t cell,
                               double gamma) const {
    if (t == horizon) return 0.0;
    const std::vector<std::size_t> succ = moves(cell);
    std::size_t pick = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < succ.size(); ++i) {
        const double v = full_info_value(planner, t + 1, succ[i], gamma);
        if (v > best) {
            best = v;
            pick = i;
        }
    }
    return occupancy_reward(world, cell) + gamma * cross_value(planner, world, t + 1, succ[pick], gamma);
}

double MazeOracle::bayes_value_at(std::size_t t, std::size_t cell, std::size_t k, double gamma) const {
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> memo;
    auto rec = [&](auto&& self, std::size_t tt, std::size_t c, std::size_t kk) -> double {
        if (tt == horizon) return 0.0;
        const auto key = std::make_tuple(tt, c, kk);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        double v;
        if (kk == 0) {
            // Average over the two environments; what is seen here fixes b_{t+1}.
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t n : moves(c)) {
                double avg = 0.0;
                for (std::size_t e = 0; e < 2; ++e) {
                    const std::size_t next_k = informative(c) ? e + 1 : 0;
                    avg += 0.5 * (occupancy_reward(e, c) + gamma * self(self, tt + 1, n, next_k));
                }
                best = std::max(best, avg);
            }
            v = best;
        } else {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t n : moves(c)) best = std::max(best, self(self, tt + 1, n, kk));
            v = occupancy_reward(kk - 1, c) + gamma * best;
        }
        memo[key] = v;
        return v;
    };
    return rec(rec, t, cell, k);
}

double MazeOracle::bayes_value(double gamma) const { return bayes_value_at(0, start, 0, gamma); }

}  // namespace pcr::oracle
