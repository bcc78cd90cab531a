#include "pcr/env_model.hpp"

#include <cmath>

namespace pcr {

double MdpFamily::sample_reward(StateId x, ActionId a, const EnvParams& e, Rng& /*rng*/) const {
    return expected_reward(x, a, e);
}

std::string MdpFamily::action_name(StateId /*x*/, ActionId a) const { return std::to_string(a.index); }

void MdpFamily::check_action(StateId x, ActionId a) const {
    if (x.index >= state_count()) {
        throw Error("state " + std::to_string(x.index) + " out of range (" + std::to_string(state_count()) +
                    " states)");
    }
    if (a.index >= action_count(x)) {
        throw Error("illegal action " + std::to_string(a.index) + " in state " + std::to_string(x.index) + " (" +
                    std::to_string(action_count(x)) + " legal actions)");
    }
}

TabularModel compile_model(const MdpFamily& family, const EnvParams& e) {
    TabularModel m;
    m.states = family.state_count();
    m.row_begin.assign(m.states + 1, 0);
    for (std::size_t x = 0; x < m.states; ++x) {
        m.row_begin[x + 1] = m.row_begin[x] + family.action_count(StateId{x});
    }
    const std::size_t rows = m.row_begin.back();
    m.reward.resize(rows);
    m.outcome_begin.assign(rows + 1, 0);
    std::vector<Outcome> buf;
    for (std::size_t x = 0; x < m.states; ++x) {
        for (std::size_t a = 0; a < family.action_count(StateId{x}); ++a) {
            const std::size_t r = m.row(x, a);
            m.reward[r] = family.expected_reward(StateId{x}, ActionId{a}, e);
            buf.clear();
            family.transition(StateId{x}, ActionId{a}, e, buf);
            double sum = 0.0;
            for (const Outcome& o : buf) {
                if (o.next.index >= m.states || !(o.probability >= 0.0)) {
                    throw Error("compile_model: bad outcome from state " + std::to_string(x));
                }
                sum += o.probability;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                throw Error("compile_model: transition from state " + std::to_string(x) + " action " +
                            std::to_string(a) + " sums to " + std::to_string(sum));
            }
            m.outcomes.insert(m.outcomes.end(), buf.begin(), buf.end());
            m.outcome_begin[r + 1] = m.outcomes.size();
        }
    }
    return m;
}

TabularFamily::TabularFamily(std::vector<std::size_t> actions_per_state, std::vector<std::vector<Row>> rows,
                             double gamma, std::optional<std::size_t> horizon)
    : actions_(std::move(actions_per_state)), rows_(std::move(rows)), gamma_(gamma), horizon_(horizon) {
    if (!(gamma_ > 0.0 && gamma_ < 1.0)) {
        throw Error("TabularFamily: discount must lie in (0,1)");
    }
    offset_.assign(actions_.size() + 1, 0);
    for (std::size_t x = 0; x < actions_.size(); ++x) {
        if (actions_[x] == 0) {
            throw Error("TabularFamily: state " + std::to_string(x) + " has no actions");
        }
        offset_[x + 1] = offset_[x] + actions_[x];
    }
    for (const auto& env_rows : rows_) {
        if (env_rows.size() != offset_.back()) {
            throw Error("TabularFamily: row count does not match action layout");
        }
    }
}

const TabularFamily::Row& TabularFamily::row(StateId x, ActionId a, const EnvParams& e) const {
    check_action(x, a);
    if (e.is_grid() || e.index() >= rows_.size()) {
        throw Error("TabularFamily: unknown environment");
    }
    return rows_[e.index()][offset_[x.index] + a.index];
}

void TabularFamily::transition(StateId x, ActionId a, const EnvParams& e, std::vector<Outcome>& out) const {
    const Row& r = row(x, a, e);
    out.assign(r.outcomes.begin(), r.outcomes.end());
}

double TabularFamily::expected_reward(StateId x, ActionId a, const EnvParams& e) const { return row(x, a, e).reward; }

TabularFamily two_arm_bandit() {
    using Row = TabularFamily::Row;
    const std::vector<Outcome> stay{{StateId{0}, 1.0}};
    std::vector<std::vector<Row>> rows{
        {Row{1.0, stay}, Row{0.0, stay}},
        {Row{0.0, stay}, Row{1.0, stay}},
    };
    return TabularFamily({2}, std::move(rows), 0.9);
}

TabularFamily tiny_chain() {
    using Row = TabularFamily::Row;
    std::vector<Row> rows;
    for (std::size_t x = 0; x < 3; ++x) {
        const double r = x == 2 ? 1.0 : 0.0;
        rows.push_back(Row{r, {{StateId{x == 0 ? 0 : x - 1}, 1.0}}});
        rows.push_back(Row{r, {{StateId{x == 2 ? 2 : x + 1}, 1.0}}});
    }
    return TabularFamily({2, 2, 2}, {rows}, 0.5);
}

StepResult step(const MdpFamily& family, const EnvParams& e, StateId x, ActionId a, Rng& rng) {
    family.check_action(x, a);
    std::vector<Outcome> outcomes;
    family.transition(x, a, e, outcomes);
    StepResult result;
    result.reward = family.sample_reward(x, a, e, rng);
    const double u = rng.uniform();
    double acc = 0.0;
    result.next = outcomes.back().next;
    for (const Outcome& o : outcomes) {
        acc += o.probability;
        if (u < acc) {
            result.next = o.next;
            break;
        }
    }
    return result;
}

Trajectory simulate_episode(const MdpFamily& family, const EnvParams& e, const Policy& policy,
                            const BeliefUpdater& update, const Belief& initial, StateId start, std::size_t horizon,
                            Rng& rng) {
    if (horizon == 0) {
        throw Error("simulate_episode: horizon must be at least 1");
    }
    Trajectory traj;
    traj.seed = rng.seed();
    traj.env = e;
    traj.records.reserve(horizon);
    StateId x = start;
    Belief b = initial;
    for (std::size_t t = 0; t < horizon; ++t) {
        const ActionId a = policy(x, b);
        if (x.index >= family.state_count() || a.index >= family.action_count(x)) {
            throw Error("simulate_episode: policy chose illegal action " + std::to_string(a.index) + " in state " +
                        std::to_string(x.index) + " at t=" + std::to_string(t));
        }
        const StepResult s = step(family, e, x, a, rng);
        TransitionView view{x, a, s.reward, s.next, &e};
        Belief next_b = update(b, view, rng);
        traj.records.push_back(TrajectoryRecord{t, x, b, a, s.reward, std::nullopt, s.next, next_b});
        x = s.next;
        b = std::move(next_b);
        if (family.is_terminal(x)) {
            break;
        }
    }
    return traj;
}

double discounted_return(const Trajectory& traj, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw Error("discounted_return: discount must lie in (0,1)");
    }
    double total = 0.0;
    double weight = 1.0;
    for (const auto& rec : traj.records) {
        total += weight * rec.reward;
        weight *= gamma;
    }
    return total;
}

}  // namespace pcr
