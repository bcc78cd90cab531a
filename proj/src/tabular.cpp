#include "pcr/tabular.hpp"

#include <algorithm>
#include <cmath>

#include "pcr/pcr_core.hpp"

namespace pcr {

void LearningSchedule::validate() const {
    if (!(eta0 > 0.0) || decay < 0.0) {
        throw Error("LearningSchedule: eta0 must be positive and decay non-negative");
    }
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw Error("LearningSchedule: epsilon must lie in [0,1]");
    }
}

ActionLayout::ActionLayout(const MdpFamily& family) {
    offset_.push_back(0);
    for (std::size_t x = 0; x < family.state_count(); ++x) {
        actions_.push_back(family.action_count(StateId{x}));
        offset_.push_back(offset_.back() + actions_.back());
    }
}

std::size_t argmax(const double* q, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < n; ++a) {
        if (q[a] > q[best]) best = a;
    }
    return best;
}

AugmentedQTable::AugmentedQTable(ActionLayout layout, std::size_t belief_states)
    : layout_(std::move(layout)), belief_states_(belief_states), q_(belief_states_ * layout_.size(), 0.0) {}

double AugmentedQTable::max(std::size_t b, std::size_t x) const { return row(b, x)[greedy(b, x)]; }

std::size_t AugmentedQTable::greedy(std::size_t b, std::size_t x) const { return argmax(row(b, x), layout_.actions(x)); }

FutureInfoTable::FutureInfoTable(ActionLayout layout) : layout_(std::move(layout)), q_(layout_.size(), 0.0) {}

double FutureInfoTable::max(std::size_t x) const {
    const double* q = row(x);
    return q[argmax(q, layout_.actions(x))];
}

CrossQTables::CrossQTables(ActionLayout layout, std::size_t envs)
    : layout_(std::move(layout)), envs_(envs), q_(envs_ * envs_ * layout_.size(), 0.0) {}

std::size_t CrossQTables::greedy(std::size_t planner, std::size_t x) const {
    return argmax(row(planner, planner, x), layout_.actions(x));
}

double CrossQTables::value(std::size_t planner, std::size_t world, std::size_t x) const {
    return at(planner, world, x, greedy(planner, x));
}

namespace {

void check_transition(const ActionLayout& layout, const QTransition& tr) {
    if (tr.x.index >= layout.states() || tr.next.index >= layout.states() ||
        tr.a.index >= layout.actions(tr.x.index)) {
        throw Error("tabular update: transition indices out of range");
    }
}

}  // namespace

double baseline_ba_q_update(AugmentedQTable& table, const QTransition& tr, double eta, double gamma) {
    check_transition(table.layout(), tr);
    if (tr.b >= table.belief_states() || tr.b_next >= table.belief_states()) {
        throw Error("baseline_ba_q_update: belief index out of range");
    }
    const double boot = tr.terminal ? 0.0 : table.max(tr.b_next, tr.next.index);
    double& q = table.at(tr.b, tr.x.index, tr.a.index);
    const double delta = tr.reward + gamma * boot - q;
    q += eta * delta;
    return delta;
}

double pcr_vf_q_update(FutureInfoTable& table, const QTransition& tr, double lambda, double eta, double gamma) {
    check_transition(table.layout(), tr);
    if (tr.b != 0) {
        throw Error("pcr_vf_q_update: source belief must be the prior (collapsed rows are zero)");
    }
    const double boot = (tr.terminal || tr.b_next != 0) ? 0.0 : table.max(tr.next.index);
    double& q = table.at(tr.x.index, tr.a.index);
    const double delta = lambda + gamma * boot - q;
    q += eta * delta;
    return delta;
}

double cross_q_update(CrossQTables& tables, std::size_t label, std::size_t planner, const QTransition& tr,
                      double eta, double gamma) {
    check_transition(tables.layout(), tr);
    if (label >= tables.envs() || planner >= tables.envs()) {
        throw Error("cross_q_update: environment index out of range");
    }
    const double boot = tr.terminal ? 0.0 : tables.value(planner, label, tr.next.index);
    double& q = tables.at(planner, label, tr.x.index, tr.a.index);
    const double delta = tr.reward + gamma * boot - q;
    q += eta * delta;
    return delta;
}

EnvParams belief_horizon_sample(const Trajectory& traj, Rng& rng) {
    if (traj.records.empty()) {
        throw Error("belief_horizon_sample: empty trajectory");
    }
    return sample_env(traj.records.back().next_belief, rng);
}

double learned_v_current(const CrossQTables& tables, StateId x, const CategoricalBelief& b) {
    return exact_v_current(x, b, [&tables](const EnvParams& planner, const EnvParams& world, StateId s) {
        return tables.value(planner.index(), world.index(), s.index);
    });
}

double tmaze_greedy_return(const TMazeFamily& maze, const Policy& policy) {
    double total = 0.0;
    Rng rng(0);
    for (std::size_t e = 0; e < maze.env_count(); ++e) {
        const Trajectory traj = simulate_episode(maze, EnvParams::finite(e), policy, maze.belief_updater(),
                                                 maze.prior(), maze.start(), maze.spec().horizon, rng);
        for (const auto& rec : traj.records) total += rec.reward;
    }
    return total / static_cast<double>(maze.env_count());
}

namespace {

const CategoricalBelief& cat(const Belief& b) { return std::get<CategoricalBelief>(b); }

std::size_t pcr_greedy_action(const CrossQTables& cross, const FutureInfoTable& future, StateId x,
                              const CategoricalBelief& b) {
    const std::size_t k = belief_state_index(b);
    if (k > 0) {
        return cross.greedy(k - 1, x.index);
    }
    // Total value v^c(x,b) + q^f(x,a); v^c does not depend on a.
    const double vc = learned_v_current(cross, x, b);
    const std::size_t n = future.layout().actions(x.index);
    std::size_t best = 0;
    double best_v = vc + future.at(x.index, 0);
    for (std::size_t a = 1; a < n; ++a) {
        const double v = vc + future.at(x.index, a);
        if (v > best_v) {
            best_v = v;
            best = a;
        }
    }
    return best;
}

ActionId epsilon_greedy(std::size_t greedy, std::size_t n, double epsilon, Rng& rng) {
    if (rng.uniform() < epsilon) {
        return ActionId{rng.uniform_index(n)};
    }
    return ActionId{greedy};
}

QTransition to_transition(const TrajectoryRecord& rec) {
    return QTransition{rec.x, belief_state_index(cat(rec.belief)), rec.a, rec.reward, rec.next,
                       belief_state_index(cat(rec.next_belief)), false};
}

std::size_t label_for(const Trajectory& traj, CrossLabel labels, Rng& rng) {
    return labels == CrossLabel::GroundTruth ? traj.env.index() : belief_horizon_sample(traj, rng).index();
}

// Cross updates of one episode for every planner; returns the summed squared TD error.
double cross_updates(CrossQTables& cross, const Trajectory& traj, std::size_t label, double eta, double gamma) {
    double sq = 0.0;
    for (const auto& rec : traj.records) {
        const QTransition tr = to_transition(rec);
        for (std::size_t p = 0; p < cross.envs(); ++p) {
            const double d = cross_q_update(cross, label, p, tr, eta, gamma);
            sq += d * d;
        }
    }
    return sq;
}

}  // namespace

Policy pcr_greedy_policy(const TMazeFamily& /*maze*/, const CrossQTables& cross, const FutureInfoTable& future) {
    return [&cross, &future](StateId x, const Belief& b) {
        return ActionId{pcr_greedy_action(cross, future, x, cat(b))};
    };
}

Policy baseline_greedy_policy(const TMazeFamily& /*maze*/, const AugmentedQTable& table) {
    return [&table](StateId x, const Belief& b) {
        return ActionId{table.greedy(belief_state_index(cat(b)), x.index)};
    };
}

TMazeRun train_tmaze(TabularMethod method, const TMazeTrainConfig& cfg, std::uint64_t seed) {
    cfg.schedule.validate();
    const TMazeFamily maze(cfg.maze);
    const ActionLayout layout(maze);
    const double gamma = cfg.maze.gamma;
    const std::string name = method == TabularMethod::Pcr ? "pcr-q" : "baseline-q";
    const std::size_t eval_every = std::max<std::size_t>(1, cfg.eval_every);

    TMazeRun run;
    run.baseline = AugmentedQTable(layout, maze.env_count() + 1);
    run.cross = CrossQTables(layout, maze.env_count());
    run.future = FutureInfoTable(layout);

    const Rng master(seed);
    Rng env_rng = master.child(1);
    Rng act_rng = master.child(2);
    Rng sim_rng = master.child(3);
    Rng label_rng = master.child(4);

    Policy behaviour;
    if (method == TabularMethod::Pcr) {
        behaviour = [&](StateId x, const Belief& b) {
            const std::size_t g = pcr_greedy_action(run.cross, run.future, x, cat(b));
            return epsilon_greedy(g, maze.action_count(x), cfg.schedule.epsilon, act_rng);
        };
    } else {
        behaviour = [&](StateId x, const Belief& b) {
            const std::size_t g = run.baseline.greedy(belief_state_index(cat(b)), x.index);
            return epsilon_greedy(g, maze.action_count(x), cfg.schedule.epsilon, act_rng);
        };
    }

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double eta = cfg.schedule.rate(epoch);
        const EnvParams env = EnvParams::finite(env_rng.uniform_index(maze.env_count()));
        const Trajectory traj = simulate_episode(maze, env, behaviour, maze.belief_updater(), maze.prior(),
                                                 maze.start(), cfg.maze.horizon, sim_rng);
        if (method == TabularMethod::Pcr) {
            const std::size_t label = label_for(traj, cfg.labels, label_rng);
            const double sq = cross_updates(run.cross, traj, label, eta, gamma);
            run.rows.push_back({epoch, seed, name, "cross_q_loss",
                                sq / static_cast<double>(traj.records.size() * run.cross.envs())});
            if (epoch >= cfg.schedule.warmup_epochs) {
                for (const auto& rec : traj.records) {
                    const QTransition tr = to_transition(rec);
                    if (tr.b != 0) continue;
                    const double lambda = rec.reward +
                                          gamma * learned_v_current(run.cross, rec.next, cat(rec.next_belief)) -
                                          learned_v_current(run.cross, rec.x, cat(rec.belief));
                    pcr_vf_q_update(run.future, tr, lambda, eta, gamma);
                }
            }
        } else {
            for (const auto& rec : traj.records) {
                baseline_ba_q_update(run.baseline, to_transition(rec), eta, gamma);
            }
        }
        if (epoch % eval_every == 0 || epoch + 1 == cfg.epochs) {
            const Policy greedy = method == TabularMethod::Pcr ? pcr_greedy_policy(maze, run.cross, run.future)
                                                               : baseline_greedy_policy(maze, run.baseline);
            run.final_return = tmaze_greedy_return(maze, greedy);
            run.rows.push_back({epoch, seed, name, "greedy_return", run.final_return});
        }
    }
    return run;
}

CrossQTables train_cross_q(const TMazeTrainConfig& cfg, std::uint64_t seed) {
    cfg.schedule.validate();
    const TMazeFamily maze(cfg.maze);
    CrossQTables cross(ActionLayout(maze), maze.env_count());
    const Rng master(seed);
    Rng env_rng = master.child(1);
    Rng act_rng = master.child(2);
    Rng sim_rng = master.child(3);
    Rng label_rng = master.child(4);
    Rng planner_rng = master.child(5);

    const Policy behaviour = [&](StateId x, const Belief& b) {
        const std::size_t planner = sample_env(b, planner_rng).index();
        return epsilon_greedy(cross.greedy(planner, x.index), maze.action_count(x), cfg.schedule.epsilon, act_rng);
    };
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const EnvParams env = EnvParams::finite(env_rng.uniform_index(maze.env_count()));
        const Trajectory traj = simulate_episode(maze, env, behaviour, maze.belief_updater(), maze.prior(),
                                                 maze.start(), cfg.maze.horizon, sim_rng);
        cross_updates(cross, traj, label_for(traj, cfg.labels, label_rng), cfg.schedule.rate(epoch), cfg.maze.gamma);
    }
    return cross;
}

}  // namespace pcr
