#include "pcr/dp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcr {

namespace {

void check_gamma(double gamma, bool finite_horizon = false) {
    if (!(gamma > 0.0 && (gamma < 1.0 || (finite_horizon && gamma == 1.0)))) {
        throw Error("discount must lie in (0,1), or (0,1] with a finite horizon, got " + std::to_string(gamma));
    }
}

void check_tol(double tol) {
    if (!(tol > 0.0)) {
        throw Error("tolerance must be positive");
    }
}

double backup(const TabularModel& m, std::size_t row, std::span<const double> v, double gamma) {
    double sum = 0.0;
    for (std::size_t o = m.outcome_begin[row]; o < m.outcome_begin[row + 1]; ++o) {
        sum += m.outcomes[o].probability * v[m.outcomes[o].next.index];
    }
    return m.reward[row] + gamma * sum;
}

std::string env_label(const EnvParams& e) {
    return e.is_grid() ? "grid" : "env" + std::to_string(e.index());
}

}  // namespace

ValueTable value_iteration(const MdpFamily& family, const EnvParams& e, double gamma, double tol,
                           std::size_t max_iterations) {
    check_gamma(gamma);
    check_tol(tol);
    const TabularModel m = compile_model(family, e);
    ValueTable out;
    out.states = m.states;
    out.label = env_label(e);
    std::vector<double> v(m.states, 0.0), v_new(m.states);
    double residual = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    while (it < max_iterations) {
        residual = 0.0;
        for (std::size_t x = 0; x < m.states; ++x) {
            double best = backup(m, m.row(x, 0), v, gamma);
            for (std::size_t a = 1; a < m.actions(x); ++a) {
                best = std::max(best, backup(m, m.row(x, a), v, gamma));
            }
            v_new[x] = best;
            residual = std::max(residual, std::abs(v_new[x] - v[x]));
        }
        v.swap(v_new);
        ++it;
        out.residual_history.push_back(residual);
        if (residual <= tol) {
            break;
        }
    }
    if (residual > tol) {
        throw ConvergenceError("value_iteration did not converge", residual, it);
    }
    out.values = std::move(v);
    out.iterations = it;
    out.residual = residual;
    return out;
}

std::vector<std::size_t> greedy_policy(const TabularModel& model, std::span<const double> values, double gamma,
                                       double slack) {
    std::vector<std::size_t> policy(model.states, 0);
    for (std::size_t x = 0; x < model.states; ++x) {
        double best = backup(model, model.row(x, 0), values, gamma);
        for (std::size_t a = 1; a < model.actions(x); ++a) {
            const double q = backup(model, model.row(x, a), values, gamma);
            if (q > best + slack) {
                best = q;
                policy[x] = a;
            }
        }
    }
    return policy;
}

ValueTable evaluate_policy(const TabularModel& model, std::span<const std::size_t> policy, double gamma, double tol,
                           std::size_t max_iterations) {
    check_gamma(gamma);
    check_tol(tol);
    ValueTable out;
    out.states = model.states;
    std::vector<double> v(model.states, 0.0), v_new(model.states);
    double residual = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    while (it < max_iterations) {
        residual = 0.0;
        for (std::size_t x = 0; x < model.states; ++x) {
            v_new[x] = backup(model, model.row(x, policy[x]), v, gamma);
            residual = std::max(residual, std::abs(v_new[x] - v[x]));
        }
        v.swap(v_new);
        ++it;
        out.residual_history.push_back(residual);
        if (residual <= tol) {
            break;
        }
    }
    if (residual > tol) {
        throw ConvergenceError("policy evaluation did not converge", residual, it);
    }
    out.values = std::move(v);
    out.iterations = it;
    out.residual = residual;
    return out;
}

std::pair<ValueTable, CrossValueTable> finite_horizon_cross_values(const MdpFamily& family, const EnvParams& planner,
                                                                   const EnvParams& world, std::size_t horizon,
                                                                   double gamma) {
    if (horizon == 0) {
        throw Error("finite_horizon_cross_values: horizon must be at least 1");
    }
    check_gamma(gamma, true);
    const TabularModel mp = compile_model(family, planner);
    const TabularModel mw = compile_model(family, world);
    const std::size_t n = mp.states;

    ValueTable own;
    own.states = n;
    own.horizon = horizon;
    own.label = env_label(planner);
    own.values.assign((horizon + 1) * n, 0.0);
    CrossValueTable cross;
    cross.states = n;
    cross.horizon = horizon;
    cross.planner_label = env_label(planner);
    cross.world_label = env_label(world);
    cross.values.assign((horizon + 1) * n, 0.0);

    for (std::size_t t = horizon; t-- > 0;) {
        const std::span<const double> next_own(own.values.data() + (t + 1) * n, n);
        const std::span<const double> next_cross(cross.values.data() + (t + 1) * n, n);
        for (std::size_t x = 0; x < n; ++x) {
            std::size_t best_a = 0;
            double best = backup(mp, mp.row(x, 0), next_own, gamma);
            for (std::size_t a = 1; a < mp.actions(x); ++a) {
                const double q = backup(mp, mp.row(x, a), next_own, gamma);
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            own.values[t * n + x] = best;
            cross.values[t * n + x] = backup(mw, mw.row(x, best_a), next_cross, gamma);
        }
    }
    return {std::move(own), std::move(cross)};
}

CrossValueTable infinite_horizon_cross_values(const MdpFamily& family, const EnvParams& planner,
                                              const EnvParams& world, double gamma, double tol) {
    const ValueTable own = value_iteration(family, planner, gamma, tol);
    const TabularModel mp = compile_model(family, planner);
    const TabularModel mw = compile_model(family, world);
    const std::vector<std::size_t> policy = greedy_policy(mp, own.values, gamma, tol);
    ValueTable eval = evaluate_policy(mw, policy, gamma, tol);
    CrossValueTable out;
    out.states = mw.states;
    out.values = std::move(eval.values);
    out.planner_label = env_label(planner);
    out.world_label = env_label(world);
    out.iterations = eval.iterations;
    return out;
}

namespace {

// Runs the grid kernel over a batch; world rewards optional.
void run_grid_batch(const MdpFamily& family, const kernels::GridTopology& topo, std::span<const EnvParams* const> planners,
                    std::span<const EnvParams* const> worlds, double gamma, double tol, std::vector<double>& planner_value,
                    std::vector<double>* cross_value) {
    check_gamma(gamma);
    check_tol(tol);
    const std::size_t lanes = planners.size();
    const std::size_t cells = topo.cells;
    std::vector<double> pr(cells * lanes), wr;
    std::vector<double> buf(cells);
    for (std::size_t l = 0; l < lanes; ++l) {
        family.state_rewards(*planners[l], buf);
        for (std::size_t c = 0; c < cells; ++c) pr[c * lanes + l] = buf[c];
    }
    if (cross_value) {
        wr.resize(cells * lanes);
        for (std::size_t l = 0; l < lanes; ++l) {
            family.state_rewards(*worlds[l], buf);
            for (std::size_t c = 0; c < cells; ++c) wr[c * lanes + l] = buf[c];
        }
        cross_value->assign(cells * lanes, 0.0);
    }
    planner_value.assign(cells * lanes, 0.0);
    std::vector<double> vi_res(lanes), ev_res(lanes);
    kernels::CrossBatch batch;
    batch.topology = &topo;
    batch.gamma = gamma;
    batch.tol = tol;
    batch.max_iterations = kMaxIterations;
    batch.lanes = lanes;
    batch.planner_reward = pr.data();
    batch.world_reward = cross_value ? wr.data() : nullptr;
    batch.planner_value = planner_value.data();
    batch.cross_value = cross_value ? cross_value->data() : nullptr;
    batch.vi_residual = vi_res.data();
    batch.eval_residual = ev_res.data();
    kernels::solve_cross_batch(batch);
    for (std::size_t l = 0; l < lanes; ++l) {
        if (vi_res[l] > tol) {
            throw ConvergenceError("batched value iteration did not converge", vi_res[l], kMaxIterations);
        }
        if (cross_value && ev_res[l] > tol) {
            throw ConvergenceError("batched policy evaluation did not converge", ev_res[l], kMaxIterations);
        }
    }
}

}  // namespace

std::vector<double> batch_cross_value_tables(const MdpFamily& family, std::span<const EnvPair> pairs, double gamma,
                                             double tol) {
    if (pairs.empty()) {
        throw Error("batch_cross_values: empty pair list");
    }
    const std::size_t n = family.state_count();
    std::vector<double> out(pairs.size() * n);
    if (const kernels::GridTopology* topo = family.grid_topology()) {
        std::vector<const EnvParams*> planners, worlds;
        for (const EnvPair& p : pairs) {
            planners.push_back(&p.planner);
            worlds.push_back(&p.world);
        }
        std::vector<double> pv, cv;
        run_grid_batch(family, *topo, planners, worlds, gamma, tol, pv, &cv);
        const std::size_t lanes = pairs.size();
        for (std::size_t l = 0; l < lanes; ++l) {
            for (std::size_t c = 0; c < n; ++c) out[l * n + c] = cv[c * lanes + l];
        }
        return out;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const CrossValueTable t = infinite_horizon_cross_values(family, pairs[i].planner, pairs[i].world, gamma, tol);
        std::copy(t.values.begin(), t.values.end(), out.begin() + static_cast<std::ptrdiff_t>(i * n));
    }
    return out;
}

std::vector<double> batch_cross_values(const MdpFamily& family, std::span<const EnvPair> pairs, StateId x,
                                       double gamma, double tol) {
    const std::size_t n = family.state_count();
    if (x.index >= n) {
        throw Error("batch_cross_values: state out of range");
    }
    const std::vector<double> tables = batch_cross_value_tables(family, pairs, gamma, tol);
    std::vector<double> out(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = tables[i * n + x.index];
    return out;
}

std::vector<double> batch_optimal_value_tables(const MdpFamily& family, std::span<const EnvParams> envs, double gamma,
                                               double tol) {
    if (envs.empty()) {
        throw Error("batch_optimal_value_tables: empty environment list");
    }
    const std::size_t n = family.state_count();
    std::vector<double> out(envs.size() * n);
    if (const kernels::GridTopology* topo = family.grid_topology()) {
        std::vector<const EnvParams*> planners;
        for (const EnvParams& e : envs) planners.push_back(&e);
        std::vector<double> pv;
        run_grid_batch(family, *topo, planners, {}, gamma, tol, pv, nullptr);
        const std::size_t lanes = envs.size();
        for (std::size_t l = 0; l < lanes; ++l) {
            for (std::size_t c = 0; c < n; ++c) out[l * n + c] = pv[c * lanes + l];
        }
        return out;
    }
    for (std::size_t i = 0; i < envs.size(); ++i) {
        const ValueTable t = value_iteration(family, envs[i], gamma, tol);
        std::copy(t.values.begin(), t.values.end(), out.begin() + static_cast<std::ptrdiff_t>(i * n));
    }
    return out;
}

LikelihoodFn reward_transition_likelihood(const MdpFamily& family, std::size_t env_count) {
    return [&family, env_count](StateId x, ActionId a, StateId next, std::size_t world) {
        const double r = family.expected_reward(x, a, EnvParams::finite(world));
        std::vector<double> lik(env_count, 0.0);
        std::vector<Outcome> outs;
        for (std::size_t j = 0; j < env_count; ++j) {
            const EnvParams e = EnvParams::finite(j);
            if (family.expected_reward(x, a, e) != r) {
                continue;
            }
            outs.clear();
            family.transition(x, a, e, outs);
            for (const Outcome& o : outs) {
                if (o.next == next) lik[j] += o.probability;
            }
        }
        return lik;
    };
}

AugmentedValueTable ba_value_iteration(const MdpFamily& family, const CategoricalBelief& prior,
                                       const LikelihoodFn& likelihood, double gamma,
                                       std::optional<std::size_t> horizon, double tol) {
    if (!prior.deterministic_inference()) {
        throw Error("ba_value_iteration: requires deterministic inference");
    }
    check_gamma(gamma, horizon.has_value());
    const std::size_t envs = prior.size();
    const std::size_t kb = envs + 1;
    const std::size_t n = family.state_count();

    std::vector<TabularModel> models;
    for (std::size_t j = 0; j < envs; ++j) models.push_back(compile_model(family, EnvParams::finite(j)));

    std::vector<CategoricalBelief> beliefs;
    for (std::size_t k = 0; k < kb; ++k) beliefs.push_back(belief_from_index(prior, k));

    // next_belief[k][j][outcome] for every outcome of world j's model.
    std::vector<std::vector<std::vector<std::size_t>>> next_belief(kb, std::vector<std::vector<std::size_t>>(envs));
    for (std::size_t k = 0; k < kb; ++k) {
        for (std::size_t j = 0; j < envs; ++j) {
            if (beliefs[k].prob(j) <= 0.0) continue;
            const TabularModel& m = models[j];
            auto& nb = next_belief[k][j];
            nb.assign(m.outcomes.size(), 0);
            for (std::size_t x = 0; x < n; ++x) {
                for (std::size_t a = 0; a < m.actions(x); ++a) {
                    const std::size_t row = m.row(x, a);
                    for (std::size_t o = m.outcome_begin[row]; o < m.outcome_begin[row + 1]; ++o) {
                        const auto lik = likelihood(StateId{x}, ActionId{a}, m.outcomes[o].next, j);
                        const CategoricalBelief post = update_categorical(beliefs[k], lik);
                        try {
                            nb[o] = belief_state_index(post);
                        } catch (const Error&) {
                            throw Error("ba_value_iteration: belief update leaves the deterministic-inference set");
                        }
                    }
                }
            }
        }
    }

    auto q_value = [&](std::size_t k, std::size_t x, std::size_t a, std::span<const double> next) {
        double total = 0.0;
        for (std::size_t j = 0; j < envs; ++j) {
            const double w = beliefs[k].prob(j);
            if (w <= 0.0) continue;
            const TabularModel& m = models[j];
            const std::size_t row = m.row(x, a);
            double sum = 0.0;
            for (std::size_t o = m.outcome_begin[row]; o < m.outcome_begin[row + 1]; ++o) {
                sum += m.outcomes[o].probability * next[next_belief[k][j][o] * n + m.outcomes[o].next.index];
            }
            total += w * (m.reward[row] + gamma * sum);
        }
        return total;
    };

    AugmentedValueTable out;
    out.belief_states = kb;
    out.states = n;
    out.horizon = horizon;
    out.gamma = gamma;
    const std::size_t layer = kb * n;
    if (horizon) {
        out.values.assign((*horizon + 1) * layer, 0.0);
        for (std::size_t t = *horizon; t-- > 0;) {
            const std::span<const double> next(out.values.data() + (t + 1) * layer, layer);
            for (std::size_t k = 0; k < kb; ++k) {
                for (std::size_t x = 0; x < n; ++x) {
                    double best = q_value(k, x, 0, next);
                    for (std::size_t a = 1; a < family.action_count(StateId{x}); ++a) {
                        best = std::max(best, q_value(k, x, a, next));
                    }
                    out.values[t * layer + k * n + x] = best;
                }
            }
        }
        return out;
    }
    check_tol(tol);
    std::vector<double> v(layer, 0.0), v_new(layer);
    double residual = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    while (it < kMaxIterations && residual > tol) {
        residual = 0.0;
        for (std::size_t k = 0; k < kb; ++k) {
            for (std::size_t x = 0; x < n; ++x) {
                double best = q_value(k, x, 0, v);
                for (std::size_t a = 1; a < family.action_count(StateId{x}); ++a) {
                    best = std::max(best, q_value(k, x, a, v));
                }
                v_new[k * n + x] = best;
                residual = std::max(residual, std::abs(best - v[k * n + x]));
            }
        }
        v.swap(v_new);
        ++it;
    }
    if (residual > tol) {
        throw ConvergenceError("ba_value_iteration did not converge", residual, it);
    }
    out.values = std::move(v);
    return out;
}

}  // namespace pcr
