#include "pcr/tasks.hpp"

#include <algorithm>
#include <cstdlib>

namespace pcr {

void TMazeSpec::validate() const {
    if (corridor_length < 3) {
        throw Error("TMazeSpec: corridor_length must be at least 3");
    }
    if (start_cell() >= corridor_length) {
        throw Error("TMazeSpec: start must be a corridor cell");
    }
    if (horizon < 1) {
        throw Error("TMazeSpec: horizon must be positive");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw Error("TMazeSpec: gamma must lie in (0,1)");
    }
}

TMazeFamily::TMazeFamily(TMazeSpec spec) : spec_(spec) { spec_.validate(); }

std::size_t TMazeFamily::action_count(StateId x) const {
    if (x.index >= state_count()) {
        throw Error("TMaze: state " + std::to_string(x.index) + " out of range");
    }
    if (x.index == cue() || x.index == left_arm() || x.index == right_arm()) return 2;
    if (x.index == junction()) return 4;
    return 3;
}

TMazeFamily::Move TMazeFamily::move(StateId x, ActionId a) const {
    check_action(x, a);
    const std::size_t i = a.index;
    if (x.index == cue()) return i == 0 ? Move::Up : Move::Stay;
    if (x.index == left_arm()) return i == 0 ? Move::Right : Move::Stay;
    if (x.index == right_arm()) return i == 0 ? Move::Left : Move::Stay;
    if (x.index == junction()) {
        static constexpr Move kJunction[] = {Move::Down, Move::Left, Move::Right, Move::Stay};
        return kJunction[i];
    }
    static constexpr Move kCorridor[] = {Move::Up, Move::Down, Move::Stay};
    return kCorridor[i];
}

StateId TMazeFamily::successor(StateId x, ActionId a) const {
    switch (move(x, a)) {
        case Move::Up:
            return StateId{x.index + 1};
        case Move::Down:
            return StateId{x.index - 1};
        case Move::Left:
            return StateId{x.index == junction() ? left_arm() : junction()};
        case Move::Right:
            return StateId{x.index == junction() ? right_arm() : junction()};
        case Move::Stay:
            break;
    }
    return x;
}

std::string TMazeFamily::action_name(StateId x, ActionId a) const {
    static constexpr const char* kNames[] = {"up", "down", "left", "right", "stay"};
    return kNames[static_cast<int>(move(x, a))];
}

void TMazeFamily::transition(StateId x, ActionId a, const EnvParams& /*e*/, std::vector<Outcome>& out) const {
    out.clear();
    out.push_back({successor(x, a), 1.0});
}

double TMazeFamily::expected_reward(StateId x, ActionId a, const EnvParams& e) const {
    check_action(x, a);
    if (e.is_grid() || e.index() > 1) {
        throw Error("TMaze: environment must be 0 (left) or 1 (right)");
    }
    const std::size_t good = e.index() == 0 ? left_arm() : right_arm();
    const std::size_t bad = e.index() == 0 ? right_arm() : left_arm();
    if (x.index == good) return spec_.reward;
    if (x.index == bad) return spec_.punishment;
    return 0.0;
}

std::vector<double> TMazeFamily::observation_likelihood(StateId x, std::size_t world) const {
    if (world > 1) {
        throw Error("TMaze: world index out of range");
    }
    if (x.index == cue() || x.index == left_arm() || x.index == right_arm()) {
        std::vector<double> lik(2, 0.0);
        lik[world] = 1.0;
        return lik;
    }
    return {1.0, 1.0};
}

LikelihoodFn TMazeFamily::likelihood() const {
    return [this](StateId x, ActionId, StateId, std::size_t world) { return observation_likelihood(x, world); };
}

BeliefUpdater TMazeFamily::belief_updater() const {
    return [this](const Belief& b, const TransitionView& v, Rng&) -> Belief {
        if (!v.world) {
            throw Error("TMaze belief update needs the generating world");
        }
        return update_categorical(std::get<CategoricalBelief>(b), observation_likelihood(v.x, v.world->index()));
    };
}

// -------------------------------------------------------------- treasure

void TreasureSpec::validate() const {
    if (size < 1 || size % 2 == 0) {
        throw Error("TreasureSpec: size must be odd, got " + std::to_string(size));
    }
    if (!(alpha0 > 0.0 && beta0 > 0.0)) {
        throw Error("TreasureSpec: beta prior parameters must be positive");
    }
    if (horizon < 1) {
        throw Error("TreasureSpec: horizon must be positive");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw Error("TreasureSpec: gamma must lie in (0,1)");
    }
}

TreasureFamily::TreasureFamily(TreasureSpec spec) : spec_(spec) {
    spec_.validate();
    const int h = static_cast<int>(spec_.size);
    topo_.cells = spec_.cells();
    topo_.actions = kActions;
    topo_.next.resize(topo_.cells * kActions);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < h; ++c) {
            for (std::size_t a = 0; a < kActions; ++a) {
                const int nr = std::clamp(r + kMoves[a][0], 0, h - 1);
                const int nc = std::clamp(c + kMoves[a][1], 0, h - 1);
                topo_.next[static_cast<std::size_t>(r * h + c) * kActions + a] = static_cast<std::uint32_t>(nr * h + nc);
            }
        }
    }
}

std::size_t TreasureFamily::distance(StateId a, StateId b) const {
    const long h = static_cast<long>(spec_.size);
    const long ar = static_cast<long>(a.index) / h, ac = static_cast<long>(a.index) % h;
    const long br = static_cast<long>(b.index) / h, bc = static_cast<long>(b.index) % h;
    return static_cast<std::size_t>(std::max(std::labs(ar - br), std::labs(ac - bc)));
}

void TreasureFamily::check_env(const EnvParams& e) const {
    if (!e.is_grid() || e.probs().size() != spec_.cells()) {
        throw Error("TreasureFamily: environment must be a grid of " + std::to_string(spec_.cells()) + " cells");
    }
}

void TreasureFamily::transition(StateId x, ActionId a, const EnvParams& /*e*/, std::vector<Outcome>& out) const {
    check_action(x, a);
    out.clear();
    out.push_back({successor(x, a), 1.0});
}

double TreasureFamily::expected_reward(StateId x, ActionId a, const EnvParams& e) const {
    check_action(x, a);
    check_env(e);
    return e.probs()[x.index];
}

double TreasureFamily::sample_reward(StateId x, ActionId a, const EnvParams& e, Rng& rng) const {
    return rng.bernoulli(expected_reward(x, a, e)) ? 1.0 : 0.0;
}

std::string TreasureFamily::action_name(StateId x, ActionId a) const {
    check_action(x, a);
    static constexpr const char* kNames[] = {"stay", "nw", "n", "ne", "w", "e", "sw", "s", "se"};
    return kNames[a.index];
}

void TreasureFamily::state_rewards(const EnvParams& e, std::span<double> out) const {
    check_env(e);
    if (out.size() != spec_.cells()) {
        throw Error("TreasureFamily::state_rewards: output size mismatch");
    }
    std::copy(e.probs().begin(), e.probs().end(), out.begin());
}

TreasureStepResult treasure_step(const TreasureFamily& family, const EnvParams& e, StateId x, ActionId a,
                                 const BetaGridBelief& b, Rng& rng) {
    const TreasureSpec& spec = family.spec();
    family.check_action(x, a);
    if (b.cells() != spec.cells()) {
        throw Error("treasure_step: belief size mismatch");
    }
    TreasureStepResult res;
    const std::span<const double> p = e.probs();
    res.reward = family.sample_reward(x, a, e, rng);
    res.obs.reward = static_cast<int>(res.reward);
    res.obs.successes.assign(spec.cells(), 0);
    res.obs.failures.assign(spec.cells(), 0);

    auto pulls = [&](std::size_t cell, std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (rng.bernoulli(p[cell])) {
                ++res.obs.successes[cell];
            } else {
                ++res.obs.failures[cell];
            }
        }
    };
    const std::size_t here = x.index;
    (res.reward > 0.0 ? res.obs.successes : res.obs.failures)[here] += 1;
    pulls(here, spec.pulls_per_visit);
    if (here == spec.map_cell()) {
        for (std::size_t c = 0; c < spec.cells(); ++c) {
            if (c != here) pulls(c, spec.pulls_per_visit);
        }
    }

    std::vector<double> alpha(b.alpha().begin(), b.alpha().end());
    std::vector<double> beta(b.beta().begin(), b.beta().end());
    for (std::size_t c = 0; c < spec.cells(); ++c) {
        alpha[c] += static_cast<double>(res.obs.successes[c]);
        beta[c] += static_cast<double>(res.obs.failures[c]);
    }
    res.belief = BetaGridBelief(std::move(alpha), std::move(beta));
    res.next = family.successor(x, a);
    return res;
}

EnvParams treasure_prior_sample(const TreasureSpec& spec, Rng& rng) {
    spec.validate();
    std::vector<double> probs(spec.cells());
    for (double& v : probs) v = rng.beta(spec.alpha0, spec.beta0);
    return EnvParams::grid(std::move(probs));
}

TreasureFamily treasure_planning_family(const TreasureSpec& spec) { return TreasureFamily(spec); }

StateId treasure_random_start(const TreasureSpec& spec, Rng& rng) {
    return StateId{rng.uniform_index(spec.cells())};
}

}  // namespace pcr
