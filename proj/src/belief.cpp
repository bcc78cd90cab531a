#include "pcr/belief.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace pcr {

namespace {

constexpr double kSumTolerance = 1e-12;

void validate_probs(std::span<const double> probs) {
    if (probs.empty()) {
        throw Error("categorical belief: empty probability vector");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw Error("categorical belief: negative or non-finite probability");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw Error("categorical belief: probabilities sum to " + std::to_string(sum));
    }
}

}  // namespace

CategoricalBelief CategoricalBelief::prior(std::vector<double> probs, bool deterministic_inference) {
    validate_probs(probs);
    CategoricalBelief b;
    b.prior_ = std::make_shared<const std::vector<double>>(probs);
    b.probs_ = std::move(probs);
    b.deterministic_ = deterministic_inference;
    return b;
}

CategoricalBelief CategoricalBelief::uniform(std::size_t count, bool deterministic_inference) {
    if (count == 0) {
        throw Error("categorical belief: zero environments");
    }
    return prior(std::vector<double>(count, 1.0 / static_cast<double>(count)), deterministic_inference);
}

std::size_t CategoricalBelief::one_hot_index() const {
    std::size_t hot = probs_.size();
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        if (probs_[i] == 1.0) {
            hot = i;
        } else if (probs_[i] != 0.0) {
            return probs_.size();
        }
    }
    return hot;
}

CategoricalBelief update_categorical(const CategoricalBelief& b, std::span<const double> likelihoods) {
    if (likelihoods.size() != b.size()) {
        throw Error("update_categorical: likelihood count " + std::to_string(likelihoods.size()) +
                    " does not match belief size " + std::to_string(b.size()));
    }
    std::vector<double> post(b.size());
    double total = 0.0;
    for (std::size_t i = 0; i < post.size(); ++i) {
        if (!(likelihoods[i] >= 0.0)) {
            throw Error("update_categorical: negative likelihood");
        }
        post[i] = likelihoods[i] * b.prob(i);
        total += post[i];
    }
    if (!(total > 0.0)) {
        throw Error("update_categorical: observation has zero likelihood under the belief support");
    }
    for (double& p : post) {
        p /= total;
    }
    CategoricalBelief out = b;
    // Keep prior and collapsed states exactly representable.
    bool unchanged = true;
    for (std::size_t i = 0; i < post.size(); ++i) {
        if (std::abs(post[i] - b.prob(i)) > kSumTolerance) {
            unchanged = false;
            break;
        }
    }
    if (unchanged) {
        return out;
    }
    for (double& p : post) {
        if (std::abs(p - 1.0) <= kSumTolerance) {
            p = 1.0;
        } else if (p <= kSumTolerance) {
            p = 0.0;
        }
    }
    const double renorm = std::accumulate(post.begin(), post.end(), 0.0);
    for (double& p : post) {
        p /= renorm;
    }
    out.probs_ = std::move(post);
    return out;
}

BetaGridBelief::BetaGridBelief(std::size_t cells, double alpha0, double beta0)
    : BetaGridBelief(std::vector<double>(cells, alpha0), std::vector<double>(cells, beta0)) {}

BetaGridBelief::BetaGridBelief(std::vector<double> alpha, std::vector<double> beta)
    : alpha_(std::move(alpha)), beta_(std::move(beta)) {
    if (alpha_.size() != beta_.size() || alpha_.empty()) {
        throw Error("BetaGridBelief: alpha/beta size mismatch");
    }
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
        if (!(alpha_[i] > 0.0) || !(beta_[i] > 0.0)) {
            throw Error("BetaGridBelief: counts must be positive (cell " + std::to_string(i) + ")");
        }
    }
}

BetaGridBelief update_beta(const BetaGridBelief& b, std::size_t cell, long long successes, long long failures) {
    if (cell >= b.cells()) {
        throw Error("update_beta: cell " + std::to_string(cell) + " out of range");
    }
    if (successes < 0 || failures < 0) {
        throw Error("update_beta: negative counts");
    }
    BetaGridBelief out = b;
    out.alpha_[cell] += static_cast<double>(successes);
    out.beta_[cell] += static_cast<double>(failures);
    return out;
}

CategoricalBelief DiracBelief::to_categorical(std::size_t count) const {
    if (env.is_grid() || env.index() >= count) {
        throw Error("DiracBelief: environment is not an index below " + std::to_string(count));
    }
    std::vector<double> probs(count, 0.0);
    probs[env.index()] = 1.0;
    return CategoricalBelief::prior(std::move(probs), true);
}

EnvParams sample_env(const CategoricalBelief& b, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b.prob(i) <= 0.0) {
            continue;
        }
        last = i;
        acc += b.prob(i);
        if (u < acc) {
            return EnvParams::finite(i);
        }
    }
    return EnvParams::finite(last);
}

EnvParams sample_env(const BetaGridBelief& b, Rng& rng) {
    std::vector<double> grid(b.cells());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = rng.beta(b.alpha()[i], b.beta()[i]);
    }
    return EnvParams::grid(std::move(grid));
}

EnvParams sample_env(const DiracBelief& b, Rng& /*rng*/) { return b.env; }

EnvParams sample_env(const Belief& b, Rng& rng) {
    return std::visit([&rng](const auto& belief) { return sample_env(belief, rng); }, b);
}

std::vector<double> mean_env(const BetaGridBelief& b) {
    std::vector<double> mean(b.cells());
    for (std::size_t i = 0; i < mean.size(); ++i) {
        mean[i] = b.alpha()[i] / (b.alpha()[i] + b.beta()[i]);
    }
    return mean;
}

std::size_t belief_state_index(const CategoricalBelief& b) {
    if (!b.deterministic_inference()) {
        throw Error("belief_state_index: belief is not under deterministic inference");
    }
    if (b.is_prior()) {
        return 0;
    }
    const std::size_t hot = b.one_hot_index();
    if (hot == b.size()) {
        throw Error("belief_state_index: belief is neither the prior nor one-hot");
    }
    return hot + 1;
}

CategoricalBelief belief_from_index(const CategoricalBelief& prior, std::size_t index) {
    if (index == 0) {
        return prior;
    }
    if (index > prior.size()) {
        throw Error("belief_from_index: index out of range");
    }
    std::vector<double> likelihood(prior.size(), 0.0);
    likelihood[index - 1] = 1.0;
    return update_categorical(prior, likelihood);
}

}  // namespace pcr
