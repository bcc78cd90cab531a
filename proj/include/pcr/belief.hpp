#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "pcr/rng.hpp"
#include "pcr/types.hpp"

namespace pcr {

/// Posterior over a finite set of S environments.
///
/// Under deterministic inference the belief is either the prior it was created
/// from or one-hot on a single environment; the prior is carried along so that
/// belief_state_index() can tell the two apart.
class CategoricalBelief {
public:
    CategoricalBelief() = default;

    /// A prior belief. Probabilities are validated and must sum to 1.
    static CategoricalBelief prior(std::vector<double> probs, bool deterministic_inference = false);
    static CategoricalBelief uniform(std::size_t count, bool deterministic_inference = false);

    std::span<const double> probs() const { return probs_; }
    std::span<const double> prior_probs() const { return *prior_; }
    double prob(std::size_t i) const { return probs_[i]; }
    std::size_t size() const { return probs_.size(); }
    bool deterministic_inference() const { return deterministic_; }

    /// Index of the single unit entry, or size() when the belief is not one-hot.
    std::size_t one_hot_index() const;
    bool is_prior() const { return probs_ == *prior_; }

    bool operator==(const CategoricalBelief& other) const {
        return probs_ == other.probs_ && deterministic_ == other.deterministic_;
    }

private:
    friend CategoricalBelief update_categorical(const CategoricalBelief&, std::span<const double>);

    std::vector<double> probs_;
    std::shared_ptr<const std::vector<double>> prior_;
    bool deterministic_ = false;
};

/// Per-cell beta posteriors of a Bernoulli reward grid.
class BetaGridBelief {
public:
    BetaGridBelief() = default;
    BetaGridBelief(std::size_t cells, double alpha0, double beta0);
    BetaGridBelief(std::vector<double> alpha, std::vector<double> beta);

    std::size_t cells() const { return alpha_.size(); }
    std::span<const double> alpha() const { return alpha_; }
    std::span<const double> beta() const { return beta_; }

    bool operator==(const BetaGridBelief&) const = default;

private:
    friend BetaGridBelief update_beta(const BetaGridBelief&, std::size_t, long long, long long);

    std::vector<double> alpha_;
    std::vector<double> beta_;
};

/// Point mass on one environment.
struct DiracBelief {
    EnvParams env;

    /// One-hot categorical over `count` environments (env must be finite).
    CategoricalBelief to_categorical(std::size_t count) const;
};

using Belief = std::variant<CategoricalBelief, BetaGridBelief>;

/// Bayes rule: posterior proportional to likelihood times prior.
CategoricalBelief update_categorical(const CategoricalBelief& b, std::span<const double> likelihoods);

/// Conjugate count increment at one cell.
BetaGridBelief update_beta(const BetaGridBelief& b, std::size_t cell, long long successes, long long failures);

EnvParams sample_env(const CategoricalBelief& b, Rng& rng);
EnvParams sample_env(const BetaGridBelief& b, Rng& rng);
EnvParams sample_env(const DiracBelief& b, Rng& rng);
EnvParams sample_env(const Belief& b, Rng& rng);

/// Posterior mean success probability per cell.
std::vector<double> mean_env(const BetaGridBelief& b);

/// 0 for the prior, i (1-based) for the belief collapsed on environment i-1.
std::size_t belief_state_index(const CategoricalBelief& b);

/// Inverse of belief_state_index for a given prior.
CategoricalBelief belief_from_index(const CategoricalBelief& prior, std::size_t index);

}  // namespace pcr
