#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcr {

/// Raised for contract violations (illegal actions, malformed beliefs, bad configs).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StateId {
    std::size_t index = 0;
    auto operator<=>(const StateId&) const = default;
};

/// Index into the legal-action list of a particular state.
struct ActionId {
    std::size_t index = 0;
    auto operator<=>(const ActionId&) const = default;
};

/// Environment parameters: either an index into a finite environment set or a
/// grid of per-cell Bernoulli success probabilities.
class EnvParams {
public:
    EnvParams() = default;

    static EnvParams finite(std::size_t index) {
        EnvParams e;
        e.index_ = index;
        return e;
    }

    static EnvParams grid(std::vector<double> probs) {
        for (double p : probs) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw Error("EnvParams::grid: probability outside [0,1]");
            }
        }
        EnvParams e;
        e.probs_ = std::move(probs);
        e.is_grid_ = true;
        return e;
    }

    bool is_grid() const { return is_grid_; }
    std::size_t index() const { return index_; }
    std::span<const double> probs() const { return probs_; }

    bool operator==(const EnvParams&) const = default;

private:
    std::size_t index_ = 0;
    std::vector<double> probs_;
    bool is_grid_ = false;
};

}  // namespace pcr
