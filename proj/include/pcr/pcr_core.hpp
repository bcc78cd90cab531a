#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "pcr/belief.hpp"
#include "pcr/env_model.hpp"
#include "pcr/rng.hpp"

namespace pcr {

enum class LambdaMode {
    ExactMc,     // r + gamma * vc(x', b') - vc(x, b), independent samples per term
    SameBelief,  // vc(x', b) - vc(x, b), one shared sample set
};

LambdaMode parse_lambda_mode(const std::string& s);
const char* lambda_mode_name(LambdaMode m);

struct PcrConfig {
    std::size_t M = 1;
    std::size_t N = 80;
    LambdaMode mode = LambdaMode::ExactMc;

    void validate() const;
};

struct InfoValueEstimate {
    double v_c_hat = 0.0;
    double bound_hat = 0.0;
    std::size_t sample_count = 0;
};

/// v^{planner}(x; world).
using CrossProvider = std::function<double(const EnvParams& planner, const EnvParams& world, StateId x)>;
/// v^{e}(x; e).
using OptimalProvider = std::function<double(const EnvParams& e, StateId x)>;

/// (1/MN) sum_m sum_n v^{e_n}(x; e_m) with every e drawn iid from b.
double estimate_v_current(StateId x, const Belief& b, const CrossProvider& cross, std::size_t M, std::size_t N,
                          Rng& rng);

/// MC estimate of E_e[v^e(x;e) - E_{e'} v^{e'}(x;e)]: M outer draws, N inner draws each.
double estimate_bound(StateId x, const Belief& b, const CrossProvider& cross, const OptimalProvider& optimal,
                      std::size_t M, std::size_t N, Rng& rng);

/// Both quantities by weighted enumeration over a categorical belief.
double exact_v_current(StateId x, const CategoricalBelief& b, const CrossProvider& cross);
double exact_bound(StateId x, const CategoricalBelief& b, const CrossProvider& cross, const OptimalProvider& optimal);
InfoValueEstimate exact_info_values(StateId x, const CategoricalBelief& b, const CrossProvider& cross,
                                    const OptimalProvider& optimal);

/// Predictively cashed reward estimate.
double cashed_reward(double r, StateId x, const Belief& b, StateId x_next, const Belief& b_next,
                     const CrossProvider& cross, const PcrConfig& cfg, double gamma, Rng& rng);

/// r + gamma * vc(x', b') - vc(x, b) with enumerated vc.
double exact_cashed_reward(double r, StateId x, const CategoricalBelief& b, StateId x_next,
                           const CategoricalBelief& b_next, const CrossProvider& cross, double gamma);

/// Per-state estimates over a whole family, using the batched cross-value solver.
/// vc uses M world draws with N planner draws each.
std::vector<double> v_current_map(const MdpFamily& family, const Belief& b, std::size_t M, std::size_t N,
                                  double gamma, double tol, Rng& rng);
std::vector<double> bound_map(const MdpFamily& family, const Belief& b, std::size_t M, std::size_t N, double gamma,
                              double tol, Rng& rng);

/// bound * w, w in (0,1).
double bounded_vf(double bound_hat, double w);
double total_value(double v_c, double v_f);

}  // namespace pcr
