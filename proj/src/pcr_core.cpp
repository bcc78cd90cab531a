#include "pcr/pcr_core.hpp"

#include "pcr/dp_engine.hpp"

namespace pcr {

LambdaMode parse_lambda_mode(const std::string& s) {
    if (s == "exact-mc") return LambdaMode::ExactMc;
    if (s == "same-belief") return LambdaMode::SameBelief;
    throw Error("unknown lambda mode '" + s + "' (expected exact-mc or same-belief)");
}

const char* lambda_mode_name(LambdaMode m) { return m == LambdaMode::ExactMc ? "exact-mc" : "same-belief"; }

void PcrConfig::validate() const {
    if (M < 1 || N < 1) {
        throw Error("PcrConfig: M and N must be at least 1");
    }
}

namespace {

void check_counts(std::size_t M, std::size_t N) {
    if (M < 1 || N < 1) {
        throw Error("sample counts M and N must be at least 1");
    }
}

std::vector<EnvParams> draw(const Belief& b, std::size_t n, Rng& rng) {
    std::vector<EnvParams> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_env(b, rng));
    return out;
}

// Worlds first, then N planners per world.
std::vector<EnvPair> draw_pairs(const Belief& b, std::size_t M, std::size_t N, Rng& rng) {
    const std::vector<EnvParams> worlds = draw(b, M, rng);
    std::vector<EnvPair> pairs;
    pairs.reserve(M * N);
    for (const EnvParams& w : worlds) {
        for (std::size_t n = 0; n < N; ++n) pairs.push_back({w, sample_env(b, rng)});
    }
    return pairs;
}

}  // namespace

double estimate_v_current(StateId x, const Belief& b, const CrossProvider& cross, std::size_t M, std::size_t N,
                          Rng& rng) {
    check_counts(M, N);
    double sum = 0.0;
    for (const EnvPair& p : draw_pairs(b, M, N, rng)) sum += cross(p.planner, p.world, x);
    return sum / static_cast<double>(M * N);
}

double estimate_bound(StateId x, const Belief& b, const CrossProvider& cross, const OptimalProvider& optimal,
                      std::size_t M, std::size_t N, Rng& rng) {
    check_counts(M, N);
    double sum = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        const EnvParams world = sample_env(b, rng);
        double inner = 0.0;
        for (std::size_t n = 0; n < N; ++n) inner += cross(sample_env(b, rng), world, x);
        sum += optimal(world, x) - inner / static_cast<double>(N);
    }
    return sum / static_cast<double>(M);
}

double exact_v_current(StateId x, const CategoricalBelief& b, const CrossProvider& cross) {
    double sum = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b.prob(i) == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b.prob(j) == 0.0) continue;
            sum += b.prob(i) * b.prob(j) * cross(EnvParams::finite(j), EnvParams::finite(i), x);
        }
    }
    return sum;
}

double exact_bound(StateId x, const CategoricalBelief& b, const CrossProvider& cross, const OptimalProvider& optimal) {
    double sum = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b.prob(i) == 0.0) continue;
        const EnvParams world = EnvParams::finite(i);
        double inner = 0.0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b.prob(j) == 0.0) continue;
            inner += b.prob(j) * cross(EnvParams::finite(j), world, x);
        }
        sum += b.prob(i) * (optimal(world, x) - inner);
    }
    return sum;
}

InfoValueEstimate exact_info_values(StateId x, const CategoricalBelief& b, const CrossProvider& cross,
                                    const OptimalProvider& optimal) {
    InfoValueEstimate est;
    est.v_c_hat = exact_v_current(x, b, cross);
    est.bound_hat = exact_bound(x, b, cross, optimal);
    est.sample_count = b.size() * b.size();
    return est;
}

double cashed_reward(double r, StateId x, const Belief& b, StateId x_next, const Belief& b_next,
                     const CrossProvider& cross, const PcrConfig& cfg, double gamma, Rng& rng) {
    cfg.validate();
    if (cfg.mode == LambdaMode::ExactMc) {
        const double next = estimate_v_current(x_next, b_next, cross, cfg.M, cfg.N, rng);
        const double now = estimate_v_current(x, b, cross, cfg.M, cfg.N, rng);
        return r + gamma * next - now;
    }
    double diff = 0.0;
    for (const EnvPair& p : draw_pairs(b, cfg.M, cfg.N, rng)) {
        diff += cross(p.planner, p.world, x_next) - cross(p.planner, p.world, x);
    }
    return diff / static_cast<double>(cfg.M * cfg.N);
}

double exact_cashed_reward(double r, StateId x, const CategoricalBelief& b, StateId x_next,
                           const CategoricalBelief& b_next, const CrossProvider& cross, double gamma) {
    return r + gamma * exact_v_current(x_next, b_next, cross) - exact_v_current(x, b, cross);
}

std::vector<double> v_current_map(const MdpFamily& family, const Belief& b, std::size_t M, std::size_t N,
                                  double gamma, double tol, Rng& rng) {
    check_counts(M, N);
    const std::vector<EnvPair> pairs = draw_pairs(b, M, N, rng);
    const std::vector<double> tables = batch_cross_value_tables(family, pairs, gamma, tol);
    const std::size_t n = family.state_count();
    std::vector<double> out(n, 0.0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (std::size_t x = 0; x < n; ++x) out[x] += tables[p * n + x];
    }
    for (double& v : out) v /= static_cast<double>(pairs.size());
    return out;
}

std::vector<double> bound_map(const MdpFamily& family, const Belief& b, std::size_t M, std::size_t N, double gamma,
                              double tol, Rng& rng) {
    check_counts(M, N);
    // Per world: one self pair (its optimal values) followed by N planner pairs.
    std::vector<EnvPair> pairs;
    pairs.reserve(M * (N + 1));
    for (std::size_t m = 0; m < M; ++m) {
        const EnvParams world = sample_env(b, rng);
        pairs.push_back({world, world});
        for (std::size_t k = 0; k < N; ++k) pairs.push_back({world, sample_env(b, rng)});
    }
    const std::vector<double> tables = batch_cross_value_tables(family, pairs, gamma, tol);
    const std::size_t n = family.state_count();
    std::vector<double> out(n, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        const double* opt = &tables[m * (N + 1) * n];
        for (std::size_t x = 0; x < n; ++x) {
            double inner = 0.0;
            for (std::size_t k = 1; k <= N; ++k) inner += opt[k * n + x];
            out[x] += opt[x] - inner / static_cast<double>(N);
        }
    }
    for (double& v : out) v /= static_cast<double>(M);
    return out;
}

double bounded_vf(double bound_hat, double w) {
    if (!(w > 0.0 && w < 1.0)) {
        throw Error("bounded_vf: w must lie in (0,1)");
    }
    return bound_hat * w;
}

double total_value(double v_c, double v_f) {
    if (v_f < 0.0) {
        throw Error("total_value: v_f must be non-negative");
    }
    return v_c + v_f;
}

}  // namespace pcr
