#include <cmath>
#include <cstdio>
#include <sstream>

#include "pcr/dp_engine.hpp"
#include "pcr/harness.hpp"
#include "pcr/oracles.hpp"

namespace pcr {

namespace {

class Report {
public:
    void check(const std::string& name, double expected, double actual, double tol) {
        const bool pass = std::isfinite(actual) && std::abs(expected - actual) <= tol;
        entries.push_back({name, expected, actual, tol, pass});
    }

    // Largest absolute deviation across a vector, reported as one entry.
    void check_all(const std::string& name, const std::vector<double>& expected, const std::vector<double>& actual,
                   double tol) {
        if (expected.size() != actual.size()) {
            entries.push_back({name, static_cast<double>(expected.size()), static_cast<double>(actual.size()), 0.0,
                               false});
            return;
        }
        std::size_t worst = 0;
        double dev = -1.0;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            const double d = std::isfinite(actual[i]) ? std::abs(expected[i] - actual[i]) : INFINITY;
            if (d > dev) {
                dev = d;
                worst = i;
            }
        }
        entries.push_back({name, expected[worst], actual[worst], tol, dev <= tol});
    }

    std::vector<OracleEntry> entries;
};

std::vector<double> optimal_by_enumeration(const MdpFamily& f, const EnvParams& e, double gamma) {
    return oracle::enumerate_policies(compile_model(f, e), gamma).values;
}

void finite_family_oracles(Report& rep, const std::string& name, const TabularFamily& f, double lib_gamma) {
    const double gamma = f.discount();
    for (std::size_t i = 0; i < f.env_count(); ++i) {
        const EnvParams ei = EnvParams::finite(i);
        rep.check_all(name + "/optimal/env" + std::to_string(i), optimal_by_enumeration(f, ei, gamma),
                      value_iteration(f, ei, lib_gamma).values, 1e-6);
        for (std::size_t j = 0; j < f.env_count(); ++j) {
            const EnvParams ej = EnvParams::finite(j);
            rep.check_all(name + "/cross/planner" + std::to_string(j) + "/world" + std::to_string(i),
                          oracle::infinite_cross(compile_model(f, ej), compile_model(f, ei), gamma, true),
                          infinite_horizon_cross_values(f, ej, ei, lib_gamma).values, 1e-6);
        }
        for (std::size_t steps : {1u, 3u, 6u}) {
            std::vector<double> tree, lib;
            const auto table = finite_horizon_cross_values(f, ei, ei, steps, lib_gamma);
            for (std::size_t x = 0; x < f.state_count(); ++x) {
                tree.push_back(oracle::tree_value(compile_model(f, ei), x, steps, gamma));
                lib.push_back(table.first.at(0, x));
            }
            rep.check_all(name + "/finite-horizon/T" + std::to_string(steps) + "/env" + std::to_string(i), tree, lib,
                          1e-9);
        }
    }
}

}  // namespace

std::vector<OracleEntry> run_oracles(const ExperimentConfig& cfg) {
    Report rep;
    const double dg = cfg.perturb_gamma;

    // Geometric series on the bandit: the right arm pays 1 forever.
    const TabularFamily bandit = two_arm_bandit();
    rep.check("bandit/geometric-series", 1.0 / (1.0 - 0.9),
              value_iteration(bandit, EnvParams::finite(0), 0.9 + dg).at(0), 1e-6);
    finite_family_oracles(rep, "bandit", bandit, bandit.discount() + dg);
    finite_family_oracles(rep, "chain", tiny_chain(), tiny_chain().discount() + dg);

    // Treasure grids: uniform p gives p / (1 - gamma); random pairs against policy iteration.
    TreasureSpec ts;
    ts.size = 3;
    const TreasureFamily tf = treasure_planning_family(ts);
    const double tg = ts.gamma;
    rep.check("treasure/uniform-grid", 0.3 / (1.0 - tg),
              value_iteration(tf, EnvParams::grid(std::vector<double>(9, 0.3)), tg + dg).at(4), 1e-6);
    Rng rng(cfg.seeds.empty() ? 0 : cfg.seeds.front());
    for (std::size_t k = 0; k < 10; ++k) {
        const EnvParams world = treasure_prior_sample(ts, rng);
        const EnvParams planner = treasure_prior_sample(ts, rng);
        rep.check_all("treasure/cross/pair" + std::to_string(k),
                      oracle::infinite_cross(compile_model(tf, planner), compile_model(tf, world), tg, false),
                      infinite_horizon_cross_values(tf, planner, world, tg + dg).values, 1e-6);
    }

    // Bernoulli reward and beta prior means by Monte Carlo.
    {
        Rng mc(17);
        const double p = 0.3;
        const EnvParams e = EnvParams::grid(std::vector<double>(9, p));
        double sum = 0.0;
        const std::size_t n = 100000;
        for (std::size_t i = 0; i < n; ++i) sum += tf.sample_reward(StateId{0}, ActionId{0}, e, mc);
        rep.check("treasure/bernoulli-mean", p, sum / n, 3.0 * std::sqrt(p * (1 - p) / n));
        double prior_sum = 0.0;
        const std::size_t grids = 10000;
        for (std::size_t i = 0; i < grids; ++i) prior_sum += treasure_prior_sample(ts, mc).probs()[4];
        const double a = ts.alpha0, b = ts.beta0;
        const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
        rep.check("treasure/beta-prior-mean", a / (a + b), prior_sum / grids, 3.0 * std::sqrt(var / grids));
    }

    // T-maze: exhaustive search over belief-augmented control and per-environment paths.
    const TMazeFamily maze;
    const oracle::MazeOracle mo;
    const TMazeSpec& ms = maze.spec();
    const double mg = ms.gamma;
    const AugmentedValueTable ba = ba_value_iteration(maze, maze.prior(), maze.likelihood(), mg + dg, ms.horizon);
    rep.check("tmaze/bayes-optimal-discounted", mo.bayes_value(mg), ba.at(0, 0, ms.start_cell()), 1e-9);
    double undiscounted = NAN;
    try {
        undiscounted = ba_value_iteration(maze, maze.prior(), maze.likelihood(), 1.0 + dg, ms.horizon)
                           .at(0, 0, ms.start_cell());
    } catch (const Error&) {
        // An out-of-range discount is reported as a mismatch.
    }
    rep.check("tmaze/bayes-optimal-return", mo.bayes_value(1.0), undiscounted, 1e-9);
    for (std::size_t pl = 0; pl < 2; ++pl) {
        for (std::size_t w = 0; w < 2; ++w) {
            const auto tab = finite_horizon_cross_values(maze, EnvParams::finite(pl), EnvParams::finite(w),
                                                         ms.horizon, mg + dg);
            std::vector<double> expect, got;
            for (std::size_t x = 0; x < maze.state_count(); ++x) {
                expect.push_back(mo.cross_value(pl, w, 0, x, mg));
                got.push_back(tab.second.at(0, x));
            }
            rep.check_all("tmaze/cross/planner" + std::to_string(pl) + "/world" + std::to_string(w), expect, got,
                          1e-9);
        }
    }

    // Bayes arithmetic.
    {
        const CategoricalBelief prior = CategoricalBelief::prior({0.2, 0.3, 0.5});
        const std::vector<double> lik{0.5, 0.1, 0.4};
        const CategoricalBelief post = update_categorical(prior, lik);
        const double z = 0.2 * 0.5 + 0.3 * 0.1 + 0.5 * 0.4;
        rep.check_all("belief/bayes-rule", {0.1 / z, 0.03 / z, 0.2 / z},
                      {post.prob(0), post.prob(1), post.prob(2)}, 1e-12);
        const BetaGridBelief bg = update_beta(BetaGridBelief(4, 0.1, 1.0), 2, 3, 4);
        rep.check_all("belief/beta-counts", {0.1, 0.1, 3.1, 0.1, 1.0, 1.0, 5.0, 1.0},
                      {bg.alpha()[0], bg.alpha()[1], bg.alpha()[2], bg.alpha()[3], bg.beta()[0], bg.beta()[1],
                       bg.beta()[2], bg.beta()[3]},
                      1e-12);
    }

    // Finite differences on every network.
    for (const GradCheckEntry& g : run_gradcheck(3, 7)) {
        rep.check("gradcheck/" + g.network + "/" + std::to_string(g.instance), 0.0, g.result.max_normwise_error, 1e-6);
    }
    return rep.entries;
}

std::string format_oracle_report(const std::vector<OracleEntry>& entries) {
    std::ostringstream os;
    std::size_t failed = 0;
    char buf[512];
    for (const OracleEntry& e : entries) {
        std::snprintf(buf, sizeof(buf), "%-4s %-44s expected %-22.15g actual %-22.15g tol %.1e\n",
                      e.pass ? "ok" : "FAIL", e.name.c_str(), e.expected, e.actual, e.tolerance);
        os << buf;
        failed += e.pass ? 0 : 1;
    }
    os << entries.size() - failed << "/" << entries.size() << " oracles passed\n";
    return os.str();
}

std::vector<GradCheckEntry> run_gradcheck(std::size_t instances, std::uint64_t seed) {
    std::vector<GradCheckEntry> out;
    const Rng root(seed);
    auto perturb = [](Network& net, Rng& rng) {
        // Nonzero tables and biases so that every parameter carries gradient.
        for (Tensor& t : net.params().tensors()) {
            for (double& v : t.data) v += rng.uniform() - 0.5;
        }
    };
    auto input_and_coeffs = [](const Network& net, Rng& rng) {
        std::pair<std::vector<double>, std::vector<double>> ic;
        for (std::size_t i = 0; i < net.input_size(); ++i) ic.first.push_back(0.1 + 10.0 * rng.uniform());
        for (std::size_t i = 0; i < net.output_size(); ++i) ic.second.push_back(2.0 * rng.uniform() - 1.0);
        return ic;
    };
    for (std::size_t i = 0; i < instances; ++i) {
        Rng rng = root.child(i);
        const std::size_t size = i % 2 == 0 ? 3 : 5;
        {
            WNetwork w(WNetworkSpec{size, 20, 0.01, true});
            w.init_random(rng);
            perturb(w, rng);
            const auto [in, co] = input_and_coeffs(w, rng);
            out.push_back({"w-network", i, gradient_check(w, in, co)});
        }
        {
            WNetwork w(WNetworkSpec{size, 20, 0.01, false});
            w.init_random(rng);
            perturb(w, rng);
            const auto [in, co] = input_and_coeffs(w, rng);
            out.push_back({"w-network-raw", i, gradient_check(w, in, co)});
        }
        {
            BaselineNet f(BaselineNetSpec{size});
            f.init_random(rng);
            perturb(f, rng);
            const auto [in, co] = input_and_coeffs(f, rng);
            out.push_back({"fc-baseline", i, gradient_check(f, in, co)});
        }
    }
    return out;
}

}  // namespace pcr
