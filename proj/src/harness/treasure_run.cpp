#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>

#include "pcr/dp_engine.hpp"
#include "pcr/harness.hpp"

namespace pcr {

namespace {

enum class Kind { PcrTd, Td, ViTd, ViThompson, ViGreedy };

Kind parse_kind(const std::string& m) {
    if (m == "pcr-td") return Kind::PcrTd;
    if (m == "td") return Kind::Td;
    if (m == "vi-td") return Kind::ViTd;
    if (m == "vi-thompson") return Kind::ViThompson;
    if (m == "vi-greedy") return Kind::ViGreedy;
    throw Error("unknown treasure method '" + m + "'");
}

std::vector<double> grid_of(const EnvParams& e) { return {e.probs().begin(), e.probs().end()}; }

bool trains(Kind k) { return k == Kind::PcrTd || k == Kind::Td || k == Kind::ViTd; }

// Per-belief quantities feeding the value of every cell:
// V(x) = offset[x] + scale[x] * out[x], plus vc[x] for action scoring in pcr-td.
struct Features {
    std::vector<double> input;
    std::vector<double> offset;
    std::vector<double> scale;
    std::vector<double> vc;
    std::vector<double> out;
};

struct EpisodeStreams {
    Rng sim;
    Rng act;
    Rng mc;
};

struct EpisodeResult {
    double total = 0.0;
    bool map_visit = false;
    double loss = 0.0;
};

class Runner {
public:
    Runner(const ExperimentConfig& cfg, Kind kind, std::uint64_t seed)
        : cfg_(cfg),
          kind_(kind),
          spec_(make_spec(cfg)),
          family_(treasure_planning_family(spec_)),
          lambda_mode_(parse_lambda_mode(cfg.lambda_mode)),
          td_mode_(parse_td_mode(cfg.td_mode)),
          root_(seed) {
        Rng init = root_.child(5);
        if (kind_ == Kind::PcrTd) {
            auto w = std::make_unique<WNetwork>(WNetworkSpec{spec_.size, 20, 0.01, cfg.squash});
            w->init_random(init);
            net_ = std::move(w);
        } else if (kind_ == Kind::Td || kind_ == Kind::ViTd) {
            auto f = std::make_unique<BaselineNet>(BaselineNetSpec{spec_.size});
            f->init_random(init);
            net_ = std::move(f);
        }
    }

    TreasureResult run(const std::string& method) {
        TreasureResult res;
        const std::uint64_t seed = root_.seed();
        const std::size_t epochs = trains(kind_) ? cfg_.resolved_epochs() : 0;
        const double eps = cfg_.resolved_epsilon();
        std::optional<ParameterBlock> best_params;
        double best_score = -INFINITY;
        if (net_) {
            best_params = net_->params();
        }
        AdamState adam;
        if (net_) adam = adam_init(net_->params());
        const AdamHyper hyper{cfg_.adam_rate, 0.9, 0.999, 1e-8};

        for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
            ParameterBlock grads = net_->params().zeros_like();
            const ParameterBlock snapshot = net_->params();
            double total = 0.0, loss = 0.0;
            for (std::size_t i = 0; i < cfg_.batch; ++i) {
                Rng ep = root_.child(1).child(epoch * cfg_.batch + i);
                Rng envs = ep.child(1);
                const EnvParams world = treasure_prior_sample(spec_, envs);
                const StateId start = treasure_random_start(spec_, envs);
                EpisodeStreams s{ep.child(2), ep.child(3), ep.child(4)};
                const EpisodeResult r = episode(world, start, s, eps, &grads);
                total += r.total;
                loss += r.loss;
            }
            const double mean_return = total / static_cast<double>(cfg_.batch);
            res.rows.push_back({epoch, seed, method, "train_return", mean_return});
            res.rows.push_back({epoch, seed, method, "td_loss", loss});
            if (mean_return > best_score) {
                best_score = mean_return;
                best_params = snapshot;
                res.best_epoch = epoch;
            }
            adam_step(net_->params(), grads, adam, hyper);
        }
        if (net_) {
            net_->params() = *best_params;
            Checkpoint ck;
            ck.meta["method"] = method;
            ck.meta["seed"] = std::to_string(seed);
            ck.meta["size"] = std::to_string(spec_.size);
            ck.meta["best_epoch"] = std::to_string(res.best_epoch);
            ck.params = *best_params;
            res.checkpoint = std::move(ck);
        }

        std::vector<double> trials;
        std::size_t visits = 0, episodes = 0;
        for (std::size_t trial = 0; trial < cfg_.test_trials; ++trial) {
            Rng troot = Rng(seed).child(100 + trial);
            Rng envs = troot.child(1);
            double sum = 0.0;
            for (std::size_t i = 0; i < cfg_.batch; ++i) {
                const EnvParams world = treasure_prior_sample(spec_, envs);
                const StateId start = treasure_random_start(spec_, envs);
                Rng ep = troot.child(10 + i);
                EpisodeStreams s{ep.child(2), ep.child(3), ep.child(4)};
                const EpisodeResult r = episode(world, start, s, 0.0, nullptr);
                sum += r.total;
                visits += r.map_visit ? 1 : 0;
                ++episodes;
            }
            trials.push_back(sum / static_cast<double>(cfg_.batch));
            res.rows.push_back({trial, seed, method, "test_trial_return", trials.back()});
        }
        const MeanSe ms = mean_and_se(trials);
        res.test_mean = ms.mean;
        res.test_se = ms.se;
        res.map_visit_rate = static_cast<double>(visits) / static_cast<double>(episodes);
        res.rows.push_back({epochs, seed, method, "test_mean", res.test_mean});
        res.rows.push_back({epochs, seed, method, "test_se", res.test_se});
        res.rows.push_back({epochs, seed, method, "map_visit_rate", res.map_visit_rate});
        res.rows.push_back({epochs, seed, method, "best_epoch", static_cast<double>(res.best_epoch)});
        return res;
    }

private:
    static TreasureSpec make_spec(const ExperimentConfig& cfg) {
        TreasureSpec s;
        s.size = cfg.size;
        s.validate();
        return s;
    }

    std::vector<double> plan(const std::vector<double>& grid) const {
        return value_iteration(family_, EnvParams::grid(grid), spec_.gamma, cfg_.vi_tol).values;
    }

    Features features(const BetaGridBelief& b, Rng& mc) const {
        const std::size_t n = spec_.cells();
        Features f;
        f.input.reserve(2 * n);
        f.input.insert(f.input.end(), b.alpha().begin(), b.alpha().end());
        f.input.insert(f.input.end(), b.beta().begin(), b.beta().end());
        switch (kind_) {
            case Kind::PcrTd:
                f.vc = v_current_map(family_, b, cfg_.m_samples, cfg_.n_lambda, spec_.gamma, cfg_.vi_tol, mc);
                f.scale = bound_map(family_, b, cfg_.m_samples, cfg_.n_bound, spec_.gamma, cfg_.vi_tol, mc);
                // Sampling noise can push the estimate slightly below zero.
                for (double& v : f.scale) v = std::max(v, 0.0);
                f.offset.assign(n, 0.0);
                break;
            case Kind::Td:
                f.offset = mean_env(b);
                f.scale.assign(n, 1.0);
                break;
            case Kind::ViTd:
                f.offset = plan(mean_env(b));
                f.scale.assign(n, 1.0);
                break;
            default:
                return f;
        }
        f.out = net_->forward(f.input);
        return f;
    }

    double cell_value(const Features& f, std::size_t x) const { return f.offset[x] + f.scale[x] * f.out[x]; }

    ActionId greedy(StateId x, const std::vector<double>& score) const {
        std::size_t best = 0;
        double best_v = score[family_.successor(x, ActionId{0}).index];
        for (std::size_t a = 1; a < TreasureFamily::kActions; ++a) {
            const double v = score[family_.successor(x, ActionId{a}).index];
            if (v > best_v) {
                best_v = v;
                best = a;
            }
        }
        return ActionId{best};
    }

    EpisodeResult episode(const EnvParams& world, StateId start, EpisodeStreams& s, double eps,
                          ParameterBlock* grads) const {
        const std::size_t n = spec_.cells();
        const bool thompson_per_episode = cfg_.thompson_cadence == "per-episode";
        EpisodeResult res;
        BetaGridBelief b = spec_.prior();
        StateId x = start;
        Features f = features(b, s.mc);
        std::vector<double> thompson_values;
        if (kind_ == Kind::ViThompson && thompson_per_episode) {
            thompson_values = plan(grid_of(sample_env(b, s.act)));
        }
        for (std::size_t t = 0; t < spec_.horizon; ++t) {
            if (t <= 5 && x.index == spec_.map_cell()) res.map_visit = true;

            ActionId a{0};
            if (eps > 0.0 && s.act.uniform() < eps) {
                a = ActionId{s.act.uniform_index(TreasureFamily::kActions)};
            } else {
                std::vector<double> score(n);
                switch (kind_) {
                    case Kind::ViGreedy:
                        score = plan(mean_env(b));
                        break;
                    case Kind::ViThompson:
                        score = thompson_per_episode ? thompson_values : plan(grid_of(sample_env(b, s.act)));
                        break;
                    case Kind::PcrTd:
                        for (std::size_t c = 0; c < n; ++c) score[c] = f.vc[c] + cell_value(f, c);
                        break;
                    default:
                        for (std::size_t c = 0; c < n; ++c) score[c] = cell_value(f, c);
                }
                a = greedy(x, score);
            }

            TreasureStepResult st = treasure_step(family_, world, x, a, b, s.sim);
            res.total += st.reward;
            if (!net_ || (grads == nullptr && t + 1 == spec_.horizon)) {
                b = std::move(st.belief);
                x = st.next;
                continue;
            }
            Features fn = features(st.belief, s.mc);
            if (grads) {
                double lambda = st.reward;
                if (kind_ == Kind::PcrTd) {
                    lambda = lambda_mode_ == LambdaMode::ExactMc
                                 ? st.reward + spec_.gamma * fn.vc[st.next.index] - f.vc[x.index]
                                 : f.vc[st.next.index] - f.vc[x.index];
                }
                const ValueHead now{x.index, f.offset[x.index], f.scale[x.index]};
                const ValueHead next{st.next.index, fn.offset[st.next.index], fn.scale[st.next.index]};
                res.loss += td_loss_and_grad(*net_, lambda, spec_.gamma, f.input, now, fn.input, next, td_mode_, *grads)
                                .loss;
            }
            b = std::move(st.belief);
            x = st.next;
            f = std::move(fn);
        }
        return res;
    }

    const ExperimentConfig& cfg_;
    Kind kind_;
    TreasureSpec spec_;
    TreasureFamily family_;
    LambdaMode lambda_mode_;
    TdMode td_mode_;
    Rng root_;
    std::unique_ptr<Network> net_;
};

}  // namespace

TreasureResult run_treasure_method(const ExperimentConfig& cfg, const std::string& method, std::uint64_t seed) {
    cfg.validate();
    Runner r(cfg, parse_kind(method), seed);
    return r.run(method);
}

MetricsRows run_treasure(const ExperimentConfig& cfg) {
    cfg.validate();
    MetricsRows rows;
    for (const std::string& method : cfg.methods()) {
        for (std::uint64_t seed : cfg.seeds) {
            TreasureResult r = run_treasure_method(cfg, method, seed);
            if (r.checkpoint && !cfg.out_dir.empty()) {
                std::filesystem::create_directories(cfg.out_dir);
                const auto path =
                    std::filesystem::path(cfg.out_dir) / (method + "_seed" + std::to_string(seed) + ".ckpt");
                save_checkpoint(path.string(), *r.checkpoint);
            }
            rows.insert(rows.end(), r.rows.begin(), r.rows.end());
        }
    }
    return rows;
}

}  // namespace pcr
