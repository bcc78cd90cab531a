#include <fstream>
#include <set>
#include <sstream>

#include "pcr/harness.hpp"

namespace pcr {

namespace {

const std::set<std::string> kTreasureMethods{"pcr-td", "td", "vi-td", "vi-thompson", "vi-greedy"};
const std::set<std::string> kTMazeMethods{"pcr-q", "baseline-q"};

template <class T>
T take(const nlohmann::json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("config: bad value for '" + key + "': " + e.what());
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error("config: top level must be an object");
    }
    ExperimentConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "task") c.task = take<std::string>(v, key);
        else if (key == "method") c.method = take<std::string>(v, key);
        else if (key == "size") c.size = take<std::size_t>(v, key);
        else if (key == "epochs") c.epochs = take<std::size_t>(v, key);
        else if (key == "batch") c.batch = take<std::size_t>(v, key);
        else if (key == "seeds") c.seeds = take<std::vector<std::uint64_t>>(v, key);
        else if (key == "eta0") c.eta0 = take<double>(v, key);
        else if (key == "eta_decay") c.eta_decay = take<double>(v, key);
        else if (key == "epsilon") c.epsilon = take<double>(v, key);
        else if (key == "warmup_epochs") c.warmup_epochs = take<std::size_t>(v, key);
        else if (key == "eval_every") c.eval_every = take<std::size_t>(v, key);
        else if (key == "corridor_length") c.corridor_length = take<std::size_t>(v, key);
        else if (key == "m_samples") c.m_samples = take<std::size_t>(v, key);
        else if (key == "n_bound") c.n_bound = take<std::size_t>(v, key);
        else if (key == "n_lambda") c.n_lambda = take<std::size_t>(v, key);
        else if (key == "lambda_mode") c.lambda_mode = take<std::string>(v, key);
        else if (key == "td_mode") c.td_mode = take<std::string>(v, key);
        else if (key == "adam_rate") c.adam_rate = take<double>(v, key);
        else if (key == "squash") c.squash = take<bool>(v, key);
        else if (key == "test_trials") c.test_trials = take<std::size_t>(v, key);
        else if (key == "thompson_cadence") c.thompson_cadence = take<std::string>(v, key);
        else if (key == "vi_tol") c.vi_tol = take<double>(v, key);
        else if (key == "out_dir") c.out_dir = take<std::string>(v, key);
        else throw Error("config: unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j{{"task", task},
                     {"method", method},
                     {"size", size},
                     {"epochs", resolved_epochs()},
                     {"batch", batch},
                     {"seeds", seeds},
                     {"eta0", eta0},
                     {"eta_decay", eta_decay},
                     {"epsilon", resolved_epsilon()},
                     {"warmup_epochs", warmup_epochs},
                     {"eval_every", eval_every},
                     {"corridor_length", corridor_length},
                     {"m_samples", m_samples},
                     {"n_bound", n_bound},
                     {"n_lambda", n_lambda},
                     {"lambda_mode", lambda_mode},
                     {"td_mode", td_mode},
                     {"adam_rate", adam_rate},
                     {"squash", squash},
                     {"test_trials", test_trials},
                     {"thompson_cadence", thompson_cadence},
                     {"vi_tol", vi_tol}};
    if (!out_dir.empty()) j["out_dir"] = out_dir;
    return j;
}

std::vector<std::string> ExperimentConfig::methods() const {
    const auto& all = task == "tmaze" ? kTMazeMethods : kTreasureMethods;
    if (method == "all") {
        // Fixed reporting order.
        if (task == "tmaze") return {"pcr-q", "baseline-q"};
        return {"pcr-td", "td", "vi-td", "vi-thompson", "vi-greedy"};
    }
    std::vector<std::string> out;
    std::stringstream ss(method);
    std::string m;
    while (std::getline(ss, m, ',')) {
        if (!all.count(m)) {
            throw Error("config: method '" + m + "' is not available for task " + task);
        }
        out.push_back(m);
    }
    return out;
}

void ExperimentConfig::validate() const {
    if (task != "tmaze" && task != "treasure") {
        throw Error("config: task must be tmaze or treasure, got '" + task + "'");
    }
    if (methods().empty()) {
        throw Error("config: no methods selected");
    }
    if (task == "treasure") {
        TreasureSpec spec;
        spec.size = size;
        spec.validate();
    } else {
        TMazeSpec spec;
        spec.corridor_length = corridor_length;
        spec.validate();
    }
    if (batch < 1) throw Error("config: batch must be at least 1");
    if (seeds.empty()) throw Error("config: seeds must be nonempty");
    LearningSchedule{eta0, eta_decay, resolved_epsilon(), warmup_epochs}.validate();
    PcrConfig{m_samples, n_bound, parse_lambda_mode(lambda_mode)}.validate();
    PcrConfig{m_samples, n_lambda, parse_lambda_mode(lambda_mode)}.validate();
    parse_td_mode(td_mode);
    if (!(adam_rate > 0.0)) throw Error("config: adam_rate must be positive");
    if (test_trials < 1) throw Error("config: test_trials must be at least 1");
    if (thompson_cadence != "per-step" && thompson_cadence != "per-episode") {
        throw Error("config: thompson_cadence must be per-step or per-episode");
    }
    if (!(vi_tol > 0.0)) throw Error("config: vi_tol must be positive");
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("config: parse error in '" + path + "': " + e.what());
    }
    return ExperimentConfig::from_json(j);
}

}  // namespace pcr
