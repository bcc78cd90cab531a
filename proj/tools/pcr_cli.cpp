#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "pcr/harness.hpp"
#include "pcr/kernels/kernels.hpp"

namespace {

struct Flags {
    std::string config;
    std::string method;
    std::optional<std::size_t> size;
    std::optional<std::size_t> epochs;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    double perturb_gamma = 0.0;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--method", f.method, "method name, comma list or 'all'");
    sub->add_option("--size", f.size, "treasure grid side");
    sub->add_option("--epochs", f.epochs, "training epochs");
    sub->add_option("--seeds", f.seeds, "seed list")->delimiter(',');
    sub->add_option("--out-dir", f.out_dir, "output directory");
}

pcr::ExperimentConfig resolve(const Flags& f, const std::string& task) {
    pcr::ExperimentConfig c = f.config.empty() ? pcr::ExperimentConfig{} : pcr::load_config(f.config);
    if (f.config.empty()) c.task = task;
    if (!f.method.empty()) c.method = f.method;
    if (f.size) c.size = *f.size;
    if (f.epochs) c.epochs = *f.epochs;
    if (!f.seeds.empty()) c.seeds = f.seeds;
    if (!f.out_dir.empty()) c.out_dir = f.out_dir;
    c.perturb_gamma = f.perturb_gamma;
    if (c.task != task) {
        throw pcr::Error("config task '" + c.task + "' does not match subcommand '" + task + "'");
    }
    c.validate();
    return c;
}

void write_rows(const pcr::ExperimentConfig& c, const pcr::MetricsRows& rows, const std::string& stem) {
    if (c.out_dir.empty()) {
        std::cout << pcr::format_csv(rows);
        return;
    }
    for (const std::string& p : pcr::emit_outputs(rows, c.out_dir, stem)) std::cerr << "wrote " << p << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Predictive reward cashing experiments"};
    app.require_subcommand(1);
    Flags f;
    bool as_json = false;
    std::size_t instances = 10;
    std::uint64_t grad_seed = 0;

    CLI::App* tmaze = app.add_subcommand("tmaze", "tabular T-maze learning");
    add_common(tmaze, f);
    CLI::App* treasure = app.add_subcommand("treasure", "treasure-map methods");
    add_common(treasure, f);
    CLI::App* oracles = app.add_subcommand("oracles", "recompute every oracle and compare with the library");
    add_common(oracles, f);
    oracles->add_option("--perturb-gamma", f.perturb_gamma)->group("");
    oracles->add_flag("--json", as_json, "print the report as JSON");
    CLI::App* grad = app.add_subcommand("gradcheck", "finite-difference checks of every network");
    grad->add_option("--instances", instances, "random instances per network");
    grad->add_option("--seed", grad_seed, "seed");

    CLI11_PARSE(app, argc, argv);

    try {
        std::cerr << "kernels: " << pcr::kernels::isa_name(pcr::kernels::active_isa()) << "\n";
        if (tmaze->parsed()) {
            const pcr::ExperimentConfig c = resolve(f, "tmaze");
            write_rows(c, pcr::run_tmaze(c), "tmaze");
        } else if (treasure->parsed()) {
            const pcr::ExperimentConfig c = resolve(f, "treasure");
            const pcr::MetricsRows rows = pcr::run_treasure(c);
            for (const pcr::MetricsRow& r : rows) {
                if (r.metric == "test_mean" || r.metric == "test_se" || r.metric == "map_visit_rate") {
                    std::cerr << r.method << " seed " << r.seed << " " << r.metric << " " << r.value << "\n";
                }
            }
            write_rows(c, rows, "treasure_" + std::to_string(c.size));
        } else if (oracles->parsed()) {
            pcr::ExperimentConfig c;
            if (!f.config.empty()) c = pcr::load_config(f.config);
            if (!f.seeds.empty()) c.seeds = f.seeds;
            c.perturb_gamma = f.perturb_gamma;
            const auto entries = pcr::run_oracles(c);
            bool ok = true;
            for (const auto& e : entries) ok = ok && e.pass;
            if (as_json) {
                nlohmann::json j = nlohmann::json::array();
                for (const auto& e : entries) {
                    j.push_back({{"name", e.name},
                                 {"expected", e.expected},
                                 {"actual", e.actual},
                                 {"tolerance", e.tolerance},
                                 {"pass", e.pass}});
                }
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << pcr::format_oracle_report(entries);
            }
            return ok ? 0 : 1;
        } else if (grad->parsed()) {
            bool ok = true;
            for (const auto& g : pcr::run_gradcheck(instances, grad_seed)) {
                const bool pass = g.result.max_normwise_error < 1e-6;
                ok = ok && pass;
                std::printf("%-4s %-14s instance %2zu  normwise %.3e  coordinate-wise %.3e (worst %s) over %zu params\n",
                            pass ? "ok" : "FAIL", g.network.c_str(), g.instance, g.result.max_normwise_error,
                            g.result.max_rel_error, g.result.worst.c_str(), g.result.checked);
            }
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
