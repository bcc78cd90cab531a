#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcr/approx.hpp"
#include "pcr/metrics.hpp"
#include "pcr/pcr_core.hpp"
#include "pcr/tabular.hpp"
#include "pcr/tasks.hpp"

namespace pcr {

struct ExperimentConfig {
    std::string task = "treasure";  // tmaze | treasure
    std::string method = "all";
    std::size_t size = 3;
    std::optional<std::size_t> epochs;  // default 5000 (tmaze) or 2000 (treasure)
    std::size_t batch = 10;
    std::vector<std::uint64_t> seeds{0};

    double eta0 = 0.01;
    double eta_decay = 0.001;
    std::optional<double> epsilon;  // default 0.5 (tmaze) or 0.1 (treasure)
    std::size_t warmup_epochs = 100;
    std::size_t eval_every = 1;
    std::size_t corridor_length = 5;

    std::size_t m_samples = 1;
    std::size_t n_bound = 40;
    std::size_t n_lambda = 80;
    std::string lambda_mode = "exact-mc";
    std::string td_mode = "semi-gradient";
    double adam_rate = 1e-3;
    bool squash = true;
    std::size_t test_trials = 20;
    std::string thompson_cadence = "per-step";  // per-step | per-episode
    double vi_tol = 1e-6;

    std::string out_dir;

    /// Added to the discount used by library calls in the oracle report only.
    double perturb_gamma = 0.0;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;

    std::size_t resolved_epochs() const { return epochs.value_or(task == "tmaze" ? 5000 : 2000); }
    double resolved_epsilon() const { return epsilon.value_or(task == "tmaze" ? 0.5 : 0.1); }
    std::vector<std::string> methods() const;
};

ExperimentConfig load_config(const std::string& path);

// ---------------------------------------------------------------- outputs

std::string format_double(double v);
std::string format_csv(const MetricsRows& rows);
MetricsRows parse_csv(const std::string& text);

struct SummaryRow {
    std::string method;
    std::string metric;
    std::size_t epoch = 0;
    double median = 0.0;
    double mad = 0.0;
    std::size_t count = 0;
};

struct RunSummary {
    std::vector<SummaryRow> curves;
};

double median(std::vector<double> v);
/// Median absolute deviation from the median.
double median_abs_deviation(const std::vector<double>& v);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};
MeanSe mean_and_se(const std::vector<double>& v);

RunSummary summarize(const MetricsRows& rows);

/// Median line, MAD band and one transparent line per seed for one (method, metric).
std::string render_svg(const MetricsRows& rows, const std::string& method, const std::string& metric);

/// Writes <stem>.csv, <stem>_summary.csv and one SVG per per-epoch (method, metric) curve.
std::vector<std::string> emit_outputs(const MetricsRows& rows, const std::string& out_dir, const std::string& stem);

// ---------------------------------------------------------------- runners

struct TreasureResult {
    MetricsRows rows;
    double test_mean = 0.0;
    double test_se = 0.0;
    double map_visit_rate = 0.0;
    std::size_t best_epoch = 0;
    std::optional<Checkpoint> checkpoint;
};

/// One method and seed: training (network methods), best-epoch selection, test.
TreasureResult run_treasure_method(const ExperimentConfig& cfg, const std::string& method, std::uint64_t seed);

/// Every configured method and seed; checkpoints go to out_dir when set.
MetricsRows run_treasure(const ExperimentConfig& cfg);

MetricsRows run_tmaze(const ExperimentConfig& cfg);

struct OracleEntry {
    std::string name;
    double expected = 0.0;
    double actual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

std::vector<OracleEntry> run_oracles(const ExperimentConfig& cfg);
std::string format_oracle_report(const std::vector<OracleEntry>& entries);

struct GradCheckEntry {
    std::string network;
    std::size_t instance = 0;
    GradCheckResult result;
};

std::vector<GradCheckEntry> run_gradcheck(std::size_t instances, std::uint64_t seed);

}  // namespace pcr
