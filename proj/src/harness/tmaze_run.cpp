#include "pcr/harness.hpp"

namespace pcr {

MetricsRows run_tmaze(const ExperimentConfig& cfg) {
    cfg.validate();
    TMazeTrainConfig tc;
    tc.maze.corridor_length = cfg.corridor_length;
    tc.schedule = LearningSchedule{cfg.eta0, cfg.eta_decay, cfg.resolved_epsilon(), cfg.warmup_epochs};
    tc.epochs = cfg.resolved_epochs();
    tc.eval_every = cfg.eval_every;
    MetricsRows rows;
    for (const std::string& method : cfg.methods()) {
        const TabularMethod m = method == "pcr-q" ? TabularMethod::Pcr : TabularMethod::Baseline;
        for (std::uint64_t seed : cfg.seeds) {
            TMazeRun run = train_tmaze(m, tc, seed);
            rows.insert(rows.end(), run.rows.begin(), run.rows.end());
        }
    }
    return rows;
}

}  // namespace pcr
