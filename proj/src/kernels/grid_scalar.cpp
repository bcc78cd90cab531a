#include <algorithm>
#include <cmath>
#include <vector>

#include "pcr/kernels/kernels.hpp"

namespace pcr::kernels::scalar {

void solve_cross_batch(const CrossBatch& batch) { solve_cross_lanes(batch, 0, batch.lanes); }

void solve_cross_lanes(const CrossBatch& batch, std::size_t begin, std::size_t end) {
    const GridTopology& topo = *batch.topology;
    const std::size_t cells = topo.cells;
    const std::size_t acts = topo.actions;
    const std::size_t lanes = batch.lanes;
    const double gamma = batch.gamma;

    std::vector<double> v(cells), v_new(cells);
    std::vector<std::uint32_t> pol(cells);
    for (std::size_t lane = begin; lane < end; ++lane) {
        auto at = [lanes, lane](std::size_t cell) { return cell * lanes + lane; };

        std::fill(v.begin(), v.end(), 0.0);
        std::size_t it = 0;
        double residual = 0.0;
        while (it < batch.max_iterations) {
            residual = 0.0;
            for (std::size_t c = 0; c < cells; ++c) {
                const std::uint32_t* nx = &topo.next[c * acts];
                double m = v[nx[0]];
                for (std::size_t a = 1; a < acts; ++a) {
                    m = std::max(m, v[nx[a]]);
                }
                v_new[c] = batch.planner_reward[at(c)] + gamma * m;
                residual = std::max(residual, std::abs(v_new[c] - v[c]));
            }
            v.swap(v_new);
            ++it;
            if (residual <= batch.tol) {
                break;
            }
        }
        for (std::size_t c = 0; c < cells; ++c) {
            batch.planner_value[at(c)] = v[c];
        }
        if (batch.vi_iterations) batch.vi_iterations[lane] = static_cast<std::uint32_t>(it);
        if (batch.vi_residual) batch.vi_residual[lane] = residual;

        for (std::size_t c = 0; c < cells; ++c) {
            const std::uint32_t* nx = &topo.next[c * acts];
            const double r = batch.planner_reward[at(c)];
            double best = r + gamma * v[nx[0]];
            std::uint32_t best_a = 0;
            for (std::size_t a = 1; a < acts; ++a) {
                const double q = r + gamma * v[nx[a]];
                if (q > best + batch.tol) {
                    best = q;
                    best_a = static_cast<std::uint32_t>(a);
                }
            }
            pol[c] = best_a;
            if (batch.policy) batch.policy[at(c)] = best_a;
        }

        if (!batch.world_reward) {
            continue;
        }
        std::fill(v.begin(), v.end(), 0.0);
        it = 0;
        residual = 0.0;
        while (it < batch.max_iterations) {
            residual = 0.0;
            for (std::size_t c = 0; c < cells; ++c) {
                v_new[c] = batch.world_reward[at(c)] + gamma * v[topo.next[c * acts + pol[c]]];
                residual = std::max(residual, std::abs(v_new[c] - v[c]));
            }
            v.swap(v_new);
            ++it;
            if (residual <= batch.tol) {
                break;
            }
        }
        for (std::size_t c = 0; c < cells; ++c) {
            batch.cross_value[at(c)] = v[c];
        }
        if (batch.eval_iterations) batch.eval_iterations[lane] = static_cast<std::uint32_t>(it);
        if (batch.eval_residual) batch.eval_residual[lane] = residual;
    }
}

}  // namespace pcr::kernels::scalar
