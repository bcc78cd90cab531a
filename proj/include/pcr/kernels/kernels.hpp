#pragma once

// Data-parallel inner loops: batched grid dynamic programming and small dense
// linear algebra. Each kernel has a scalar reference and an AVX2 variant; the
// active variant is chosen at runtime from CPU features.
//
// Grid kernels are bit-identical across variants (no FMA contraction, same
// operation order per lane). Dense kernels agree to rounding only.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pcr::kernels {

enum class Isa { Scalar, Avx2 };

/// Best ISA supported by this CPU and build. PCR_FORCE_SCALAR=1 forces Scalar.
Isa detect_isa();
Isa active_isa();
void set_active_isa(Isa isa);
bool isa_available(Isa isa);
const char* isa_name(Isa isa);

/// Deterministic successor table of a grid world: next[cell * actions + a].
struct GridTopology {
    std::size_t cells = 0;
    std::size_t actions = 0;
    std::vector<std::uint32_t> next;
};

/// Batched infinite-horizon cross-value solve over `lanes` independent
/// (planner, world) reward grids sharing one topology. Reward and value arrays
/// are lane-innermost: element (cell, lane) lives at cell * lanes + lane.
///
/// Per lane: value iteration on the planner rewards until the sup-norm change
/// is <= tol, greedy policy extraction (a later action replaces the incumbent
/// only when better by more than tol), then iterative evaluation of that policy
/// on the world rewards to the same tol.
/// Each lane stops at its own iteration count, so a lane's result does not
/// depend on the rest of the batch.
struct CrossBatch {
    const GridTopology* topology = nullptr;
    double gamma = 0.0;
    double tol = 0.0;
    std::size_t max_iterations = 0;
    std::size_t lanes = 0;
    const double* planner_reward = nullptr;
    const double* world_reward = nullptr;  // nullptr: skip policy evaluation
    double* planner_value = nullptr;       // cells * lanes
    double* cross_value = nullptr;         // cells * lanes (when world_reward set)
    std::uint32_t* policy = nullptr;       // cells * lanes, optional
    std::uint32_t* vi_iterations = nullptr;    // lanes, optional
    std::uint32_t* eval_iterations = nullptr;  // lanes, optional
    double* vi_residual = nullptr;             // lanes, optional
    double* eval_residual = nullptr;           // lanes, optional
};

void solve_cross_batch(const CrossBatch& batch);

/// y = W x + bias, W row-major rows x cols. bias may be nullptr.
void matvec(const double* w, const double* x, const double* bias, double* y, std::size_t rows, std::size_t cols);
/// dx += W^T dy.
void matvec_transpose_add(const double* w, const double* dy, double* dx, std::size_t rows, std::size_t cols);
/// dW += dy x^T.
void outer_add(const double* dy, const double* x, double* dw, std::size_t rows, std::size_t cols);
double dot(const double* a, const double* b, std::size_t n);
/// y += alpha x.
void axpy(double alpha, const double* x, double* y, std::size_t n);

namespace scalar {
void solve_cross_batch(const CrossBatch& batch);
/// Solves lanes [begin, end) only.
void solve_cross_lanes(const CrossBatch& batch, std::size_t begin, std::size_t end);
void matvec(const double* w, const double* x, const double* bias, double* y, std::size_t rows, std::size_t cols);
void matvec_transpose_add(const double* w, const double* dy, double* dx, std::size_t rows, std::size_t cols);
void outer_add(const double* dy, const double* x, double* dw, std::size_t rows, std::size_t cols);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool compiled();
void solve_cross_batch(const CrossBatch& batch);
void matvec(const double* w, const double* x, const double* bias, double* y, std::size_t rows, std::size_t cols);
void matvec_transpose_add(const double* w, const double* dy, double* dx, std::size_t rows, std::size_t cols);
void outer_add(const double* dy, const double* x, double* dw, std::size_t rows, std::size_t cols);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace pcr::kernels
