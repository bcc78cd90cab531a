#include "pcr/kernels/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

#include <vector>

namespace pcr::kernels::avx2 {

bool compiled() { return true; }

namespace {

constexpr std::size_t kWidth = 4;

inline __m256d abs_pd(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

// Lanes [base, base + 4) of the batch.
void solve_group(const CrossBatch& batch, std::size_t base) {
    const GridTopology& topo = *batch.topology;
    const std::size_t cells = topo.cells;
    const std::size_t acts = topo.actions;
    const std::size_t lanes = batch.lanes;
    const __m256d gamma = _mm256_set1_pd(batch.gamma);
    const __m256d tol = _mm256_set1_pd(batch.tol);

    std::vector<__m256d> v(cells, _mm256_setzero_pd());
    std::vector<__m256d> v_new(cells);
    std::vector<__m256d> reward(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        reward[c] = _mm256_loadu_pd(batch.planner_reward + c * lanes + base);
    }

    // Value iteration with per-lane freezing.
    __m256d active = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    std::uint32_t iters[kWidth] = {0, 0, 0, 0};
    alignas(32) double res_out[kWidth] = {0, 0, 0, 0};
    std::size_t it = 0;
    while (it < batch.max_iterations && _mm256_movemask_pd(active) != 0) {
        __m256d res = _mm256_setzero_pd();
        for (std::size_t c = 0; c < cells; ++c) {
            const std::uint32_t* nx = &topo.next[c * acts];
            __m256d m = v[nx[0]];
            for (std::size_t a = 1; a < acts; ++a) {
                m = _mm256_max_pd(m, v[nx[a]]);
            }
            const __m256d vn = _mm256_add_pd(reward[c], _mm256_mul_pd(gamma, m));
            res = _mm256_max_pd(res, abs_pd(_mm256_sub_pd(vn, v[c])));
            v_new[c] = _mm256_blendv_pd(v[c], vn, active);
        }
        v.swap(v_new);
        ++it;
        alignas(32) double res_lane[kWidth];
        _mm256_store_pd(res_lane, res);
        const int act_bits = _mm256_movemask_pd(active);
        for (std::size_t l = 0; l < kWidth; ++l) {
            if (act_bits & (1 << l)) {
                iters[l] = static_cast<std::uint32_t>(it);
                res_out[l] = res_lane[l];
            }
        }
        const __m256d done = _mm256_cmp_pd(res, tol, _CMP_LE_OQ);
        active = _mm256_andnot_pd(done, active);
    }

    for (std::size_t c = 0; c < cells; ++c) {
        _mm256_storeu_pd(batch.planner_value + c * lanes + base, v[c]);
    }
    for (std::size_t l = 0; l < kWidth; ++l) {
        if (batch.vi_iterations) batch.vi_iterations[base + l] = iters[l];
        if (batch.vi_residual) batch.vi_residual[base + l] = res_out[l];
    }

    // Greedy policy: an action must beat the incumbent by more than tol.
    std::vector<std::uint32_t> pol(cells * kWidth);
    for (std::size_t c = 0; c < cells; ++c) {
        const std::uint32_t* nx = &topo.next[c * acts];
        __m256d best = _mm256_add_pd(reward[c], _mm256_mul_pd(gamma, v[nx[0]]));
        __m256d best_a = _mm256_setzero_pd();
        for (std::size_t a = 1; a < acts; ++a) {
            const __m256d q = _mm256_add_pd(reward[c], _mm256_mul_pd(gamma, v[nx[a]]));
            const __m256d gt = _mm256_cmp_pd(q, _mm256_add_pd(best, tol), _CMP_GT_OQ);
            best = _mm256_blendv_pd(best, q, gt);
            best_a = _mm256_blendv_pd(best_a, _mm256_set1_pd(static_cast<double>(a)), gt);
        }
        alignas(32) double idx[kWidth];
        _mm256_store_pd(idx, best_a);
        for (std::size_t l = 0; l < kWidth; ++l) {
            pol[c * kWidth + l] = static_cast<std::uint32_t>(idx[l]);
            if (batch.policy) batch.policy[c * lanes + base + l] = pol[c * kWidth + l];
        }
    }

    if (!batch.world_reward) {
        return;
    }

    // Policy evaluation in the world: gather each lane's successor value.
    std::vector<__m128i> gather_idx(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        int idx[kWidth];
        for (std::size_t l = 0; l < kWidth; ++l) {
            idx[l] = static_cast<int>(topo.next[c * acts + pol[c * kWidth + l]] * kWidth + l);
        }
        gather_idx[c] = _mm_setr_epi32(idx[0], idx[1], idx[2], idx[3]);
        reward[c] = _mm256_loadu_pd(batch.world_reward + c * lanes + base);
    }
    std::fill(v.begin(), v.end(), _mm256_setzero_pd());
    active = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    it = 0;
    for (std::size_t l = 0; l < kWidth; ++l) {
        iters[l] = 0;
        res_out[l] = 0.0;
    }
    while (it < batch.max_iterations && _mm256_movemask_pd(active) != 0) {
        __m256d res = _mm256_setzero_pd();
        const double* flat = reinterpret_cast<const double*>(v.data());
        for (std::size_t c = 0; c < cells; ++c) {
            const __m256d succ = _mm256_i32gather_pd(flat, gather_idx[c], 8);
            const __m256d vn = _mm256_add_pd(reward[c], _mm256_mul_pd(gamma, succ));
            res = _mm256_max_pd(res, abs_pd(_mm256_sub_pd(vn, v[c])));
            v_new[c] = _mm256_blendv_pd(v[c], vn, active);
        }
        v.swap(v_new);
        ++it;
        alignas(32) double res_lane[kWidth];
        _mm256_store_pd(res_lane, res);
        const int act_bits = _mm256_movemask_pd(active);
        for (std::size_t l = 0; l < kWidth; ++l) {
            if (act_bits & (1 << l)) {
                iters[l] = static_cast<std::uint32_t>(it);
                res_out[l] = res_lane[l];
            }
        }
        const __m256d done = _mm256_cmp_pd(res, tol, _CMP_LE_OQ);
        active = _mm256_andnot_pd(done, active);
    }
    for (std::size_t c = 0; c < cells; ++c) {
        _mm256_storeu_pd(batch.cross_value + c * lanes + base, v[c]);
    }
    for (std::size_t l = 0; l < kWidth; ++l) {
        if (batch.eval_iterations) batch.eval_iterations[base + l] = iters[l];
        if (batch.eval_residual) batch.eval_residual[base + l] = res_out[l];
    }
}

}  // namespace

void solve_cross_batch(const CrossBatch& batch) {
    const std::size_t full = batch.lanes / kWidth * kWidth;
    for (std::size_t base = 0; base < full; base += kWidth) {
        solve_group(batch, base);
    }
    if (full < batch.lanes) {
        scalar::solve_cross_lanes(batch, full, batch.lanes);
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kWidth <= n; i += kWidth) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    alignas(32) double lanes[kWidth];
    _mm256_store_pd(lanes, acc);
    double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + kWidth <= n; i += kWidth) {
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void matvec(const double* w, const double* x, const double* bias, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot(w + r * cols, x, cols) + (bias ? bias[r] : 0.0);
    }
}

void matvec_transpose_add(const double* w, const double* dy, double* dx, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (dy[r] != 0.0) {
            axpy(dy[r], w + r * cols, dx, cols);
        }
    }
}

void outer_add(const double* dy, const double* x, double* dw, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (dy[r] != 0.0) {
            axpy(dy[r], x, dw + r * cols, cols);
        }
    }
}

}  // namespace pcr::kernels::avx2

#else

namespace pcr::kernels::avx2 {
bool compiled() { return false; }
void solve_cross_batch(const CrossBatch& batch) { scalar::solve_cross_batch(batch); }
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void matvec(const double* w, const double* x, const double* bias, double* y, std::size_t rows, std::size_t cols) {
    scalar::matvec(w, x, bias, y, rows, cols);
}
void matvec_transpose_add(const double* w, const double* dy, double* dx, std::size_t rows, std::size_t cols) {
    scalar::matvec_transpose_add(w, dy, dx, rows, cols);
}
void outer_add(const double* dy, const double* x, double* dw, std::size_t rows, std::size_t cols) {
    scalar::outer_add(dy, x, dw, rows, cols);
}
}  // namespace pcr::kernels::avx2

#endif
