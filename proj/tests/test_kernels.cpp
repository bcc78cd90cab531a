#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "pcr/kernels/kernels.hpp"
#include "pcr/rng.hpp"
#include "pcr/tasks.hpp"

using namespace pcr;
using namespace pcr::kernels;

namespace {

struct BatchData {
    std::size_t lanes;
    std::vector<double> planner, world, pv, cv, vres, eres;
    std::vector<std::uint32_t> policy, vit, eit;
};

BatchData make(const GridTopology& topo, std::size_t lanes, std::uint64_t seed) {
    BatchData d;
    d.lanes = lanes;
    Rng rng(seed);
    d.planner.resize(topo.cells * lanes);
    d.world.resize(topo.cells * lanes);
    for (double& v : d.planner) v = rng.beta(0.1, 1.0);
    for (double& v : d.world) v = rng.beta(0.1, 1.0);
    d.pv.assign(topo.cells * lanes, 0.0);
    d.cv.assign(topo.cells * lanes, 0.0);
    d.policy.assign(topo.cells * lanes, 0);
    d.vit.assign(lanes, 0);
    d.eit.assign(lanes, 0);
    d.vres.assign(lanes, 0.0);
    d.eres.assign(lanes, 0.0);
    return d;
}

CrossBatch view(const GridTopology& topo, BatchData& d) {
    CrossBatch b;
    b.topology = &topo;
    b.gamma = 0.96;
    b.tol = 1e-6;
    b.max_iterations = 100000;
    b.lanes = d.lanes;
    b.planner_reward = d.planner.data();
    b.world_reward = d.world.data();
    b.planner_value = d.pv.data();
    b.cross_value = d.cv.data();
    b.policy = d.policy.data();
    b.vi_iterations = d.vit.data();
    b.eval_iterations = d.eit.data();
    b.vi_residual = d.vres.data();
    b.eval_residual = d.eres.data();
    return b;
}

void expect_identical(const BatchData& a, const BatchData& b) {
    EXPECT_EQ(a.pv, b.pv);
    EXPECT_EQ(a.cv, b.cv);
    EXPECT_EQ(a.policy, b.policy);
    EXPECT_EQ(a.vit, b.vit);
    EXPECT_EQ(a.eit, b.eit);
    EXPECT_EQ(a.vres, b.vres);
    EXPECT_EQ(a.eres, b.eres);
}

}  // namespace

TEST(Dispatch, NamesAndForcing) {
    EXPECT_STREQ(isa_name(Isa::Scalar), "scalar");
    EXPECT_STREQ(isa_name(Isa::Avx2), "avx2");
    EXPECT_TRUE(isa_available(Isa::Scalar));
    const Isa before = active_isa();
    setenv("PCR_FORCE_SCALAR", "1", 1);
    EXPECT_EQ(detect_isa(), Isa::Scalar);
    setenv("PCR_FORCE_SCALAR", "0", 1);
    EXPECT_EQ(detect_isa(), isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar);
    unsetenv("PCR_FORCE_SCALAR");
    set_active_isa(Isa::Scalar);
    EXPECT_EQ(active_isa(), Isa::Scalar);
    set_active_isa(before);
}

TEST(GridKernel, Avx2BitIdenticalToScalar) {
    if (!isa_available(Isa::Avx2)) GTEST_SKIP() << "no avx2 on this machine";
    for (std::size_t size : {3u, 5u, 7u}) {
        TreasureSpec s;
        s.size = size;
        const TreasureFamily f(s);
        const GridTopology& topo = *f.grid_topology();
        for (std::size_t lanes : {1u, 3u, 4u, 7u, 16u, 37u}) {
            BatchData a = make(topo, lanes, size * 100 + lanes), b = a;
            scalar::solve_cross_batch(view(topo, a));
            avx2::solve_cross_batch(view(topo, b));
            expect_identical(a, b);
        }
    }
}

TEST(GridKernel, LaneResultIndependentOfBatch) {
    const TreasureFamily f;
    const GridTopology& topo = *f.grid_topology();
    BatchData all = make(topo, 9, 5);
    solve_cross_batch(view(topo, all));
    for (std::size_t lane = 0; lane < 9; ++lane) {
        BatchData one = make(topo, 1, 0);
        for (std::size_t c = 0; c < topo.cells; ++c) {
            one.planner[c] = all.planner[c * 9 + lane];
            one.world[c] = all.world[c * 9 + lane];
        }
        solve_cross_batch(view(topo, one));
        for (std::size_t c = 0; c < topo.cells; ++c) {
            EXPECT_EQ(one.pv[c], all.pv[c * 9 + lane]);
            EXPECT_EQ(one.cv[c], all.cv[c * 9 + lane]);
        }
        EXPECT_EQ(one.vit[0], all.vit[lane]);
    }
}

TEST(GridKernel, ConvergesAndCrossNeverExceedsOwnValue) {
    const TreasureFamily f;
    const GridTopology& topo = *f.grid_topology();
    BatchData d = make(topo, 8, 6);
    d.world = d.planner;
    solve_cross_batch(view(topo, d));
    for (std::size_t lane = 0; lane < 8; ++lane) {
        EXPECT_LE(d.vres[lane], 1e-6);
        EXPECT_LE(d.eres[lane], 1e-6);
    }
    // Evaluating the planner's own greedy policy reproduces its values.
    for (std::size_t i = 0; i < d.pv.size(); ++i) EXPECT_NEAR(d.cv[i], d.pv[i], 1e-4);
}

TEST(GridKernel, PlannerOnlyMode) {
    const TreasureFamily f;
    const GridTopology& topo = *f.grid_topology();
    BatchData d = make(topo, 2, 7);
    CrossBatch b = view(topo, d);
    b.world_reward = nullptr;
    b.cross_value = nullptr;
    b.eval_iterations = nullptr;
    b.eval_residual = nullptr;
    solve_cross_batch(b);
    for (double v : d.pv) EXPECT_GE(v, 0.0);
    EXPECT_GT(d.vit[0], 0u);
}

TEST(DenseKernels, Avx2AgreesToRounding) {
    if (!isa_available(Isa::Avx2)) GTEST_SKIP() << "no avx2 on this machine";
    Rng rng(9);
    for (std::size_t rows : {1u, 5u, 36u, 100u}) {
        for (std::size_t cols : {1u, 3u, 18u, 50u, 101u}) {
            std::vector<double> w(rows * cols), x(cols), bias(rows), dy(rows);
            for (double& v : w) v = rng.uniform() - 0.5;
            for (double& v : x) v = rng.uniform() - 0.5;
            for (double& v : bias) v = rng.uniform() - 0.5;
            for (double& v : dy) v = rng.uniform() - 0.5;
            const double tol = 1e-13 * static_cast<double>(cols + rows);

            std::vector<double> y1(rows), y2(rows);
            scalar::matvec(w.data(), x.data(), bias.data(), y1.data(), rows, cols);
            avx2::matvec(w.data(), x.data(), bias.data(), y2.data(), rows, cols);
            for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(y1[i], y2[i], tol);
            scalar::matvec(w.data(), x.data(), nullptr, y1.data(), rows, cols);
            avx2::matvec(w.data(), x.data(), nullptr, y2.data(), rows, cols);
            for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(y1[i], y2[i], tol);

            std::vector<double> dx1(cols, 0.25), dx2(cols, 0.25);
            scalar::matvec_transpose_add(w.data(), dy.data(), dx1.data(), rows, cols);
            avx2::matvec_transpose_add(w.data(), dy.data(), dx2.data(), rows, cols);
            for (std::size_t j = 0; j < cols; ++j) EXPECT_NEAR(dx1[j], dx2[j], tol);

            std::vector<double> dw1(w), dw2(w);
            scalar::outer_add(dy.data(), x.data(), dw1.data(), rows, cols);
            avx2::outer_add(dy.data(), x.data(), dw2.data(), rows, cols);
            for (std::size_t k = 0; k < w.size(); ++k) EXPECT_NEAR(dw1[k], dw2[k], 1e-15);

            EXPECT_NEAR(scalar::dot(w.data(), w.data(), w.size()), avx2::dot(w.data(), w.data(), w.size()),
                        1e-13 * static_cast<double>(w.size()));
            std::vector<double> a1(x), a2(x);
            scalar::axpy(0.3, bias.data(), a1.data(), std::min(rows, cols));
            avx2::axpy(0.3, bias.data(), a2.data(), std::min(rows, cols));
            for (std::size_t j = 0; j < cols; ++j) EXPECT_NEAR(a1[j], a2[j], 1e-15);
        }
    }
}

TEST(DenseKernels, ScalarReferenceValues) {
    const double w[] = {1, 2, 3, 4, 5, 6};
    const double x[] = {1, 0, -1};
    const double bias[] = {0.5, -0.5};
    double y[2];
    scalar::matvec(w, x, bias, y, 2, 3);
    EXPECT_EQ(y[0], -1.5);
    EXPECT_EQ(y[1], -2.5);
    double dx[3] = {0, 0, 0};
    const double dy[] = {1, 1};
    scalar::matvec_transpose_add(w, dy, dx, 2, 3);
    EXPECT_EQ(dx[0], 5);
    EXPECT_EQ(dx[2], 9);
    EXPECT_EQ(scalar::dot(w, w, 6), 91);
}
