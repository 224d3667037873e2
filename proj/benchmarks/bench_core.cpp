#include <benchmark/benchmark.h>

#include <random>

#include "ccf/model.hpp"
#include "ccf/rng.hpp"
#include "ccf/solver.hpp"

namespace {

using namespace ccf;

Eigen::MatrixXd random_z(Index T, Index m, std::uint64_t seed) {
    auto rng = make_rng(seed, 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd z(T, m);
    for (Index j = 0; j < m; ++j) {
        double prev = 0.0;
        for (Index t = 0; t < T; ++t) {
            prev = 0.4 * prev + gauss(rng);
            z(t, j) = prev;
        }
    }
    return z;
}

struct BenchProblem {
    Eigen::MatrixXd z;
    AlignedMatrix targets;
    LagDesign design;
};

BenchProblem make_bench_problem(Index T, Index m, Index q, Index c, Index k) {
    auto rng = make_rng(42, 2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    BenchProblem bp;
    bp.z = random_z(T, m, 7);
    bp.design = LagDesign{c, k, 1, m};
    Eigen::VectorXd beta(bp.design.p());
    for (Index i = 0; i < beta.size(); ++i) beta(i) = gauss(rng);
    beta.normalize();
    AlignedMatrix lag = build_lag_matrix(bp.z, c);
    Eigen::VectorXd f = lag.values * beta;
    const Index lo = c + k, n = T - 1 - lo;
    Eigen::MatrixXd F(n, k + 1);
    for (Index j = 0; j <= k; ++j) F.col(j) = f.segment(lo - j - c, n);
    Eigen::MatrixXd gamma(q, k + 1);
    for (Index i = 0; i < q; ++i)
        for (Index j = 0; j <= k; ++j) gamma(i, j) = gauss(rng);
    bp.targets.first_time = lo + 1;
    bp.targets.values = F * gamma.transpose();
    for (Index i = 0; i < bp.targets.values.rows(); ++i)
        for (Index j = 0; j < q; ++j) bp.targets.values(i, j) += 0.5 * gauss(rng);
    return bp;
}

void BM_BuildLagMatrix(benchmark::State& state) {
    Eigen::MatrixXd z = random_z(200, 50, 3);
    for (auto _ : state) {
        AlignedMatrix lag = build_lag_matrix(z, state.range(0));
        benchmark::DoNotOptimize(lag.values.data());
    }
}
BENCHMARK(BM_BuildLagMatrix)->Arg(1)->Arg(3);

void BM_ProfiledEval(benchmark::State& state) {
    BenchProblem bp = make_bench_problem(200, 50, 50, state.range(0), 1);
    FitProblem prob = make_fit_problem(bp.z, bp.targets, bp.design,
                                       LossKind::G1, 0.0);
    auto rng = make_rng(9, 9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd beta(prob.p());
    for (Index i = 0; i < beta.size(); ++i) beta(i) = gauss(rng);
    beta.normalize();
    for (auto _ : state) {
        ProfiledEval ev = eval_profiled(beta, prob);
        benchmark::DoNotOptimize(ev.value);
    }
}
BENCHMARK(BM_ProfiledEval)->Arg(1)->Arg(3);

void BM_Gradient(benchmark::State& state) {
    BenchProblem bp = make_bench_problem(200, 50, 50, state.range(0), 1);
    FitProblem prob = make_fit_problem(bp.z, bp.targets, bp.design,
                                       LossKind::G1, 0.0);
    Eigen::VectorXd beta = init_redundancy(prob);
    for (auto _ : state) {
        Eigen::VectorXd g = grad_profiled(beta, prob);
        benchmark::DoNotOptimize(g.data());
    }
}
BENCHMARK(BM_Gradient)->Arg(1)->Arg(3);

void BM_ProximalFit(benchmark::State& state) {
    BenchProblem bp = make_bench_problem(140, 50, 50, state.range(0), 1);
    FitProblem prob = make_fit_problem(bp.z, bp.targets, bp.design,
                                       LossKind::G1, 0.05);
    Eigen::VectorXd init = init_redundancy(prob);
    for (auto _ : state) {
        auto [params, trace] = proximal_fit(prob, init);
        benchmark::DoNotOptimize(params.beta.data());
    }
}
BENCHMARK(BM_ProximalFit)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FixedPointFit(benchmark::State& state) {
    BenchProblem bp = make_bench_problem(140, 50, 50, state.range(0), 1);
    FitProblem prob = make_fit_problem(bp.z, bp.targets, bp.design,
                                       LossKind::G1, 0.0);
    Eigen::VectorXd init = init_redundancy(prob);
    for (auto _ : state) {
        auto [params, trace] = fixed_point_fit_g1(prob, init);
        benchmark::DoNotOptimize(params.beta.data());
    }
}
BENCHMARK(BM_FixedPointFit)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Initializer(benchmark::State& state) {
    BenchProblem bp = make_bench_problem(140, 50, 50, 1, 1);
    FitProblem prob = make_fit_problem(bp.z, bp.targets, bp.design,
                                       LossKind::G1, 0.0);
    for (auto _ : state) {
        Eigen::VectorXd v = init_redundancy(prob);
        benchmark::DoNotOptimize(v.data());
    }
}
BENCHMARK(BM_Initializer)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
