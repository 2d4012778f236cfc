#include <benchmark/benchmark.h>

#include <random>

#include "mongehj/hamiltonian.hpp"
#include "mongehj/semigroup_solver.hpp"

using namespace mongehj;

namespace {

SolveConfig grid(double h) {
    SolveConfig c;
    c.h = c.dt = h;
    return c;
}

} // namespace

static void BM_SolveEikonalSegment(benchmark::State& state) {
    const Problem p = eikonal_segment_problem();
    const double h = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve(p, grid(h)));
}
BENCHMARK(BM_SolveEikonalSegment)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_SolvePowerSegment(benchmark::State& state) {
    Problem p = power_segment_problem();
    p.route = Route::General;
    const double h = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve(p, grid(h)));
}
BENCHMARK(BM_SolvePowerSegment)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_SingleStep(benchmark::State& state) {
    Problem p = power_segment_problem();
    p.route = Route::General;
    const auto g = p.graph;
    const Mesh mesh(*g, 0.005);
    const StepOperator op(p, mesh, 0.005, 4.0, 32);
    std::vector<double> prev;
    for (const Point& x : mesh.points()) prev.push_back(p.u0(x));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(op.apply(mesh.point(static_cast<int>(i % prev.size())), 0.5, prev));
        ++i;
    }
}
BENCHMARK(BM_SingleStep);

static void BM_StarDistances(benchmark::State& state) {
    const MetricGraph g = MetricGraph::star({1.0, 0.7, 1.3, 0.4, 2.0});
    std::mt19937_64 rng(1);
    std::vector<Point> pts;
    for (int k = 0; k < 256; ++k)
        pts.push_back(g.point(static_cast<int>(rng() % 5), std::uniform_real_distribution<double>(0.0, 0.4)(rng)));
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(g.distance(pts[k % 256], pts[(k * 7 + 3) % 256]));
        ++k;
    }
}
BENCHMARK(BM_StarDistances);

static void BM_LegendrePower(benchmark::State& state) {
    const MetricGraph g = MetricGraph::segment(1.0);
    const HamiltonianSpec s = HamiltonianSpec::power(ScalarFunction::constant(1.0), 1.5, ScalarFunction::constant(0.0), 1.0);
    const Point x = g.point(0, 0.5);
    double q = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(numeric_legendre_L(s, x, 0.0, q));
        q = q > 10.0 ? 0.0 : q + 0.37;
    }
}
BENCHMARK(BM_LegendrePower);

BENCHMARK_MAIN();
