#include "labelstack/csv.hpp"
#include "labelstack/forest.hpp"
#include "labelstack/imputers.hpp"
#include "labelstack/preprocess.hpp"
#include "labelstack/random.hpp"
#include "labelstack/theory.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>

using namespace labelstack;

namespace {

std::pair<DataTable, LabelVector> iris()
{
    const auto path = std::filesystem::path(LABELSTACK_SOURCE_DIR) / "data" / "iris.csv";
    return extract_label(load_csv(path), "class");
}

void fit_forest_bench(benchmark::State& state, Execution exec)
{
    const auto [X, y] = iris();
    ForestParams params;
    params.n_trees = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_forest(X, y, params, 7, exec));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void missforest_bench(benchmark::State& state, Execution exec)
{
    const auto [X, y] = iris();
    const DataTable masked = apply_mcar(X, 0.3, 11).table;
    MissForestParams params;
    params.forest.n_trees = 50;
    params.seed = 3;
    params.exec = exec;
    for (auto _ : state) {
        benchmark::DoNotOptimize(missforest_impute(masked, params));
    }
}

void theorem_batch_bench(benchmark::State& state, Execution exec)
{
    std::vector<theory::TheoremInstance> instances;
    Rng rng(5);
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        instances.push_back(theory::random_instance(5 + rng.below(46), rng));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(theory::evaluate_batch(instances, 1e-8, exec));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(fit_forest_bench, serial, Execution::Serial)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(fit_forest_bench, parallel, Execution::Parallel)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(missforest_bench, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(missforest_bench, parallel, Execution::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(theorem_batch_bench, serial, Execution::Serial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(theorem_batch_bench, parallel, Execution::Parallel)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
