#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "cesnet/network.hpp"
#include "cesnet/random.hpp"
#include "cesnet/spectral.hpp"
#include "cesnet/tensor.hpp"

using namespace cesnet;

namespace {

BipartiteNetwork random_network(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> f, a;
    for (std::size_t i = 0; i < rows; ++i) f.push_back("f" + std::to_string(i));
    for (std::size_t j = 0; j < cols; ++j) a.push_back("a" + std::to_string(j));
    Eigen::MatrixXd w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = std::floor(std::exp(8.0 * uniform01(rng)));
    return {f, a, w};
}

void BM_Modularity(benchmark::State& state) {
    auto net = random_network(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(bipartite_modularity(net).q);
}
BENCHMARK(BM_Modularity)->Args({11, 16})->Args({39, 186})->Unit(benchmark::kMillisecond);

void BM_NetworkStats(benchmark::State& state) {
    auto net = random_network(39, 186, 2);
    for (auto _ : state) benchmark::DoNotOptimize(network_stats(net).weighted_nestedness);
}
BENCHMARK(BM_NetworkStats)->Unit(benchmark::kMillisecond);

void BM_Hosvd(benchmark::State& state) {
    Rng rng(3);
    Tensor3 x({11, 16, static_cast<std::size_t>(state.range(0))});
    for (auto& v : x.data()) v = uniform01(rng);
    for (auto _ : state) benchmark::DoNotOptimize(hosvd(x).core.norm());
}
BENCHMARK(BM_Hosvd)->Arg(64)->Arg(365)->Arg(1826)->Unit(benchmark::kMillisecond);

void BM_Cwt(benchmark::State& state) {
    Rng rng(4);
    std::normal_distribution<double> z;
    TimeSeries s{Date(2018, 1, 1), {}};
    for (int i = 0; i < state.range(0); ++i) s.values.push_back(z(rng));
    for (auto _ : state) benchmark::DoNotOptimize(cwt(s).power.sum());
}
BENCHMARK(BM_Cwt)->Arg(365)->Arg(1826)->Unit(benchmark::kMillisecond);

void BM_Coherence(benchmark::State& state) {
    Rng rng(5);
    std::normal_distribution<double> z;
    TimeSeries x{Date(2020, 1, 1), {}}, y{Date(2020, 1, 1), {}};
    for (int i = 0; i < 1096; ++i) {
        x.values.push_back(z(rng));
        y.values.push_back(z(rng));
    }
    for (auto _ : state) benchmark::DoNotOptimize(coherence(x, y).coherence.sum());
}
BENCHMARK(BM_Coherence)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
