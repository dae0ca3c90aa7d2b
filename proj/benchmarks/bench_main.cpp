// Timings for the hot paths the campaigns are built from.

#include <benchmark/benchmark.h>

#include <random>

#include "czvar/convex_body.hpp"
#include "czvar/cz_decomposition.hpp"
#include "czvar/experiments.hpp"

using namespace czvar;

namespace {

ExperimentConfig config_at(int resolution) {
    ExperimentConfig cfg;
    cfg.resolution = resolution;
    // The finest truncation must stay above two cell diameters.
    if (resolution < 256) cfg.ladder_size = 6;
    return cfg;
}

std::vector<double> random_sequence(std::size_t m) {
    std::mt19937_64 gen(m);
    std::normal_distribution<double> n;
    std::vector<double> a(m);
    for (auto& v : a) v = n(gen);
    return a;
}

void BM_RhoVariationDP(benchmark::State& st) {
    const auto a = random_sequence(std::size_t(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(rho_variation(a, 3.0));
    st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_RhoVariationDP)->RangeMultiplier(2)->Range(8, 256)->Complexity();

void BM_RhoVariationExtrema(benchmark::State& st) {
    const auto a = random_sequence(std::size_t(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(rho_variation_extrema(a, 3.0));
    st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_RhoVariationExtrema)->RangeMultiplier(2)->Range(8, 256)->Complexity();

void BM_VariationField(benchmark::State& st) {
    const ExperimentConfig cfg = config_at(int(st.range(0)));
    const VariationEngine engine(cfg.grid(), cfg.make_kernel(), cfg.variation());
    const auto f = generate_corpus(cfg.grid(), cfg.q0(), cfg.corpus, 1)[1].signal.component(0);
    for (auto _ : st) benchmark::DoNotOptimize(engine.variation_field(f));
    st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_VariationField)->RangeMultiplier(2)->Range(128, 1024)->Complexity()->Unit(benchmark::kMillisecond);

void BM_LocalGrandMaximal(benchmark::State& st) {
    const ExperimentConfig cfg = config_at(int(st.range(0)));
    const VariationEngine engine(cfg.grid(), cfg.make_kernel(), cfg.variation());
    const auto f = generate_corpus(cfg.grid(), cfg.q0(), cfg.corpus, 1)[1].signal.component(0);
    for (auto _ : st) benchmark::DoNotOptimize(engine.local_grand_maximal_field(f, cfg.q0()));
}
BENCHMARK(BM_LocalGrandMaximal)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CZDecompose(benchmark::State& st) {
    const ExperimentConfig cfg = config_at(int(st.range(0)));
    const auto f = generate_corpus(cfg.grid(), cfg.q0(), cfg.corpus, 1)[2].signal.component(0);
    const double lambda = 4 * f.l1_norm() / cfg.grid().domain().side;
    for (auto _ : st) benchmark::DoNotOptimize(cz_decompose(f, lambda));
}
BENCHMARK(BM_CZDecompose)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMicrosecond);

void BM_SparseFamily(benchmark::State& st) {
    const ExperimentConfig cfg = config_at(int(st.range(0)));
    const VariationEngine engine(cfg.grid(), cfg.make_kernel(), cfg.variation());
    const auto f = generate_corpus(cfg.grid(), cfg.q0(), cfg.corpus, 1)[2].signal;
    for (auto _ : st) benchmark::DoNotOptimize(build_sparse_family(engine, f, cfg.q0(), cfg.sparse));
}
BENCHMARK(BM_SparseFamily)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_JohnEllipsoid(benchmark::State& st) {
    const int n = int(st.range(0));
    std::mt19937_64 gen(7);
    std::normal_distribution<double> nd;
    std::vector<Vec> gens(std::size_t(st.range(1)), Vec(n));
    for (auto& g : gens)
        for (int k = 0; k < n; ++k) g[k] = nd(gen);
    const Zonotope z(n, gens);
    for (auto _ : st) benchmark::DoNotOptimize(john_ellipsoid(z));
}
BENCHMARK(BM_JohnEllipsoid)->Args({2, 8})->Args({2, 64})->Args({3, 8})->Args({3, 32})
    ->Unit(benchmark::kMicrosecond);

void BM_ApConstant(benchmark::State& st) {
    const ExperimentConfig cfg = config_at(int(st.range(0)));
    const auto w = MatrixWeight::rotated_diag(cfg.grid(), {0.5, -0.5}, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(ap_constant(w, 2.0));
}
BENCHMARK(BM_ApConstant)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
