// Microbenchmarks for the per-case hot paths at full desk scale: one user
// case over the 100K item catalogue with the default hidden layer width.

#include <benchmark/benchmark.h>

#include <vector>

#include "lcrbm/model.hpp"
#include "lcrbm/predict.hpp"
#include "lcrbm/rng.hpp"
#include "lcrbm/train.hpp"

using namespace lcrbm;

namespace {

constexpr int kVisibleUnits = 1682;
constexpr int kHiddenUnits = 100;
constexpr int kActiveUnits = 106; // the 100K mean ratings-per-user

ModelParams bench_params(LabelVariant variant) {
    ModelDims d;
    d.visible_units = kVisibleUnits;
    d.hidden_units = kHiddenUnits;
    d.variant = variant;
    if (variant == LabelVariant::item_genre) d.genre_count = 19;

    ModelParams p;
    p.dims = d;
    Rng rng(4242);
    auto fill = [&](std::vector<double>& v, size_t n) {
        v.resize(n);
        for (auto& x : v) x = rng.normal() * 0.01;
    };
    const size_t m = d.visible_units, K = d.rating_levels, F = d.hidden_units;
    fill(p.weights, m * K * F);
    fill(p.vis_bias, m * K);
    fill(p.hid_bias, F);
    if (variant == LabelVariant::item_genre) {
        fill(p.labels.genre_w, static_cast<size_t>(d.genre_count) * F);
        fill(p.labels.genre_bias, d.genre_count);
    }
    return p;
}

TrainingCase bench_case(const ModelDims& d, Rng& rng) {
    TrainingCase c;
    const int stride = d.visible_units / kActiveUnits;
    for (int t = 0; t < kActiveUnits; ++t)
        c.active.push_back({t * stride, static_cast<int32_t>(rng.uniform_int(d.rating_levels))});
    if (d.variant == LabelVariant::item_genre) {
        c.genre.assign(d.genre_count, 0);
        c.genre[3] = 1;
        c.genre[7] = 1;
    }
    return c;
}

void BM_HiddenActivation(benchmark::State& state) {
    const ModelParams p = bench_params(LabelVariant::none);
    Rng rng(7);
    const TrainingCase c = bench_case(p.dims, rng);
    std::vector<double> probs(p.dims.hidden_units);
    for (auto _ : state) {
        hidden_given_visible(p, c, probs);
        benchmark::DoNotOptimize(probs.data());
    }
    state.SetItemsProcessed(state.iterations() * kActiveUnits);
}
BENCHMARK(BM_HiddenActivation);

void BM_GibbsStep(benchmark::State& state) {
    const ModelParams p = bench_params(LabelVariant::item_genre);
    Rng rng(7);
    const TrainingCase c = bench_case(p.dims, rng);
    ChainState chain;
    start_chain(p, c, chain, rng);
    for (auto _ : state) {
        gibbs_step(p, c, chain, rng);
        benchmark::DoNotOptimize(chain.hidden.probs.data());
    }
    state.SetItemsProcessed(state.iterations() * kActiveUnits);
}
BENCHMARK(BM_GibbsStep);

void BM_CdAccumulate(benchmark::State& state) {
    const ModelParams p = bench_params(LabelVariant::item_genre);
    Rng rng(7);
    const TrainingCase c = bench_case(p.dims, rng);
    GradientAccumulator acc = make_accumulator(p);
    ChainState chain;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cd_gradient(p, c, 1, rng, acc, chain));
    }
    state.SetItemsProcessed(state.iterations() * kActiveUnits);
}
BENCHMARK(BM_CdAccumulate);

void BM_Prediction(benchmark::State& state) {
    const ModelParams p = bench_params(LabelVariant::none);
    Rng rng(7);
    const TrainingCase c = bench_case(p.dims, rng);
    const int query = 1; // off the fixture's stride, so never observed
    for (auto _ : state) {
        const Prediction pred = predict(p, c, query);
        benchmark::DoNotOptimize(pred.expected_rating);
    }
}
BENCHMARK(BM_Prediction);

void BM_PredictionSharedScorer(benchmark::State& state) {
    const ModelParams p = bench_params(LabelVariant::none);
    Rng rng(7);
    const TrainingCase c = bench_case(p.dims, rng);
    const CaseScorer scorer(p, c);
    int query = 1;
    for (auto _ : state) {
        const Prediction pred = scorer.predict(query);
        benchmark::DoNotOptimize(pred.expected_rating);
        query = query >= 13 ? 1 : query + 2; // odd units stay off the stride
    }
}
BENCHMARK(BM_PredictionSharedScorer);

} // namespace

BENCHMARK_MAIN();
