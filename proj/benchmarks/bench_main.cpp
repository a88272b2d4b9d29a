#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "stemnorm/dynamics.hpp"
#include "stemnorm/eq.hpp"
#include "stemnorm/evaluation.hpp"
#include "stemnorm/loudness.hpp"
#include "stemnorm/panning.hpp"
#include "stemnorm/stft.hpp"

using namespace stemnorm;

namespace {

StereoWaveform noise(double seconds, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-0.3F, 0.3F);
    const auto n = static_cast<std::size_t>(seconds * kDefaultSampleRate);
    std::vector<float> l(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
        l[i] = dist(rng);
        r[i] = dist(rng);
    }
    return {std::move(l), std::move(r), kDefaultSampleRate};
}

constexpr double kSeconds = 30.0;

}  // namespace

static void BM_StftRoundTrip(benchmark::State& state) {
    const StereoWaveform w = noise(kSeconds, 1);
    const StftParams params{static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0)) / 4};
    for (auto _ : state) {
        benchmark::DoNotOptimize(istft(stft(std::span<const float>(w.left), params, w.sample_rate)));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * w.size()));
}
BENCHMARK(BM_StftRoundTrip)->Arg(2048)->Arg(65536)->Unit(benchmark::kMillisecond);

static void BM_IntegratedLoudness(benchmark::State& state) {
    const StereoWaveform w = noise(kSeconds, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrated_loudness(w));
    }
}
BENCHMARK(BM_IntegratedLoudness)->Unit(benchmark::kMillisecond);

static void BM_MatchEq(benchmark::State& state) {
    const StereoWaveform w = noise(kSeconds, 3);
    const AverageSpectrum target = stem_mean_spectrum(noise(kSeconds, 4));
    for (auto _ : state) {
        benchmark::DoNotOptimize(match_eq(w, target));
    }
}
BENCHMARK(BM_MatchEq)->Unit(benchmark::kMillisecond);

static void BM_Repan(benchmark::State& state) {
    const StereoWaveform w = noise(kSeconds, 5);
    const AveragePanning target{std::vector<double>(1025, 0.8), 2048, std::nullopt};
    for (auto _ : state) {
        benchmark::DoNotOptimize(repan(w, target));
    }
}
BENCHMARK(BM_Repan)->Unit(benchmark::kMillisecond);

static void BM_DetectOnsets(benchmark::State& state) {
    const StereoWaveform w = noise(kSeconds, 6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect_onsets(w));
    }
}
BENCHMARK(BM_DetectOnsets)->Unit(benchmark::kMillisecond);

static void BM_MixFeatures(benchmark::State& state) {
    const StereoWaveform w = noise(kSeconds, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mix_features(w));
    }
}
BENCHMARK(BM_MixFeatures)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
