#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "signals.hpp"
#include "stemnorm/error.hpp"
#include "stemnorm/panning.hpp"

using namespace stemnorm;

namespace {

double closed_form(double alpha) {
    return 2.0 * alpha * (1.0 - alpha) / (alpha * alpha + (1.0 - alpha) * (1.0 - alpha));
}

}  // namespace

TEST_CASE("bin analysis of amplitude-panned magnitudes", "[panning]") {
    for (double alpha : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        const BinPanning b = analyze_bin(1.0 - alpha, alpha, PanGainEstimate::exact_inverse);
        CHECK(b.psi == Catch::Approx(closed_form(alpha)).margin(1e-12));
        CHECK(b.alpha == Catch::Approx(alpha).margin(1e-9));
        CHECK(b.side == (alpha < 0.5 ? 1 : alpha > 0.5 ? -1 : 0));
    }
    const BinPanning silent = analyze_bin(0.0, 0.0, PanGainEstimate::exact_inverse);
    CHECK(silent.psi == 1.0);
    CHECK(silent.side == 0);
}

TEST_CASE("half-similarity estimate is exact at hard pan and center only", "[panning]") {
    CHECK(alpha_from_similarity(0.0, 1, PanGainEstimate::half_similarity) == Catch::Approx(0.0).margin(1e-12));
    CHECK(alpha_from_similarity(1.0, 0, PanGainEstimate::half_similarity) == Catch::Approx(0.5));
    const double psi = closed_form(0.25);
    CHECK(alpha_from_similarity(psi, 1, PanGainEstimate::exact_inverse) == Catch::Approx(0.25));
    CHECK(alpha_from_similarity(psi, 1, PanGainEstimate::half_similarity) != Catch::Approx(0.25));
}

TEST_CASE("similarity accumulator averages frames", "[panning]") {
    SimilarityAccumulator acc(8);
    acc.add_frame(std::vector<double>(5, 0.4));
    acc.add_frame(std::vector<double>(5, 0.8));
    REQUIRE(acc.frames() == 2);
    for (double v : acc.raw_mean()) {
        CHECK(v == Catch::Approx(0.6));
    }
    SimilarityAccumulator other(8);
    other.add_frame(std::vector<double>(5, 0.0));
    acc.merge(other);
    CHECK(acc.raw_mean()[2] == Catch::Approx(0.4));
    CHECK_THROWS_AS(SimilarityAccumulator(8).finish(PanningConfig{}), DataError);
}

TEST_CASE("mismatched spectrograms are rejected", "[panning]") {
    const std::vector<double> x(4096, 0.1);
    const Spectrogram a = stft(std::span<const double>(x), {1024, 512}, 44100.0);
    const Spectrogram b = stft(std::span<const double>(x), {2048, 1024}, 44100.0);
    CHECK_THROWS_AS(panning_spectrum(a, b), DataError);
}

TEST_CASE("correction weights fade out above the cutoff", "[panning]") {
    const PanningConfig config;
    const std::vector<double> w = correction_weights(config, 44100.0);
    const std::size_t cut = cutoff_bin(config, 44100.0);
    REQUIRE(w.size() == 1025);
    CHECK(cut == 744);
    CHECK(w[cut - 1] == 1.0);
    CHECK(w[cut] < 1.0);
    CHECK(w[cut] > 0.9);
    const std::size_t end = cut + static_cast<std::size_t>(std::ceil(1000.0 * 2048.0 / 44100.0));
    CHECK(w[end] == Catch::Approx(0.0).margin(1e-12));
    CHECK(w.back() == 0.0);
    for (std::size_t k = cut; k + 1 < w.size(); ++k) {
        CHECK(w[k + 1] <= w[k]);
    }
}

TEST_CASE("repanning a frame reaches the target similarity", "[panning]") {
    const PanningConfig config;
    std::vector<double> left{0.8, 0.8, 0.1, 0.6};
    std::vector<double> right{0.2, 0.2, 0.9, 0.4};
    const std::vector<double> target{1.0, 0.6, 0.6, 0.5};
    const std::vector<double> weights(4, 1.0);
    repan_frame(left, right, target, weights, config);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(analyze_bin(left[k], right[k], config.estimate).psi == Catch::Approx(target[k]).margin(1e-9));
    }
    // The dominant side is kept.
    CHECK(left[1] > right[1]);
    CHECK(left[2] < right[2]);
    CHECK(left[3] > right[3]);
}

TEST_CASE("zero-weight bins are untouched and gains are clamped", "[panning]") {
    PanningConfig config;
    std::vector<double> left{1.0, 1.0};
    std::vector<double> right{0.01, 0.01};
    const std::vector<double> target{1.0, 1.0};
    const std::vector<double> weights{1.0, 0.0};
    repan_frame(left, right, target, weights, config);
    CHECK(left[1] == 1.0);
    CHECK(right[1] == 0.01);
    // A 40 dB imbalance cannot be closed with +/- 12 dB per channel.
    CHECK(right[0] / 0.01 <= std::pow(10.0, 12.0 / 20.0) * (1.0 + 1e-12));
    CHECK(left[0] >= std::pow(10.0, -12.0 / 20.0) * (1.0 - 1e-12));
}

TEST_CASE("silent input stays silent", "[panning]") {
    const StereoWaveform silent = StereoWaveform::silence(22050, 44100.0);
    AveragePanning target{std::vector<double>(1025, 0.5), 2048, std::nullopt};
    const StereoWaveform out = repan(silent, target);
    CHECK(out == silent);
}

TEST_CASE("repanning keeps the dominant side of a source", "[panning]") {
    const std::vector<double> src = test::gaussian_noise(44100, 0.1, 12);
    const StereoWaveform w = test::linear_pan(src, 0.2);
    AveragePanning target{std::vector<double>(1025, 0.9), 2048, std::nullopt};
    const StereoWaveform out = repan(w, target);
    double el = 0.0;
    double er = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        el += static_cast<double>(out.left[i]) * out.left[i];
        er += static_cast<double>(out.right[i]) * out.right[i];
    }
    CHECK(el > er);
    CHECK(similarity_deviation(out, target) < similarity_deviation(w, target));
}

TEST_CASE("a centered mono source has similarity 1", "[panning]") {
    const std::vector<double> src = test::gaussian_noise(44100, 0.1, 13);
    const StereoWaveform w = test::linear_pan(src, 0.5);
    AveragePanning centered{std::vector<double>(1025, 1.0), 2048, std::nullopt};
    CHECK(similarity_deviation(w, centered) < 1e-9);
}
