#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "signals.hpp"
#include "stemnorm/error.hpp"
#include "stemnorm/loudness.hpp"

using namespace stemnorm;

namespace {

// Published 48 kHz K-weighting coefficients.
constexpr double kShelfB[3] = {1.53512485958697, -2.69169618940638, 1.19839281085285};
constexpr double kShelfA[3] = {1.0, -1.69065929318241, 0.73248077421585};
constexpr double kHighpassB[3] = {1.0, -2.0, 1.0};
constexpr double kHighpassA[3] = {1.0, -1.99004745483398, 0.99007225036621};

// Straightforward gated loudness at 48 kHz, written from the recommendation.
std::optional<double> oracle_loudness(const StereoWaveform& w) {
    const auto kw = [](const std::vector<float>& ch) {
        std::vector<double> y(ch.size());
        double s1 = 0, s2 = 0, sy1 = 0, sy2 = 0, h1 = 0, h2 = 0, hy1 = 0, hy2 = 0;
        for (std::size_t i = 0; i < ch.size(); ++i) {
            const double s = kShelfB[0] * ch[i] + kShelfB[1] * s1 + kShelfB[2] * s2 - kShelfA[1] * sy1 - kShelfA[2] * sy2;
            s2 = s1;
            s1 = ch[i];
            sy2 = sy1;
            sy1 = s;
            const double h = kHighpassB[0] * s + kHighpassB[1] * h1 + kHighpassB[2] * h2 - kHighpassA[1] * hy1 - kHighpassA[2] * hy2;
            h2 = h1;
            h1 = s;
            hy2 = hy1;
            hy1 = h;
            y[i] = h;
        }
        return y;
    };
    const std::vector<double> l = kw(w.left);
    const std::vector<double> r = kw(w.right);
    const std::size_t block = 19200;  // 400 ms
    const std::size_t step = 4800;    // 75 % overlap
    std::vector<double> powers;
    for (std::size_t start = 0; start + block <= l.size(); start += step) {
        double sl = 0.0, sr = 0.0;
        for (std::size_t i = start; i < start + block; ++i) {
            sl += l[i] * l[i];
            sr += r[i] * r[i];
        }
        powers.push_back((sl + sr) / static_cast<double>(block));
    }
    const auto lufs = [](double p) { return -0.691 + 10.0 * std::log10(p); };
    std::vector<double> abs_gated;
    for (double p : powers) {
        if (lufs(p) > -70.0) {
            abs_gated.push_back(p);
        }
    }
    if (abs_gated.empty()) {
        return std::nullopt;
    }
    const double mean = std::accumulate(abs_gated.begin(), abs_gated.end(), 0.0) / static_cast<double>(abs_gated.size());
    const double rel = lufs(mean) - 10.0;
    double sum = 0.0;
    std::size_t n = 0;
    for (double p : abs_gated) {
        if (lufs(p) > rel) {
            sum += p;
            ++n;
        }
    }
    return lufs(sum / static_cast<double>(n));
}

// Noise whose level jumps between segments, so both gates matter.
StereoWaveform stepped_noise(double rate) {
    StereoWaveform w = test::white_noise(12.0, 1.0, 77, rate);
    const double levels[] = {0.3, 0.01, 0.0001, 0.5, 0.003, 0.2};
    const std::size_t seg = w.size() / 6;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double g = levels[std::min<std::size_t>(i / seg, 5)];
        w.left[i] = static_cast<float>(w.left[i] * g);
        w.right[i] = static_cast<float>(w.right[i] * g * 0.5);
    }
    return w;
}

}  // namespace

TEST_CASE("derived K-weighting matches the published 48 kHz coefficients", "[loudness]") {
    const KWeighting k = k_weighting(48000.0);
    CHECK(k.shelf.b0 == Catch::Approx(kShelfB[0]).margin(1e-6));
    CHECK(k.shelf.b1 == Catch::Approx(kShelfB[1]).margin(1e-6));
    CHECK(k.shelf.b2 == Catch::Approx(kShelfB[2]).margin(1e-6));
    CHECK(k.shelf.a1 == Catch::Approx(kShelfA[1]).margin(1e-6));
    CHECK(k.shelf.a2 == Catch::Approx(kShelfA[2]).margin(1e-6));
    CHECK(k.highpass.a1 == Catch::Approx(kHighpassA[1]).margin(1e-6));
    CHECK(k.highpass.a2 == Catch::Approx(kHighpassA[2]).margin(1e-6));
    // The shelf lifts high frequencies by about 4 dB.
    CHECK(20.0 * std::log10(std::abs(k.shelf.response(20000.0, 48000.0))) == Catch::Approx(4.0).margin(0.1));
}

TEST_CASE("integrated loudness agrees with an independent gated oracle", "[loudness]") {
    const StereoWaveform w = stepped_noise(48000.0);
    const auto expected = oracle_loudness(w);
    REQUIRE(expected);
    const LoudnessStats got = integrated_loudness(w);
    REQUIRE(got.integrated_lufs);
    CHECK(*got.integrated_lufs == Catch::Approx(*expected).margin(1e-3));
    CHECK(got.gated_block_count > 0);
}

TEST_CASE("gain shifts loudness by the same amount", "[loudness]") {
    const StereoWaveform w = stepped_noise(44100.0);
    const double base = *integrated_loudness(w).integrated_lufs;
    for (double g : {-12.0, -3.0, 6.0}) {
        const double shifted = *integrated_loudness(apply_gain(w, std::pow(10.0, g / 20.0))).integrated_lufs;
        CHECK(shifted - base == Catch::Approx(g).margin(1e-3));
    }
}

TEST_CASE("silence and short input", "[loudness]") {
    const LoudnessStats s = integrated_loudness(StereoWaveform::silence(44100, 44100.0));
    CHECK(s.silent());
    CHECK_THROWS_AS(integrated_loudness(StereoWaveform::silence(1000, 44100.0)), DataError);

    const LoudnessNormalized n = normalize_loudness(StereoWaveform::silence(44100, 44100.0), -20.0);
    CHECK(n.silent);
    CHECK(n.gain_db == 0.0);
}

TEST_CASE("normalization reaches the target and refuses excessive boost", "[loudness]") {
    const StereoWaveform w = stepped_noise(44100.0);
    const LoudnessNormalized n = normalize_loudness(w, -23.0);
    CHECK(*integrated_loudness(n.audio).integrated_lufs == Catch::Approx(-23.0).margin(0.01));
    const StereoWaveform quiet = test::white_noise(2.0, 1e-3, 5);  // about -62 LUFS
    CHECK_THROWS_AS(normalize_loudness(quiet, -10.0, 20.0), DataError);
}

TEST_CASE("average loudness skips silent stems", "[loudness]") {
    std::vector<LoudnessStats> stats{{-20.0, 10}, {std::nullopt, 0}, {-30.0, 10}};
    CHECK(average_stem_loudness(stats, StemType::bass) == Catch::Approx(-25.0));
    std::vector<LoudnessStats> none{{std::nullopt, 0}};
    CHECK_THROWS_WITH(average_stem_loudness(none, StemType::bass),
                      Catch::Matchers::ContainsSubstring("no measurable stems for type bass"));
}
