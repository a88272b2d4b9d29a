#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "signals.hpp"
#include "stemnorm/dynamics.hpp"
#include "stemnorm/error.hpp"
#include "stemnorm/levels.hpp"
#include "stemnorm/stft.hpp"

using namespace stemnorm;

namespace {

// Single-sample clicks of the given dB levels, one every 0.5 s starting at 0.25 s.
StereoWaveform clicks_at(const std::vector<double>& levels_db) {
    const double rate = kDefaultSampleRate;
    StereoWaveform w = StereoWaveform::silence(static_cast<std::size_t>(rate * (0.5 * levels_db.size() + 0.5)), rate);
    for (std::size_t i = 0; i < levels_db.size(); ++i) {
        const auto at = static_cast<std::size_t>(rate * (0.25 + 0.5 * static_cast<double>(i)));
        w.left[at] = static_cast<float>(db_to_linear(levels_db[i]));
        w.right[at] = w.left[at];
    }
    return w;
}

}  // namespace

TEST_CASE("peak statistics keep peaks at or above the 25th percentile", "[dynamics]") {
    const std::vector<double> levels{-6.0, -8.0, -10.0, -20.0};
    const StereoWaveform w = clicks_at(levels);
    const auto stats = onset_peak_stats(w, {0.25, 0.75, 1.25, 1.75});
    REQUIRE(stats);
    REQUIRE(stats->peak_levels.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(stats->peak_levels[i] == Catch::Approx(levels[i]).margin(1e-5));
    }
    // The 25th percentile is -12.5 dB, so -20 dB is dropped.
    CHECK(stats->mu == Catch::Approx(-8.0).margin(1e-5));
    CHECK(stats->sigma == Catch::Approx(std::sqrt(8.0 / 3.0)).margin(1e-5));
}

TEST_CASE("no onsets means no transients", "[dynamics]") {
    const StereoWaveform silent = StereoWaveform::silence(44100, kDefaultSampleRate);
    CHECK(detect_onsets(silent).empty());
    CHECK_FALSE(measure_peak_stats(silent).has_value());
    CHECK_FALSE(onset_peak_stats(clicks_at({-6.0}), {}).has_value());
}

TEST_CASE("a single click is detected within one hop", "[dynamics]") {
    const StereoWaveform w = test::click_train(1, 1.0, 1.0, 0.5, 2.0);
    const std::vector<double> onsets = detect_onsets(w);
    REQUIRE(onsets.size() == 1);
    CHECK(std::abs(onsets[0] - 1.0) <= 512.0 / kDefaultSampleRate);
}

TEST_CASE("regular clicks are all detected", "[dynamics]") {
    const StereoWaveform w = test::click_train(8, 0.25, 0.3, 0.5, 2.5);
    const auto onsets = detect_onsets(w);
    REQUIRE(onsets.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(std::abs(onsets[i] - (0.3 + 0.25 * static_cast<double>(i))) <= 512.0 / kDefaultSampleRate);
    }
}

TEST_CASE("HFC novelty has one value per frame", "[dynamics]") {
    const StereoWaveform w = test::white_noise(1.0, 0.1, 3);
    CHECK(hfc_novelty(w).size() == stft_frame_count(w.size(), 512));
    CHECK(onset_config_for(StemType::bass).mel_bands == 16);
    CHECK(onset_config_for(StemType::drums).mel_bands == 128);
}

TEST_CASE("static compressor curve", "[dynamics]") {
    const CompressorSettings s{-20.0, 4.0, 10.0, 100.0, 0.0};
    CHECK(compressor_gain_db(-30.0, s) == 0.0);
    CHECK(compressor_gain_db(-20.0, s) == 0.0);
    CHECK(compressor_gain_db(-6.0, s) == Catch::Approx(-10.5));
    CHECK(compressor_gain_db(0.0, s) == Catch::Approx(-15.0));

    CompressorSettings soft = s;
    soft.knee_db = 6.0;
    CHECK(compressor_gain_db(-23.0, soft) == Catch::Approx(0.0).margin(1e-12));
    CHECK(compressor_gain_db(-17.0, soft) == Catch::Approx(compressor_gain_db(-17.0, s)).margin(1e-12));
    CHECK(compressor_gain_db(-20.0, soft) < 0.0);
    double prev = -1e300;
    for (double level = -40.0; level <= 0.0; level += 0.25) {
        const double out = level + compressor_gain_db(level, soft);
        CHECK(out >= prev - 1e-12);
        prev = out;
    }
}

TEST_CASE("settings validation", "[dynamics]") {
    CHECK_THROWS_AS((CompressorSettings{-20.0, 0.5, 10.0, 100.0, 0.0}.validate()), DataError);
    CHECK_THROWS_AS((CompressorSettings{-20.0, 4.0, 0.0, 100.0, 0.0}.validate()), DataError);
    CHECK_THROWS_AS((CompressorSettings{-20.0, 4.0, 10.0, 100.0, -1.0}.validate()), DataError);
    CHECK_NOTHROW(CompressorSettings{-20.0, 4.0, 10.0, 100.0, 0.0}.validate());
}

TEST_CASE("compression never raises the level and ratio 1 is identity", "[dynamics]") {
    const StereoWaveform w = test::percussive_stem(5, 3.0, 0.3, -12.0, 0.0);
    const StereoWaveform c = compress(w, {-20.0, 6.0, 5.0, 100.0, 0.0});
    REQUIRE(c.size() == w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        REQUIRE(std::abs(c.left[i]) <= std::abs(w.left[i]) + 1e-7F);
    }
    CHECK(peak_amplitude(c) < peak_amplitude(w));
    CHECK(test::max_abs_difference(compress(w, {-20.0, 1.0, 5.0, 100.0, 0.0}), w) < 1e-7);
}

TEST_CASE("stronger settings compress more", "[dynamics]") {
    const StereoWaveform w = test::stereo_sine(200.0, 0.5, 1.0);
    double prev = peak_amplitude(w);
    for (double ratio : {2.0, 4.0, 8.0, 20.0}) {
        const double p = peak_amplitude(compress(w, {-20.0, ratio, 1.0, 100.0, 0.0}));
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("grid order: thresholds outer, ratios inner", "[dynamics]") {
    const DrcConfig config;
    const auto grid = config.grid({10.0, 180.0});
    REQUIRE(grid.size() == 144);
    CHECK(grid[0].threshold_db == -10.0);
    CHECK(grid[0].ratio == 4.0);
    CHECK(grid[1].threshold_db == -10.0);
    CHECK(grid[1].ratio == 6.0);
    CHECK(grid[9].threshold_db == -12.0);
    CHECK(grid[9].ratio == 4.0);
    CHECK(grid.back().threshold_db == -40.0);
    CHECK(grid.back().ratio == 20.0);
    CHECK(grid[17].attack_ms == 10.0);
    CHECK(grid[17].release_ms == 180.0);
}

TEST_CASE("normalize_drc passes through when the bound already holds", "[dynamics]") {
    const StereoWaveform w = peak_normalize(test::percussive_stem(6, 4.0, 0.3, -6.0, 0.0), -10.0);
    const DrcResult loose = normalize_drc(w, {0.0, 1.0}, default_timing(StemType::drums));
    CHECK(loose.outcome == DrcOutcome::within_bound);
    CHECK(loose.audio == w);
    const DrcResult silent = normalize_drc(StereoWaveform::silence(44100, 44100.0), {-20.0, 1.0},
                                           default_timing(StemType::drums));
    CHECK(silent.outcome == DrcOutcome::no_transients);
}

TEST_CASE("normalize_drc lowers the onset peak mean", "[dynamics]") {
    const StereoWaveform w = peak_normalize(test::percussive_stem(7, 4.0, 0.3, -6.0, 0.0), -10.0);
    const DrcResult r = normalize_drc(w, {-14.0, 1.0}, default_timing(StemType::drums));
    REQUIRE(r.mu_before);
    REQUIRE(r.mu_after);
    CHECK(*r.mu_after < *r.mu_before);
    CHECK(r.settings.has_value());
    CHECK(r.candidates_tried >= 1);
}
