#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "signals.hpp"
#include "stemnorm/error.hpp"
#include "stemnorm/evaluation.hpp"

using namespace stemnorm;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("MAPE is a fraction and skips tiny reference values", "[evaluation]") {
    const std::vector<double> ref{1.0, 2.0, 0.0};
    const std::vector<double> cand{1.1, 1.8, 5.0};
    CHECK(*mape(cand, ref) == Catch::Approx(0.1));
    const std::vector<double> zeros{0.0, 1e-9};
    CHECK_FALSE(mape(std::vector<double>{1.0, 1.0}, zeros).has_value());
}

TEST_CASE("MAPE is not symmetric", "[evaluation]") {
    const std::vector<double> a{1.0};
    const std::vector<double> b{2.0};
    CHECK(*mape(a, b) == Catch::Approx(0.5));
    CHECK(*mape(b, a) == Catch::Approx(1.0));
}

TEST_CASE("feature report layout", "[evaluation]") {
    const MixFeatureReport r = mix_features(test::white_noise(2.0, 0.3, 1));
    REQUIRE(r.series.size() == feature_names().size());
    for (std::size_t i = 0; i < r.series.size(); ++i) {
        CHECK(r.series[i].name == feature_names()[i]);
        CHECK(r.series[i].values.size() == r.series[0].values.size());
    }
    CHECK(r.feature("panning_rms").group == FeatureGroup::panning);
    CHECK(r.feature("crest_factor").group == FeatureGroup::dynamic);
    CHECK(r.feature("spectral_rolloff").group == FeatureGroup::spectral);
    CHECK(r.loudness_lufs.has_value());
    CHECK(r.frame_rate == Catch::Approx(44100.0 / 512.0));
    CHECK_THROWS_AS(r.feature("tempo"), Error);
    CHECK(to_string(FeatureGroup::loudness) == "loudness");
}

TEST_CASE("white noise is spectrally flat", "[evaluation]") {
    const MixFeatureReport r = mix_features(test::white_noise(3.0, 0.3, 2));
    CHECK(r.feature("spectral_flatness").mean > 0.9);
    CHECK(r.feature("panning_rms").mean > 0.1);
}

TEST_CASE("a gain change moves level features but not the centroid", "[evaluation]") {
    const StereoWaveform ref = test::percussive_stem(3, 3.0, 0.2, -12.0, -3.0);
    const MapeReport m = mape_report(apply_gain(ref, 2.0), ref);
    CHECK(m.by_feature.at("spectral_centroid") < 1e-6);
    // Levels are in dB: the gain adds 20 log10(2) to every frame.
    std::vector<double> shifted = m.reference.feature("rms_level").values;
    for (double& v : shifted) {
        v += 20.0 * std::log10(2.0);
    }
    const double expected = *mape(shifted, m.reference.feature("rms_level").values);
    CHECK(m.by_feature.at("rms_level") == Catch::Approx(expected).epsilon(1e-4));
    CHECK(m.by_feature.at("dynamic_spread") < 1e-4);
    CHECK(m.by_feature.at("crest_factor") < 1e-4);
    CHECK(m.by_group.at(FeatureGroup::dynamic) == Catch::Approx(expected / 3.0).epsilon(1e-2));
    CHECK(m.by_group.at(FeatureGroup::loudness) > 0.1);
    CHECK_FALSE(m.trimmed);
}

TEST_CASE("inputs of different length are trimmed", "[evaluation]") {
    const StereoWaveform a = test::white_noise(2.0, 0.3, 4);
    StereoWaveform b = a;
    b.left.resize(b.size() - 1000);
    b.right.resize(b.size());
    const MapeReport m = mape_report(a, b);
    CHECK(m.trimmed);
    CHECK(m.by_feature.at("spectral_centroid") < 1e-9);
}

TEST_CASE("mixes shorter than the smoothing window are rejected", "[evaluation]") {
    CHECK_THROWS_AS(mix_features(test::white_noise(0.3, 0.3, 5)), DataError);
}

TEST_CASE("A-weighting FIR is 0 dB at 1 kHz", "[evaluation]") {
    const double rate = 44100.0;
    const std::vector<double> h = a_weighting_fir(rate, 101);
    REQUIRE(h.size() == 101);
    const auto gain_db = [&](const std::vector<double>& taps, double f) {
        std::complex<double> acc = 0.0;
        for (std::size_t n = 0; n < taps.size(); ++n) {
            acc += taps[n] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(n) / rate);
        }
        return 20.0 * std::log10(std::abs(acc));
    };
    CHECK(gain_db(h, 1000.0) == Catch::Approx(0.0).margin(0.5));
    CHECK(gain_db(h, 100.0) < -10.0);
    for (std::size_t i = 0; i < h.size(); ++i) {
        CHECK(h[i] == Catch::Approx(h[100 - i]).margin(1e-12));
    }
    const std::vector<double> lp = lowpass_fir(rate, 16000.0, 101);
    CHECK(gain_db(lp, 1000.0) == Catch::Approx(0.0).margin(0.1));
    CHECK(gain_db(lp, 20000.0) < -20.0);
    CHECK(pre_emphasis_fir(rate).size() == 201);
    CHECK_THROWS_AS(a_weighting_fir(rate, 100), DataError);
}

TEST_CASE("magnitude terms on a hand-computed pair", "[evaluation]") {
    const std::vector<double> ref{3.0, 4.0};
    const std::vector<double> est{0.0, 0.0};
    const MagnitudeTerms t = magnitude_terms(ref, est, 1e-7);
    CHECK(t.sc == Catch::Approx(1.0));
    CHECK(t.l2 == Catch::Approx(12.5));
    const double l1 = 0.5 * (std::log((3.0 + 1e-7) / 1e-7) + std::log((4.0 + 1e-7) / 1e-7));
    CHECK(t.l1log == Catch::Approx(l1));
}

TEST_CASE("loss totals add up their terms", "[evaluation]") {
    const StereoWaveform y = test::white_noise(1.0, 0.3, 6);
    const StereoWaveform y_hat = test::white_noise(1.0, 0.3, 7);
    const LossBreakdown b = stereo_invariant_loss(y, y_hat, LossVariant::a);
    CHECK(b.total_a == Catch::Approx(b.sc_sum + b.l1log_sum + b.sc_diff + b.l1log_diff));
    CHECK(b.total_b == Catch::Approx(b.l2_sum + b.l1log_sum + b.l2_diff + b.l1log_diff));
    CHECK(b.total(LossVariant::b) == b.total_b);
    CHECK(b.total_a > 0.0);
}

TEST_CASE("loss input checks", "[evaluation]") {
    const StereoWaveform y = test::white_noise(1.0, 0.3, 8);
    StereoWaveform shorter = y;
    shorter.left.resize(1000);
    shorter.right.resize(1000);
    CHECK_THROWS_AS(stereo_invariant_loss(y, shorter, LossVariant::b), DataError);

    // A mono reference has an all-zero difference signal.
    const StereoWaveform mono = StereoWaveform::from_mono(y.left, y.sample_rate);
    CHECK_THROWS_WITH(stereo_invariant_loss(mono, y, LossVariant::a), ContainsSubstring("silent reference"));
    const LossBreakdown b = stereo_invariant_loss(mono, y, LossVariant::b);
    CHECK(std::isnan(b.sc_diff));
    CHECK(std::isfinite(b.total_b));
}
