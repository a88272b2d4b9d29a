#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stemnorm/audio.hpp"

namespace stemnorm {

struct FeatureConfig {
    std::size_t fft_size = 2048;
    std::size_t hop = 512;
    double smoothing_s = 0.5;  // centered running mean
    double rolloff_fraction = 0.85;
    std::size_t contrast_bands = 6;
    double contrast_low_hz = 200.0;
    double contrast_quantile = 0.02;
    double reference_floor = 1e-8;  // MAPE skips reference frames below this magnitude
};

enum class FeatureGroup { spectral, panning, dynamic, loudness };

inline constexpr std::array<FeatureGroup, 4> kAllFeatureGroups{FeatureGroup::spectral, FeatureGroup::panning,
                                                               FeatureGroup::dynamic, FeatureGroup::loudness};

[[nodiscard]] std::string_view to_string(FeatureGroup group) noexcept;

struct FeatureSeries {
    std::string name;
    FeatureGroup group = FeatureGroup::spectral;
    std::vector<double> values;  // one per frame, after the running mean
    double mean = 0.0;
};

/// Evaluation features of one stereo mix. Time series share one frame grid.
struct MixFeatureReport {
    std::vector<FeatureSeries> series;  // spectral, panning and dynamic features in a fixed order
    std::optional<double> loudness_lufs;
    double frame_rate = 0.0;

    [[nodiscard]] const FeatureSeries& feature(std::string_view name) const;
};

/// Names of the time-series features in report order.
[[nodiscard]] std::span<const std::string_view> feature_names() noexcept;

/// Spectral features (centroid, bandwidth, contrast, flatness, rolloff) are
/// computed on the running-mean magnitude spectrogram of the mono mix; panning
/// RMS, RMS level, dynamic spread and crest factor are framewise and then
/// smoothed. Throws DataError for mixes shorter than the smoothing window.
[[nodiscard]] MixFeatureReport mix_features(const StereoWaveform& mix, const FeatureConfig& config = {});

struct MapeReport {
    MixFeatureReport candidate;
    MixFeatureReport reference;
    std::map<std::string, double> by_feature;       // fraction, not percent
    std::map<FeatureGroup, double> by_group;        // mean of the group's features
    bool trimmed = false;                           // inputs differed in length
};

/// Mean absolute percentage error of candidate against reference features,
/// expressed as a fraction. Inputs are trimmed to the shorter length.
[[nodiscard]] MapeReport mape_report(const StereoWaveform& candidate, const StereoWaveform& reference,
                                     const FeatureConfig& config = {});

/// MAPE of two equal-length series, skipping reference values below `floor`.
/// Returns nullopt when every reference value is skipped.
[[nodiscard]] std::optional<double> mape(std::span<const double> candidate, std::span<const double> reference,
                                         double floor = 1e-8);

struct LossConfig {
    std::size_t fft_size = 4096;
    std::size_t hop = 1024;
    double log_epsilon = 1e-7;
    std::size_t a_weighting_taps = 101;
    std::size_t lowpass_taps = 101;
    double lowpass_hz = 16000.0;
};

enum class LossVariant { a, b };

struct LossBreakdown {
    double sc_sum = 0.0;
    double l1log_sum = 0.0;
    double sc_diff = 0.0;
    double l1log_diff = 0.0;
    double l2_sum = 0.0;
    double l2_diff = 0.0;
    double total_a = 0.0;  // sc + l1log on sum and diff
    double total_b = 0.0;  // l2 + l1log on sum and diff

    [[nodiscard]] double total(LossVariant variant) const noexcept {
        return variant == LossVariant::a ? total_a : total_b;
    }
};

/// Least-squares linear-phase FIR fit to the A-weighting magnitude (0 dB at 1 kHz).
[[nodiscard]] std::vector<double> a_weighting_fir(double sample_rate, std::size_t taps);

/// Hann-windowed sinc low-pass.
[[nodiscard]] std::vector<double> lowpass_fir(double sample_rate, double cutoff_hz, std::size_t taps);

/// Perceptual pre-emphasis: A-weighting FIR convolved with the low-pass FIR.
[[nodiscard]] std::vector<double> pre_emphasis_fir(double sample_rate, const LossConfig& config = {});

/// Spectral convergence, L1 log-magnitude and L2 terms of two magnitude arrays.
struct MagnitudeTerms {
    double sc = 0.0;
    double l1log = 0.0;
    double l2 = 0.0;
};
[[nodiscard]] MagnitudeTerms magnitude_terms(std::span<const double> reference, std::span<const double> estimate,
                                             double log_epsilon);

/// Stereo-invariant spectral loss on sum and difference signals. Variant a
/// throws DataError("silent reference") when a reference magnitude is all zero
/// and the estimate is not; variant b reports NaN for those SC terms instead.
/// Throws DataError when the lengths or rates differ.
[[nodiscard]] LossBreakdown stereo_invariant_loss(const StereoWaveform& y, const StereoWaveform& y_hat,
                                                  LossVariant variant, const LossConfig& config = {});

}  // namespace stemnorm
