#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stemnorm/audio.hpp"

namespace stemnorm {

struct OnsetConfig {
    std::size_t fft_size = 2048;
    std::size_t hop = 512;
    std::size_t mel_bands = 128;
    double median_window_s = 0.5;     // centered
    double threshold_offset_db = 6.0; // above the running median
    double silence_gate_db = -100.0;
    double min_interval_s = 0.05;
};

/// Onset settings for a stem type (bass uses 16 mel bands, the rest 128).
[[nodiscard]] OnsetConfig onset_config_for(StemType type);

/// Per-frame HFC novelty of the mono mix: sum_b b*E_b / sum_b b over HTK mel-band
/// energies. Frame t is centered on sample t*hop.
[[nodiscard]] std::vector<double> hfc_novelty(const StereoWaveform& w, const OnsetConfig& config = {});

/// Onset times in seconds, ascending. Empty for silence.
[[nodiscard]] std::vector<double> detect_onsets(const StereoWaveform& w, const OnsetConfig& config = {});

struct PeakStatsConfig {
    double peak_window_s = 0.1;
    double keep_percentile = 25.0;  // peaks at or above this percentile are kept
};

struct OnsetPeakStats {
    std::vector<double> onset_times;
    std::vector<double> peak_levels;  // dB, one per onset
    double mu = 0.0;                  // dB
    double sigma = 0.0;               // dB
};

/// Peak level after each onset and their robust mean/deviation.
/// Returns nullopt ("no transients") when `onsets` is empty.
[[nodiscard]] std::optional<OnsetPeakStats> onset_peak_stats(const StereoWaveform& w,
                                                             const std::vector<double>& onsets,
                                                             const PeakStatsConfig& config = {});

/// detect_onsets followed by onset_peak_stats.
[[nodiscard]] std::optional<OnsetPeakStats> measure_peak_stats(const StereoWaveform& w,
                                                               const OnsetConfig& onsets = {},
                                                               const PeakStatsConfig& peaks = {});

struct CompressorSettings {
    double threshold_db = 0.0;
    double ratio = 1.0;
    double attack_ms = 10.0;
    double release_ms = 100.0;
    double knee_db = 0.0;  // 0 is a hard knee

    /// Throws DataError unless ratio >= 1, attack and release > 0 and knee >= 0.
    void validate() const;
    bool operator==(const CompressorSettings&) const = default;
};

/// Static gain in dB (<= 0) for a detector level.
[[nodiscard]] double compressor_gain_db(double level_db, const CompressorSettings& settings);

/// Feed-forward compressor with a linked max-of-channels peak detector and
/// one-pole attack/release smoothing of the gain in dB.
[[nodiscard]] StereoWaveform compress(const StereoWaveform& w, const CompressorSettings& settings);

struct CompressorTiming {
    double attack_ms = 10.0;
    double release_ms = 100.0;
};

[[nodiscard]] CompressorTiming default_timing(StemType type);

/// Corpus peak statistics for one stem type.
struct DrcTarget {
    double p_mu = 0.0;
    double p_sigma = 0.0;
    [[nodiscard]] double bound() const noexcept { return p_mu + p_sigma; }
};

struct DrcConfig {
    double threshold_start_db = -10.0;
    double threshold_stop_db = -40.0;
    double threshold_step_db = -2.0;
    double ratio_start = 4.0;
    double ratio_stop = 20.0;
    double ratio_step = 2.0;
    double knee_db = 0.0;
    double peak_normalize_db = -10.0;
    OnsetConfig onsets;
    PeakStatsConfig peaks;

    /// Candidate settings in search order: thresholds outer (mildest first), ratios inner.
    [[nodiscard]] std::vector<CompressorSettings> grid(const CompressorTiming& timing) const;
};

enum class DrcOutcome {
    no_transients,    // passthrough
    within_bound,     // passthrough
    compressed,       // bound met
    bound_not_met,    // most compressive setting kept
    no_improvement,   // passthrough: no setting lowered mu
};

[[nodiscard]] std::string to_string(DrcOutcome outcome);

struct DrcResult {
    StereoWaveform audio;
    DrcOutcome outcome = DrcOutcome::no_transients;
    std::optional<CompressorSettings> settings;
    std::optional<double> mu_before;
    std::optional<double> mu_after;
    std::size_t candidates_tried = 0;
};

/// Grid-searches compressor settings until the onset peak mean is at or below
/// the target bound. `w` is expected to be peak-normalized already.
[[nodiscard]] DrcResult normalize_drc(const StereoWaveform& w, const DrcTarget& target,
                                      const CompressorTiming& timing, const DrcConfig& config = {});

}  // namespace stemnorm
