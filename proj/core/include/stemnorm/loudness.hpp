#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "stemnorm/audio.hpp"
#include "stemnorm/filters.hpp"

namespace stemnorm {

/// Integrated programme loudness. `integrated_lufs` is empty when every block
/// was gated out (the "silence" sentinel); such stems are excluded from averages.
struct LoudnessStats {
    std::optional<double> integrated_lufs;
    std::size_t gated_block_count = 0;

    [[nodiscard]] bool silent() const noexcept { return !integrated_lufs.has_value(); }
};

/// K-weighting pre-filter: high-frequency shelf followed by the RLB high-pass,
/// derived from the analog prototype for the given rate via the bilinear transform.
struct KWeighting {
    Biquad shelf;
    Biquad highpass;
};

[[nodiscard]] KWeighting k_weighting(double sample_rate);

/// 400 ms blocks at 75% overlap, -70 LUFS absolute gate, -10 LU relative gate,
/// channel weights 1.0 for left and right. Throws DataError for input shorter
/// than one block.
[[nodiscard]] LoudnessStats integrated_loudness(const StereoWaveform& w);

/// Mean of the non-silent integrated loudness values.
/// Throws DataError("no measurable stems for type <k>") when none remain.
[[nodiscard]] double average_stem_loudness(std::span<const LoudnessStats> stats, StemType type);
[[nodiscard]] double average_stem_loudness(std::span<const StereoWaveform> stems, StemType type);

struct LoudnessNormalized {
    StereoWaveform audio;
    double gain_db = 0.0;
    /// True when the input was silent and returned unchanged.
    bool silent = false;
};

inline constexpr double kMaxLoudnessGainDb = 40.0;

/// Scales both channels by one gain so the output measures `target_lufs`.
/// After the first gain the stem is re-measured and, if gating shifted the
/// result, one corrective gain is folded in. Silent input passes through.
/// Throws DataError("stem too quiet to normalize") if more than `max_gain_db`
/// of boost would be required.
[[nodiscard]] LoudnessNormalized normalize_loudness(const StereoWaveform& w, double target_lufs,
                                                    double max_gain_db = kMaxLoudnessGainDb);

}  // namespace stemnorm
