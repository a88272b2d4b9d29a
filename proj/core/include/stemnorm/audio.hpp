#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stemnorm {

inline constexpr double kDefaultSampleRate = 44100.0;

/// Time-domain stereo audio. Samples are linear amplitude, nominally in [-1, 1].
struct StereoWaveform {
    std::vector<float> left;
    std::vector<float> right;
    double sample_rate = kDefaultSampleRate;

    StereoWaveform() = default;
    StereoWaveform(std::vector<float> l, std::vector<float> r, double rate);

    /// Both channels carry the same samples.
    static StereoWaveform from_mono(std::vector<float> mono, double rate);
    static StereoWaveform silence(std::size_t frames, double rate);

    [[nodiscard]] std::size_t size() const noexcept { return left.size(); }
    [[nodiscard]] bool empty() const noexcept { return left.empty(); }
    [[nodiscard]] double duration() const noexcept;

    /// Throws DataError when channel lengths differ, the rate is not positive,
    /// or any sample is NaN/Inf.
    void validate() const;

    bool operator==(const StereoWaveform&) const = default;
};

/// Largest absolute sample over both channels.
[[nodiscard]] double peak_amplitude(const StereoWaveform& w);

/// Multiplies both channels by `gain` (linear). Computed in double, stored as float.
[[nodiscard]] StereoWaveform apply_gain(const StereoWaveform& w, double gain);

/// Scales so the peak sample sits at `target_db` dBFS. Silent input is returned as is.
/// `applied_gain_db`, when provided, receives the gain used (0 for silence).
[[nodiscard]] StereoWaveform peak_normalize(const StereoWaveform& w, double target_db,
                                            double* applied_gain_db = nullptr);

/// (L + R) / 2 in double precision.
[[nodiscard]] std::vector<double> mono_mix(const StereoWaveform& w);

enum class StemType { vocals, drums, bass, other };

inline constexpr std::array<StemType, 4> kAllStemTypes{StemType::vocals, StemType::drums,
                                                       StemType::bass, StemType::other};

[[nodiscard]] std::string_view to_string(StemType type) noexcept;
[[nodiscard]] std::optional<StemType> parse_stem_type(std::string_view name) noexcept;

/// The stems of one song. All stems share sample rate and length once padded.
struct StemSet {
    std::string song_id;
    std::map<StemType, StereoWaveform> stems;

    /// Zero-pads every stem at the tail to the longest stem's length.
    /// Throws DataError on mixed sample rates.
    void pad_to_common_length();

    [[nodiscard]] bool contains(StemType type) const { return stems.contains(type); }
    [[nodiscard]] double sample_rate() const;
};

}  // namespace stemnorm
