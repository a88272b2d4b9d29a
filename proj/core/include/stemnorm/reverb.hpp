#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stemnorm/audio.hpp"

namespace stemnorm {

struct ImpulseResponseEntry {
    std::string name;
    StereoWaveform audio;
    double rt60 = 0.0;  // seconds
};

/// Schroeder backward-integrated decay of the summed channel energy, fitted
/// linearly between -5 and -35 dB and extrapolated to -60 dB.
/// Throws DataError("IR too short for RT estimation") for IRs under 0.1 s or
/// a fitted segment under 50 ms.
[[nodiscard]] double estimate_rt60(const StereoWaveform& ir);

struct ReverbSendConfig {
    double low_shelf_cutoff_hz = 600.0;
    double high_shelf_cutoff_hz = 8500.0;
    double shelf_gain_db = -30.0;
    double shelf_q = 0.707;
    double wet_gain = 1.0;
};

/// Adds a shelved, convolved copy of `w` to itself. Output keeps the input's
/// length; a scalar gain is applied if the sum would exceed full scale.
/// Throws DataError when the IR rate differs from the stem's.
[[nodiscard]] StereoWaveform reverb_send(const StereoWaveform& w, const ImpulseResponseEntry& ir,
                                         const ReverbSendConfig& config);

/// The wet path alone (shelves then convolution, scaled by wet_gain), trimmed to the input length.
[[nodiscard]] StereoWaveform reverb_wet(const StereoWaveform& w, const ImpulseResponseEntry& ir,
                                        const ReverbSendConfig& config);

enum class RunMode { train, inference };

[[nodiscard]] std::string to_string(RunMode mode);
[[nodiscard]] std::optional<RunMode> parse_run_mode(std::string_view name) noexcept;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

struct ReverbSampling {
    Range low_shelf_hz{500.0, 700.0};
    Range high_shelf_hz{7000.0, 10000.0};
    Range train_rt60_s{2.0, 4.0};
    Range pre_rt60_s{1.0, 1.5};
    double shelf_gain_db = -30.0;
    double shelf_q = 0.707;
    double wet_gain = 1.0;
};

[[nodiscard]] bool reverb_eligible(StemType type) noexcept;

struct ReverbChoice {
    StemType stem = StemType::vocals;
    std::string stage;  // "pre" or "train"
    std::string ir_name;
    double rt60 = 0.0;
    ReverbSendConfig send;
};

struct AugmentedStems {
    StemSet stems;
    std::vector<ReverbChoice> choices;
};

/// Applies the send to vocals and other: one random IR from the train pool in
/// train mode; a pre-reverb from the short pool followed by the train send in
/// inference mode. Other stems are copied unchanged. Each stem draws from its
/// own stream seeded by (seed, song_id, stem).
/// Throws DataError naming the RT range of an empty required pool.
[[nodiscard]] AugmentedStems augment_reverb(const StemSet& stems, std::span<const ImpulseResponseEntry> library,
                                            RunMode mode, std::uint64_t seed, const ReverbSampling& sampling = {});

struct IrLibraryLoad {
    std::vector<ImpulseResponseEntry> entries;
    std::vector<std::string> skipped;  // "<file>: <reason>"
};

/// Loads every .wav in `dir` (sorted by name) at `sample_rate`. RT60 values are
/// cached in `rt60_cache.json` next to the files, keyed by name and size.
[[nodiscard]] IrLibraryLoad load_ir_library(const std::filesystem::path& dir, double sample_rate,
                                            bool resample = false);

}  // namespace stemnorm
