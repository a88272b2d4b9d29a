#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "stemnorm/audio.hpp"
#include "stemnorm/dynamics.hpp"
#include "stemnorm/eq.hpp"
#include "stemnorm/evaluation.hpp"
#include "stemnorm/loudness.hpp"
#include "stemnorm/panning.hpp"
#include "stemnorm/reverb.hpp"

namespace stemnorm {

/// Every tunable constant of analysis, normalization and evaluation.
/// A default-constructed value holds the reference settings.
struct PreprocessConfig {
    double session_rate = kDefaultSampleRate;
    double eq_prenormalize_lufs = -30.0;
    double max_loudness_gain_db = kMaxLoudnessGainDb;
    EqConfig eq;
    DrcConfig drc;
    std::map<StemType, CompressorTiming> timing{
        {StemType::vocals, default_timing(StemType::vocals)},
        {StemType::drums, default_timing(StemType::drums)},
        {StemType::bass, default_timing(StemType::bass)},
        {StemType::other, default_timing(StemType::other)},
    };
    std::map<StemType, std::size_t> mel_bands{
        {StemType::vocals, 128},
        {StemType::drums, 128},
        {StemType::bass, 16},
        {StemType::other, 128},
    };
    PanningConfig panning;
    ReverbSampling reverb;
    FeatureConfig features;
    LossConfig loss;

    [[nodiscard]] OnsetConfig onsets_for(StemType type) const;
    [[nodiscard]] CompressorTiming timing_for(StemType type) const;
    /// Throws DataError describing the first inconsistent value.
    void validate() const;
};

/// Pretty-printed JSON with every field, keys sorted.
[[nodiscard]] std::string config_to_json(const PreprocessConfig& config);

/// Applies a JSON object of overrides to the defaults. Unknown keys and
/// wrongly typed values throw DataError naming the offending path.
[[nodiscard]] PreprocessConfig config_from_json(std::string_view text);

/// config_from_json on a file's contents.
[[nodiscard]] PreprocessConfig load_config(const std::filesystem::path& path);

/// Name of the environment variable holding a default config path.
inline constexpr const char* kConfigEnvVar = "STEMNORM_CONFIG";

}  // namespace stemnorm
