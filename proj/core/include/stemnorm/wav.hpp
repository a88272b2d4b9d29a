#pragma once

#include <filesystem>
#include <optional>

#include "stemnorm/audio.hpp"

namespace stemnorm {

enum class WavSampleFormat { pcm16, pcm24, float32 };

struct ReadOptions {
    /// When set, the file rate must match or be resampled to it.
    std::optional<double> session_rate;
    bool resample = false;
};

/// Reads a PCM 16/24-bit or 32-bit float WAV. Mono files are duplicated to both
/// channels. Throws DataError for unsupported codecs, channel counts, or a rate
/// mismatch with the session when resampling is disabled.
[[nodiscard]] StereoWaveform read_audio(const std::filesystem::path& path,
                                        const ReadOptions& options = {});

/// Writes a stereo WAV. Integer formats clip to [-1, 1].
void write_audio(const std::filesystem::path& path, const StereoWaveform& w,
                 WavSampleFormat format = WavSampleFormat::float32);

[[nodiscard]] WavSampleFormat wav_format_from_bits(int bits);

}  // namespace stemnorm
