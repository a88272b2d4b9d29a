#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "stemnorm/audio.hpp"

namespace stemnorm {

struct SyntheticSongOptions {
    double duration_s = 12.0;
    double sample_rate = kDefaultSampleRate;
};

/// A four-stem song with randomized tempo, levels, tone and stereo placement.
/// Identical (song_id, seed) pairs give identical audio.
[[nodiscard]] StemSet synthesize_song(const std::string& song_id, std::uint64_t seed,
                                      const SyntheticSongOptions& options = {});

/// Stereo white noise with an exponential envelope decaying 60 dB in `rt60_s`,
/// `length_s` long (1.5 * rt60_s when zero). Channels use independent noise.
[[nodiscard]] StereoWaveform synthetic_impulse_response(double rt60_s, double sample_rate, std::uint64_t seed,
                                                        double length_s = 0.0);

struct SyntheticCorpusOptions {
    std::size_t songs = 3;
    std::uint64_t seed = 0;
    SyntheticSongOptions song;
    /// Also writes <root>/impulse_responses with IRs covering both RT60 pools.
    bool impulse_responses = true;
};

/// Writes <root>/dataset/song_000, song_001, ... in the dataset layout, each
/// with the four stems and their sum as the mixture.
void write_synthetic_corpus(const std::filesystem::path& root, const SyntheticCorpusOptions& options);

}  // namespace stemnorm
