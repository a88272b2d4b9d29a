#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stemnorm/audio.hpp"
#include "stemnorm/wav.hpp"

namespace stemnorm {

// Dataset layout: <root>/<song_id>/{vocals,drums,bass,other,mixture}.wav

struct SongEntry {
    std::string song_id;
    std::filesystem::path directory;
};

/// Song directories under `root`, sorted by id. Throws DataError when the root is missing.
[[nodiscard]] std::vector<SongEntry> list_songs(const std::filesystem::path& root);

[[nodiscard]] std::filesystem::path stem_path(const std::filesystem::path& song_dir,
                                              StemType type);
[[nodiscard]] std::filesystem::path mixture_path(const std::filesystem::path& song_dir);

/// Loads the requested stems and pads them to a common length.
/// Throws DataError naming the first missing stem file.
[[nodiscard]] StemSet load_song(const SongEntry& song, std::span<const StemType> types,
                                const ReadOptions& options = {});

/// Writes each stem as <dir>/<stem>.wav.
void write_song(const std::filesystem::path& dir, const StemSet& stems,
                WavSampleFormat format = WavSampleFormat::float32);

/// FNV-1a hash over "song/stem.wav:size" for every listed file, as 16 hex digits.
[[nodiscard]] std::string corpus_fingerprint(std::span<const SongEntry> songs,
                                             std::span<const StemType> types);

}  // namespace stemnorm
