#include "stemnorm/dataset.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>

#include "stemnorm/error.hpp"

namespace stemnorm {

namespace fs = std::filesystem;

std::vector<SongEntry> list_songs(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw DataError("dataset root " + root.string() + " does not exist or is not a directory");
    }
    std::vector<SongEntry> songs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) {
            songs.push_back({entry.path().filename().string(), entry.path()});
        }
    }
    std::sort(songs.begin(), songs.end(),
              [](const SongEntry& a, const SongEntry& b) { return a.song_id < b.song_id; });
    return songs;
}

fs::path stem_path(const fs::path& song_dir, StemType type) {
    return song_dir / (std::string(to_string(type)) + ".wav");
}

fs::path mixture_path(const fs::path& song_dir) { return song_dir / "mixture.wav"; }

StemSet load_song(const SongEntry& song, std::span<const StemType> types, const ReadOptions& options) {
    StemSet set;
    set.song_id = song.song_id;
    for (StemType type : types) {
        const fs::path path = stem_path(song.directory, type);
        if (!fs::exists(path)) {
            throw DataError("song '" + song.song_id + "' is missing " + path.filename().string());
        }
        set.stems.emplace(type, read_audio(path, options));
    }
    set.pad_to_common_length();
    return set;
}

void write_song(const fs::path& dir, const StemSet& stems, WavSampleFormat format) {
    fs::create_directories(dir);
    for (const auto& [type, w] : stems.stems) {
        write_audio(stem_path(dir, type), w, format);
    }
}

std::string corpus_fingerprint(std::span<const SongEntry> songs, std::span<const StemType> types) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    const auto mix = [&hash](std::string_view text) {
        for (unsigned char c : text) {
            hash ^= c;
            hash *= 0x100000001b3ULL;
        }
    };
    for (const SongEntry& song : songs) {
        for (StemType type : types) {
            const fs::path path = stem_path(song.directory, type);
            std::error_code ec;
            const auto size = fs::file_size(path, ec);
            mix(song.song_id + "/" + path.filename().string() + ":" +
                (ec ? std::string("missing") : std::to_string(size)) + "\n");
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace stemnorm
