#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "stemnorm/audio.hpp"
#include "stemnorm/eq.hpp"
#include "stemnorm/panning.hpp"

namespace stemnorm {

inline constexpr int kProfileSchemaVersion = 1;

/// Corpus-average effect features of one stem type: the normalization target.
struct StemTypeProfile {
    StemType stem_type = StemType::vocals;
    double sample_rate = kDefaultSampleRate;
    std::string corpus_fingerprint;
    std::size_t song_count = 0;
    double loudness_lufs = 0.0;
    /// Empty when no analyzed stem had detectable transients.
    std::optional<double> peak_mu;
    std::optional<double> peak_sigma;
    AverageSpectrum spectrum;
    AveragePanning panning;

    /// Throws DataError when vector lengths disagree with the FFT sizes.
    void validate() const;
    bool operator==(const StemTypeProfile&) const = default;
};

using ProfileSet = std::map<StemType, StemTypeProfile>;

/// JSON text. Vectors are written with round-trip precision.
[[nodiscard]] std::string profile_to_json(const StemTypeProfile& profile);
/// Throws DataError on malformed input or an unknown schema version.
[[nodiscard]] StemTypeProfile profile_from_json(std::string_view text);

void save_profile(const std::filesystem::path& path, const StemTypeProfile& profile);
/// When `session_rate` is given, a profile built at another rate is refused
/// with DataError("sample-rate mismatch ...").
[[nodiscard]] StemTypeProfile load_profile(const std::filesystem::path& path,
                                           std::optional<double> session_rate = std::nullopt);

/// File name of a stem type's profile inside a profile directory.
[[nodiscard]] std::string profile_file_name(StemType type);

void save_profiles(const std::filesystem::path& dir, const ProfileSet& profiles);
/// Loads the profiles for `types` from `dir`. Throws DataError naming a missing file.
[[nodiscard]] ProfileSet load_profiles(const std::filesystem::path& dir, std::span<const StemType> types,
                                       std::optional<double> session_rate = std::nullopt);

}  // namespace stemnorm
