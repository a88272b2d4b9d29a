#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stemnorm/config.hpp"
#include "stemnorm/dynamics.hpp"
#include "stemnorm/profile.hpp"
#include "stemnorm/reverb.hpp"

namespace stemnorm {

/// Normalization stages in their fixed processing order.
enum class Stage { reverb, eq, drc, panning, loudness };

inline constexpr std::array<Stage, 5> kStageOrder{Stage::reverb, Stage::eq, Stage::drc, Stage::panning,
                                                  Stage::loudness};

[[nodiscard]] std::string_view to_string(Stage stage) noexcept;
[[nodiscard]] std::optional<Stage> parse_stage(std::string_view name) noexcept;

struct AnalyzeOptions {
    std::vector<StemType> stem_types{kAllStemTypes.begin(), kAllStemTypes.end()};
    std::size_t workers = 1;
    bool resample = false;
};

struct CorpusAnalysis {
    ProfileSet profiles;
    std::vector<std::string> songs;     // songs that contributed, in order
    std::vector<std::string> warnings;  // skipped songs and stems
};

/// Progressive per-type analysis. For each stem type: loudness to the EQ
/// pre-normalization level and mean spectrum F; EQ toward F, peak
/// normalization and onset peak statistics; DRC toward those statistics and
/// mean similarity S; re-panning toward S and mean loudness L. Songs are
/// reduced in order, so results do not depend on the worker count.
/// Throws DataError when no song is usable for a requested type.
[[nodiscard]] CorpusAnalysis analyze_stem_sets(std::span<const StemSet> songs, const PreprocessConfig& config,
                                               const AnalyzeOptions& options = {});

/// Same analysis over a dataset directory. Songs missing a requested stem are
/// skipped with a warning; the profiles carry the corpus fingerprint.
[[nodiscard]] CorpusAnalysis analyze_corpus(const std::filesystem::path& root, const PreprocessConfig& config,
                                            const AnalyzeOptions& options = {});

struct NormalizeOptions {
    RunMode mode = RunMode::train;
    std::uint64_t seed = 0;
    std::set<Stage> skip;
    std::span<const ImpulseResponseEntry> ir_library;
    bool keep_intermediates = false;
};

struct DrcSummary {
    DrcOutcome outcome = DrcOutcome::no_transients;
    std::optional<CompressorSettings> settings;
    std::optional<double> mu_before;
    std::optional<double> mu_after;
    std::optional<double> bound;
    std::size_t candidates_tried = 0;
};

struct StemReport {
    bool silent = false;
    std::vector<ReverbChoice> reverb;
    std::optional<double> eq_pregain_db;
    std::optional<double> drc_pregain_db;
    std::optional<DrcSummary> drc;
    std::optional<double> loudness_gain_db;
};

struct SongReport {
    std::string song_id;
    RunMode mode = RunMode::train;
    std::uint64_t seed = 0;
    std::vector<Stage> stages;  // stages that ran, in order
    std::map<StemType, StemReport> stems;
    std::vector<std::string> warnings;
};

struct NormalizedSong {
    StemSet stems;
    SongReport report;
    /// Output of each stage that ran, per stem, when requested.
    std::map<StemType, std::vector<std::pair<Stage, StereoWaveform>>> intermediates;
};

/// Reverb augmentation, EQ, DRC, re-panning and loudness normalization, in
/// that order. The -30 LUFS and -10 dB pre-gains belong to the EQ and DRC
/// stages, so skipping every stage returns the input unchanged.
/// Throws DataError when a profile is missing or was built at another rate.
[[nodiscard]] NormalizedSong normalize_song(const StemSet& stems, const ProfileSet& profiles,
                                            const PreprocessConfig& config, const NormalizeOptions& options = {});

/// Manifest JSON for one normalized song.
[[nodiscard]] std::string song_report_json(const SongReport& report);

struct ReanalysisTolerance {
    double loudness_lu = 0.1;
    double spectrum_db = 1.0;
    double spectrum_low_hz = 100.0;
    double spectrum_high_hz = 10000.0;
    double similarity = 0.1;
};

/// Measurements of a normalized stem against its profile.
struct StemReanalysis {
    double loudness_error_lu = 0.0;
    double spectrum_deviation_db = 0.0;
    double similarity_deviation = 0.0;
    std::optional<double> mu;
    std::optional<double> mu_bound;
    bool loudness_ok = false;
    bool spectrum_ok = false;
    bool panning_ok = false;
    bool drc_ok = false;

    [[nodiscard]] bool ok() const noexcept { return loudness_ok && spectrum_ok && panning_ok && drc_ok; }
};

/// Re-measures a normalize_song output. The spectrum is compared after
/// loudness normalization to the EQ pre-normalization level; onset peaks are
/// measured with the final loudness gain removed, the level the DRC stage saw.
[[nodiscard]] StemReanalysis reanalyze_stem(const StereoWaveform& output, StemType type,
                                            const StemTypeProfile& profile, const StemReport& report,
                                            const PreprocessConfig& config, const ReanalysisTolerance& tolerance = {});

}  // namespace stemnorm
