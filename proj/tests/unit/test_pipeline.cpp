#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "signals.hpp"
#include "stemnorm/dataset.hpp"
#include "stemnorm/error.hpp"
#include "stemnorm/loudness.hpp"
#include "stemnorm/pipeline.hpp"
#include "stemnorm/synthetic.hpp"

namespace fs = std::filesystem;
using namespace stemnorm;
using Catch::Matchers::ContainsSubstring;

namespace {

std::vector<StemSet> fixture_songs() {
    std::vector<StemSet> songs;
    for (int i = 0; i < 2; ++i) {
        songs.push_back(synthesize_song("song_" + std::to_string(i), 11, {6.0, kDefaultSampleRate}));
    }
    return songs;
}

const CorpusAnalysis& fixture_analysis() {
    static const CorpusAnalysis analysis = analyze_stem_sets(fixture_songs(), PreprocessConfig{});
    return analysis;
}

std::vector<ImpulseResponseEntry> fixture_library() {
    std::vector<ImpulseResponseEntry> library;
    for (double rt : {1.2, 3.0}) {
        library.push_back({"ir", synthetic_impulse_response(rt, kDefaultSampleRate, 3), rt});
    }
    return library;
}

}  // namespace

TEST_CASE("stage names round trip and follow the fixed order", "[pipeline]") {
    for (Stage s : kStageOrder) {
        CHECK(parse_stage(to_string(s)) == s);
    }
    CHECK(to_string(kStageOrder.front()) == "reverb");
    CHECK(to_string(kStageOrder.back()) == "loudness");
}

TEST_CASE("analysis produces one consistent profile per type", "[pipeline]") {
    const CorpusAnalysis& a = fixture_analysis();
    REQUIRE(a.profiles.size() == 4);
    CHECK(a.songs == std::vector<std::string>{"song_0", "song_1"});
    for (const auto& [type, p] : a.profiles) {
        CHECK(p.stem_type == type);
        CHECK(p.song_count == 2);
        CHECK_NOTHROW(p.validate());
        CHECK(std::isfinite(p.loudness_lufs));
    }
    REQUIRE(a.profiles.at(StemType::drums).peak_mu.has_value());
}

TEST_CASE("analysis does not depend on the worker count", "[pipeline]") {
    AnalyzeOptions parallel;
    parallel.workers = 3;
    parallel.stem_types = {StemType::bass};
    const CorpusAnalysis b = analyze_stem_sets(fixture_songs(), PreprocessConfig{}, parallel);
    CHECK(b.profiles.at(StemType::bass) == fixture_analysis().profiles.at(StemType::bass));
}

TEST_CASE("identical songs give the profile of one song", "[pipeline]") {
    AnalyzeOptions only_drums;
    only_drums.stem_types = {StemType::drums};
    const StemSet song = fixture_songs().front();
    const std::vector<StemSet> one{song};
    std::vector<StemSet> three{song, song, song};
    three[1].song_id = "copy_1";
    three[2].song_id = "copy_2";
    const StemTypeProfile a = analyze_stem_sets(one, PreprocessConfig{}, only_drums).profiles.at(StemType::drums);
    const StemTypeProfile b = analyze_stem_sets(three, PreprocessConfig{}, only_drums).profiles.at(StemType::drums);
    CHECK(b.loudness_lufs == Catch::Approx(a.loudness_lufs).margin(1e-9));
    CHECK(*b.peak_mu == Catch::Approx(*a.peak_mu).margin(1e-9));
    for (std::size_t k = 0; k < a.spectrum.bins(); k += 97) {
        CHECK(b.spectrum.magnitude[k] == Catch::Approx(a.spectrum.magnitude[k]).epsilon(1e-12));
    }
}

TEST_CASE("skipping every stage is the identity", "[pipeline]") {
    const StemSet song = fixture_songs().front();
    NormalizeOptions options;
    options.skip = {kStageOrder.begin(), kStageOrder.end()};
    const NormalizedSong out = normalize_song(song, fixture_analysis().profiles, PreprocessConfig{}, options);
    CHECK(out.stems.stems == song.stems);
    CHECK(out.report.stages.empty());
}

TEST_CASE("every output stem lands on the profile loudness", "[pipeline]") {
    const StemSet song = fixture_songs().back();
    const auto library = fixture_library();
    NormalizeOptions options;
    options.seed = 4;
    options.ir_library = library;
    options.keep_intermediates = true;
    const NormalizedSong out = normalize_song(song, fixture_analysis().profiles, PreprocessConfig{}, options);
    CHECK(out.report.stages == std::vector<Stage>(kStageOrder.begin(), kStageOrder.end()));
    for (const auto& [type, audio] : out.stems.stems) {
        const double lufs = *integrated_loudness(audio).integrated_lufs;
        CHECK(lufs == Catch::Approx(fixture_analysis().profiles.at(type).loudness_lufs).margin(0.1));
        CHECK(audio.size() == song.stems.at(type).size());
    }
    const auto& steps = out.intermediates.at(StemType::vocals);
    REQUIRE(steps.size() == 5);
    CHECK(steps.front().first == Stage::reverb);
    // Drums are not reverb-eligible: the reverb stage passes them through.
    CHECK(out.intermediates.at(StemType::drums).front().second == song.stems.at(StemType::drums));

    const nlohmann::json manifest = nlohmann::json::parse(song_report_json(out.report));
    CHECK(manifest.at("song_id") == song.song_id);
    CHECK(manifest.at("stages").size() == 5);
}

TEST_CASE("normalization is deterministic for a seed", "[pipeline]") {
    const StemSet song = fixture_songs().front();
    const auto library = fixture_library();
    NormalizeOptions options;
    options.seed = 9;
    options.ir_library = library;
    options.skip = {Stage::drc, Stage::eq};
    const auto a = normalize_song(song, fixture_analysis().profiles, PreprocessConfig{}, options);
    const auto b = normalize_song(song, fixture_analysis().profiles, PreprocessConfig{}, options);
    CHECK(a.stems.stems == b.stems.stems);
}

TEST_CASE("missing profiles and rate mismatches are data errors", "[pipeline]") {
    const StemSet song = fixture_songs().front();
    ProfileSet partial = fixture_analysis().profiles;
    partial.erase(StemType::bass);
    NormalizeOptions options;
    options.skip = {Stage::reverb};
    CHECK_THROWS_WITH(normalize_song(song, partial, PreprocessConfig{}, options), ContainsSubstring("bass"));

    ProfileSet other_rate = fixture_analysis().profiles;
    other_rate.at(StemType::drums).sample_rate = 48000.0;
    CHECK_THROWS_AS(normalize_song(song, other_rate, PreprocessConfig{}, options), DataError);
}

TEST_CASE("dataset analysis skips songs missing a requested stem and fingerprints the corpus", "[pipeline]") {
    const fs::path root = fs::temp_directory_path() / "stemnorm_test_pipeline";
    fs::remove_all(root);
    const auto songs = fixture_songs();
    for (const StemSet& s : songs) {
        write_song(root / s.song_id, s);
    }
    StemSet partial = songs.front();
    partial.stems.erase(StemType::vocals);
    write_song(root / "song_2", partial);

    AnalyzeOptions options;
    options.stem_types = {StemType::vocals, StemType::bass};
    const CorpusAnalysis a = analyze_corpus(root, PreprocessConfig{}, options);
    CHECK(a.songs == std::vector<std::string>{"song_0", "song_1"});
    CHECK(a.profiles.at(StemType::bass).song_count == 2);
    // Skipped songs are listed first, ahead of per-stem analysis notes.
    REQUIRE_FALSE(a.warnings.empty());
    CHECK_THAT(a.warnings[0], ContainsSubstring("song_2"));
    CHECK(a.profiles.at(StemType::bass).corpus_fingerprint.size() == 16);
    CHECK_THROWS_AS(analyze_corpus(root / "missing", PreprocessConfig{}, options), DataError);
}
