#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stemnorm/error.hpp"
#include "stemnorm/profile.hpp"

namespace fs = std::filesystem;
using namespace stemnorm;
using Catch::Matchers::ContainsSubstring;

namespace {

StemTypeProfile sample_profile(StemType type = StemType::drums) {
    StemTypeProfile p;
    p.stem_type = type;
    p.sample_rate = 44100.0;
    p.corpus_fingerprint = "0123456789abcdef";
    p.song_count = 3;
    p.loudness_lufs = -17.123456789012345;
    p.peak_mu = -11.1;
    p.peak_sigma = 1.0 / 3.0;
    p.spectrum = {std::vector<double>(65536 / 2 + 1), 65536, 44100.0, type};
    for (std::size_t k = 0; k < p.spectrum.magnitude.size(); ++k) {
        p.spectrum.magnitude[k] = 1.0 / (1.0 + std::sqrt(static_cast<double>(k))) + 1e-17 * static_cast<double>(k);
    }
    p.panning = {std::vector<double>(1025), 2048, type};
    for (std::size_t k = 0; k < p.panning.similarity.size(); ++k) {
        p.panning.similarity[k] = std::sin(static_cast<double>(k)) * 0.5 + 0.5;
    }
    return p;
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "stemnorm_test_profile";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("JSON round trip is lossless", "[profile]") {
    const StemTypeProfile p = sample_profile();
    CHECK(profile_from_json(profile_to_json(p)) == p);

    StemTypeProfile quiet = sample_profile(StemType::vocals);
    quiet.peak_mu.reset();
    quiet.peak_sigma.reset();
    CHECK(profile_from_json(profile_to_json(quiet)) == quiet);
}

TEST_CASE("profile files round trip", "[profile]") {
    const fs::path dir = scratch_dir();
    ProfileSet set{{StemType::drums, sample_profile(StemType::drums)}, {StemType::bass, sample_profile(StemType::bass)}};
    save_profiles(dir, set);
    const std::vector<StemType> types{StemType::bass, StemType::drums};
    CHECK(load_profiles(dir, types) == set);
    const std::vector<StemType> missing{StemType::vocals};
    CHECK_THROWS_WITH(load_profiles(dir, missing), ContainsSubstring(profile_file_name(StemType::vocals)));
}

TEST_CASE("truncated files are errors, not crashes", "[profile]") {
    const fs::path dir = scratch_dir();
    const std::string text = profile_to_json(sample_profile());
    for (std::size_t cut : {std::size_t{0}, std::size_t{10}, text.size() / 2, text.size() - 2}) {
        std::ofstream(dir / "cut.json") << text.substr(0, cut);
        CHECK_THROWS_AS(load_profile(dir / "cut.json"), DataError);
    }
    CHECK_THROWS_AS(load_profile(dir / "absent.json"), DataError);
}

TEST_CASE("unknown schema versions are refused", "[profile]") {
    std::string text = profile_to_json(sample_profile());
    const std::string key = "\"schema_version\": 1";
    const auto at = text.find(key);
    REQUIRE(at != std::string::npos);
    text.replace(at, key.size(), "\"schema_version\": 99");
    CHECK_THROWS_WITH(profile_from_json(text), ContainsSubstring("schema_version"));
}

TEST_CASE("profiles built at another rate are refused", "[profile]") {
    const fs::path dir = scratch_dir();
    save_profile(dir / "p.json", sample_profile());
    CHECK_THROWS_WITH(load_profile(dir / "p.json", 48000.0), ContainsSubstring("sample-rate mismatch"));
    CHECK_NOTHROW(load_profile(dir / "p.json", 44100.0));
}

TEST_CASE("inconsistent vector lengths fail validation", "[profile]") {
    StemTypeProfile p = sample_profile();
    p.panning.similarity.pop_back();
    CHECK_THROWS_AS(p.validate(), DataError);
    CHECK_THROWS_AS(profile_from_json(profile_to_json(p)), DataError);
}
