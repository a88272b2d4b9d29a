#include "stemnorm/profile.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stemnorm/error.hpp"

namespace stemnorm {
namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void StemTypeProfile::validate() const {
    const auto require = [this](bool ok, const std::string& what) {
        if (!ok) {
            throw DataError("invalid " + std::string(to_string(stem_type)) + " profile: " + what);
        }
    };
    require(sample_rate > 0.0, "sample rate must be positive");
    require(std::isfinite(loudness_lufs), "loudness must be finite");
    require(peak_mu.has_value() == peak_sigma.has_value(), "peak mean and deviation must be given together");
    require(spectrum.fft_size > 0 && spectrum.magnitude.size() == spectrum.fft_size / 2 + 1,
            "spectrum length does not match its FFT size");
    for (double m : spectrum.magnitude) {
        require(std::isfinite(m) && m > 0.0, "spectrum magnitudes must be positive and finite");
    }
    require(panning.fft_size > 0 && panning.similarity.size() == panning.fft_size / 2 + 1,
            "panning length does not match its FFT size");
    for (double s : panning.similarity) {
        require(s >= 0.0 && s <= 1.0, "similarity values must lie in [0, 1]");
    }
}

std::string profile_to_json(const StemTypeProfile& p) {
    json root = {
        {"schema_version", kProfileSchemaVersion},
        {"stem_type", std::string(to_string(p.stem_type))},
        {"sample_rate", p.sample_rate},
        {"corpus_fingerprint", p.corpus_fingerprint},
        {"song_count", p.song_count},
        {"loudness_lufs", p.loudness_lufs},
        {"peak", {{"mu", optional_number(p.peak_mu)}, {"sigma", optional_number(p.peak_sigma)}}},
        {"spectrum", {{"fft_size", p.spectrum.fft_size}, {"magnitude", p.spectrum.magnitude}}},
        {"panning", {{"fft_size", p.panning.fft_size}, {"similarity", p.panning.similarity}}},
    };
    return root.dump(1);
}

StemTypeProfile profile_from_json(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("profile is not valid JSON: ") + e.what());
    }
    if (!root.is_object() || !root.contains("schema_version")) {
        throw DataError("profile has no schema_version");
    }
    if (root["schema_version"] != kProfileSchemaVersion) {
        throw DataError("unsupported profile schema_version " + root["schema_version"].dump() + " (expected " +
                        std::to_string(kProfileSchemaVersion) + ")");
    }
    StemTypeProfile p;
    try {
        const auto type = parse_stem_type(root.at("stem_type").get<std::string>());
        if (!type) {
            throw DataError("profile names an unknown stem type");
        }
        p.stem_type = *type;
        p.sample_rate = root.at("sample_rate").get<double>();
        p.corpus_fingerprint = root.at("corpus_fingerprint").get<std::string>();
        p.song_count = root.at("song_count").get<std::size_t>();
        p.loudness_lufs = root.at("loudness_lufs").get<double>();
        const json& peak = root.at("peak");
        if (!peak.at("mu").is_null()) {
            p.peak_mu = peak.at("mu").get<double>();
        }
        if (!peak.at("sigma").is_null()) {
            p.peak_sigma = peak.at("sigma").get<double>();
        }
        p.spectrum.fft_size = root.at("spectrum").at("fft_size").get<std::size_t>();
        p.spectrum.magnitude = root.at("spectrum").at("magnitude").get<std::vector<double>>();
        p.spectrum.sample_rate = p.sample_rate;
        p.spectrum.stem_type = p.stem_type;
        p.panning.fft_size = root.at("panning").at("fft_size").get<std::size_t>();
        p.panning.similarity = root.at("panning").at("similarity").get<std::vector<double>>();
        p.panning.stem_type = p.stem_type;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed profile: ") + e.what());
    }
    p.validate();
    return p;
}

void save_profile(const std::filesystem::path& path, const StemTypeProfile& profile) {
    profile.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write profile " + path.string());
    }
    out << profile_to_json(profile) << '\n';
    if (!out) {
        throw DataError("failed writing profile " + path.string());
    }
}

StemTypeProfile load_profile(const std::filesystem::path& path, std::optional<double> session_rate) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open profile " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    StemTypeProfile p;
    try {
        p = profile_from_json(text.str());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    if (session_rate && *session_rate != p.sample_rate) {
        std::ostringstream msg;
        msg << "sample-rate mismatch: profile " << path.string() << " was built at " << p.sample_rate
            << " Hz but the session runs at " << *session_rate << " Hz";
        throw DataError(msg.str());
    }
    return p;
}

std::string profile_file_name(StemType type) { return std::string(to_string(type)) + ".profile.json"; }

void save_profiles(const std::filesystem::path& dir, const ProfileSet& profiles) {
    std::filesystem::create_directories(dir);
    for (const auto& [type, profile] : profiles) {
        save_profile(dir / profile_file_name(type), profile);
    }
}

ProfileSet load_profiles(const std::filesystem::path& dir, std::span<const StemType> types,
                         std::optional<double> session_rate) {
    ProfileSet out;
    for (StemType type : types) {
        const auto path = dir / profile_file_name(type);
        if (!std::filesystem::exists(path)) {
            throw DataError("missing profile " + path.string());
        }
        StemTypeProfile p = load_profile(path, session_rate);
        if (p.stem_type != type) {
            throw DataError("profile " + path.string() + " describes " + std::string(to_string(p.stem_type)));
        }
        out.emplace(type, std::move(p));
    }
    return out;
}

}  // namespace stemnorm
