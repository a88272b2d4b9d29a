// stemnorm: analyze a multitrack corpus, normalize stems toward its profiles,
// and evaluate mixes.
//
// Exit codes: 0 success, 1 internal error, 2 bad input or usage.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stemnorm/config.hpp"
#include "stemnorm/dataset.hpp"
#include "stemnorm/error.hpp"
#include "stemnorm/evaluation.hpp"
#include "stemnorm/levels.hpp"
#include "stemnorm/numeric.hpp"
#include "stemnorm/pipeline.hpp"
#include "stemnorm/profile.hpp"
#include "stemnorm/synthetic.hpp"
#include "stemnorm/version.hpp"
#include "stemnorm/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stemnorm;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitData = 2;

struct GlobalOptions {
    std::string config_path;
    std::size_t workers = 1;
    bool resample = false;
};

PreprocessConfig load_global_config(const GlobalOptions& g) {
    std::string path = g.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv(kConfigEnvVar)) {
            path = env;
        }
    }
    return path.empty() ? PreprocessConfig{} : load_config(path);
}

std::vector<StemType> parse_stems(const std::vector<std::string>& names) {
    if (names.empty()) {
        return {kAllStemTypes.begin(), kAllStemTypes.end()};
    }
    std::vector<StemType> out;
    for (const std::string& n : names) {
        const auto t = parse_stem_type(n);
        if (!t) {
            throw DataError("unknown stem type '" + n + "' (expected vocals, drums, bass or other)");
        }
        if (std::find(out.begin(), out.end(), *t) == out.end()) {
            out.push_back(*t);
        }
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << text << '\n';
}

void write_run_metadata(const fs::path& dir, const PreprocessConfig& config) {
    fs::create_directories(dir);
    write_text(dir / "config.json", config_to_json(config));
    write_text(dir / "versions.json", versions_json());
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Least-squares slope of the mean spectrum in dB per octave over 100 Hz to 10 kHz.
std::optional<double> spectral_tilt(const AverageSpectrum& s) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t b = 1; b < s.bins(); ++b) {
        const double f = s.bin_frequency(b);
        if (f < 100.0 || f > 10000.0) {
            continue;
        }
        const double x = std::log2(f);
        const double y = linear_to_db(s.magnitude[b]);
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || den == 0.0) {
        return std::nullopt;
    }
    return (n * sxy - sx * sy) / den;
}

int run_analyze(const GlobalOptions& g, const fs::path& dataset, const fs::path& profiles_dir,
                const std::vector<std::string>& stem_names) {
    const PreprocessConfig config = load_global_config(g);
    AnalyzeOptions options;
    options.stem_types = parse_stems(stem_names);
    options.workers = g.workers;
    options.resample = g.resample;
    const CorpusAnalysis analysis = analyze_corpus(dataset, config, options);
    for (const std::string& w : analysis.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    save_profiles(profiles_dir, analysis.profiles);
    write_run_metadata(profiles_dir, config);

    std::cout << "analyzed " << analysis.songs.size() << " songs\n";
    std::cout << std::left << std::setw(8) << "stem" << std::right << std::setw(10) << "L (LUFS)" << std::setw(10)
              << "P_mu" << std::setw(10) << "P_sigma" << std::setw(14) << "tilt dB/oct" << '\n';
    std::cout << std::fixed << std::setprecision(2);
    for (const auto& [type, p] : analysis.profiles) {
        const auto cell = [](const std::optional<double>& v) {
            std::ostringstream s;
            s << std::fixed << std::setprecision(2);
            if (v) {
                s << *v;
            } else {
                s << "-";
            }
            return s.str();
        };
        std::cout << std::left << std::setw(8) << to_string(type) << std::right << std::setw(10) << p.loudness_lufs
                  << std::setw(10) << cell(p.peak_mu) << std::setw(10) << cell(p.peak_sigma) << std::setw(14)
                  << cell(spectral_tilt(p.spectrum)) << '\n';
    }
    return 0;
}

struct NormalizeArgs {
    fs::path dataset;
    fs::path profiles;
    fs::path out;
    std::string mode = "train";
    std::uint64_t seed = 0;
    std::vector<std::string> skip;
    fs::path ir_library;
    std::vector<std::string> stems;
    bool keep_intermediates = false;
};

int run_normalize(const GlobalOptions& g, const NormalizeArgs& a) {
    const PreprocessConfig config = load_global_config(g);
    const std::vector<StemType> types = parse_stems(a.stems);
    NormalizeOptions options;
    const auto mode = parse_run_mode(a.mode);
    if (!mode) {
        throw DataError("unknown mode '" + a.mode + "' (expected train or inference)");
    }
    options.mode = *mode;
    options.seed = a.seed;
    options.keep_intermediates = a.keep_intermediates;
    for (const std::string& s : a.skip) {
        const auto stage = parse_stage(s);
        if (!stage) {
            throw DataError("unknown stage '" + s + "' (expected reverb, eq, drc, panning or loudness)");
        }
        options.skip.insert(*stage);
    }

    IrLibraryLoad irs;
    if (!options.skip.contains(Stage::reverb)) {
        if (a.ir_library.empty()) {
            throw DataError("--ir-library is required unless the reverb stage is skipped");
        }
        irs = load_ir_library(a.ir_library, config.session_rate, g.resample);
        for (const std::string& s : irs.skipped) {
            std::cerr << "warning: impulse response " << s << '\n';
        }
        options.ir_library = irs.entries;
    }

    const ProfileSet profiles = load_profiles(a.profiles, types, config.session_rate);
    const std::vector<SongEntry> songs = list_songs(a.dataset);
    write_run_metadata(a.out, config);

    const ReadOptions read{config.session_rate, g.resample};
    std::mutex log_mutex;
    std::vector<std::string> failures(songs.size());
    parallel_for(songs.size(), g.workers, [&](std::size_t i) {
        const SongEntry& song = songs[i];
        try {
            StemSet stems = load_song(song, types, read);
            NormalizedSong result = normalize_song(stems, profiles, config, options);
            const fs::path dir = a.out / song.song_id;
            write_song(dir, result.stems);
            StereoWaveform mix = StereoWaveform::silence(result.stems.stems.begin()->second.size(),
                                                         config.session_rate);
            for (const auto& [type, w] : result.stems.stems) {
                for (std::size_t j = 0; j < w.size(); ++j) {
                    mix.left[j] += w.left[j];
                    mix.right[j] += w.right[j];
                }
            }
            write_audio(mixture_path(dir), mix);
            for (const auto& [type, stages] : result.intermediates) {
                for (const auto& [stage, audio] : stages) {
                    const fs::path sub = dir / "intermediates";
                    fs::create_directories(sub);
                    write_audio(sub / (std::string(to_string(type)) + "." + std::string(to_string(stage)) + ".wav"),
                                audio);
                }
            }
            write_text(dir / "manifest.json", song_report_json(result.report));
            const std::lock_guard lock(log_mutex);
            std::cout << song.song_id << ": ok\n";
            for (const std::string& w : result.report.warnings) {
                std::cerr << "warning: " << song.song_id << ": " << w << '\n';
            }
        } catch (const DataError& e) {
            failures[i] = e.what();
            const std::lock_guard lock(log_mutex);
            std::cerr << "error: " << song.song_id << ": " << e.what() << '\n';
        }
    });
    const auto failed = std::count_if(failures.begin(), failures.end(), [](const auto& f) { return !f.empty(); });
    std::cout << "normalized " << songs.size() - static_cast<std::size_t>(failed) << " of " << songs.size()
              << " songs\n";
    return failed == 0 ? 0 : kExitData;
}

StereoWaveform concatenate(const std::vector<StereoWaveform>& parts) {
    StereoWaveform out;
    out.sample_rate = parts.front().sample_rate;
    out.left.clear();
    out.right.clear();
    for (const StereoWaveform& p : parts) {
        out.left.insert(out.left.end(), p.left.begin(), p.left.end());
        out.right.insert(out.right.end(), p.right.begin(), p.right.end());
    }
    return out;
}

json mape_json(const MapeReport& r) {
    json features = json::object();
    for (const auto& [name, v] : r.by_feature) {
        features[name] = v;
    }
    json groups = json::object();
    for (const auto& [group, v] : r.by_group) {
        groups[std::string(to_string(group))] = v;
    }
    return {{"features", features},
            {"groups", groups},
            {"candidate_lufs", optional_json(r.candidate.loudness_lufs)},
            {"reference_lufs", optional_json(r.reference.loudness_lufs)},
            {"trimmed", r.trimmed}};
}

int run_evaluate(const GlobalOptions& g, const fs::path& candidate_root, const fs::path& reference_root,
                 const fs::path& out_dir, bool joint) {
    const PreprocessConfig config = load_global_config(g);
    std::map<std::string, SongEntry> candidates;
    for (const SongEntry& s : list_songs(candidate_root)) {
        candidates.emplace(s.song_id, s);
    }
    std::vector<std::pair<SongEntry, SongEntry>> pairs;
    std::vector<std::string> unmatched;
    for (const SongEntry& ref : list_songs(reference_root)) {
        const auto it = candidates.find(ref.song_id);
        if (it == candidates.end()) {
            unmatched.push_back(ref.song_id);
            continue;
        }
        pairs.emplace_back(it->second, ref);
        candidates.erase(it);
    }
    for (const auto& [id, s] : candidates) {
        unmatched.push_back(id);
    }
    if (!unmatched.empty()) {
        std::string list;
        for (const std::string& id : unmatched) {
            list += (list.empty() ? "" : ", ") + id;
        }
        throw DataError("songs present on only one side: " + list);
    }
    if (pairs.empty()) {
        throw DataError("no songs to evaluate");
    }

    const ReadOptions read{config.session_rate, g.resample};
    std::vector<StereoWaveform> cand(pairs.size());
    std::vector<StereoWaveform> ref(pairs.size());
    parallel_for(pairs.size(), g.workers, [&](std::size_t i) {
        cand[i] = read_audio(mixture_path(pairs[i].first.directory), read);
        ref[i] = read_audio(mixture_path(pairs[i].second.directory), read);
    });

    json songs = json::object();
    std::vector<MapeReport> reports(pairs.size());
    parallel_for(pairs.size(), g.workers,
                 [&](std::size_t i) { reports[i] = mape_report(cand[i], ref[i], config.features); });

    std::map<std::string, double> aggregate;
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        songs[pairs[i].first.song_id] = mape_json(reports[i]);
        for (const auto& [name, v] : reports[i].by_feature) {
            aggregate[name] += v;
            ++counts[name];
        }
        for (const auto& [group, v] : reports[i].by_group) {
            aggregate["group:" + std::string(to_string(group))] += v;
            ++counts["group:" + std::string(to_string(group))];
        }
    }
    json summary = json::object();
    if (joint) {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const std::size_t n = std::min(cand[i].size(), ref[i].size());
            cand[i].left.resize(n);
            cand[i].right.resize(n);
            ref[i].left.resize(n);
            ref[i].right.resize(n);
        }
        const MapeReport r = mape_report(concatenate(cand), concatenate(ref), config.features);
        summary = mape_json(r);
        summary["aggregate"] = "joint";
    } else {
        json features = json::object();
        json groups = json::object();
        for (const auto& [key, sum] : aggregate) {
            const double mean = sum / static_cast<double>(counts[key]);
            if (key.starts_with("group:")) {
                groups[key.substr(6)] = mean;
            } else {
                features[key] = mean;
            }
        }
        summary = {{"features", features}, {"groups", groups}, {"aggregate", "per_song_mean"}};
    }

    fs::create_directories(out_dir);
    const json doc = {{"songs", songs}, {"summary", summary}, {"song_count", pairs.size()}};
    write_text(out_dir / "evaluation.json", doc.dump(2));

    std::ofstream csv(out_dir / "evaluation.csv");
    if (!csv) {
        throw DataError("cannot write " + (out_dir / "evaluation.csv").string());
    }
    csv << "song";
    for (std::string_view name : feature_names()) {
        csv << ',' << name;
    }
    csv << ",loudness\n";
    csv << std::setprecision(10);
    const auto row = [&](const std::string& label, const std::map<std::string, double>& values) {
        csv << label;
        for (std::string_view name : feature_names()) {
            csv << ',';
            if (const auto it = values.find(std::string(name)); it != values.end()) {
                csv << it->second;
            }
        }
        csv << ',';
        if (const auto it = values.find("loudness"); it != values.end()) {
            csv << it->second;
        }
        csv << '\n';
    };
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        row(pairs[i].first.song_id, reports[i].by_feature);
    }

    std::cout << "evaluated " << pairs.size() << " songs\n" << std::fixed << std::setprecision(4);
    for (const auto& [group, v] : summary["groups"].items()) {
        std::cout << std::left << std::setw(10) << group << " MAPE " << v.get<double>() << '\n';
    }
    return 0;
}

int run_loss(const GlobalOptions& g, const fs::path& target, const fs::path& estimate, const std::string& variant) {
    const PreprocessConfig config = load_global_config(g);
    if (variant != "a" && variant != "b") {
        throw DataError("unknown loss variant '" + variant + "' (expected a or b)");
    }
    const ReadOptions read{config.session_rate, g.resample};
    const StereoWaveform y = read_audio(target, read);
    const StereoWaveform y_hat = read_audio(estimate, read);
    const LossVariant v = variant == "a" ? LossVariant::a : LossVariant::b;
    const LossBreakdown r = stereo_invariant_loss(y, y_hat, v, config.loss);
    const json doc = {{"variant", variant},      {"total", r.total(v)},         {"sc_sum", r.sc_sum},
                      {"sc_diff", r.sc_diff},    {"l1log_sum", r.l1log_sum},    {"l1log_diff", r.l1log_diff},
                      {"l2_sum", r.l2_sum},      {"l2_diff", r.l2_diff}};
    std::cout << doc.dump(2) << '\n';
    return 0;
}

int run_synth(const fs::path& out, std::size_t songs, std::uint64_t seed, double duration, double rate) {
    SyntheticCorpusOptions options;
    options.songs = songs;
    options.seed = seed;
    options.song.duration_s = duration;
    options.song.sample_rate = rate;
    write_synthetic_corpus(out, options);
    std::cout << "wrote " << songs << " songs to " << (out / "dataset").string() << " and impulse responses to "
              << (out / "impulse_responses").string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multitrack stem effect normalization"};
    app.set_version_flag("--version", library_version());
    app.require_subcommand(1);

    GlobalOptions g;
    g.workers = default_worker_count();
    app.add_option("--config", g.config_path, "JSON config overrides (default: $STEMNORM_CONFIG)");
    app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--resample", g.resample, "Resample inputs to the session rate instead of refusing them");

    fs::path dataset, profiles_dir, out_dir, candidate, reference, target, estimate;
    std::vector<std::string> stems;

    auto* analyze = app.add_subcommand("analyze", "Build per-stem-type profiles from a dataset");
    analyze->add_option("--dataset", dataset, "Dataset root (<song>/<stem>.wav)")->required();
    analyze->add_option("--profiles", profiles_dir, "Output directory for profiles")->required();
    analyze->add_option("--stems", stems, "Stem types to analyze (default: all)");

    NormalizeArgs na;
    auto* normalize = app.add_subcommand("normalize", "Normalize a dataset toward profiles");
    normalize->add_option("--dataset", na.dataset, "Dataset root")->required();
    normalize->add_option("--profiles", na.profiles, "Profile directory from analyze")->required();
    normalize->add_option("--out", na.out, "Output dataset root")->required();
    normalize->add_option("--mode", na.mode, "train or inference")->capture_default_str();
    normalize->add_option("--seed", na.seed, "Seed for reverb sampling")->capture_default_str();
    normalize->add_option("--skip", na.skip, "Stage to skip (repeatable): reverb, eq, drc, panning, loudness");
    normalize->add_option("--ir-library", na.ir_library, "Directory of impulse-response WAV files");
    normalize->add_option("--stems", na.stems, "Stem types to normalize (default: all)");
    normalize->add_flag("--keep-intermediates", na.keep_intermediates, "Also write each stage's output");

    bool joint = false;
    auto* evaluate = app.add_subcommand("evaluate", "Feature MAPE of candidate mixes against reference mixes");
    evaluate->add_option("--candidate", candidate, "Candidate dataset root")->required();
    evaluate->add_option("--reference", reference, "Reference dataset root")->required();
    evaluate->add_option("--out", out_dir, "Directory for evaluation.json and evaluation.csv")->required();
    evaluate->add_flag("--joint", joint, "Aggregate over the concatenated corpus instead of averaging songs");

    std::string variant = "b";
    auto* loss = app.add_subcommand("loss", "Stereo-invariant spectral loss between two files");
    loss->add_option("--target", target, "Reference WAV")->required();
    loss->add_option("--estimate", estimate, "Estimate WAV")->required();
    loss->add_option("--variant", variant, "a (SC + L1 log) or b (L2 + L1 log)")->capture_default_str();

    std::size_t synth_songs = 3;
    std::uint64_t synth_seed = 0;
    double synth_duration = 12.0;
    double synth_rate = kDefaultSampleRate;
    auto* synth = app.add_subcommand("synth-corpus", "Write a small synthetic dataset and IR library");
    synth->add_option("--out", out_dir, "Output root")->required();
    synth->add_option("--songs", synth_songs, "Number of songs")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
    synth->add_option("--duration", synth_duration, "Song length in seconds")->capture_default_str();
    synth->add_option("--rate", synth_rate, "Sample rate in Hz")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitData;
    }

    try {
        if (*analyze) {
            return run_analyze(g, dataset, profiles_dir, stems);
        }
        if (*normalize) {
            return run_normalize(g, na);
        }
        if (*evaluate) {
            return run_evaluate(g, candidate, reference, out_dir, joint);
        }
        if (*loss) {
            return run_loss(g, target, estimate, variant);
        }
        if (*synth) {
            return run_synth(out_dir, synth_songs, synth_seed, synth_duration, synth_rate);
        }
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
