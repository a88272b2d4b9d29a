#include "stemnorm/pipeline.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

#include "stemnorm/dataset.hpp"
#include "stemnorm/error.hpp"
#include "stemnorm/levels.hpp"
#include "stemnorm/loudness.hpp"
#include "stemnorm/numeric.hpp"
#include "stemnorm/wav.hpp"

namespace stemnorm {
namespace {

using nlohmann::json;
using StemLoader = std::function<StereoWaveform(std::size_t)>;

struct TypeAnalysis {
    std::optional<StemTypeProfile> profile;
    std::vector<std::vector<std::string>> warnings;  // per song
};

// Progressive analysis of one stem type over `count` songs.
TypeAnalysis analyze_type(StemType type, std::size_t count, const StemLoader& load,
                          std::span<const std::string> song_ids, const PreprocessConfig& config, std::size_t workers) {
    TypeAnalysis result;
    result.warnings.resize(count);
    std::vector<StereoWaveform> audio(count);
    std::vector<char> usable(count, 0);
    std::vector<AverageSpectrum> spectra(count);
    const std::string stem(to_string(type));

    parallel_for(count, workers, [&](std::size_t i) {
        StereoWaveform x = load(i);
        const LoudnessNormalized norm = normalize_loudness(x, config.eq_prenormalize_lufs, config.max_loudness_gain_db);
        if (norm.silent) {
            result.warnings[i].push_back(song_ids[i] + ": " + stem + " is silent; excluded");
            return;
        }
        spectra[i] = stem_mean_spectrum(norm.audio, config.eq);
        audio[i] = norm.audio;
        usable[i] = 1;
    });
    std::vector<AverageSpectrum> kept;
    for (std::size_t i = 0; i < count; ++i) {
        if (usable[i]) {
            kept.push_back(std::move(spectra[i]));
        }
    }
    if (kept.empty()) {
        return result;
    }
    AverageSpectrum target = corpus_average_spectrum(kept);
    target.stem_type = type;

    std::vector<std::optional<OnsetPeakStats>> stats(count);
    const OnsetConfig onsets = config.onsets_for(type);
    parallel_for(count, workers, [&](std::size_t i) {
        if (!usable[i]) {
            return;
        }
        audio[i] = peak_normalize(match_eq(audio[i], target, config.eq), config.drc.peak_normalize_db);
        stats[i] = measure_peak_stats(audio[i], onsets, config.drc.peaks);
    });
    CompensatedSum mu_sum;
    CompensatedSum sigma_sum;
    std::size_t with_transients = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (stats[i]) {
            mu_sum.add(stats[i]->mu);
            sigma_sum.add(stats[i]->sigma);
            ++with_transients;
        } else if (usable[i]) {
            result.warnings[i].push_back(song_ids[i] + ": " + stem + " has no detectable transients");
        }
    }
    std::optional<DrcTarget> drc_target;
    if (with_transients > 0) {
        const auto n = static_cast<double>(with_transients);
        drc_target = DrcTarget{mu_sum.value() / n, sigma_sum.value() / n};
    }

    std::vector<SimilarityAccumulator> accumulators(count, SimilarityAccumulator(config.panning.fft_size));
    const DrcConfig drc = [&] {
        DrcConfig c = config.drc;
        c.onsets = onsets;
        return c;
    }();
    parallel_for(count, workers, [&](std::size_t i) {
        if (!usable[i]) {
            return;
        }
        if (drc_target && stats[i]) {
            audio[i] = normalize_drc(audio[i], *drc_target, config.timing_for(type), drc).audio;
        }
        accumulators[i].add_waveform(audio[i], config.panning);
    });
    SimilarityAccumulator similarity(config.panning.fft_size);
    for (std::size_t i = 0; i < count; ++i) {
        if (usable[i]) {
            similarity.merge(accumulators[i]);
        }
    }
    const AveragePanning panning = similarity.finish(config.panning, type);

    std::vector<std::optional<double>> loudness(count);
    parallel_for(count, workers, [&](std::size_t i) {
        if (!usable[i]) {
            return;
        }
        loudness[i] = integrated_loudness(repan(audio[i], panning, config.panning)).integrated_lufs;
        audio[i] = StereoWaveform{};
    });
    CompensatedSum lufs_sum;
    std::size_t measured = 0;
    std::size_t songs = 0;
    for (std::size_t i = 0; i < count; ++i) {
        songs += usable[i] ? 1 : 0;
        if (loudness[i]) {
            lufs_sum.add(*loudness[i]);
            ++measured;
        }
    }
    if (measured == 0) {
        return result;
    }

    StemTypeProfile profile;
    profile.stem_type = type;
    profile.sample_rate = target.sample_rate;
    profile.song_count = songs;
    profile.loudness_lufs = lufs_sum.value() / static_cast<double>(measured);
    if (drc_target) {
        profile.peak_mu = drc_target->p_mu;
        profile.peak_sigma = drc_target->p_sigma;
    }
    profile.spectrum = std::move(target);
    profile.panning = panning;
    result.profile = std::move(profile);
    return result;
}

CorpusAnalysis run_analysis(std::size_t count, const std::function<StereoWaveform(std::size_t, StemType)>& load,
                            std::vector<std::string> song_ids, const PreprocessConfig& config,
                            const AnalyzeOptions& options, const std::string& fingerprint) {
    CorpusAnalysis out;
    out.songs = song_ids;
    for (StemType type : options.stem_types) {
        TypeAnalysis analysis = analyze_type(
            type, count, [&](std::size_t i) { return load(i, type); }, song_ids, config, options.workers);
        for (auto& w : analysis.warnings) {
            out.warnings.insert(out.warnings.end(), w.begin(), w.end());
        }
        if (!analysis.profile) {
            throw DataError("no usable " + std::string(to_string(type)) + " stems in the corpus");
        }
        analysis.profile->corpus_fingerprint = fingerprint;
        out.profiles.emplace(type, std::move(*analysis.profile));
    }
    return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string_view to_string(Stage stage) noexcept {
    switch (stage) {
        case Stage::reverb: return "reverb";
        case Stage::eq: return "eq";
        case Stage::drc: return "drc";
        case Stage::panning: return "panning";
        case Stage::loudness: return "loudness";
    }
    return "unknown";
}

std::optional<Stage> parse_stage(std::string_view name) noexcept {
    for (Stage s : kStageOrder) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

CorpusAnalysis analyze_stem_sets(std::span<const StemSet> songs, const PreprocessConfig& config,
                                 const AnalyzeOptions& options) {
    if (songs.empty()) {
        throw DataError("no songs to analyze");
    }
    std::vector<std::string> ids;
    for (const StemSet& s : songs) {
        for (StemType type : options.stem_types) {
            if (!s.contains(type)) {
                throw DataError("song " + s.song_id + " has no " + std::string(to_string(type)) + " stem");
            }
            if (s.stems.at(type).sample_rate != config.session_rate) {
                throw DataError("song " + s.song_id + " is not at the session sample rate");
            }
        }
        ids.push_back(s.song_id);
    }
    return run_analysis(
        songs.size(), [&](std::size_t i, StemType type) { return songs[i].stems.at(type); }, ids, config, options,
        "in-memory");
}

CorpusAnalysis analyze_corpus(const std::filesystem::path& root, const PreprocessConfig& config,
                              const AnalyzeOptions& options) {
    config.validate();
    std::vector<SongEntry> songs;
    std::vector<std::string> skipped;
    for (const SongEntry& song : list_songs(root)) {
        const auto missing = std::find_if(options.stem_types.begin(), options.stem_types.end(), [&](StemType t) {
            return !std::filesystem::exists(stem_path(song.directory, t));
        });
        if (missing != options.stem_types.end()) {
            skipped.push_back(song.song_id + ": missing " + std::string(to_string(*missing)) + " stem; song skipped");
            continue;
        }
        songs.push_back(song);
    }
    if (songs.empty()) {
        throw DataError("no usable songs under " + root.string());
    }
    std::vector<std::string> ids;
    for (const SongEntry& s : songs) {
        ids.push_back(s.song_id);
    }
    const ReadOptions read{config.session_rate, options.resample};
    CorpusAnalysis out = run_analysis(
        songs.size(),
        [&](std::size_t i, StemType type) { return read_audio(stem_path(songs[i].directory, type), read); }, ids,
        config, options, corpus_fingerprint(songs, options.stem_types));
    out.warnings.insert(out.warnings.begin(), skipped.begin(), skipped.end());
    return out;
}

NormalizedSong normalize_song(const StemSet& stems, const ProfileSet& profiles, const PreprocessConfig& config,
                              const NormalizeOptions& options) {
    NormalizedSong out;
    out.report.song_id = stems.song_id;
    out.report.mode = options.mode;
    out.report.seed = options.seed;
    for (const auto& [type, audio] : stems.stems) {
        const auto it = profiles.find(type);
        if (it == profiles.end()) {
            throw DataError("no profile for stem type " + std::string(to_string(type)));
        }
        if (it->second.sample_rate != audio.sample_rate) {
            throw DataError("sample-rate mismatch: " + std::string(to_string(type)) + " profile is at " +
                            std::to_string(it->second.sample_rate) + " Hz, stem at " +
                            std::to_string(audio.sample_rate) + " Hz");
        }
    }
    const auto enabled = [&](Stage s) { return !options.skip.contains(s); };
    for (Stage s : kStageOrder) {
        if (enabled(s)) {
            out.report.stages.push_back(s);
        }
    }

    StemSet current = stems;
    if (enabled(Stage::reverb)) {
        AugmentedStems augmented = augment_reverb(current, options.ir_library, options.mode, options.seed, config.reverb);
        current = std::move(augmented.stems);
        for (ReverbChoice& choice : augmented.choices) {
            out.report.stems[choice.stem].reverb.push_back(std::move(choice));
        }
    }

    for (auto& [type, audio] : current.stems) {
        StemReport& report = out.report.stems[type];
        const StemTypeProfile& profile = profiles.at(type);
        const std::string stem(to_string(type));
        const auto keep = [&](Stage s) {
            if (options.keep_intermediates) {
                out.intermediates[type].emplace_back(s, audio);
            }
        };
        if (enabled(Stage::reverb)) {
            keep(Stage::reverb);
        }
        if (!integrated_loudness(audio).integrated_lufs) {
            report.silent = true;
            out.report.warnings.push_back(stem + " is silent; left unchanged");
            continue;
        }
        if (enabled(Stage::eq)) {
            const LoudnessNormalized pre =
                normalize_loudness(audio, config.eq_prenormalize_lufs, config.max_loudness_gain_db);
            report.eq_pregain_db = pre.gain_db;
            audio = match_eq(pre.audio, profile.spectrum, config.eq);
            keep(Stage::eq);
        }
        if (enabled(Stage::drc)) {
            double pregain = 0.0;
            audio = peak_normalize(audio, config.drc.peak_normalize_db, &pregain);
            report.drc_pregain_db = pregain;
            DrcSummary summary;
            if (profile.peak_mu && profile.peak_sigma) {
                DrcConfig drc = config.drc;
                drc.onsets = config.onsets_for(type);
                const DrcTarget target{*profile.peak_mu, *profile.peak_sigma};
                DrcResult r = normalize_drc(audio, target, config.timing_for(type), drc);
                audio = std::move(r.audio);
                summary = {r.outcome, r.settings, r.mu_before, r.mu_after, target.bound(), r.candidates_tried};
                if (r.outcome == DrcOutcome::bound_not_met) {
                    out.report.warnings.push_back(stem + ": no compressor setting met the peak bound; kept the strongest");
                }
            } else {
                summary.outcome = DrcOutcome::no_transients;
            }
            report.drc = summary;
            keep(Stage::drc);
        }
        if (enabled(Stage::panning)) {
            audio = repan(audio, profile.panning, config.panning);
            keep(Stage::panning);
        }
        if (enabled(Stage::loudness)) {
            const LoudnessNormalized norm = normalize_loudness(audio, profile.loudness_lufs, config.max_loudness_gain_db);
            audio = norm.audio;
            report.loudness_gain_db = norm.gain_db;
            keep(Stage::loudness);
        }
    }
    out.stems = std::move(current);
    return out;
}

std::string song_report_json(const SongReport& report) {
    json stages = json::array();
    for (Stage s : report.stages) {
        stages.push_back(std::string(to_string(s)));
    }
    json stems = json::object();
    for (const auto& [type, r] : report.stems) {
        json reverb = json::array();
        for (const ReverbChoice& c : r.reverb) {
            reverb.push_back({{"stage", c.stage},
                              {"impulse_response", c.ir_name},
                              {"rt60_s", c.rt60},
                              {"low_shelf_hz", c.send.low_shelf_cutoff_hz},
                              {"high_shelf_hz", c.send.high_shelf_cutoff_hz},
                              {"shelf_gain_db", c.send.shelf_gain_db},
                              {"wet_gain", c.send.wet_gain}});
        }
        json drc = nullptr;
        if (r.drc) {
            json settings = nullptr;
            if (r.drc->settings) {
                const CompressorSettings& s = *r.drc->settings;
                settings = {{"threshold_db", s.threshold_db},
                            {"ratio", s.ratio},
                            {"attack_ms", s.attack_ms},
                            {"release_ms", s.release_ms},
                            {"knee_db", s.knee_db}};
            }
            drc = {{"outcome", to_string(r.drc->outcome)},
                   {"settings", settings},
                   {"mu_before_db", optional_json(r.drc->mu_before)},
                   {"mu_after_db", optional_json(r.drc->mu_after)},
                   {"bound_db", optional_json(r.drc->bound)},
                   {"candidates_tried", r.drc->candidates_tried}};
        }
        stems[std::string(to_string(type))] = {{"silent", r.silent},
                                               {"reverb", reverb},
                                               {"eq_pregain_db", optional_json(r.eq_pregain_db)},
                                               {"drc_pregain_db", optional_json(r.drc_pregain_db)},
                                               {"drc", drc},
                                               {"loudness_gain_db", optional_json(r.loudness_gain_db)}};
    }
    const json root = {{"song_id", report.song_id},     {"mode", to_string(report.mode)},
                       {"seed", report.seed},           {"stages", stages},
                       {"stems", stems},                {"warnings", report.warnings}};
    return root.dump(2);
}

StemReanalysis reanalyze_stem(const StereoWaveform& output, StemType type, const StemTypeProfile& profile,
                              const StemReport& report, const PreprocessConfig& config,
                              const ReanalysisTolerance& tolerance) {
    StemReanalysis r;
    const LoudnessStats stats = integrated_loudness(output);
    if (!stats.integrated_lufs) {
        throw DataError("normalized " + std::string(to_string(type)) + " stem is silent");
    }
    r.loudness_error_lu = *stats.integrated_lufs - profile.loudness_lufs;
    r.loudness_ok = std::abs(r.loudness_error_lu) <= tolerance.loudness_lu;

    const LoudnessNormalized pre = normalize_loudness(output, config.eq_prenormalize_lufs, config.max_loudness_gain_db);
    const AverageSpectrum measured = stem_mean_spectrum(pre.audio, config.eq);
    r.spectrum_deviation_db = smoothed_spectrum_deviation_db(measured, profile.spectrum, tolerance.spectrum_low_hz,
                                                             tolerance.spectrum_high_hz, config.eq);
    r.spectrum_ok = r.spectrum_deviation_db <= tolerance.spectrum_db;

    r.similarity_deviation = similarity_deviation(output, profile.panning, config.panning);
    r.panning_ok = r.similarity_deviation < tolerance.similarity;

    r.drc_ok = true;
    if (profile.peak_mu && profile.peak_sigma) {
        r.mu_bound = *profile.peak_mu + *profile.peak_sigma;
        const double undo = -report.loudness_gain_db.value_or(0.0);
        const auto peaks = measure_peak_stats(apply_gain(output, db_to_linear(undo)), config.onsets_for(type),
                                              config.drc.peaks);
        if (peaks) {
            r.mu = peaks->mu;
            r.drc_ok = peaks->mu <= *r.mu_bound;
        }
    }
    return r;
}

}  // namespace stemnorm
