#include "stemnorm/reverb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stemnorm/error.hpp"
#include "stemnorm/filters.hpp"
#include "stemnorm/random.hpp"
#include "stemnorm/wav.hpp"

namespace stemnorm {
namespace {

constexpr double kMinIrSeconds = 0.1;
constexpr double kMinFitSeconds = 0.05;
constexpr const char* kRt60CacheName = "rt60_cache.json";

std::vector<double> shelved(const std::vector<float>& x, const ReverbSendConfig& config, double rate) {
    std::vector<double> y(x.begin(), x.end());
    apply_biquad(low_shelf(rate, config.low_shelf_cutoff_hz, config.shelf_gain_db, config.shelf_q), y);
    apply_biquad(high_shelf(rate, config.high_shelf_cutoff_hz, config.shelf_gain_db, config.shelf_q), y);
    return y;
}

std::vector<double> wet_channel(const std::vector<float>& x, const std::vector<float>& ir,
                                const ReverbSendConfig& config, double rate) {
    const std::vector<double> send = shelved(x, config, rate);
    const std::vector<double> kernel(ir.begin(), ir.end());
    std::vector<double> wet = fft_convolve(send, kernel);
    wet.resize(x.size());
    for (double& v : wet) {
        v *= config.wet_gain;
    }
    return wet;
}

std::string format_range(const Range& r) {
    std::ostringstream out;
    out << "[" << r.lo << ", " << r.hi << "] s";
    return out.str();
}

std::vector<const ImpulseResponseEntry*> pool(std::span<const ImpulseResponseEntry> library, const Range& rt) {
    std::vector<const ImpulseResponseEntry*> out;
    for (const ImpulseResponseEntry& e : library) {
        if (rt.contains(e.rt60)) {
            out.push_back(&e);
        }
    }
    return out;
}

}  // namespace

double estimate_rt60(const StereoWaveform& ir) {
    ir.validate();
    if (ir.duration() < kMinIrSeconds) {
        throw DataError("IR too short for RT estimation");
    }
    const std::size_t n = ir.size();
    std::vector<double> edc(n);
    long double tail = 0.0L;
    for (std::size_t i = n; i-- > 0;) {
        const long double l = ir.left[i];
        const long double r = ir.right[i];
        tail += l * l + r * r;
        edc[i] = static_cast<double>(tail);
    }
    if (!(edc[0] > 0.0)) {
        throw DataError("IR is silent");
    }
    const double total = edc[0];
    const auto level_db = [&](std::size_t i) { return 10.0 * std::log10(edc[i] / total); };

    std::size_t start = n;
    std::size_t stop = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (edc[i] <= 0.0) {
            break;
        }
        const double db = level_db(i);
        if (start == n && db <= -5.0) {
            start = i;
        }
        if (db <= -35.0) {
            stop = i;
            break;
        }
    }
    if (start == n || stop == n || static_cast<double>(stop - start) / ir.sample_rate < kMinFitSeconds) {
        throw DataError("IR too short for RT estimation");
    }

    // Least-squares line through (t, dB) over the fitted segment.
    const double count = static_cast<double>(stop - start + 1);
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = start; i <= stop; ++i) {
        const double t = static_cast<double>(i - start) / ir.sample_rate;
        const double y = level_db(i);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    const double slope = (count * sty - st * sy) / (count * stt - st * st);
    if (!(slope < 0.0)) {
        throw DataError("IR energy does not decay");
    }
    return -60.0 / slope;
}

StereoWaveform reverb_wet(const StereoWaveform& w, const ImpulseResponseEntry& ir, const ReverbSendConfig& config) {
    if (ir.audio.sample_rate != w.sample_rate) {
        throw DataError("impulse response '" + ir.name + "' sample rate differs from the stem's");
    }
    if (!(config.low_shelf_cutoff_hz < config.high_shelf_cutoff_hz)) {
        throw DataError("low shelf cutoff must be below the high shelf cutoff");
    }
    const std::vector<double> l = wet_channel(w.left, ir.audio.left, config, w.sample_rate);
    const std::vector<double> r = wet_channel(w.right, ir.audio.right, config, w.sample_rate);
    return {std::vector<float>(l.begin(), l.end()), std::vector<float>(r.begin(), r.end()), w.sample_rate};
}

StereoWaveform reverb_send(const StereoWaveform& w, const ImpulseResponseEntry& ir, const ReverbSendConfig& config) {
    if (config.wet_gain == 0.0 || w.empty()) {
        return w;
    }
    if (ir.audio.sample_rate != w.sample_rate) {
        throw DataError("impulse response '" + ir.name + "' sample rate differs from the stem's");
    }
    if (!(config.low_shelf_cutoff_hz < config.high_shelf_cutoff_hz)) {
        throw DataError("low shelf cutoff must be below the high shelf cutoff");
    }
    std::vector<double> l = wet_channel(w.left, ir.audio.left, config, w.sample_rate);
    std::vector<double> r = wet_channel(w.right, ir.audio.right, config, w.sample_rate);
    double peak = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        l[i] += w.left[i];
        r[i] += w.right[i];
        peak = std::max({peak, std::abs(l[i]), std::abs(r[i])});
    }
    const double safety = peak > 1.0 ? 1.0 / peak : 1.0;
    StereoWaveform out;
    out.sample_rate = w.sample_rate;
    out.left.resize(w.size());
    out.right.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        out.left[i] = static_cast<float>(l[i] * safety);
        out.right[i] = static_cast<float>(r[i] * safety);
    }
    return out;
}

std::string to_string(RunMode mode) { return mode == RunMode::train ? "train" : "inference"; }

std::optional<RunMode> parse_run_mode(std::string_view name) noexcept {
    if (name == "train") {
        return RunMode::train;
    }
    if (name == "inference") {
        return RunMode::inference;
    }
    return std::nullopt;
}

bool reverb_eligible(StemType type) noexcept { return type == StemType::vocals || type == StemType::other; }

AugmentedStems augment_reverb(const StemSet& stems, std::span<const ImpulseResponseEntry> library, RunMode mode,
                              std::uint64_t seed, const ReverbSampling& sampling) {
    AugmentedStems out{stems, {}};
    const bool any_eligible = std::any_of(stems.stems.begin(), stems.stems.end(),
                                          [](const auto& kv) { return reverb_eligible(kv.first); });
    if (!any_eligible) {
        return out;
    }
    const auto train_pool = pool(library, sampling.train_rt60_s);
    if (train_pool.empty()) {
        throw DataError("no impulse responses with RT60 in " + format_range(sampling.train_rt60_s));
    }
    std::vector<const ImpulseResponseEntry*> pre_pool;
    if (mode == RunMode::inference) {
        pre_pool = pool(library, sampling.pre_rt60_s);
        if (pre_pool.empty()) {
            throw DataError("no impulse responses with RT60 in " + format_range(sampling.pre_rt60_s) +
                            " for the pre-reverb");
        }
    }

    for (auto& [type, audio] : out.stems.stems) {
        if (!reverb_eligible(type)) {
            continue;
        }
        RandomStream rng(derive_seed(seed, stems.song_id, to_string(type)));
        const auto apply = [&](const std::vector<const ImpulseResponseEntry*>& candidates, const char* stage) {
            const ImpulseResponseEntry& ir = *candidates[rng.index(candidates.size())];
            ReverbSendConfig send;
            send.low_shelf_cutoff_hz = rng.uniform(sampling.low_shelf_hz.lo, sampling.low_shelf_hz.hi);
            send.high_shelf_cutoff_hz = rng.uniform(sampling.high_shelf_hz.lo, sampling.high_shelf_hz.hi);
            send.shelf_gain_db = sampling.shelf_gain_db;
            send.shelf_q = sampling.shelf_q;
            send.wet_gain = sampling.wet_gain;
            audio = reverb_send(audio, ir, send);
            out.choices.push_back({type, stage, ir.name, ir.rt60, send});
        };
        if (mode == RunMode::inference) {
            apply(pre_pool, "pre");
        }
        apply(train_pool, "train");
    }
    return out;
}

IrLibraryLoad load_ir_library(const std::filesystem::path& dir, double sample_rate, bool resample) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw DataError("IR library directory not found: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".wav") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    const fs::path cache_path = dir / kRt60CacheName;
    nlohmann::json cache = nlohmann::json::object();
    if (fs::exists(cache_path)) {
        try {
            std::ifstream in(cache_path);
            cache = nlohmann::json::parse(in);
            if (!cache.is_object()) {
                cache = nlohmann::json::object();
            }
        } catch (const nlohmann::json::exception&) {
            cache = nlohmann::json::object();
        }
    }

    IrLibraryLoad result;
    bool cache_dirty = false;
    for (const fs::path& file : files) {
        const std::string name = file.filename().string();
        try {
            ImpulseResponseEntry entry;
            entry.name = name;
            entry.audio = read_audio(file, {sample_rate, resample});
            const auto size = static_cast<std::uint64_t>(fs::file_size(file));
            const auto cached = cache.find(name);
            if (cached != cache.end() && cached->is_object() && cached->value("size", std::uint64_t{0}) == size &&
                cached->contains("rt60") && (*cached)["rt60"].is_number()) {
                entry.rt60 = (*cached)["rt60"].get<double>();
            } else {
                entry.rt60 = estimate_rt60(entry.audio);
                cache[name] = {{"size", size}, {"rt60", entry.rt60}};
                cache_dirty = true;
            }
            result.entries.push_back(std::move(entry));
        } catch (const Error& e) {
            result.skipped.push_back(name + ": " + e.what());
        }
    }
    if (cache_dirty) {
        std::ofstream out(cache_path);
        if (out) {
            out << cache.dump(2) << '\n';
        }
    }
    return result;
}

}  // namespace stemnorm
