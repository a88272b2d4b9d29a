#include "stemnorm/config.hpp"

#include <fstream>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "stemnorm/error.hpp"
#include "stemnorm/stft.hpp"

namespace stemnorm {
namespace {

using nlohmann::json;

std::string estimate_name(PanGainEstimate e) {
    return e == PanGainEstimate::exact_inverse ? "exact_inverse" : "half_similarity";
}

// Calls f(pointer, field) for every scalar field. Stem-keyed tables are
// flattened to one pointer per stem type.
template <typename F>
void visit_fields(PreprocessConfig& c, F&& f) {
    f("/session_rate", c.session_rate);
    f("/eq_prenormalize_lufs", c.eq_prenormalize_lufs);
    f("/max_loudness_gain_db", c.max_loudness_gain_db);

    f("/eq/fft_size", c.eq.fft_size);
    f("/eq/hop_fraction", c.eq.hop_fraction);
    f("/eq/fir_taps", c.eq.fir_taps);
    f("/eq/savgol_window", c.eq.savgol_window);
    f("/eq/savgol_order", c.eq.savgol_order);
    f("/eq/max_gain_db", c.eq.max_gain_db);
    f("/eq/magnitude_floor", c.eq.magnitude_floor);

    f("/drc/threshold_start_db", c.drc.threshold_start_db);
    f("/drc/threshold_stop_db", c.drc.threshold_stop_db);
    f("/drc/threshold_step_db", c.drc.threshold_step_db);
    f("/drc/ratio_start", c.drc.ratio_start);
    f("/drc/ratio_stop", c.drc.ratio_stop);
    f("/drc/ratio_step", c.drc.ratio_step);
    f("/drc/knee_db", c.drc.knee_db);
    f("/drc/peak_normalize_db", c.drc.peak_normalize_db);
    f("/drc/onsets/fft_size", c.drc.onsets.fft_size);
    f("/drc/onsets/hop", c.drc.onsets.hop);
    f("/drc/onsets/median_window_s", c.drc.onsets.median_window_s);
    f("/drc/onsets/threshold_offset_db", c.drc.onsets.threshold_offset_db);
    f("/drc/onsets/silence_gate_db", c.drc.onsets.silence_gate_db);
    f("/drc/onsets/min_interval_s", c.drc.onsets.min_interval_s);
    f("/drc/peaks/peak_window_s", c.drc.peaks.peak_window_s);
    f("/drc/peaks/keep_percentile", c.drc.peaks.keep_percentile);

    for (StemType t : kAllStemTypes) {
        const std::string stem(to_string(t));
        f("/timing/" + stem + "/attack_ms", c.timing[t].attack_ms);
        f("/timing/" + stem + "/release_ms", c.timing[t].release_ms);
        f("/mel_bands/" + stem, c.mel_bands[t]);
    }

    f("/panning/fft_size", c.panning.fft_size);
    f("/panning/hop_fraction", c.panning.hop_fraction);
    f("/panning/cutoff_hz", c.panning.cutoff_hz);
    f("/panning/transition_hz", c.panning.transition_hz);
    f("/panning/savgol_window", c.panning.savgol_window);
    f("/panning/savgol_order", c.panning.savgol_order);
    f("/panning/max_gain_db", c.panning.max_gain_db);
    f("/panning/gain_floor", c.panning.gain_floor);
    f("/panning/estimate", c.panning.estimate);

    f("/reverb/low_shelf_hz", c.reverb.low_shelf_hz);
    f("/reverb/high_shelf_hz", c.reverb.high_shelf_hz);
    f("/reverb/train_rt60_s", c.reverb.train_rt60_s);
    f("/reverb/pre_rt60_s", c.reverb.pre_rt60_s);
    f("/reverb/shelf_gain_db", c.reverb.shelf_gain_db);
    f("/reverb/shelf_q", c.reverb.shelf_q);
    f("/reverb/wet_gain", c.reverb.wet_gain);

    f("/features/fft_size", c.features.fft_size);
    f("/features/hop", c.features.hop);
    f("/features/smoothing_s", c.features.smoothing_s);
    f("/features/rolloff_fraction", c.features.rolloff_fraction);
    f("/features/contrast_bands", c.features.contrast_bands);
    f("/features/contrast_low_hz", c.features.contrast_low_hz);
    f("/features/contrast_quantile", c.features.contrast_quantile);
    f("/features/reference_floor", c.features.reference_floor);

    f("/loss/fft_size", c.loss.fft_size);
    f("/loss/hop", c.loss.hop);
    f("/loss/log_epsilon", c.loss.log_epsilon);
    f("/loss/a_weighting_taps", c.loss.a_weighting_taps);
    f("/loss/lowpass_taps", c.loss.lowpass_taps);
    f("/loss/lowpass_hz", c.loss.lowpass_hz);
}

struct Writer {
    json& root;

    template <typename T>
    void operator()(const std::string& pointer, const T& value) {
        json& slot = root[json::json_pointer(pointer)];
        if constexpr (std::is_same_v<T, Range>) {
            slot = json::array({value.lo, value.hi});
        } else if constexpr (std::is_same_v<T, PanGainEstimate>) {
            slot = estimate_name(value);
        } else {
            slot = value;
        }
    }
};

struct Reader {
    const json& root;

    [[noreturn]] static void fail(const std::string& pointer, const char* expected) {
        throw DataError("config value " + pointer + " must be " + expected);
    }

    template <typename T>
    void operator()(const std::string& pointer, T& value) const {
        const json& v = root.at(json::json_pointer(pointer));
        if constexpr (std::is_same_v<T, Range>) {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
                fail(pointer, "a [low, high] pair of numbers");
            }
            value = {v[0].get<double>(), v[1].get<double>()};
        } else if constexpr (std::is_same_v<T, PanGainEstimate>) {
            if (v == "exact_inverse") {
                value = PanGainEstimate::exact_inverse;
            } else if (v == "half_similarity") {
                value = PanGainEstimate::half_similarity;
            } else {
                fail(pointer, "\"exact_inverse\" or \"half_similarity\"");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_unsigned()) {
                fail(pointer, "a non-negative integer");
            }
            value = v.get<T>();
        } else {
            if (!v.is_number()) {
                fail(pointer, "a number");
            }
            value = v.get<T>();
        }
    }
};

void check_known(const json& patch, const json& defaults, const std::string& path) {
    if (!patch.is_object()) {
        throw DataError("config" + (path.empty() ? std::string() : " section " + path) + " must be a JSON object");
    }
    for (const auto& [key, value] : patch.items()) {
        const std::string here = path + "/" + key;
        if (!defaults.contains(key)) {
            throw DataError("unknown config key " + here);
        }
        if (value.is_null()) {
            throw DataError("config value " + here + " must not be null");
        }
        if (defaults[key].is_object()) {
            check_known(value, defaults[key], here);
        }
    }
}

json to_json_object(const PreprocessConfig& config) {
    json root = json::object();
    PreprocessConfig copy = config;
    visit_fields(copy, Writer{root});
    return root;
}

}  // namespace

OnsetConfig PreprocessConfig::onsets_for(StemType type) const {
    OnsetConfig out = drc.onsets;
    const auto it = mel_bands.find(type);
    out.mel_bands = it != mel_bands.end() ? it->second : onset_config_for(type).mel_bands;
    return out;
}

CompressorTiming PreprocessConfig::timing_for(StemType type) const {
    const auto it = timing.find(type);
    return it != timing.end() ? it->second : default_timing(type);
}

void PreprocessConfig::validate() const {
    const auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw DataError(std::string("invalid config: ") + what);
        }
    };
    require(session_rate > 0.0, "session_rate must be positive");
    require(max_loudness_gain_db > 0.0, "max_loudness_gain_db must be positive");
    stemnorm::validate(eq.stft());
    require(eq.fir_taps % 2 == 1, "eq.fir_taps must be odd");
    require(eq.savgol_window % 2 == 1 && eq.savgol_window > eq.savgol_order, "eq.savgol_window must be odd and exceed the order");
    require(eq.magnitude_floor > 0.0, "eq.magnitude_floor must be positive");
    stemnorm::validate({drc.onsets.fft_size, drc.onsets.hop});
    (void)drc.grid({});
    require(drc.ratio_start >= 1.0, "drc.ratio_start must be at least 1");
    require(drc.knee_db >= 0.0, "drc.knee_db must be non-negative");
    for (const auto& [type, t] : timing) {
        require(t.attack_ms > 0.0 && t.release_ms > 0.0, "attack and release must be positive");
    }
    for (const auto& [type, bands] : mel_bands) {
        require(bands > 0, "mel_bands must be positive");
    }
    stemnorm::validate(panning.stft());
    require(panning.savgol_window % 2 == 1, "panning.savgol_window must be odd");
    require(panning.max_gain_db >= 0.0, "panning.max_gain_db must be non-negative");
    require(panning.transition_hz >= 0.0, "panning.transition_hz must be non-negative");
    require(reverb.low_shelf_hz.lo <= reverb.low_shelf_hz.hi && reverb.high_shelf_hz.lo <= reverb.high_shelf_hz.hi,
            "reverb shelf ranges must be ordered");
    require(reverb.low_shelf_hz.hi < reverb.high_shelf_hz.lo, "reverb low shelf range must lie below the high shelf range");
    require(reverb.train_rt60_s.lo <= reverb.train_rt60_s.hi && reverb.pre_rt60_s.lo <= reverb.pre_rt60_s.hi,
            "reverb RT60 ranges must be ordered");
    require(reverb.wet_gain >= 0.0, "reverb.wet_gain must be non-negative");
    stemnorm::validate({features.fft_size, features.hop});
    stemnorm::validate({loss.fft_size, loss.hop});
    require(loss.a_weighting_taps % 2 == 1 && loss.lowpass_taps % 2 == 1, "loss FIR tap counts must be odd");
}

std::string config_to_json(const PreprocessConfig& config) { return to_json_object(config).dump(2); }

PreprocessConfig config_from_json(std::string_view text) {
    json patch;
    try {
        patch = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("config is not valid JSON: ") + e.what());
    }
    const PreprocessConfig defaults;
    json merged = to_json_object(defaults);
    check_known(patch, merged, "");
    merged.merge_patch(patch);
    PreprocessConfig out;
    visit_fields(out, Reader{merged});
    out.validate();
    return out;
}

PreprocessConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return config_from_json(text.str());
}

}  // namespace stemnorm
