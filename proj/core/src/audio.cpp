#include "stemnorm/audio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stemnorm/error.hpp"
#include "stemnorm/levels.hpp"

namespace stemnorm {

StereoWaveform::StereoWaveform(std::vector<float> l, std::vector<float> r, double rate)
    : left(std::move(l)), right(std::move(r)), sample_rate(rate) {}

StereoWaveform StereoWaveform::from_mono(std::vector<float> mono, double rate) {
    std::vector<float> copy = mono;
    return {std::move(mono), std::move(copy), rate};
}

StereoWaveform StereoWaveform::silence(std::size_t frames, double rate) {
    return {std::vector<float>(frames, 0.0F), std::vector<float>(frames, 0.0F), rate};
}

double StereoWaveform::duration() const noexcept {
    return sample_rate > 0.0 ? static_cast<double>(left.size()) / sample_rate : 0.0;
}

void StereoWaveform::validate() const {
    if (left.size() != right.size()) {
        throw DataError("stereo channels differ in length (" + std::to_string(left.size()) +
                        " vs " + std::to_string(right.size()) + ")");
    }
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
        throw DataError("sample rate must be positive");
    }
    const auto finite = [](float x) { return std::isfinite(x); };
    if (!std::all_of(left.begin(), left.end(), finite) ||
        !std::all_of(right.begin(), right.end(), finite)) {
        throw DataError("waveform contains non-finite samples");
    }
}

double peak_amplitude(const StereoWaveform& w) {
    float peak = 0.0F;
    for (float x : w.left) {
        peak = std::max(peak, std::abs(x));
    }
    for (float x : w.right) {
        peak = std::max(peak, std::abs(x));
    }
    return peak;
}

StereoWaveform apply_gain(const StereoWaveform& w, double gain) {
    StereoWaveform out = w;
    for (auto* channel : {&out.left, &out.right}) {
        for (float& x : *channel) {
            x = static_cast<float>(static_cast<double>(x) * gain);
        }
    }
    return out;
}

StereoWaveform peak_normalize(const StereoWaveform& w, double target_db, double* applied_gain_db) {
    const double peak = peak_amplitude(w);
    if (peak <= 0.0) {
        if (applied_gain_db != nullptr) {
            *applied_gain_db = 0.0;
        }
        return w;
    }
    const double gain_db = target_db - 20.0 * std::log10(peak);
    if (applied_gain_db != nullptr) {
        *applied_gain_db = gain_db;
    }
    return apply_gain(w, db_to_linear(gain_db));
}

std::vector<double> mono_mix(const StereoWaveform& w) {
    std::vector<double> mono(w.size());
    for (std::size_t i = 0; i < mono.size(); ++i) {
        mono[i] = 0.5 * (static_cast<double>(w.left[i]) + static_cast<double>(w.right[i]));
    }
    return mono;
}

std::string_view to_string(StemType type) noexcept {
    switch (type) {
        case StemType::vocals: return "vocals";
        case StemType::drums: return "drums";
        case StemType::bass: return "bass";
        case StemType::other: return "other";
    }
    return "unknown";
}

std::optional<StemType> parse_stem_type(std::string_view name) noexcept {
    for (StemType type : kAllStemTypes) {
        if (to_string(type) == name) {
            return type;
        }
    }
    return std::nullopt;
}

void StemSet::pad_to_common_length() {
    std::size_t longest = 0;
    std::optional<double> rate;
    for (const auto& [type, w] : stems) {
        if (rate && *rate != w.sample_rate) {
            throw DataError("stems of song '" + song_id + "' have mixed sample rates");
        }
        rate = w.sample_rate;
        longest = std::max(longest, w.size());
    }
    for (auto& [type, w] : stems) {
        w.left.resize(longest, 0.0F);
        w.right.resize(longest, 0.0F);
    }
}

double StemSet::sample_rate() const {
    if (stems.empty()) {
        return kDefaultSampleRate;
    }
    return stems.begin()->second.sample_rate;
}

}  // namespace stemnorm
