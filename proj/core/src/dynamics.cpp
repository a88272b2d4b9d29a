#include "stemnorm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "stemnorm/error.hpp"
#include "stemnorm/levels.hpp"
#include "stemnorm/numeric.hpp"
#include "stemnorm/stft.hpp"

namespace stemnorm {
namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Sparse triangular HTK mel filterbank over rfft bins.
struct MelBand {
    std::size_t first = 0;
    std::vector<double> weights;
};

std::vector<MelBand> mel_filterbank(std::size_t bands, std::size_t fft_size, double sample_rate) {
    const std::size_t bins = fft_size / 2 + 1;
    const double mel_max = hz_to_mel(sample_rate / 2.0);
    std::vector<double> edges(bands + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(bands + 1));
    }
    const double bin_hz = sample_rate / static_cast<double>(fft_size);
    std::vector<MelBand> bank(bands);
    for (std::size_t b = 0; b < bands; ++b) {
        const double lo = edges[b];
        const double mid = edges[b + 1];
        const double hi = edges[b + 2];
        const auto first = static_cast<std::size_t>(std::ceil(lo / bin_hz));
        const auto last = std::min(bins - 1, static_cast<std::size_t>(std::floor(hi / bin_hz)));
        bank[b].first = first;
        for (std::size_t k = first; k <= last && k < bins; ++k) {
            const double f = static_cast<double>(k) * bin_hz;
            const double w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
            bank[b].weights.push_back(std::max(0.0, w));
        }
    }
    return bank;
}

double stereo_peak(const StereoWaveform& w, std::size_t begin, std::size_t end) {
    double peak = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        peak = std::max({peak, static_cast<double>(std::abs(w.left[i])), static_cast<double>(std::abs(w.right[i]))});
    }
    return peak;
}

double one_pole_coefficient(double time_ms, double sample_rate) {
    return std::exp(-1.0 / (time_ms * 1e-3 * sample_rate));
}

}  // namespace

OnsetConfig onset_config_for(StemType type) {
    OnsetConfig config;
    config.mel_bands = type == StemType::bass ? 16 : 128;
    return config;
}

std::vector<double> hfc_novelty(const StereoWaveform& w, const OnsetConfig& config) {
    const StftParams params{config.fft_size, config.hop};
    validate(params);
    if (config.mel_bands == 0) {
        throw DataError("onset detection needs at least one mel band");
    }
    if (w.empty()) {
        return {};
    }
    const std::vector<double> mono = mono_mix(w);
    StftAnalyzer analyzer(mono, params);
    const std::vector<MelBand> bank = mel_filterbank(config.mel_bands, config.fft_size, w.sample_rate);

    double window_energy = 0.0;
    for (double v : analyzer.window()) {
        window_energy += v * v;
    }
    const double power_scale = 2.0 / (static_cast<double>(config.fft_size) * window_energy);
    const double index_sum = 0.5 * static_cast<double>(config.mel_bands * (config.mel_bands + 1));

    std::vector<std::complex<double>> spectrum(analyzer.bins());
    std::vector<double> power(analyzer.bins());
    std::vector<double> novelty(analyzer.frames());
    for (std::size_t t = 0; t < analyzer.frames(); ++t) {
        analyzer.frame(t, spectrum);
        for (std::size_t k = 0; k < power.size(); ++k) {
            power[k] = std::norm(spectrum[k]) * power_scale;
        }
        double hfc = 0.0;
        for (std::size_t b = 0; b < bank.size(); ++b) {
            double energy = 0.0;
            for (std::size_t j = 0; j < bank[b].weights.size(); ++j) {
                energy += bank[b].weights[j] * power[bank[b].first + j];
            }
            hfc += static_cast<double>(b + 1) * energy;
        }
        novelty[t] = hfc / index_sum;
    }
    return novelty;
}

std::vector<double> detect_onsets(const StereoWaveform& w, const OnsetConfig& config) {
    const std::vector<double> novelty = hfc_novelty(w, config);
    const std::size_t frames = novelty.size();
    if (frames == 0) {
        return {};
    }
    constexpr double kFloorDb = -300.0;
    std::vector<double> level(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        level[t] = power_to_db(novelty[t], kFloorDb);
    }

    const double frame_rate = w.sample_rate / static_cast<double>(config.hop);
    const auto half = static_cast<std::size_t>(std::lround(0.5 * config.median_window_s * frame_rate));
    const auto min_gap = config.min_interval_s;

    struct Candidate {
        double time;
        double level;
    };
    std::vector<Candidate> kept;
    std::vector<double> neighborhood;
    for (std::size_t t = 0; t < frames; ++t) {
        if (level[t] <= config.silence_gate_db) {
            continue;
        }
        const bool rising = t == 0 || level[t] > level[t - 1];
        const bool not_falling_after = t + 1 == frames || level[t] >= level[t + 1];
        if (!rising || !not_falling_after) {
            continue;
        }
        const std::size_t lo = t >= half ? t - half : 0;
        const std::size_t hi = std::min(frames, t + half + 1);
        neighborhood.assign(level.begin() + static_cast<std::ptrdiff_t>(lo),
                            level.begin() + static_cast<std::ptrdiff_t>(hi));
        const auto mid = neighborhood.begin() + static_cast<std::ptrdiff_t>(neighborhood.size() / 2);
        std::nth_element(neighborhood.begin(), mid, neighborhood.end());
        double median = *mid;
        if (neighborhood.size() % 2 == 0) {
            median = 0.5 * (median + *std::max_element(neighborhood.begin(), mid));
        }
        if (level[t] < median + config.threshold_offset_db) {
            continue;
        }
        // Report the start of the hop that leads into the detecting frame.
        const double center = static_cast<double>(t * config.hop);
        const double time = std::max(0.0, center - 0.5 * static_cast<double>(config.hop)) / w.sample_rate;
        if (!kept.empty() && time - kept.back().time < min_gap) {
            if (level[t] > kept.back().level) {
                kept.back() = {time, level[t]};
            }
            continue;
        }
        kept.push_back({time, level[t]});
    }
    std::vector<double> onsets;
    onsets.reserve(kept.size());
    for (const Candidate& c : kept) {
        onsets.push_back(c.time);
    }
    return onsets;
}

std::optional<OnsetPeakStats> onset_peak_stats(const StereoWaveform& w, const std::vector<double>& onsets,
                                               const PeakStatsConfig& config) {
    if (onsets.empty() || w.empty()) {
        return std::nullopt;
    }
    OnsetPeakStats stats;
    stats.onset_times = onsets;
    const std::size_t n = w.size();
    const auto window = static_cast<std::size_t>(std::lround(config.peak_window_s * w.sample_rate));
    for (std::size_t i = 0; i < onsets.size(); ++i) {
        const auto begin = std::min(n, static_cast<std::size_t>(std::lround(onsets[i] * w.sample_rate)));
        std::size_t end = std::min(n, begin + window);
        if (i + 1 < onsets.size()) {
            end = std::min(end, static_cast<std::size_t>(std::lround(onsets[i + 1] * w.sample_rate)));
        }
        stats.peak_levels.push_back(linear_to_db(stereo_peak(w, begin, std::max(begin, end))));
    }
    const double cut = percentile(stats.peak_levels, config.keep_percentile);
    std::vector<double> top;
    for (double p : stats.peak_levels) {
        if (p >= cut) {
            top.push_back(p);
        }
    }
    double mean = 0.0;
    for (double p : top) {
        mean += p;
    }
    mean /= static_cast<double>(top.size());
    double var = 0.0;
    for (double p : top) {
        var += (p - mean) * (p - mean);
    }
    stats.mu = mean;
    stats.sigma = std::sqrt(var / static_cast<double>(top.size()));
    return stats;
}

std::optional<OnsetPeakStats> measure_peak_stats(const StereoWaveform& w, const OnsetConfig& onsets,
                                                 const PeakStatsConfig& peaks) {
    return onset_peak_stats(w, detect_onsets(w, onsets), peaks);
}

void CompressorSettings::validate() const {
    if (!(ratio >= 1.0) || !(attack_ms > 0.0) || !(release_ms > 0.0) || !(knee_db >= 0.0) ||
        !std::isfinite(threshold_db)) {
        throw DataError("invalid compressor settings: ratio must be >= 1, attack and release > 0, knee >= 0");
    }
}

double compressor_gain_db(double level_db, const CompressorSettings& s) {
    const double slope = 1.0 / s.ratio - 1.0;
    const double over = level_db - s.threshold_db;
    if (s.knee_db > 0.0) {
        if (2.0 * over < -s.knee_db) {
            return 0.0;
        }
        if (2.0 * over <= s.knee_db) {
            const double x = over + 0.5 * s.knee_db;
            return slope * x * x / (2.0 * s.knee_db);
        }
    }
    return std::min(0.0, slope * over);
}

StereoWaveform compress(const StereoWaveform& w, const CompressorSettings& settings) {
    settings.validate();
    if (settings.ratio == 1.0 || w.empty()) {
        return w;
    }
    const double attack = one_pole_coefficient(settings.attack_ms, w.sample_rate);
    const double release = one_pole_coefficient(settings.release_ms, w.sample_rate);
    StereoWaveform out = w;
    double smoothed = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double peak = std::max(std::abs(static_cast<double>(w.left[i])), std::abs(static_cast<double>(w.right[i])));
        const double target = compressor_gain_db(linear_to_db(peak), settings);
        const double a = target < smoothed ? attack : release;
        smoothed = a * smoothed + (1.0 - a) * target;
        if (smoothed != 0.0) {
            const double g = db_to_linear(smoothed);
            out.left[i] = static_cast<float>(static_cast<double>(w.left[i]) * g);
            out.right[i] = static_cast<float>(static_cast<double>(w.right[i]) * g);
        }
    }
    return out;
}

CompressorTiming default_timing(StemType type) {
    switch (type) {
        case StemType::vocals: return {7.5, 400.0};
        case StemType::drums: return {10.0, 180.0};
        case StemType::bass: return {10.0, 500.0};
        case StemType::other: return {15.0, 666.0};
    }
    return {};
}

std::vector<CompressorSettings> DrcConfig::grid(const CompressorTiming& timing) const {
    if (!(threshold_step_db < 0.0) || !(ratio_step > 0.0) || threshold_stop_db > threshold_start_db ||
        ratio_stop < ratio_start) {
        throw DataError("invalid DRC grid");
    }
    std::vector<CompressorSettings> out;
    const auto thresholds = static_cast<int>(std::floor((threshold_stop_db - threshold_start_db) / threshold_step_db + 1e-9));
    const auto ratios = static_cast<int>(std::floor((ratio_stop - ratio_start) / ratio_step + 1e-9));
    for (int i = 0; i <= thresholds; ++i) {
        for (int j = 0; j <= ratios; ++j) {
            out.push_back({threshold_start_db + i * threshold_step_db, ratio_start + j * ratio_step,
                           timing.attack_ms, timing.release_ms, knee_db});
        }
    }
    return out;
}

std::string to_string(DrcOutcome outcome) {
    switch (outcome) {
        case DrcOutcome::no_transients: return "no_transients";
        case DrcOutcome::within_bound: return "within_bound";
        case DrcOutcome::compressed: return "compressed";
        case DrcOutcome::bound_not_met: return "bound_not_met";
        case DrcOutcome::no_improvement: return "no_improvement";
    }
    return "unknown";
}

DrcResult normalize_drc(const StereoWaveform& w, const DrcTarget& target, const CompressorTiming& timing,
                        const DrcConfig& config) {
    DrcResult result;
    result.audio = w;
    const auto before = measure_peak_stats(w, config.onsets, config.peaks);
    if (!before) {
        result.outcome = DrcOutcome::no_transients;
        return result;
    }
    result.mu_before = before->mu;
    result.mu_after = before->mu;
    const double bound = target.bound();
    if (before->mu <= bound) {
        result.outcome = DrcOutcome::within_bound;
        return result;
    }

    const std::vector<CompressorSettings> grid = config.grid(timing);
    StereoWaveform last;
    std::optional<double> last_mu;
    for (const CompressorSettings& candidate : grid) {
        ++result.candidates_tried;
        StereoWaveform compressed = compress(w, candidate);
        const auto stats = measure_peak_stats(compressed, config.onsets, config.peaks);
        // A candidate that flattens every transient has nothing left above the bound.
        const double mu = stats ? stats->mu : -std::numeric_limits<double>::infinity();
        if (mu <= bound) {
            result.audio = std::move(compressed);
            result.outcome = DrcOutcome::compressed;
            result.settings = candidate;
            result.mu_after = stats ? std::optional<double>(mu) : std::nullopt;
            return result;
        }
        last = std::move(compressed);
        last_mu = mu;
    }
    if (last_mu && *last_mu < before->mu) {
        result.audio = std::move(last);
        result.outcome = DrcOutcome::bound_not_met;
        result.settings = grid.back();
        result.mu_after = last_mu;
    } else {
        result.outcome = DrcOutcome::no_improvement;
    }
    return result;
}

}  // namespace stemnorm
