#include "stemnorm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "stemnorm/error.hpp"
#include "stemnorm/filters.hpp"
#include "stemnorm/levels.hpp"
#include "stemnorm/loudness.hpp"
#include "stemnorm/panning.hpp"
#include "stemnorm/stft.hpp"
#include "stemnorm/window.hpp"

namespace stemnorm {
namespace {

constexpr std::array<std::string_view, 9> kFeatureNames{
    "spectral_centroid", "spectral_bandwidth", "spectral_contrast", "spectral_flatness", "spectral_rolloff",
    "panning_rms",       "rms_level",          "dynamic_spread",    "crest_factor"};

constexpr double kPowerFloor = 1e-10;

// Centered running mean over rows of a frames x width matrix produced one row
// at a time; only `window` rows are kept in memory.
class RunningRowMean {
public:
    RunningRowMean(std::size_t frames, std::size_t half, std::size_t width)
        : frames_(frames), half_(half), window_(2 * half + 1), ring_(window_ * width), sum_(width, 0.0) {}

    template <typename Produce, typename Consume>
    void run(Produce&& produce, Consume&& consume) {
        const std::size_t width = sum_.size();
        std::vector<double> mean(width);
        for (std::size_t r = 0; r < frames_ + half_; ++r) {
            if (r < frames_) {
                std::span<double> row(ring_.data() + (r % window_) * width, width);
                produce(r, row);
                for (std::size_t k = 0; k < width; ++k) {
                    sum_[k] += row[k];
                }
            }
            if (r < half_) {
                continue;
            }
            const std::size_t t = r - half_;
            const std::size_t lo = t >= half_ ? t - half_ : 0;
            const std::size_t hi = std::min(frames_ - 1, t + half_);
            const auto count = static_cast<double>(hi - lo + 1);
            for (std::size_t k = 0; k < width; ++k) {
                mean[k] = sum_[k] / count;
            }
            consume(t, std::span<const double>(mean));
            if (t >= half_) {
                const double* old = ring_.data() + ((t - half_) % window_) * width;
                for (std::size_t k = 0; k < width; ++k) {
                    sum_[k] -= old[k];
                }
            }
        }
    }

private:
    std::size_t frames_;
    std::size_t half_;
    std::size_t window_;
    std::vector<double> ring_;
    std::vector<double> sum_;
};

std::vector<double> running_mean(std::span<const double> x, std::size_t half) {
    std::vector<double> out(x.size());
    RunningRowMean smoother(x.size(), half, 1);
    smoother.run([&](std::size_t r, std::span<double> row) { row[0] = x[r]; },
                 [&](std::size_t t, std::span<const double> m) { out[t] = m[0]; });
    return out;
}

double mean_of(std::span<const double> x) {
    if (x.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double v : x) {
        s += v;
    }
    return s / static_cast<double>(x.size());
}

struct SpectralFrame {
    double centroid = 0.0;
    double bandwidth = 0.0;
    double contrast = 0.0;
    double flatness = 0.0;
    double rolloff = 0.0;
};

SpectralFrame spectral_frame(std::span<const double> mag, double bin_hz, const FeatureConfig& config,
                             std::vector<double>& scratch) {
    SpectralFrame f;
    double total = 0.0;
    double weighted = 0.0;
    double energy = 0.0;
    double log_power = 0.0;
    double power_sum = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        const double hz = static_cast<double>(k) * bin_hz;
        total += mag[k];
        weighted += hz * mag[k];
        energy += mag[k] * mag[k];
        const double p = std::max(mag[k] * mag[k], kPowerFloor);
        log_power += std::log(p);
        power_sum += p;
    }
    const auto n = static_cast<double>(mag.size());
    f.flatness = std::exp(log_power / n) / (power_sum / n);
    if (total > 0.0) {
        f.centroid = weighted / total;
        double spread = 0.0;
        for (std::size_t k = 0; k < mag.size(); ++k) {
            const double d = static_cast<double>(k) * bin_hz - f.centroid;
            spread += mag[k] * d * d;
        }
        f.bandwidth = std::sqrt(spread / total);
    }
    if (energy > 0.0) {
        double cumulative = 0.0;
        for (std::size_t k = 0; k < mag.size(); ++k) {
            cumulative += mag[k] * mag[k];
            if (cumulative >= config.rolloff_fraction * energy) {
                f.rolloff = static_cast<double>(k) * bin_hz;
                break;
            }
        }
    }
    double contrast_sum = 0.0;
    std::size_t bands = 0;
    for (std::size_t b = 0; b < config.contrast_bands; ++b) {
        const double lo = config.contrast_low_hz * std::pow(2.0, static_cast<double>(b));
        const double hi = 2.0 * lo;
        scratch.clear();
        for (std::size_t k = 0; k < mag.size(); ++k) {
            const double hz = static_cast<double>(k) * bin_hz;
            if (hz >= lo && hz < hi) {
                scratch.push_back(mag[k]);
            }
        }
        if (scratch.empty()) {
            continue;
        }
        std::sort(scratch.begin(), scratch.end());
        const auto q = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::lround(config.contrast_quantile * static_cast<double>(scratch.size()))));
        double valley = 0.0;
        double peak = 0.0;
        for (std::size_t i = 0; i < q; ++i) {
            valley += scratch[i];
            peak += scratch[scratch.size() - 1 - i];
        }
        contrast_sum += linear_to_db(peak / static_cast<double>(q), -200.0) -
                        linear_to_db(valley / static_cast<double>(q), -200.0);
        ++bands;
    }
    f.contrast = bands > 0 ? contrast_sum / static_cast<double>(bands) : 0.0;
    return f;
}

std::vector<double> to_double(const std::vector<float>& x) { return {x.begin(), x.end()}; }

double a_weighting_gain(double f) {
    const double f2 = f * f;
    const double c1 = 20.598997 * 20.598997;
    const double c2 = 107.65265 * 107.65265;
    const double c3 = 737.86223 * 737.86223;
    const double c4 = 12194.217 * 12194.217;
    return c4 * f2 * f2 / ((f2 + c1) * std::sqrt((f2 + c2) * (f2 + c3)) * (f2 + c4));
}

}  // namespace

std::string_view to_string(FeatureGroup group) noexcept {
    switch (group) {
        case FeatureGroup::spectral: return "spectral";
        case FeatureGroup::panning: return "panning";
        case FeatureGroup::dynamic: return "dynamic";
        case FeatureGroup::loudness: return "loudness";
    }
    return "unknown";
}

std::span<const std::string_view> feature_names() noexcept { return kFeatureNames; }

const FeatureSeries& MixFeatureReport::feature(std::string_view name) const {
    for (const FeatureSeries& s : series) {
        if (s.name == name) {
            return s;
        }
    }
    throw Error("unknown feature '" + std::string(name) + "'");
}

MixFeatureReport mix_features(const StereoWaveform& mix, const FeatureConfig& config) {
    mix.validate();
    if (mix.duration() < config.smoothing_s) {
        throw DataError("mix is shorter than the " + std::to_string(config.smoothing_s) + " s feature window");
    }
    const StftParams params{config.fft_size, config.hop};
    validate(params);
    const double rate = mix.sample_rate;
    const double bin_hz = rate / static_cast<double>(config.fft_size);
    const double frame_rate = rate / static_cast<double>(config.hop);
    const auto half = static_cast<std::size_t>(std::lround(0.5 * config.smoothing_s * frame_rate));

    const std::vector<double> mono = mono_mix(mix);
    const std::vector<double> left = to_double(mix.left);
    const std::vector<double> right = to_double(mix.right);
    StftAnalyzer mono_stft(mono, params);
    StftAnalyzer left_stft(left, params);
    StftAnalyzer right_stft(right, params);
    const std::size_t frames = mono_stft.frames();
    const std::size_t bins = mono_stft.bins();

    std::vector<std::complex<double>> spectrum(bins);
    std::vector<std::complex<double>> spectrum_r(bins);
    std::vector<double> centroid(frames), bandwidth(frames), contrast(frames), flatness(frames), rolloff(frames);
    std::vector<double> scratch;
    RunningRowMean smoother(frames, half, bins);
    smoother.run(
        [&](std::size_t t, std::span<double> row) {
            mono_stft.frame(t, spectrum);
            for (std::size_t k = 0; k < bins; ++k) {
                row[k] = std::abs(spectrum[k]);
            }
        },
        [&](std::size_t t, std::span<const double> mag) {
            const SpectralFrame f = spectral_frame(mag, bin_hz, config, scratch);
            centroid[t] = f.centroid;
            bandwidth[t] = f.bandwidth;
            contrast[t] = f.contrast;
            flatness[t] = f.flatness;
            rolloff[t] = f.rolloff;
        });

    std::vector<double> panning(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        left_stft.frame(t, spectrum);
        right_stft.frame(t, spectrum_r);
        double sq = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            const BinPanning b = analyze_bin(std::abs(spectrum[k]), std::abs(spectrum_r[k]),
                                             PanGainEstimate::exact_inverse);
            const double index = (1.0 - b.psi) * static_cast<double>(b.side);
            sq += index * index;
        }
        panning[t] = std::sqrt(sq / static_cast<double>(bins));
    }

    std::vector<double> rms_db(frames), crest(frames);
    const std::size_t n = mix.size();
    const std::size_t half_frame = config.fft_size / 2;
    for (std::size_t t = 0; t < frames; ++t) {
        const std::size_t center = t * config.hop;
        const std::size_t lo = center >= half_frame ? center - half_frame : 0;
        const std::size_t hi = std::min(n, center + half_frame);
        double sq = 0.0;
        double peak = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double l = mix.left[i];
            const double r = mix.right[i];
            sq += l * l + r * r;
            peak = std::max({peak, std::abs(l), std::abs(r)});
        }
        const double ms = sq / static_cast<double>(2 * (hi - lo));
        rms_db[t] = power_to_db(ms);
        crest[t] = ms > 0.0 ? peak / std::sqrt(ms) : 0.0;
    }

    MixFeatureReport report;
    report.frame_rate = frame_rate;
    const auto add = [&](std::string_view name, FeatureGroup group, std::vector<double> values) {
        const double m = mean_of(values);
        report.series.push_back({std::string(name), group, std::move(values), m});
    };
    add(kFeatureNames[0], FeatureGroup::spectral, std::move(centroid));
    add(kFeatureNames[1], FeatureGroup::spectral, std::move(bandwidth));
    add(kFeatureNames[2], FeatureGroup::spectral, std::move(contrast));
    add(kFeatureNames[3], FeatureGroup::spectral, std::move(flatness));
    add(kFeatureNames[4], FeatureGroup::spectral, std::move(rolloff));
    add(kFeatureNames[5], FeatureGroup::panning, running_mean(panning, half));
    std::vector<double> level = running_mean(rms_db, half);
    const double level_mean = mean_of(level);
    std::vector<double> spread(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        spread[t] = std::abs(level[t] - level_mean);
    }
    add(kFeatureNames[6], FeatureGroup::dynamic, std::move(level));
    add(kFeatureNames[7], FeatureGroup::dynamic, std::move(spread));
    add(kFeatureNames[8], FeatureGroup::dynamic, running_mean(crest, half));
    report.loudness_lufs = integrated_loudness(mix).integrated_lufs;
    return report;
}

std::optional<double> mape(std::span<const double> candidate, std::span<const double> reference, double floor) {
    if (candidate.size() != reference.size()) {
        throw Error("MAPE series differ in length");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (std::abs(reference[i]) < floor) {
            continue;
        }
        sum += std::abs(candidate[i] - reference[i]) / std::abs(reference[i]);
        ++count;
    }
    if (count == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(count);
}

MapeReport mape_report(const StereoWaveform& candidate, const StereoWaveform& reference,
                       const FeatureConfig& config) {
    if (candidate.sample_rate != reference.sample_rate) {
        throw DataError("candidate and reference sample rates differ");
    }
    MapeReport report;
    const std::size_t n = std::min(candidate.size(), reference.size());
    report.trimmed = candidate.size() != reference.size();
    const auto trim = [n](const StereoWaveform& w) {
        if (w.size() == n) {
            return w;
        }
        return StereoWaveform(std::vector<float>(w.left.begin(), w.left.begin() + static_cast<std::ptrdiff_t>(n)),
                              std::vector<float>(w.right.begin(), w.right.begin() + static_cast<std::ptrdiff_t>(n)),
                              w.sample_rate);
    };
    report.candidate = mix_features(trim(candidate), config);
    report.reference = mix_features(trim(reference), config);

    std::map<FeatureGroup, std::pair<double, std::size_t>> groups;
    for (std::size_t i = 0; i < report.reference.series.size(); ++i) {
        const FeatureSeries& ref = report.reference.series[i];
        const FeatureSeries& cand = report.candidate.series[i];
        if (const auto e = mape(cand.values, ref.values, config.reference_floor)) {
            report.by_feature[ref.name] = *e;
            groups[ref.group].first += *e;
            groups[ref.group].second += 1;
        }
    }
    if (report.candidate.loudness_lufs && report.reference.loudness_lufs &&
        std::abs(*report.reference.loudness_lufs) >= config.reference_floor) {
        const double e = std::abs(*report.candidate.loudness_lufs - *report.reference.loudness_lufs) /
                         std::abs(*report.reference.loudness_lufs);
        report.by_feature["loudness"] = e;
        groups[FeatureGroup::loudness] = {e, 1};
    }
    for (const auto& [group, acc] : groups) {
        report.by_group[group] = acc.first / static_cast<double>(acc.second);
    }
    return report;
}

std::vector<double> a_weighting_fir(double sample_rate, std::size_t taps) {
    if (taps % 2 == 0 || taps < 3) {
        throw DataError("A-weighting FIR needs an odd tap count of at least 3");
    }
    const std::size_t half = taps / 2;
    const std::size_t grid = 16 * taps;
    const double norm = a_weighting_gain(1000.0);
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(grid), static_cast<Eigen::Index>(half + 1));
    Eigen::VectorXd target(static_cast<Eigen::Index>(grid));
    for (std::size_t g = 0; g < grid; ++g) {
        const double omega = std::numbers::pi * static_cast<double>(g) / static_cast<double>(grid - 1);
        const auto row = static_cast<Eigen::Index>(g);
        basis(row, 0) = 1.0;
        for (std::size_t k = 1; k <= half; ++k) {
            basis(row, static_cast<Eigen::Index>(k)) = 2.0 * std::cos(static_cast<double>(k) * omega);
        }
        target(row) = a_weighting_gain(omega * sample_rate / (2.0 * std::numbers::pi)) / norm;
    }
    const Eigen::VectorXd c = basis.colPivHouseholderQr().solve(target);
    std::vector<double> h(taps);
    h[half] = c(0);
    for (std::size_t k = 1; k <= half; ++k) {
        h[half - k] = c(static_cast<Eigen::Index>(k));
        h[half + k] = c(static_cast<Eigen::Index>(k));
    }
    return h;
}

std::vector<double> lowpass_fir(double sample_rate, double cutoff_hz, std::size_t taps) {
    if (taps % 2 == 0 || taps < 3) {
        throw DataError("low-pass FIR needs an odd tap count of at least 3");
    }
    const double fc = std::min(cutoff_hz / sample_rate, 0.5);
    const std::vector<double> window = hann_symmetric(taps);
    const auto center = static_cast<double>(taps / 2);
    std::vector<double> h(taps);
    double sum = 0.0;
    for (std::size_t i = 0; i < taps; ++i) {
        const double x = static_cast<double>(i) - center;
        const double ideal = x == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * x) / (std::numbers::pi * x);
        h[i] = ideal * window[i];
        sum += h[i];
    }
    for (double& v : h) {
        v /= sum;
    }
    return h;
}

std::vector<double> pre_emphasis_fir(double sample_rate, const LossConfig& config) {
    const std::vector<double> a = a_weighting_fir(sample_rate, config.a_weighting_taps);
    const std::vector<double> lp = lowpass_fir(sample_rate, config.lowpass_hz, config.lowpass_taps);
    std::vector<double> h(a.size() + lp.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < lp.size(); ++j) {
            h[i + j] += a[i] * lp[j];
        }
    }
    return h;
}

MagnitudeTerms magnitude_terms(std::span<const double> reference, std::span<const double> estimate,
                               double log_epsilon) {
    if (reference.size() != estimate.size() || reference.empty()) {
        throw Error("magnitude arrays differ in size or are empty");
    }
    double diff_sq = 0.0;
    double ref_sq = 0.0;
    double log_abs = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference[i] - estimate[i];
        diff_sq += d * d;
        ref_sq += reference[i] * reference[i];
        log_abs += std::abs(std::log(reference[i] + log_epsilon) - std::log(estimate[i] + log_epsilon));
    }
    const auto n = static_cast<double>(reference.size());
    MagnitudeTerms terms;
    if (ref_sq > 0.0) {
        terms.sc = std::sqrt(diff_sq) / std::sqrt(ref_sq);
    } else {
        terms.sc = diff_sq == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    }
    terms.l1log = log_abs / n;
    terms.l2 = diff_sq / n;
    return terms;
}

LossBreakdown stereo_invariant_loss(const StereoWaveform& y, const StereoWaveform& y_hat, LossVariant variant,
                                    const LossConfig& config) {
    if (y.size() != y_hat.size()) {
        throw DataError("target and estimate lengths differ");
    }
    if (y.sample_rate != y_hat.sample_rate) {
        throw DataError("target and estimate sample rates differ");
    }
    if (y.empty()) {
        throw DataError("empty signal");
    }
    const std::vector<double> rho = pre_emphasis_fir(y.sample_rate, config);
    const StftParams params{config.fft_size, config.hop};

    const auto sum_diff_magnitudes = [&](const StereoWaveform& w) {
        const std::vector<double> l = fir_filter(to_double(w.left), rho);
        const std::vector<double> r = fir_filter(to_double(w.right), rho);
        std::vector<double> s(l.size());
        std::vector<double> d(l.size());
        for (std::size_t i = 0; i < l.size(); ++i) {
            s[i] = l[i] + r[i];
            d[i] = l[i] - r[i];
        }
        return std::pair{stft(std::span<const double>(s), params, w.sample_rate).magnitudes,
                         stft(std::span<const double>(d), params, w.sample_rate).magnitudes};
    };
    const auto [y_sum, y_diff] = sum_diff_magnitudes(y);
    const auto [h_sum, h_diff] = sum_diff_magnitudes(y_hat);
    const MagnitudeTerms sum_terms = magnitude_terms(y_sum, h_sum, config.log_epsilon);
    const MagnitudeTerms diff_terms = magnitude_terms(y_diff, h_diff, config.log_epsilon);

    if (variant == LossVariant::a && (std::isnan(sum_terms.sc) || std::isnan(diff_terms.sc))) {
        throw DataError("silent reference");
    }
    LossBreakdown out;
    out.sc_sum = sum_terms.sc;
    out.l1log_sum = sum_terms.l1log;
    out.l2_sum = sum_terms.l2;
    out.sc_diff = diff_terms.sc;
    out.l1log_diff = diff_terms.l1log;
    out.l2_diff = diff_terms.l2;
    out.total_a = out.sc_sum + out.l1log_sum + out.sc_diff + out.l1log_diff;
    out.total_b = out.l2_sum + out.l1log_sum + out.l2_diff + out.l1log_diff;
    return out;
}

}  // namespace stemnorm
