#include "stemnorm/eq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stemnorm/error.hpp"
#include "stemnorm/filters.hpp"
#include "stemnorm/numeric.hpp"
#include "stemnorm/savgol.hpp"
#include "stemnorm/window.hpp"

namespace stemnorm {
namespace {

void require_compatible(const AverageSpectrum& a, const AverageSpectrum& b) {
    if (a.fft_size != b.fft_size || a.bins() != b.bins()) {
        throw DataError("spectra have different FFT sizes (" + std::to_string(a.fft_size) + " vs " +
                        std::to_string(b.fft_size) + ")");
    }
    if (a.sample_rate != b.sample_rate) {
        throw DataError("sample-rate mismatch between spectra");
    }
}

std::vector<double> to_double(const std::vector<float>& x) { return {x.begin(), x.end()}; }

std::vector<float> to_float(const std::vector<double>& x) { return {x.begin(), x.end()}; }

}  // namespace

AverageSpectrum stem_mean_spectrum(const StereoWaveform& w, const EqConfig& config) {
    const StftParams params = config.stft();
    validate(params);
    if (w.size() < config.fft_size) {
        throw DataError("stem too short for EQ analysis: needs at least " +
                        std::to_string(static_cast<double>(config.fft_size) / w.sample_rate) +
                        " s (" + std::to_string(config.fft_size) + " samples)");
    }
    const std::size_t bins = params.fft_size / 2 + 1;
    std::vector<double> sum(bins, 0.0);
    std::vector<std::complex<double>> spectrum(bins);
    std::size_t frames = 0;
    for (const auto* channel : {&w.left, &w.right}) {
        const std::vector<double> x = to_double(*channel);
        StftAnalyzer analyzer(x, params);
        for (std::size_t t = 0; t < analyzer.frames(); ++t) {
            analyzer.frame(t, spectrum);
            for (std::size_t k = 0; k < bins; ++k) {
                sum[k] += std::abs(spectrum[k]);
            }
        }
        frames += analyzer.frames();
    }
    AverageSpectrum out;
    out.fft_size = params.fft_size;
    out.sample_rate = w.sample_rate;
    out.magnitude.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        out.magnitude[k] = std::max(sum[k] / static_cast<double>(frames), config.magnitude_floor);
    }
    return out;
}

AverageSpectrum corpus_average_spectrum(std::span<const AverageSpectrum> spectra) {
    if (spectra.empty()) {
        throw DataError("cannot average an empty list of spectra");
    }
    CompensatedVectorSum sum(spectra.front().bins());
    for (const AverageSpectrum& s : spectra) {
        require_compatible(spectra.front(), s);
        sum.add(s.magnitude);
    }
    AverageSpectrum out;
    out.fft_size = spectra.front().fft_size;
    out.sample_rate = spectra.front().sample_rate;
    out.stem_type = spectra.front().stem_type;
    out.magnitude = sum.value();
    const double n = static_cast<double>(spectra.size());
    for (double& m : out.magnitude) {
        m /= n;
    }
    return out;
}

std::vector<double> eq_correction_db(const AverageSpectrum& stem, const AverageSpectrum& target,
                                     const EqConfig& config) {
    require_compatible(stem, target);
    std::vector<double> diff(stem.bins());
    for (std::size_t k = 0; k < diff.size(); ++k) {
        const double t = std::max(target.magnitude[k], config.magnitude_floor);
        const double s = std::max(stem.magnitude[k], config.magnitude_floor);
        const double d = 20.0 * (std::log10(t) - std::log10(s));
        if (!std::isfinite(d)) {
            throw DataError("non-finite EQ correction at bin " + std::to_string(k) +
                            "; the target spectrum looks corrupt");
        }
        diff[k] = std::clamp(d, -config.max_gain_db, config.max_gain_db);
    }
    std::vector<double> smooth = savgol_filter(diff, config.savgol_window, config.savgol_order);
    for (double& d : smooth) {
        d = std::clamp(d, -config.max_gain_db, config.max_gain_db);
    }
    return smooth;
}

std::vector<double> design_eq_fir(std::span<const double> amplitude, std::size_t taps) {
    if (amplitude.size() < 2) {
        throw DataError("FIR design needs at least two frequency samples");
    }
    if (taps % 2 == 0) {
        throw DataError("FIR tap count must be odd for a linear-phase type I design");
    }
    const std::size_t n_fft = 2 * (amplitude.size() - 1);
    if (taps > n_fft) {
        throw DataError("FIR tap count exceeds the frequency grid resolution");
    }
    RealFft fft(n_fft);
    std::vector<std::complex<double>> spectrum(amplitude.begin(), amplitude.end());
    std::vector<double> impulse(n_fft);
    fft.inverse(spectrum, impulse);

    const std::vector<double> window = hann_symmetric(taps);
    const std::size_t half = taps / 2;
    std::vector<double> h(taps);
    for (std::size_t i = 0; i < taps; ++i) {
        const std::size_t idx = (i + n_fft - half) % n_fft;
        h[i] = impulse[idx] * window[i];
    }
    return h;
}

StereoWaveform match_eq(const StereoWaveform& w, const AverageSpectrum& target, const EqConfig& config) {
    if (target.fft_size != config.fft_size) {
        throw DataError("EQ target was computed with a different FFT size");
    }
    if (target.sample_rate != w.sample_rate) {
        throw DataError("sample-rate mismatch between stem and EQ target");
    }
    const AverageSpectrum own = stem_mean_spectrum(w, config);
    const std::vector<double> correction = eq_correction_db(own, target, config);

    // Forward-backward filtering squares the response, so design for its square root.
    std::vector<double> amplitude(correction.size());
    for (std::size_t k = 0; k < amplitude.size(); ++k) {
        amplitude[k] = std::pow(10.0, correction[k] / 40.0);
    }
    const std::vector<double> taps = design_eq_fir(amplitude, config.fir_taps);

    StereoWaveform out;
    out.sample_rate = w.sample_rate;
    out.left = to_float(filtfilt_fir(to_double(w.left), taps));
    out.right = to_float(filtfilt_fir(to_double(w.right), taps));
    return out;
}

double smoothed_spectrum_deviation_db(const AverageSpectrum& measured, const AverageSpectrum& target,
                                      double low_hz, double high_hz, const EqConfig& config) {
    require_compatible(measured, target);
    std::vector<double> diff(measured.bins());
    for (std::size_t k = 0; k < diff.size(); ++k) {
        diff[k] = 20.0 * (std::log10(std::max(measured.magnitude[k], config.magnitude_floor)) -
                          std::log10(std::max(target.magnitude[k], config.magnitude_floor)));
    }
    const std::vector<double> smooth = savgol_filter(diff, config.savgol_window, config.savgol_order);
    double worst = 0.0;
    for (std::size_t k = 0; k < smooth.size(); ++k) {
        const double f = measured.bin_frequency(k);
        if (f >= low_hz && f <= high_hz) {
            worst = std::max(worst, std::abs(smooth[k]));
        }
    }
    return worst;
}

}  // namespace stemnorm
