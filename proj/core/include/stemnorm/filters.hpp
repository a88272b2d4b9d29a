#pragma once

#include <complex>
#include <span>
#include <vector>

namespace stemnorm {

/// Second-order section normalized so a0 == 1.
struct Biquad {
    double b0 = 1.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;

    /// Complex response at `freq_hz`.
    [[nodiscard]] std::complex<double> response(double freq_hz, double sample_rate) const;
};

// RBJ audio-EQ-cookbook designs.
[[nodiscard]] Biquad low_shelf(double sample_rate, double cutoff_hz, double gain_db, double q);
[[nodiscard]] Biquad high_shelf(double sample_rate, double cutoff_hz, double gain_db, double q);
[[nodiscard]] Biquad peaking(double sample_rate, double center_hz, double gain_db, double q);

/// Transposed direct form II, double-precision state, in place.
void apply_biquad(const Biquad& section, std::span<double> signal);
void apply_biquad(const Biquad& section, std::span<float> signal);

/// Full linear convolution (length n + m - 1) via FFT overlap-add.
[[nodiscard]] std::vector<double> fft_convolve(std::span<const double> signal,
                                               std::span<const double> kernel);

/// Causal FIR filtering with zero initial state; output has the input's length.
[[nodiscard]] std::vector<double> fir_filter(std::span<const double> signal,
                                             std::span<const double> taps);

/// Forward-backward FIR filtering: zero phase, squared magnitude response.
/// Both ends are reflect-padded by the filter length before filtering and the
/// padding is trimmed afterwards, so the output has the input's length.
[[nodiscard]] std::vector<double> filtfilt_fir(std::span<const double> signal,
                                               std::span<const double> taps);

}  // namespace stemnorm
