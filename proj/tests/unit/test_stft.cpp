#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "signals.hpp"
#include "stemnorm/error.hpp"
#include "stemnorm/savgol.hpp"
#include "stemnorm/stft.hpp"
#include "stemnorm/window.hpp"

using namespace stemnorm;

namespace {

std::vector<float> to_float(const std::vector<double>& x) { return {x.begin(), x.end()}; }

}  // namespace

TEST_CASE("frame count follows the centered framing", "[stft]") {
    CHECK(stft_frame_count(1, 512) == 1);
    CHECK(stft_frame_count(512, 512) == 1);
    CHECK(stft_frame_count(513, 512) == 2);
    CHECK(stft_frame_count(44100, 512) == 87);
}

TEST_CASE("invalid parameters are rejected", "[stft]") {
    CHECK_THROWS_AS(validate(StftParams{1000, 250}), DataError);
    CHECK_THROWS_AS(validate(StftParams{1024, 0}), DataError);
    CHECK_THROWS_AS(validate(StftParams{1024, 2048}), DataError);
    CHECK_THROWS_AS(stft(std::span<const float>(), StftParams{}, 44100.0), DataError);
}

TEST_CASE("STFT followed by inverse reconstructs the signal", "[stft]") {
    const std::vector<float> x = to_float(test::gaussian_noise(10007, 0.2, 5));
    for (const StftParams p : {StftParams{2048, 512}, StftParams{2048, 1024}, StftParams{1024, 256}}) {
        const std::vector<float> y = istft(stft(std::span<const float>(x), p, 44100.0));
        REQUIRE(y.size() == x.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            worst = std::max(worst, static_cast<double>(std::abs(x[i] - y[i])));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("a DC signal lands in bin 0 with the window sum", "[stft]") {
    const std::vector<double> x(8192, 0.5);
    const Spectrogram s = stft(std::span<const double>(x), StftParams{1024, 256}, 44100.0);
    // An interior frame: |X[0]| = 0.5 * sum(hann_periodic) = 0.5 * N / 2.
    CHECK(s.magnitude(8, 0) == Catch::Approx(256.0).epsilon(1e-12));
    CHECK(s.magnitude(8, 1) == Catch::Approx(128.0).epsilon(1e-12));
    CHECK(s.magnitude(8, 2) < 1e-9);
}

TEST_CASE("a bin-centered sine peaks at its bin", "[stft]") {
    const std::size_t n = 2048;
    const double rate = 44100.0;
    const double f = 100.0 * rate / static_cast<double>(n);
    std::vector<double> x(16384);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / rate);
    }
    const Spectrogram s = stft(std::span<const double>(x), StftParams{n, 512}, rate);
    // Amplitude 1 sine under a Hann window: |X[k]| = N / 4.
    CHECK(s.magnitude(10, 100) == Catch::Approx(512.0).epsilon(1e-9));
    CHECK(s.bin_frequency(100) == Catch::Approx(f));
}

TEST_CASE("Parseval holds frame by frame", "[stft]") {
    const std::vector<double> x = test::gaussian_noise(8192, 1.0, 6);
    const std::size_t n = 1024;
    StftAnalyzer analyzer(x, StftParams{n, 256});
    const std::vector<double>& w = analyzer.window();
    std::vector<std::complex<double>> spectrum(analyzer.bins());
    const std::size_t t = 10;
    analyzer.frame(t, spectrum);
    double time_energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x[t * 256 + i - n / 2] * w[i];
        time_energy += v * v;
    }
    double freq_energy = std::norm(spectrum[0]) + std::norm(spectrum[n / 2]);
    for (std::size_t k = 1; k < n / 2; ++k) {
        freq_energy += 2.0 * std::norm(spectrum[k]);
    }
    CHECK(freq_energy / static_cast<double>(n) == Catch::Approx(time_energy).epsilon(1e-10));
}

TEST_CASE("the transform is linear", "[stft]") {
    const std::vector<double> a = test::gaussian_noise(4096, 1.0, 7);
    const std::vector<double> b = test::gaussian_noise(4096, 1.0, 8);
    std::vector<double> sum(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum[i] = 2.0 * a[i] - 3.0 * b[i];
    }
    const StftParams p{512, 128};
    StftAnalyzer sa(a, p);
    StftAnalyzer sb(b, p);
    StftAnalyzer ss(sum, p);
    std::vector<std::complex<double>> xa(sa.bins()), xb(sa.bins()), xs(sa.bins());
    double worst = 0.0;
    for (std::size_t t = 0; t < sa.frames(); ++t) {
        sa.frame(t, xa);
        sb.frame(t, xb);
        ss.frame(t, xs);
        for (std::size_t k = 0; k < xa.size(); ++k) {
            worst = std::max(worst, std::abs(xs[k] - (2.0 * xa[k] - 3.0 * xb[k])));
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("analyzer and overlap-adder round trip in double precision", "[stft]") {
    const std::vector<double> x = test::gaussian_noise(5000, 1.0, 9);
    const StftParams p{1024, 256};
    StftAnalyzer analyzer(x, p);
    OverlapAdder adder(x.size(), p);
    std::vector<std::complex<double>> spectrum(analyzer.bins());
    for (std::size_t t = 0; t < analyzer.frames(); ++t) {
        analyzer.frame(t, spectrum);
        adder.add(t, spectrum);
    }
    const std::vector<double> y = adder.finish();
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max(worst, std::abs(x[i] - y[i]));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("Hann windows", "[window]") {
    const std::vector<double> p = hann_periodic(8);
    CHECK(p[0] == 0.0);
    CHECK(p[4] == Catch::Approx(1.0));
    CHECK(p[2] == Catch::Approx(0.5));
    const std::vector<double> s = hann_symmetric(9);
    CHECK(s[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(s[8] == Catch::Approx(0.0).margin(1e-15));
    CHECK(s[4] == Catch::Approx(1.0));
    // Constant overlap-add at N/4: sum of shifted windows is 2.
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(p[i] + p[i + 2] + p[i + 4] + p[(i + 6) % 8] == Catch::Approx(2.0));
    }
}

TEST_CASE("Savitzky-Golay smoothing", "[savgol]") {
    SECTION("quadratics pass through unchanged, edges included") {
        std::vector<double> x(50);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = static_cast<double>(i);
            x[i] = 0.3 * t * t - 2.0 * t + 1.0;
        }
        const std::vector<double> y = savgol_filter(x, 11, 2);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(y[i] == Catch::Approx(x[i]).margin(1e-9));
        }
    }
    SECTION("oracle: five-point quadratic coefficients") {
        // Published coefficients for window 5, order 2: (-3, 12, 17, 12, -3) / 35.
        const std::vector<double> x{0, 0, 0, 0, 1, 0, 0, 0, 0};
        const std::vector<double> y = savgol_filter(x, 5, 2);
        CHECK(y[2] == Catch::Approx(-3.0 / 35.0));
        CHECK(y[3] == Catch::Approx(12.0 / 35.0));
        CHECK(y[4] == Catch::Approx(17.0 / 35.0));
    }
    SECTION("short inputs shrink the window or pass through") {
        const std::vector<double> x{1.0, 5.0};
        CHECK(savgol_filter(x, 65, 2) == x);
        const std::vector<double> z{1.0, 2.0, 4.0, 8.0, 16.0};
        CHECK(savgol_filter(z, 65, 2).size() == z.size());
    }
}
