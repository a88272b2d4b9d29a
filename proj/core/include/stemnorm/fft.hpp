#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace stemnorm {

/// Real-input FFT of a fixed size backed by FFTW.
///
/// Plans are created once per size and shared process-wide; plan creation is
/// serialized internally. Each RealFft owns its own aligned scratch buffers, so
/// an instance must not be used from two threads at once, but any number of
/// instances may run concurrently.
class RealFft {
public:
    explicit RealFft(std::size_t size);
    ~RealFft();
    RealFft(RealFft&&) noexcept;
    RealFft& operator=(RealFft&&) noexcept;
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] std::size_t bins() const noexcept { return size_ / 2 + 1; }

    /// `in` holds size() samples; `out` receives bins() coefficients. Unnormalized.
    void forward(std::span<const double> in, std::span<std::complex<double>> out);

    /// Inverse of forward(), including the 1/size() normalization.
    void inverse(std::span<const std::complex<double>> in, std::span<double> out);

private:
    struct Buffers;
    std::size_t size_ = 0;
    std::unique_ptr<Buffers> buffers_;
};

[[nodiscard]] constexpr bool is_power_of_two(std::size_t n) noexcept {
    return n != 0 && (n & (n - 1)) == 0;
}

[[nodiscard]] constexpr std::size_t next_power_of_two(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

}  // namespace stemnorm
