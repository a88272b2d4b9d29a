#include "stemnorm/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>

#include "stemnorm/error.hpp"

namespace stemnorm {
namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Plans live for the whole process; FFTW planning is not thread-safe, execution is.
PlanPair plans_for(std::size_t n, double* real, fftw_complex* spectrum) {
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard lock(planner_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    const int size = static_cast<int>(n);
    PlanPair plans;
    plans.forward = fftw_plan_dft_r2c_1d(size, real, spectrum, FFTW_ESTIMATE);
    plans.inverse = fftw_plan_dft_c2r_1d(size, spectrum, real, FFTW_ESTIMATE);
    if (plans.forward == nullptr || plans.inverse == nullptr) {
        throw Error("FFTW failed to create a plan of size " + std::to_string(n));
    }
    cache.emplace(n, plans);
    return plans;
}

}  // namespace

struct RealFft::Buffers {
    double* real = nullptr;
    fftw_complex* spectrum = nullptr;
    PlanPair plans;

    ~Buffers() {
        fftw_free(real);
        fftw_free(spectrum);
    }
};

RealFft::RealFft(std::size_t size) : size_(size), buffers_(std::make_unique<Buffers>()) {
    if (size < 2) {
        throw Error("FFT size must be at least 2");
    }
    buffers_->real = fftw_alloc_real(size);
    buffers_->spectrum = fftw_alloc_complex(size / 2 + 1);
    if (buffers_->real == nullptr || buffers_->spectrum == nullptr) {
        throw Error("FFT buffer allocation failed");
    }
    buffers_->plans = plans_for(size, buffers_->real, buffers_->spectrum);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
    std::copy_n(in.begin(), size_, buffers_->real);
    fftw_execute_dft_r2c(buffers_->plans.forward, buffers_->real, buffers_->spectrum);
    const std::size_t n_bins = bins();
    for (std::size_t k = 0; k < n_bins; ++k) {
        out[k] = {buffers_->spectrum[k][0], buffers_->spectrum[k][1]};
    }
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    const std::size_t n_bins = bins();
    for (std::size_t k = 0; k < n_bins; ++k) {
        buffers_->spectrum[k][0] = in[k].real();
        buffers_->spectrum[k][1] = in[k].imag();
    }
    // c2r destroys its input; the scratch copy above absorbs that.
    fftw_execute_dft_c2r(buffers_->plans.inverse, buffers_->spectrum, buffers_->real);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t i = 0; i < size_; ++i) {
        out[i] = buffers_->real[i] * scale;
    }
}

}  // namespace stemnorm
