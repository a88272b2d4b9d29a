#include "stemnorm/window.hpp"

#include <cmath>
#include <numbers>

namespace stemnorm {

std::vector<double> hann_periodic(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n));
    }
    return w;
}

std::vector<double> hann_symmetric(std::size_t n) {
    if (n == 1) {
        return {1.0};
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n - 1));
    }
    return w;
}

}  // namespace stemnorm
