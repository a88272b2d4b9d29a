#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stemnorm {

/// Savitzky-Golay smoothing with an odd `window` and polynomial `order`.
/// Edges use a polynomial fit to the first/last full window (scipy's "interp").
/// Windows longer than the data shrink to the longest odd length that fits;
/// if no window longer than `order` fits, the input is returned unchanged.
[[nodiscard]] std::vector<double> savgol_filter(std::span<const double> values,
                                                std::size_t window, std::size_t order);

}  // namespace stemnorm
