#pragma once

#include <cstddef>
#include <vector>

namespace stemnorm {

/// Periodic Hann window (DFT-even). Satisfies constant overlap-add at hops of N/2 and N/4.
[[nodiscard]] std::vector<double> hann_periodic(std::size_t n);

/// Symmetric Hann window, used for FIR design.
[[nodiscard]] std::vector<double> hann_symmetric(std::size_t n);

}  // namespace stemnorm
