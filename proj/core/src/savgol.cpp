#include "stemnorm/savgol.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace stemnorm {

std::vector<double> savgol_filter(std::span<const double> values, std::size_t window,
                                  std::size_t order) {
    const std::size_t n = values.size();
    std::size_t w = window | 1U;
    if (w > n) {
        w = (n % 2 == 1) ? n : n - 1;
    }
    if (n == 0 || w <= order || w < 3) {
        return {values.begin(), values.end()};
    }
    const std::size_t half = w / 2;
    const auto cols = static_cast<Eigen::Index>(order + 1);
    const auto rows = static_cast<Eigen::Index>(w);

    // Positions scaled to [-1, 1] keep the normal equations well conditioned.
    Eigen::MatrixXd vander(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double x = (static_cast<double>(r) - static_cast<double>(half)) / static_cast<double>(half);
        double p = 1.0;
        for (Eigen::Index c = 0; c < cols; ++c) {
            vander(r, c) = p;
            p *= x;
        }
    }
    // Rows of `fit` map window samples to polynomial coefficients.
    const Eigen::MatrixXd gram = vander.transpose() * vander;
    const Eigen::MatrixXd fit = gram.ldlt().solve(vander.transpose());
    // Smoothed value at a window position = vander row * fit.
    const Eigen::MatrixXd projector = vander * fit;

    std::vector<double> out(n);
    const Eigen::RowVectorXd center = projector.row(static_cast<Eigen::Index>(half));
    for (std::size_t i = half; i + half < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < w; ++j) {
            acc += center(static_cast<Eigen::Index>(j)) * values[i - half + j];
        }
        out[i] = acc;
    }
    for (std::size_t i = 0; i < half; ++i) {
        double head = 0.0;
        double tail = 0.0;
        const auto head_row = projector.row(static_cast<Eigen::Index>(i));
        const auto tail_row = projector.row(static_cast<Eigen::Index>(w - half + i));
        for (std::size_t j = 0; j < w; ++j) {
            head += head_row(static_cast<Eigen::Index>(j)) * values[j];
            tail += tail_row(static_cast<Eigen::Index>(j)) * values[n - w + j];
        }
        out[i] = head;
        out[n - half + i] = tail;
    }
    return out;
}

}  // namespace stemnorm
