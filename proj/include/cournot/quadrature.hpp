#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cournot {

/// Composite Simpson on uniformly spaced samples. An odd number of intervals
/// closes with a Simpson 3/8 panel; two samples fall back to the trapezoid.
double simpson(std::span<const double> samples, double spacing);

/// 8-point Gauss-Legendre rule on [lo, hi].
template <typename F>
double gauss_legendre8(F&& f, double lo, double hi);

/// Cumulative integral of f on the uniform grid lo + j*spacing, j = 0..n,
/// integrated panel by panel with gauss_legendre8. Entry 0 is zero.
template <typename F>
std::vector<double> cumulative_integral(F&& f, double lo, double spacing, std::size_t n);

namespace detail {
inline constexpr double kGl8Nodes[4] = {0.1834346424956498, 0.5255324099163290,
                                        0.7966664774136267, 0.9602898564975363};
inline constexpr double kGl8Weights[4] = {0.3626837833783620, 0.3137066458778873,
                                          0.2223810344533745, 0.1012285362903763};
}  // namespace detail

template <typename F>
double gauss_legendre8(F&& f, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double dx = half * detail::kGl8Nodes[i];
        acc += detail::kGl8Weights[i] * (f(mid - dx) + f(mid + dx));
    }
    return half * acc;
}

template <typename F>
std::vector<double> cumulative_integral(F&& f, double lo, double spacing, std::size_t n) {
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double a = lo + static_cast<double>(j) * spacing;
        out[j + 1] = out[j] + gauss_legendre8(f, a, a + spacing);
    }
    return out;
}

}  // namespace cournot
