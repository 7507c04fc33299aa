#include "cournot/quadrature.hpp"

#include <stdexcept>

namespace cournot {

double simpson(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    const std::size_t intervals = n - 1;
    if (intervals == 1) return 0.5 * h * (f[0] + f[1]);

    std::size_t even_end = intervals;  // Simpson 1/3 covers [0, even_end]
    if (intervals % 2 == 1) even_end = intervals - 3;

    double acc = 0.0;
    if (even_end > 0) {
        double s = f[0] + f[even_end];
        for (std::size_t i = 1; i < even_end; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
        acc = s * h / 3.0;
    }
    if (even_end != intervals) {
        const std::size_t i = even_end;
        acc += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
    }
    return acc;
}

}  // namespace cournot
