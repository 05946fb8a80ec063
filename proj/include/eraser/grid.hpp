#pragma once

#include <cstddef>

namespace eraser {

/// Uniform 1-D sample grid described by its center, spacing and size.
///
/// Samples sit at center + (i - (n-1)/2) * dx, so a grid centered at zero is
/// exactly antisymmetric: at(i) == -at(n-1-i) bit for bit.
struct Grid {
    double center = 0.0;
    double dx = 1.0;
    std::size_t n = 0;

    double at(std::size_t i) const {
        return center + (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * dx;
    }
    double front() const { return at(0); }
    double back() const { return at(n - 1); }

    /// n samples spanning [lo, hi] inclusive. Requires n >= 2 and lo < hi.
    static Grid span(double lo, double hi, std::size_t n);
    /// n samples spanning [-half_width, half_width] inclusive.
    static Grid symmetric(double half_width, std::size_t n);

    friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace eraser
