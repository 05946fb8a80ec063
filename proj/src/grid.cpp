#include "eraser/grid.hpp"

#include <cmath>

#include "eraser/error.hpp"

namespace eraser {

Grid Grid::span(double lo, double hi, std::size_t n) {
    if (n < 2 || !std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw InputError("grid span needs n >= 2 and finite lo < hi");
    }
    return Grid{0.5 * (lo + hi), (hi - lo) / static_cast<double>(n - 1), n};
}

Grid Grid::symmetric(double half_width, std::size_t n) {
    if (n < 2 || !std::isfinite(half_width) || !(half_width > 0.0)) {
        throw InputError("symmetric grid needs n >= 2 and half_width > 0");
    }
    return Grid{0.0, 2.0 * half_width / static_cast<double>(n - 1), n};
}

}  // namespace eraser
