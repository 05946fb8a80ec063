#pragma once

// Pattern metrics: fringe visibility, fringe fits and pattern arithmetic.

#include <string>

#include "eraser/waveoptics.hpp"

namespace eraser {

struct Window {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return x >= lo && x <= hi; }

    /// |x| <= lambda L / (2a): the central half of the single-slit envelope lobe.
    static Window central_envelope(double slit_width, double wavelength, double distance);
};

/// (max - min) / (max + min) over the window; 0 when max + min == 0.
double visibility(const Pattern& p, const Window& w);

/// Visibility of p / reference over the window. The reference is the
/// incoherent (which-slit) sum, so the diffraction envelope divides out and
/// only the interference term is measured. Samples where the reference is
/// below 1e-12 of its window maximum are skipped.
double visibility(const Pattern& p, const Window& w, const Pattern& reference);

enum class FringeClass { fringe, anti_fringe, none };

const char* to_string(FringeClass c);

struct FringeFit {
    double visibility = 0.0;  // [0, 1]
    double period = 0.0;      // m
    double phase = 0.0;       // (-pi, pi], x = 0 on the symmetry axis
    double residual = 0.0;    // rms residual / mean rate
    FringeClass classification = FringeClass::none;
};

/// Least-squares fit of rates to A E(x) (1 + V cos(2 pi x / T + phi)), where
/// E is `reference` (or 1). The period starts at `expected_period` and is
/// refined within [0.8, 1.25] of it when the seed fit shows fringes.
FringeFit fit_fringe(const Pattern& p, double expected_period, const Window& w);
FringeFit fit_fringe(const Pattern& p, double expected_period, const Window& w,
                     const Pattern& reference);

Pattern add(const Pattern& a, const Pattern& b);
Pattern scale(const Pattern& p, double c);

struct Normalized {
    Pattern pattern;
    bool all_zero = false;  // input had zero total rate and was returned unchanged
};

/// Scale to unit total rate.
Normalized normalize(const Pattern& p);
/// Scale to unit peak rate (all-zero input returned unchanged).
Pattern peak_normalize(const Pattern& p);

/// max |a - b| / max |b|
double l_inf_relative_distance(const Pattern& a, const Pattern& b);
/// sqrt(sum (a - b)^2 / sum b^2)
double l2_relative_distance(const Pattern& a, const Pattern& b);
/// sum |a - b|
double l1_distance(const Pattern& a, const Pattern& b);

}  // namespace eraser
