#pragma once

// Scalar 1-D transverse wave optics: source modes, slit apertures and
// direct-quadrature Fresnel / Fraunhofer propagation.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eraser/grid.hpp"
#include "eraser/polarization.hpp"

namespace eraser {

/// Complex amplitude sampled on a transverse grid at longitudinal plane z.
struct ScalarField {
    Grid grid;
    std::vector<cplx> samples;
    double wavelength = 0.0;  // m
    double z = 0.0;           // m

    static ScalarField zeros(const Grid& grid, double wavelength, double z = 0.0);

    double wavenumber() const;
    /// sum |u|^2 dx
    double power() const;
    /// Linear interpolation between samples; zero outside the grid.
    cplx value_at(double x) const;
};

/// <a|b> = sum conj(a) b dx. Grids must match.
cplx overlap(const ScalarField& a, const ScalarField& b);
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator*(cplx s, const ScalarField& a);

/// Detector-plane rates. `positions` in meters, `rates` non-negative.
struct Pattern {
    std::vector<double> positions;
    std::vector<double> rates;
    std::string label;
};

Pattern intensity(const ScalarField& f, std::string label = {});

enum class Slit { none, upper, lower };

const char* to_string(Slit s);

struct SlitWindow {
    Slit slit = Slit::none;
    double lo = 0.0;
    double hi = 0.0;
};

struct Aperture {
    enum class Kind { single_slit, double_slit };

    Kind kind = Kind::double_slit;
    double width = 0.0;       // m
    double separation = 0.0;  // m, center to center; double slit only
    double center = 0.0;      // m
    bool upper_open = true;
    bool lower_open = true;

    static Aperture double_slit(double width, double separation, double center = 0.0);
    static Aperture single_slit(double width, double center = 0.0);

    /// Transmitting windows, upper (larger x) first. Validates the geometry.
    std::vector<SlitWindow> open_slits() const;
    /// Every slit, open or closed.
    std::vector<SlitWindow> all_slits() const;
    /// Extent from the lowest slit edge to the highest.
    double span() const;
};

/// Fraction of the cell around `x` (width dx) covered by [lo, hi].
double cell_coverage(double x, double dx, double lo, double hi);

/// Hermite-Gauss mode of order 0 or 1, normalized to unit power on `grid`.
ScalarField hermite_gauss(int order, double waist, const Grid& grid, double wavelength);

/// Multiply by the aperture transmission (cell-coverage weighted at edges).
ScalarField apply_aperture(const ScalarField& f, const Aperture& ap);
/// Keep only the part of `f` transmitted by one slit window.
ScalarField mask_window(const ScalarField& f, const SlitWindow& w);

/// Direct quadrature of the 1-D Fresnel integral from f.z to f.z + distance,
/// evaluated on `out_grid`.
ScalarField fresnel_propagate(const ScalarField& f, double distance, const Grid& out_grid);

/// Fresnel propagation that also returns d/dx of the propagated field,
/// obtained by differentiating the kernel under the integral.
std::pair<ScalarField, ScalarField> fresnel_propagate_with_gradient(const ScalarField& f,
                                                                    double distance,
                                                                    const Grid& out_grid);

/// Far-field (scaled Fourier transform) pattern at `distance`, including the
/// output quadratic phase so that it is directly comparable to Fresnel.
ScalarField fraunhofer_pattern(const ScalarField& f, double distance, const Grid& out_grid);

/// sinc^2(pi a x / (lambda L)) cos^2(pi d x / (lambda L)); peak value 1 at x = 0.
double double_slit_closed_form(double width, double separation, double wavelength,
                               double distance, double x);
/// sinc^2(pi a x / (lambda L))
double single_slit_closed_form(double width, double wavelength, double distance, double x);

/// 2 D^2 / lambda for an aperture of total extent D.
double fraunhofer_distance(double span, double wavelength);
/// Non-fatal diagnostic when `distance` is inside the Fraunhofer distance.
std::optional<std::string> fraunhofer_warning(double distance, double span, double wavelength);

/// Power in the outermost `edge_cells` samples on either side, relative to the
/// total. Small values mean the grid captured the beam.
double tail_fraction(const ScalarField& f, std::size_t edge_cells);

}  // namespace eraser
