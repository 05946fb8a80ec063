#pragma once

// Biphoton states as explicit superpositions of product terms, with local
// element application per arm and coincidence / singles rates from the idler
// Gram matrix.

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "eraser/polarization.hpp"
#include "eraser/waveoptics.hpp"

namespace eraser {

struct BiphotonTerm {
    cplx amp{1.0, 0.0};
    ScalarField signal;
    ScalarField idler;
    JonesVector signal_pol;
    JonesVector idler_pol;
    /// Which slit this term passed; set when a double slit splits the state.
    Slit slit = Slit::none;
    /// Signal plane of the slit that produced `slit`.
    double slit_z = 0.0;
};

struct BiphotonState {
    std::vector<BiphotonTerm> terms;
};

/// Mode and grid shared by both arms at the source (slit) plane.
struct SourceConfig {
    double wavelength = 700e-9;
    double waist = 200e-6;
    Grid grid;
};

/// Anti-correlated polarization pair in the fundamental mode:
/// (g H, g V) + (g V, g H), amplitude 1/sqrt(2) each.
BiphotonState source_walborn(const SourceConfig& cfg);

/// Lobe-correlated pair from a first-order pump: (u1, v1) + (u2, v2), where
/// u1/u2 are the upper/lower halves of the HG1 mode split at its node, each
/// renormalized. Both arms horizontally polarized.
BiphotonState source_menzel(const SourceConfig& cfg);

/// Single product term with mode `order` in both arms (signal H, idler V).
BiphotonState source_product(const SourceConfig& cfg, int order);

enum class Propagator { fresnel, fraunhofer };

const char* to_string(Propagator p);

/// Jones matrix applied to one slit's terms only. Must sit at the slit plane.
struct SlitPlate {
    Slit slit = Slit::upper;
    JonesMatrix m;
};

/// Jones matrix applied to every term of the arm.
struct PolarizationElement {
    JonesMatrix m;
};

struct Propagation {
    double distance = 0.0;
    Propagator method = Propagator::fresnel;
    Grid out_grid;
};

using ArmElement = std::variant<Aperture, SlitPlate, PolarizationElement, Propagation>;

/// Apply an element to the signal arm. A double slit splits every term into
/// one term per open slit; slit plates then act on the matching terms.
BiphotonState apply_signal_element(const BiphotonState& st, const ArmElement& e);
BiphotonState apply_idler_element(const BiphotonState& st, const ArmElement& e);

/// Coalesce terms whose fields, polarizations and slit tags agree within
/// 1e-12 (relative to the larger field) by adding amplitudes.
BiphotonState merge_terms(const BiphotonState& st);

struct IdlerDetector {
    enum class Mode { bucket, point, polarized, point_polarized, lobe };

    Mode mode = Mode::bucket;
    double x = 0.0;      // m, point modes; lobe boundary for Mode::lobe
    double angle = 0.0;  // rad, polarized modes
    bool upper = true;   // Mode::lobe: integrate x > boundary (else x < boundary)

    static IdlerDetector bucket() { return {}; }
    static IdlerDetector point(double x) { return {Mode::point, x, 0.0}; }
    static IdlerDetector polarized(double angle) { return {Mode::polarized, 0.0, angle}; }
    static IdlerDetector point_polarized(double x, double angle) {
        return {Mode::point_polarized, x, angle};
    }
    /// Bucket over one half-plane of the idler beam.
    static IdlerDetector lobe(bool upper, double boundary = 0.0) {
        return {Mode::lobe, boundary, 0.0, upper};
    }
};

/// G[t'][t] for the given idler measurement.
std::vector<std::vector<cplx>> idler_gram(const BiphotonState& st, const IdlerDetector& det);

/// Signal rate at each scan position in coincidence with `det`. Every term's
/// signal field must already be on `scan` at plane `plane_z`.
Pattern coincidence_pattern(const BiphotonState& st, const Grid& scan, double plane_z,
                            const IdlerDetector& det);

/// Signal rate with the idler traced out.
Pattern singles_pattern(const BiphotonState& st, const Grid& scan, double plane_z);

/// Sum of the coincidence patterns of each slit's terms taken alone: the
/// incoherent which-slit reference used for envelope-normalized visibility.
Pattern which_slit_reference(const BiphotonState& st, const Grid& scan, double plane_z,
                             const IdlerDetector& det);

/// Joint probabilities P[signal][idler], index 0 = upper (x > split),
/// 1 = lower, from the half-plane integrals of the joint rate. Normalized.
using LobeTable = std::array<std::array<double, 2>, 2>;
LobeTable near_field_correlation(const BiphotonState& st, double split = 0.0);

/// Total two-photon norm sum_{t,t'} a_t a_t'* <s_t'|s_t> <i_t'|i_t> with
/// polarization overlaps.
double total_norm(const BiphotonState& st);

/// Integrated coincidence rate (sum over the scan of rate * dx).
double integrated_rate(const Pattern& p);

}  // namespace eraser
