#pragma once

// Jones calculus for one photon and for the signal/idler polarization pair.
//
// Angles are radians. Wave plates follow the convention fast axis -> phase 0,
// slow axis -> phase +pi/2, i.e. R(t) diag(1, i) R(-t).

#include <array>
#include <complex>

namespace eraser {

using cplx = std::complex<double>;

struct JonesVector {
    cplx h{};
    cplx v{};

    double norm2() const { return std::norm(h) + std::norm(v); }

    static JonesVector horizontal() { return {1.0, 0.0}; }
    static JonesVector vertical() { return {0.0, 1.0}; }
    /// Linear polarization at `angle` from horizontal.
    static JonesVector linear(double angle);

    friend bool operator==(const JonesVector&, const JonesVector&) = default;
};

/// <a|b>, conjugate-linear in the first argument.
cplx inner(const JonesVector& a, const JonesVector& b);
JonesVector operator*(cplx s, const JonesVector& a);
JonesVector operator+(const JonesVector& a, const JonesVector& b);

/// Row-major 2x2 complex matrix.
struct JonesMatrix {
    std::array<cplx, 4> m{1.0, 0.0, 0.0, 1.0};

    cplx operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }
    cplx& operator()(int r, int c) { return m[static_cast<std::size_t>(2 * r + c)]; }

    JonesMatrix adjoint() const;
    JonesMatrix transpose() const;

    static JonesMatrix identity() { return {}; }

    friend bool operator==(const JonesMatrix&, const JonesMatrix&) = default;
};

JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b);
JonesVector operator*(const JonesMatrix& a, const JonesVector& x);

JonesMatrix rotation(double theta);
JonesMatrix quarter_wave_plate(double fast_axis);
JonesMatrix linear_polarizer(double angle);

/// Two-photon polarization amplitudes c[a][b]: a indexes the signal basis
/// {H, V}, b the idler basis {H, V}.
struct TwoPhotonPol {
    std::array<std::array<cplx, 2>, 2> c{};

    double norm2() const;

    /// (|H>_s |V>_i + |V>_s |H>_i) / sqrt(2), the anti-correlated pair.
    static TwoPhotonPol bell_pair();
    static TwoPhotonPol product(const JonesVector& signal, const JonesVector& idler);

    friend bool operator==(const TwoPhotonPol&, const TwoPhotonPol&) = default;
};

/// c -> M c
TwoPhotonPol apply_signal(const JonesMatrix& m, const TwoPhotonPol& s);
/// c -> c M^T
TwoPhotonPol apply_idler(const JonesMatrix& m, const TwoPhotonPol& s);

struct IdlerProjection {
    JonesVector signal_ket;  // not renormalized
    double weight = 0.0;     // norm2(signal_ket)
};

/// Condition the signal on the idler passing a linear analyzer at `analyzer`.
IdlerProjection project_idler(const TwoPhotonPol& s, double analyzer);

}  // namespace eraser
