#include "eraser/polarization.hpp"

#include <cmath>

#include "eraser/error.hpp"

namespace eraser {
namespace {

void require_finite(double angle, const char* what) {
    if (!std::isfinite(angle)) {
        throw InputError(std::string(what) + ": angle must be finite");
    }
}

}  // namespace

JonesVector JonesVector::linear(double angle) {
    require_finite(angle, "JonesVector::linear");
    return {std::cos(angle), std::sin(angle)};
}

cplx inner(const JonesVector& a, const JonesVector& b) {
    return std::conj(a.h) * b.h + std::conj(a.v) * b.v;
}

JonesVector operator*(cplx s, const JonesVector& a) { return {s * a.h, s * a.v}; }

JonesVector operator+(const JonesVector& a, const JonesVector& b) {
    return {a.h + b.h, a.v + b.v};
}

JonesMatrix JonesMatrix::adjoint() const {
    return {{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
}

JonesMatrix JonesMatrix::transpose() const { return {{m[0], m[2], m[1], m[3]}}; }

JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b) {
    JonesMatrix r;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
        }
    }
    return r;
}

JonesVector operator*(const JonesMatrix& a, const JonesVector& x) {
    return {a(0, 0) * x.h + a(0, 1) * x.v, a(1, 0) * x.h + a(1, 1) * x.v};
}

JonesMatrix rotation(double theta) {
    require_finite(theta, "rotation");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {{c, -s, s, c}};
}

JonesMatrix quarter_wave_plate(double fast_axis) {
    require_finite(fast_axis, "quarter_wave_plate");
    const JonesMatrix retarder{{1.0, 0.0, 0.0, cplx(0.0, 1.0)}};
    return rotation(fast_axis) * retarder * rotation(-fast_axis);
}

JonesMatrix linear_polarizer(double angle) {
    require_finite(angle, "linear_polarizer");
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {{c * c, c * s, c * s, s * s}};
}

double TwoPhotonPol::norm2() const {
    double sum = 0.0;
    for (const auto& row : c) {
        for (const auto& x : row) sum += std::norm(x);
    }
    return sum;
}

TwoPhotonPol TwoPhotonPol::bell_pair() {
    const double r = 1.0 / std::sqrt(2.0);
    TwoPhotonPol s;
    s.c[0][1] = r;
    s.c[1][0] = r;
    return s;
}

TwoPhotonPol TwoPhotonPol::product(const JonesVector& signal, const JonesVector& idler) {
    const std::array<cplx, 2> a{signal.h, signal.v};
    const std::array<cplx, 2> b{idler.h, idler.v};
    TwoPhotonPol s;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) s.c[i][j] = a[i] * b[j];
    }
    return s;
}

TwoPhotonPol apply_signal(const JonesMatrix& m, const TwoPhotonPol& s) {
    TwoPhotonPol r;
    for (int a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            r.c[a][b] = m(a, 0) * s.c[0][b] + m(a, 1) * s.c[1][b];
        }
    }
    return r;
}

TwoPhotonPol apply_idler(const JonesMatrix& m, const TwoPhotonPol& s) {
    // (c M^T)[a][b] = sum_k c[a][k] M[b][k]
    TwoPhotonPol r;
    for (std::size_t a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            r.c[a][b] = s.c[a][0] * m(b, 0) + s.c[a][1] * m(b, 1);
        }
    }
    return r;
}

IdlerProjection project_idler(const TwoPhotonPol& s, double analyzer) {
    const JonesVector e = JonesVector::linear(analyzer);
    IdlerProjection p;
    p.signal_ket.h = s.c[0][0] * std::conj(e.h) + s.c[0][1] * std::conj(e.v);
    p.signal_ket.v = s.c[1][0] * std::conj(e.h) + s.c[1][1] * std::conj(e.v);
    p.weight = p.signal_ket.norm2();
    return p;
}

}  // namespace eraser
