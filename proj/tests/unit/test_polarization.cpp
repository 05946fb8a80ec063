#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "eraser/polarization.hpp"

using namespace eraser;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

// R(t) diag(1, i) R(-t) multiplied out by hand.
JonesMatrix qwp_closed_form(double t) {
    const double c = std::cos(t), s = std::sin(t);
    const cplx i{0.0, 1.0};
    JonesMatrix m;
    m(0, 0) = c * c + i * s * s;
    m(0, 1) = (1.0 - i) * c * s;
    m(1, 0) = (1.0 - i) * c * s;
    m(1, 1) = s * s + i * c * c;
    return m;
}

double max_diff(const JonesMatrix& a, const JonesMatrix& b) {
    double d = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) d = std::max(d, std::abs(a(r, c) - b(r, c)));
    return d;
}

}  // namespace

TEST_CASE("quarter-wave plate matches the multiplied-out rotation form") {
    for (double t : {0.0, 0.3, pi / 4, -pi / 4, 1.1, 2.0}) {
        CHECK(max_diff(quarter_wave_plate(t), qwp_closed_form(t)) < 1e-15);
    }
}

TEST_CASE("quarter-wave plate at 45deg turns H into circular light") {
    const JonesVector out = quarter_wave_plate(pi / 4) * JonesVector::horizontal();
    CHECK(std::abs(out.h) == Approx(1 / std::sqrt(2.0)));
    CHECK(std::abs(out.v) == Approx(1 / std::sqrt(2.0)));
    const double rel = std::arg(out.v / out.h);
    CHECK(std::abs(std::abs(rel) - pi / 2) < 1e-12);
}

TEST_CASE("two quarter-wave plates make a half-wave plate") {
    const JonesMatrix hwp = quarter_wave_plate(pi / 8) * quarter_wave_plate(pi / 8);
    const JonesVector out = hwp * JonesVector::horizontal();
    // linear at 45deg up to a global phase
    CHECK(std::abs(out.h) == Approx(std::abs(out.v)));
    CHECK(std::abs(std::arg(out.v / out.h)) < 1e-12);
}

TEST_CASE("wave plates are unitary for random axes") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(-pi, pi);
    for (int k = 0; k < 200; ++k) {
        const JonesMatrix q = quarter_wave_plate(angle(rng));
        CHECK(max_diff(q.adjoint() * q, JonesMatrix::identity()) < 1e-14);
    }
}

TEST_CASE("polarizer follows Malus and is idempotent") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> angle(-pi, pi);
    for (int k = 0; k < 100; ++k) {
        const double t = angle(rng);
        const JonesMatrix p = linear_polarizer(t);
        CHECK(max_diff(p * p, p) < 1e-14);
        const double c = std::cos(t);
        CHECK((p * JonesVector::horizontal()).norm2() == Approx(c * c).epsilon(1e-12));
    }
}

TEST_CASE("linear states and inner products") {
    const JonesVector d = JonesVector::linear(pi / 4);
    CHECK(std::abs(inner(d, JonesVector::linear(-pi / 4))) < 1e-15);
    CHECK(std::abs(inner(d, d) - 1.0) < 1e-15);
    CHECK(std::abs(inner(JonesVector{0.0, cplx{0, 1}}, JonesVector::vertical()) - cplx{0, -1}) < 1e-15);
}

TEST_CASE("anti-correlated pair") {
    const TwoPhotonPol b = TwoPhotonPol::bell_pair();
    CHECK(b.norm2() == Approx(1.0));
    CHECK(std::abs(b.c[0][0]) == 0.0);
    CHECK(std::abs(b.c[1][1]) == 0.0);

    const IdlerProjection h = project_idler(b, 0.0);
    CHECK(h.weight == Approx(0.5));
    CHECK(std::abs(h.signal_ket.h) < 1e-15);

    // an analyzer at 45deg leaves the signal at 45deg with half the weight
    const IdlerProjection d = project_idler(b, pi / 4);
    CHECK(d.weight == Approx(0.5));
    CHECK(std::abs(std::abs(inner(JonesVector::linear(pi / 4), d.signal_ket)) - std::sqrt(0.5)) < 1e-12);
}

TEST_CASE("local operations act on their own index") {
    const JonesMatrix m = quarter_wave_plate(0.4);
    const JonesMatrix p = linear_polarizer(1.2);
    const TwoPhotonPol b = TwoPhotonPol::bell_pair();
    const TwoPhotonPol s = apply_signal(m, b);
    const TwoPhotonPol i = apply_idler(p, b);
    for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
            cplx want_s{}, want_i{};
            for (int k = 0; k < 2; ++k) {
                want_s += m(a, k) * b.c[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
                want_i += p(c, k) * b.c[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
            }
            CHECK(std::abs(s.c[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] - want_s) < 1e-15);
            CHECK(std::abs(i.c[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] - want_i) < 1e-15);
        }
    }
    // signal and idler operations commute
    const TwoPhotonPol a1 = apply_idler(p, apply_signal(m, b));
    const TwoPhotonPol a2 = apply_signal(m, apply_idler(p, b));
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(a1.c[r][c] - a2.c[r][c]) < 1e-15);
}

TEST_CASE("product states factor") {
    const TwoPhotonPol p = TwoPhotonPol::product(JonesVector::linear(0.3), JonesVector::vertical());
    CHECK(p.norm2() == Approx(1.0));
    CHECK(std::abs(p.c[0][0]) < 1e-15);
    CHECK(std::abs(p.c[0][1] - std::cos(0.3)) < 1e-15);
}
