#include <cmath>
#include <numbers>

#include "doctest.h"
#include "eraser/analysis.hpp"
#include "eraser/biphoton.hpp"
#include "eraser/error.hpp"

using namespace eraser;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double lam = 700e-9;
constexpr double a = 80e-6;
constexpr double d = 250e-6;
constexpr double L = 1.0;

const Aperture slits = Aperture::double_slit(a, d);
const Grid scan = Grid::symmetric(5e-3, 1001);
const Window central = Window::central_envelope(a, lam, L);

SourceConfig config(double waist) { return {lam, waist, Grid::symmetric(4 * slits.span(), 2048)}; }

BiphotonState to_screen(BiphotonState st, Propagator method = Propagator::fresnel) {
    return merge_terms(apply_signal_element(st, Propagation{L, method, scan}));
}

BiphotonState marked(double waist = 5e-3) {
    BiphotonState st = apply_signal_element(source_walborn(config(waist)), slits);
    st = apply_signal_element(st, SlitPlate{Slit::upper, quarter_wave_plate(pi / 4)});
    return apply_signal_element(st, SlitPlate{Slit::lower, quarter_wave_plate(-pi / 4)});
}

double env_visibility(const BiphotonState& st, const IdlerDetector& det) {
    return visibility(coincidence_pattern(st, scan, L, det), central,
                      which_slit_reference(st, scan, L, det));
}

}  // namespace

TEST_CASE("sources are normalized") {
    CHECK(total_norm(source_walborn(config(200e-6))) == Approx(1.0));
    CHECK(total_norm(source_menzel(config(200e-6))) == Approx(1.0));
    CHECK(total_norm(source_product(config(200e-6), 1)) == Approx(1.0));
    CHECK(source_walborn(config(200e-6)).terms.size() == 2);
}

TEST_CASE("double slit splits terms by slit") {
    const BiphotonState st = apply_signal_element(source_walborn(config(5e-3)), slits);
    CHECK(st.terms.size() == 4);
    int upper = 0;
    for (const auto& t : st.terms) upper += t.slit == Slit::upper;
    CHECK(upper == 2);
    const BiphotonState merged = merge_terms(st);
    CHECK(merged.terms.size() == 4);  // different polarizations do not merge
    BiphotonState twice = st;
    twice.terms.insert(twice.terms.end(), st.terms.begin(), st.terms.end());
    CHECK(merge_terms(twice).terms.size() == 4);
    CHECK(std::abs(merge_terms(twice).terms[0].amp - 2.0 * st.terms[0].amp) < 1e-15);
}

TEST_CASE("bare double slit: full-visibility fringes matching the far-field form") {
    const BiphotonState st =
        to_screen(apply_signal_element(source_walborn(config(50e-3)), slits), Propagator::fraunhofer);
    const Pattern p = coincidence_pattern(st, scan, L, IdlerDetector::bucket());
    Pattern cf{p.positions, {}, "closed form"};
    for (double x : p.positions) cf.rates.push_back(double_slit_closed_form(a, d, lam, L, x));
    CHECK(l_inf_relative_distance(peak_normalize(p), cf) < 1e-4);
    CHECK(env_visibility(st, IdlerDetector::bucket()) > 0.999);
}

TEST_CASE("path-marking plates remove the fringes") {
    const BiphotonState st = to_screen(marked());
    CHECK(env_visibility(st, IdlerDetector::bucket()) < 1e-6);
    // the marked pattern is the incoherent which-slit sum
    const Pattern p = coincidence_pattern(st, scan, L, IdlerDetector::bucket());
    const Pattern r = which_slit_reference(st, scan, L, IdlerDetector::bucket());
    CHECK(l_inf_relative_distance(p, r) < 1e-9);
}

TEST_CASE("eraser: signal polarizer at +-45deg gives complementary fringes") {
    const auto with_polarizer = [](double angle) {
        return to_screen(apply_signal_element(marked(), PolarizationElement{linear_polarizer(angle)}));
    };
    const BiphotonState plus = with_polarizer(pi / 4);
    const BiphotonState minus = with_polarizer(-pi / 4);
    const IdlerDetector det = IdlerDetector::bucket();
    CHECK(env_visibility(plus, det) > 0.99);
    CHECK(env_visibility(minus, det) > 0.99);

    const Pattern pp = coincidence_pattern(plus, scan, L, det);
    const Pattern pm = coincidence_pattern(minus, scan, L, det);
    const Pattern ref = which_slit_reference(plus, scan, L, det);
    const FringeFit fp = fit_fringe(pp, lam * L / d, central, ref);
    const FringeFit fm = fit_fringe(pm, lam * L / d, central, ref);
    CHECK(std::abs(std::remainder(fp.phase - fm.phase - pi, 2 * pi)) < 1e-6);
    // the two phases sit at +-pi/2: the plates add a quarter-wave offset
    CHECK(std::abs(std::abs(fp.phase) - pi / 2) < 1e-3);

    const Pattern sum = scale(add(pp, pm), 0.5);
    CHECK(visibility(sum, central, ref) < 1e-9);
}

TEST_CASE("moving the polarizer to the idler arm changes nothing") {
    for (double angle : {pi / 4, -pi / 4, 0.3}) {
        const BiphotonState sig =
            to_screen(apply_signal_element(marked(), PolarizationElement{linear_polarizer(angle)}));
        const BiphotonState idl =
            to_screen(apply_idler_element(marked(), PolarizationElement{linear_polarizer(angle)}));
        const Pattern ps = normalize(coincidence_pattern(sig, scan, L, IdlerDetector::bucket())).pattern;
        const Pattern pi_ = normalize(coincidence_pattern(idl, scan, L, IdlerDetector::bucket())).pattern;
        CHECK(l_inf_relative_distance(ps, pi_) < 1e-9);
        // and a polarized idler detector is the same measurement
        const Pattern pd =
            normalize(coincidence_pattern(to_screen(marked()), scan, L, IdlerDetector::polarized(angle))).pattern;
        CHECK(l_inf_relative_distance(pd, pi_) < 1e-9);
    }
}

TEST_CASE("lobe-correlated source: near-field table and far-field singles") {
    const BiphotonState near = apply_signal_element(source_menzel(config(200e-6)), slits);
    const LobeTable t = near_field_correlation(near);
    CHECK(t[0][0] == Approx(0.5).epsilon(1e-9));
    CHECK(t[1][1] == Approx(0.5).epsilon(1e-9));
    CHECK(t[0][1] < 1e-9);
    CHECK(t[1][0] < 1e-9);

    const BiphotonState far = to_screen(near);
    const Pattern singles = singles_pattern(far, scan, L);
    const Pattern ref = which_slit_reference(far, scan, L, IdlerDetector::bucket());
    CHECK(visibility(singles, central, ref) < 1e-6);
    // conditioning on the upper idler lobe keeps exactly the upper-lobe term
    const Pattern upper = coincidence_pattern(far, scan, L, IdlerDetector::lobe(true));
    BiphotonState only_upper;
    for (const auto& t : far.terms) {
        if (t.slit == Slit::upper) only_upper.terms.push_back(t);
    }
    REQUIRE(only_upper.terms.size() == 1);
    CHECK(l_inf_relative_distance(upper, singles_pattern(only_upper, scan, L)) < 1e-9);
    CHECK(integrated_rate(upper) == Approx(0.5 * integrated_rate(singles)).epsilon(1e-3));
}

TEST_CASE("product-source control factorizes") {
    const BiphotonState st = apply_signal_element(source_product(config(200e-6), 1), slits);
    const LobeTable t = near_field_correlation(st);
    // the idler is unfiltered: its halves are equal, the signal only passes the slits
    CHECK(t[0][0] == Approx(t[0][1]).epsilon(1e-9));
    CHECK(t[0][0] + t[1][0] == Approx(0.5).epsilon(1e-9));
    CHECK(t[0][0] == Approx(0.25).epsilon(1e-9));
}

TEST_CASE("point idler detector can restore far-field fringes when the idler lobes overlap") {
    BiphotonState st = to_screen(apply_signal_element(source_menzel(config(200e-6)), slits));
    const Grid idler_far = Grid::symmetric(20e-3, 2048);
    st = merge_terms(apply_idler_element(st, Propagation{L, Propagator::fresnel, idler_far}));
    const Pattern p = coincidence_pattern(st, scan, L, IdlerDetector::point(0.0));
    const Pattern ref = which_slit_reference(st, scan, L, IdlerDetector::point(0.0));
    CHECK(visibility(p, central, ref) > 0.5);
}

TEST_CASE("usage errors") {
    const BiphotonState st = apply_signal_element(source_walborn(config(5e-3)), slits);
    CHECK_THROWS_AS(coincidence_pattern(st, scan, L, IdlerDetector::bucket()), UsageError);
    CHECK_THROWS_AS(coincidence_pattern(BiphotonState{}, scan, L, IdlerDetector::bucket()), InputError);
}
