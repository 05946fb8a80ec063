#include "eraser/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "eraser/error.hpp"

namespace eraser {
namespace {

void require_same_positions(const Pattern& a, const Pattern& b) {
    if (a.positions.size() != b.positions.size() || a.rates.size() != b.rates.size()) {
        throw InputError("patterns have different grids");
    }
    for (std::size_t i = 0; i < a.positions.size(); ++i) {
        const double tol = 1e-12 * std::max(1.0, std::abs(a.positions[i]));
        if (std::abs(a.positions[i] - b.positions[i]) > tol) {
            throw InputError("patterns have different grids");
        }
    }
}

struct Sample {
    double x;
    double rate;
    double envelope;
};

std::vector<Sample> window_samples(const Pattern& p, const Window& w, const Pattern* reference) {
    if (p.positions.size() != p.rates.size()) throw InputError("pattern arrays differ in length");
    if (reference) require_same_positions(p, *reference);
    std::vector<Sample> out;
    for (std::size_t i = 0; i < p.positions.size(); ++i) {
        if (!w.contains(p.positions[i])) continue;
        out.push_back({p.positions[i], p.rates[i], reference ? reference->rates[i] : 1.0});
    }
    if (out.empty()) throw InputError("visibility window contains no samples");
    if (reference) {
        double emax = 0.0;
        for (const auto& s : out) emax = std::max(emax, s.envelope);
        std::erase_if(out, [&](const Sample& s) { return !(s.envelope > 1e-12 * emax); });
        if (out.empty()) throw InputError("reference pattern vanishes on the window");
    }
    return out;
}

double minmax_visibility(const std::vector<double>& v) {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    const double sum = *mx + *mn;
    return sum == 0.0 ? 0.0 : (*mx - *mn) / sum;
}

struct LinearFit {
    std::array<double, 3> c{};
    double ssr = 0.0;
    bool ok = false;
};

// rates ~ E (c0 + c1 cos(2 pi x/T) + c2 sin(2 pi x/T))
LinearFit solve_fixed_period(const std::vector<Sample>& s, double period) {
    std::array<std::array<double, 3>, 3> m{};
    std::array<double, 3> rhs{};
    const double q = 2.0 * std::numbers::pi / period;
    for (const auto& p : s) {
        const std::array<double, 3> b{p.envelope, p.envelope * std::cos(q * p.x),
                                      p.envelope * std::sin(q * p.x)};
        for (std::size_t i = 0; i < 3; ++i) {
            rhs[i] += b[i] * p.rate;
            for (std::size_t j = 0; j < 3; ++j) m[i][j] += b[i] * b[j];
        }
    }
    auto det3 = [](const std::array<std::array<double, 3>, 3>& a) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    LinearFit fit;
    const double det = det3(m);
    double scale = 1.0;
    for (const auto& row : m) for (double x : row) scale = std::max(scale, std::abs(x));
    if (!(std::abs(det) > 1e-14 * scale * scale * scale)) return fit;
    for (std::size_t k = 0; k < 3; ++k) {
        auto mk = m;
        for (std::size_t i = 0; i < 3; ++i) mk[i][k] = rhs[i];
        fit.c[k] = det3(mk) / det;
    }
    for (const auto& p : s) {
        const double model = p.envelope * (fit.c[0] + fit.c[1] * std::cos(q * p.x) +
                                           fit.c[2] * std::sin(q * p.x));
        fit.ssr += (p.rate - model) * (p.rate - model);
    }
    fit.ok = true;
    return fit;
}

FringeFit to_fringe_fit(const LinearFit& lf, double period, const std::vector<Sample>& s) {
    FringeFit f;
    f.period = period;
    f.visibility = std::min(1.0, std::hypot(lf.c[1], lf.c[2]) / lf.c[0]);
    double phi = std::atan2(-lf.c[2], lf.c[1]);
    if (phi <= -std::numbers::pi) phi += 2.0 * std::numbers::pi;
    f.phase = phi;
    double mean = 0.0;
    for (const auto& p : s) mean += p.rate;
    mean /= static_cast<double>(s.size());
    f.residual = mean > 0.0 ? std::sqrt(lf.ssr / static_cast<double>(s.size())) / mean : 0.0;
    if (f.visibility < 0.05) {
        f.classification = FringeClass::none;
    } else {
        f.classification = std::abs(phi) < 0.5 * std::numbers::pi ? FringeClass::fringe
                                                                    : FringeClass::anti_fringe;
    }
    return f;
}

FringeFit fit_impl(const Pattern& p, double expected_period, const Window& w,
                   const Pattern* reference) {
    if (!std::isfinite(expected_period) || !(expected_period > 0.0)) {
        throw InputError("expected fringe period must be > 0");
    }
    const auto s = window_samples(p, w, reference);
    if (s.size() < 4) throw InputError("fringe fit needs at least four samples in the window");

    auto diagnostics = [&](double period, const LinearFit& lf) {
        std::ostringstream os;
        os << "samples=" << s.size() << " period=" << period << " c=(" << lf.c[0] << ", "
           << lf.c[1] << ", " << lf.c[2] << ") ssr=" << lf.ssr;
        return os.str();
    };

    const LinearFit seed = solve_fixed_period(s, expected_period);
    if (!seed.ok || !(seed.c[0] > 0.0)) {
        throw FitError("fringe fit failed at the seed period", diagnostics(expected_period, seed));
    }
    if (std::hypot(seed.c[1], seed.c[2]) / seed.c[0] < 0.05) {
        return to_fringe_fit(seed, expected_period, s);
    }

    // Golden-section refinement of the period.
    const double lo0 = 0.8 * expected_period;
    const double hi0 = 1.25 * expected_period;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = lo0;
    double hi = hi0;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    auto cost = [&](double t) {
        const auto lf = solve_fixed_period(s, t);
        return lf.ok ? lf.ssr : std::numeric_limits<double>::infinity();
    };
    double f1 = cost(x1);
    double f2 = cost(x2);
    constexpr int kMaxIterations = 200;
    int it = 0;
    for (; it < kMaxIterations && (hi - lo) > 1e-12 * expected_period; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = cost(x2);
        }
    }
    double best = 0.5 * (lo + hi);
    LinearFit lf = solve_fixed_period(s, best);
    // Keep the seed period if refinement did not improve the residual.
    if (!lf.ok || lf.ssr > seed.ssr) {
        best = expected_period;
        lf = seed;
    }
    const double edge_tol = 1e-6 * expected_period;
    if (it == kMaxIterations || best - lo0 < edge_tol || hi0 - best < edge_tol) {
        throw FitError("fringe period refinement did not converge inside its bracket",
                       diagnostics(best, lf));
    }
    if (!(lf.c[0] > 0.0)) throw FitError("fringe fit produced a non-positive mean", diagnostics(best, lf));
    return to_fringe_fit(lf, best, s);
}

}  // namespace

Window Window::central_envelope(double slit_width, double wavelength, double distance) {
    if (!(slit_width > 0.0) || !(wavelength > 0.0) || !(distance > 0.0)) {
        throw InputError("central envelope needs positive width, wavelength and distance");
    }
    const double h = wavelength * distance / (2.0 * slit_width);
    return {-h, h};
}

double visibility(const Pattern& p, const Window& w) {
    std::vector<double> v;
    for (const auto& s : window_samples(p, w, nullptr)) v.push_back(s.rate);
    return minmax_visibility(v);
}

double visibility(const Pattern& p, const Window& w, const Pattern& reference) {
    std::vector<double> v;
    for (const auto& s : window_samples(p, w, &reference)) v.push_back(s.rate / s.envelope);
    return minmax_visibility(v);
}

const char* to_string(FringeClass c) {
    switch (c) {
        case FringeClass::fringe: return "fringe";
        case FringeClass::anti_fringe: return "anti-fringe";
        case FringeClass::none: break;
    }
    return "none";
}

FringeFit fit_fringe(const Pattern& p, double expected_period, const Window& w) {
    return fit_impl(p, expected_period, w, nullptr);
}

FringeFit fit_fringe(const Pattern& p, double expected_period, const Window& w,
                     const Pattern& reference) {
    return fit_impl(p, expected_period, w, &reference);
}

Pattern add(const Pattern& a, const Pattern& b) {
    require_same_positions(a, b);
    Pattern r = a;
    for (std::size_t i = 0; i < r.rates.size(); ++i) r.rates[i] += b.rates[i];
    return r;
}

Pattern scale(const Pattern& p, double c) {
    Pattern r = p;
    for (auto& x : r.rates) x *= c;
    return r;
}

Normalized normalize(const Pattern& p) {
    double total = 0.0;
    for (double x : p.rates) total += x;
    if (total == 0.0) return {p, true};
    return {scale(p, 1.0 / total), false};
}

Pattern peak_normalize(const Pattern& p) {
    double peak = 0.0;
    for (double x : p.rates) peak = std::max(peak, std::abs(x));
    return peak == 0.0 ? p : scale(p, 1.0 / peak);
}

double l_inf_relative_distance(const Pattern& a, const Pattern& b) {
    require_same_positions(a, b);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.rates.size(); ++i) {
        num = std::max(num, std::abs(a.rates[i] - b.rates[i]));
        den = std::max(den, std::abs(b.rates[i]));
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

double l2_relative_distance(const Pattern& a, const Pattern& b) {
    require_same_positions(a, b);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.rates.size(); ++i) {
        num += (a.rates[i] - b.rates[i]) * (a.rates[i] - b.rates[i]);
        den += b.rates[i] * b.rates[i];
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

double l1_distance(const Pattern& a, const Pattern& b) {
    require_same_positions(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rates.size(); ++i) sum += std::abs(a.rates[i] - b.rates[i]);
    return sum;
}

}  // namespace eraser
