#include "eraser/waveoptics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "eraser/error.hpp"

namespace eraser {
namespace {

constexpr std::size_t kReanchorEvery = 128;

void require_positive(double v, const char* what) {
    if (!std::isfinite(v) || !(v > 0.0)) {
        throw InputError(std::string(what) + " must be finite and > 0");
    }
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) throw InputError("fields live on different grids");
}

struct Segment {
    std::size_t begin;
    std::size_t end;
};

// Contiguous runs of nonzero samples; zeros contribute nothing to quadrature.
std::vector<Segment> support_segments(const std::vector<cplx>& u) {
    std::vector<Segment> out;
    std::size_t i = 0;
    while (i < u.size()) {
        while (i < u.size() && u[i] == cplx{}) ++i;
        if (i == u.size()) break;
        std::size_t j = i;
        while (j < u.size() && u[j] != cplx{}) ++j;
        out.push_back({i, j});
        i = j;
    }
    return out;
}

// Sums sum_n u_n e^{i a s_n^2} and sum_n u_n s_n e^{i a s_n^2} with
// s_n = xp - x_n. The chirp is advanced by a two-term recurrence and
// re-anchored periodically with a direct evaluation.
struct ChirpSums {
    cplx s0{};
    cplx s1{};
};

ChirpSums chirp_sums(const std::vector<cplx>& u, const Grid& g,
                     const std::vector<Segment>& segs, double a, double xp, bool gradient) {
    ChirpSums acc;
    const double dx = g.dx;
    const cplx q = std::polar(1.0, 2.0 * a * dx * dx);
    for (const auto& seg : segs) {
        cplx e{};
        cplx r{};
        for (std::size_t n = seg.begin; n < seg.end; ++n) {
            const double s = xp - g.at(n);
            if ((n - seg.begin) % kReanchorEvery == 0) {
                e = std::polar(1.0, a * s * s);
                r = std::polar(1.0, a * dx * (dx - 2.0 * s));
            }
            const cplx term = u[n] * e;
            acc.s0 += term;
            if (gradient) acc.s1 += term * s;
            e *= r;
            r *= q;
        }
    }
    return acc;
}

cplx fourier_sum(const std::vector<cplx>& u, const Grid& g, const std::vector<Segment>& segs,
                 double b) {
    cplx acc{};
    const cplx r = std::polar(1.0, -b * g.dx);
    for (const auto& seg : segs) {
        cplx e{};
        for (std::size_t n = seg.begin; n < seg.end; ++n) {
            if ((n - seg.begin) % kReanchorEvery == 0) e = std::polar(1.0, -b * g.at(n));
            acc += u[n] * e;
            e *= r;
        }
    }
    return acc;
}

void check_field(const ScalarField& f) {
    if (f.samples.empty() || f.samples.size() != f.grid.n) {
        throw InputError("field samples must be nonempty and match the grid size");
    }
    require_positive(f.grid.dx, "grid spacing");
    require_positive(f.wavelength, "wavelength");
}

}  // namespace

ScalarField ScalarField::zeros(const Grid& grid, double wavelength, double z) {
    return ScalarField{grid, std::vector<cplx>(grid.n), wavelength, z};
}

double ScalarField::wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }

double ScalarField::power() const {
    double sum = 0.0;
    for (const auto& s : samples) sum += std::norm(s);
    return sum * grid.dx;
}

cplx ScalarField::value_at(double x) const {
    const double t = (x - grid.front()) / grid.dx;
    if (!(t >= 0.0) || t > static_cast<double>(grid.n - 1)) return {};
    const auto i = static_cast<std::size_t>(t);
    if (i + 1 >= grid.n) return samples.back();
    const double w = t - static_cast<double>(i);
    return (1.0 - w) * samples[i] + w * samples[i + 1];
}

cplx overlap(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b);
    cplx sum{};
    for (std::size_t i = 0; i < a.samples.size(); ++i) sum += std::conj(a.samples[i]) * b.samples[i];
    return sum * a.grid.dx;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b);
    ScalarField r = a;
    for (std::size_t i = 0; i < r.samples.size(); ++i) r.samples[i] += b.samples[i];
    return r;
}

ScalarField operator*(cplx s, const ScalarField& a) {
    ScalarField r = a;
    for (auto& x : r.samples) x *= s;
    return r;
}

Pattern intensity(const ScalarField& f, std::string label) {
    Pattern p;
    p.label = std::move(label);
    p.positions.resize(f.grid.n);
    p.rates.resize(f.grid.n);
    for (std::size_t i = 0; i < f.grid.n; ++i) {
        p.positions[i] = f.grid.at(i);
        p.rates[i] = std::norm(f.samples[i]);
    }
    return p;
}

const char* to_string(Slit s) {
    switch (s) {
        case Slit::upper: return "upper";
        case Slit::lower: return "lower";
        case Slit::none: break;
    }
    return "none";
}

Aperture Aperture::double_slit(double width, double separation, double center) {
    Aperture ap;
    ap.kind = Kind::double_slit;
    ap.width = width;
    ap.separation = separation;
    ap.center = center;
    return ap;
}

Aperture Aperture::single_slit(double width, double center) {
    Aperture ap;
    ap.kind = Kind::single_slit;
    ap.width = width;
    ap.center = center;
    return ap;
}

std::vector<SlitWindow> Aperture::all_slits() const {
    require_positive(width, "slit width");
    if (!std::isfinite(center)) throw InputError("aperture center must be finite");
    const double h = 0.5 * width;
    if (kind == Kind::single_slit) return {{Slit::none, center - h, center + h}};
    if (!std::isfinite(separation) || !(separation > width)) {
        throw InputError("double slit needs separation > width");
    }
    const double up = center + 0.5 * separation;
    const double down = center - 0.5 * separation;
    return {{Slit::upper, up - h, up + h}, {Slit::lower, down - h, down + h}};
}

std::vector<SlitWindow> Aperture::open_slits() const {
    auto all = all_slits();
    if (kind == Kind::single_slit) return all;
    std::vector<SlitWindow> out;
    if (upper_open) out.push_back(all[0]);
    if (lower_open) out.push_back(all[1]);
    return out;
}

double Aperture::span() const {
    const auto all = all_slits();
    return all.front().hi - all.back().lo;
}

double cell_coverage(double x, double dx, double lo, double hi) {
    const double a = std::max(x - 0.5 * dx, lo);
    const double b = std::min(x + 0.5 * dx, hi);
    return b > a ? (b - a) / dx : 0.0;
}

ScalarField hermite_gauss(int order, double waist, const Grid& grid, double wavelength) {
    if (order != 0 && order != 1) {
        throw InputError("hermite_gauss supports orders 0 and 1, got " + std::to_string(order));
    }
    require_positive(waist, "waist");
    require_positive(wavelength, "wavelength");
    if (grid.n < 2) throw InputError("hermite_gauss needs at least two samples");
    ScalarField f = ScalarField::zeros(grid, wavelength);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.at(i);
        const double g = std::exp(-(x * x) / (waist * waist));
        f.samples[i] = order == 0 ? g : 2.0 * x / waist * g;
    }
    const double p = f.power();
    if (!(p > 0.0)) throw InputError("mode has no power on this grid");
    const double s = 1.0 / std::sqrt(p);
    for (auto& x : f.samples) x *= s;
    return f;
}

ScalarField apply_aperture(const ScalarField& f, const Aperture& ap) {
    check_field(f);
    const double lo_edge = f.grid.front() - 0.5 * f.grid.dx;
    const double hi_edge = f.grid.back() + 0.5 * f.grid.dx;
    for (const auto& w : ap.all_slits()) {
        if (w.lo < lo_edge || w.hi > hi_edge) throw InputError("aperture lies outside the grid");
    }
    ScalarField out = f;
    const auto open = ap.open_slits();
    for (std::size_t i = 0; i < f.grid.n; ++i) {
        double t = 0.0;
        for (const auto& w : open) t += cell_coverage(f.grid.at(i), f.grid.dx, w.lo, w.hi);
        out.samples[i] *= t;
    }
    return out;
}

ScalarField mask_window(const ScalarField& f, const SlitWindow& w) {
    ScalarField out = f;
    for (std::size_t i = 0; i < f.grid.n; ++i) {
        out.samples[i] *= cell_coverage(f.grid.at(i), f.grid.dx, w.lo, w.hi);
    }
    return out;
}

std::pair<ScalarField, ScalarField> fresnel_propagate_with_gradient(const ScalarField& f,
                                                                    double distance,
                                                                    const Grid& out_grid) {
    check_field(f);
    require_positive(distance, "propagation distance");
    const double k = f.wavenumber();
    const double a = k / (2.0 * distance);
    // sqrt(1 / (i lambda L)) dx
    const cplx pre = std::polar(f.grid.dx / std::sqrt(f.wavelength * distance),
                                -0.25 * std::numbers::pi);
    const cplx dpre = pre * cplx(0.0, k / distance);
    const auto segs = support_segments(f.samples);

    ScalarField u = ScalarField::zeros(out_grid, f.wavelength, f.z + distance);
    ScalarField du = u;
    for (std::size_t j = 0; j < out_grid.n; ++j) {
        const auto s = chirp_sums(f.samples, f.grid, segs, a, out_grid.at(j), true);
        u.samples[j] = pre * s.s0;
        du.samples[j] = dpre * s.s1;
    }
    return {std::move(u), std::move(du)};
}

ScalarField fresnel_propagate(const ScalarField& f, double distance, const Grid& out_grid) {
    check_field(f);
    require_positive(distance, "propagation distance");
    const double a = f.wavenumber() / (2.0 * distance);
    const cplx pre = std::polar(f.grid.dx / std::sqrt(f.wavelength * distance),
                                -0.25 * std::numbers::pi);
    const auto segs = support_segments(f.samples);
    ScalarField u = ScalarField::zeros(out_grid, f.wavelength, f.z + distance);
    for (std::size_t j = 0; j < out_grid.n; ++j) {
        u.samples[j] = pre * chirp_sums(f.samples, f.grid, segs, a, out_grid.at(j), false).s0;
    }
    return u;
}

ScalarField fraunhofer_pattern(const ScalarField& f, double distance, const Grid& out_grid) {
    check_field(f);
    require_positive(distance, "propagation distance");
    const double k = f.wavenumber();
    const cplx pre = std::polar(f.grid.dx / std::sqrt(f.wavelength * distance),
                                -0.25 * std::numbers::pi);
    const auto segs = support_segments(f.samples);
    ScalarField u = ScalarField::zeros(out_grid, f.wavelength, f.z + distance);
    for (std::size_t j = 0; j < out_grid.n; ++j) {
        const double xp = out_grid.at(j);
        const cplx outer = std::polar(1.0, k * xp * xp / (2.0 * distance));
        u.samples[j] = pre * outer * fourier_sum(f.samples, f.grid, segs, k * xp / distance);
    }
    return u;
}

double single_slit_closed_form(double width, double wavelength, double distance, double x) {
    require_positive(width, "slit width");
    require_positive(wavelength, "wavelength");
    require_positive(distance, "distance");
    const double t = std::numbers::pi * width * x / (wavelength * distance);
    const double sinc = t == 0.0 ? 1.0 : std::sin(t) / t;
    return sinc * sinc;
}

double double_slit_closed_form(double width, double separation, double wavelength,
                               double distance, double x) {
    require_positive(separation, "slit separation");
    const double c = std::cos(std::numbers::pi * separation * x / (wavelength * distance));
    return single_slit_closed_form(width, wavelength, distance, x) * c * c;
}

double fraunhofer_distance(double span, double wavelength) {
    require_positive(span, "aperture span");
    require_positive(wavelength, "wavelength");
    return 2.0 * span * span / wavelength;
}

std::optional<std::string> fraunhofer_warning(double distance, double span, double wavelength) {
    const double zf = fraunhofer_distance(span, wavelength);
    if (distance >= zf) return std::nullopt;
    std::ostringstream os;
    os << "far-field approximation used at " << distance << " m, inside the Fraunhofer distance "
       << zf << " m";
    return os.str();
}

double tail_fraction(const ScalarField& f, std::size_t edge_cells) {
    const double total = f.power();
    if (!(total > 0.0)) return 0.0;
    const std::size_t n = f.samples.size();
    const std::size_t m = std::min(edge_cells, n / 2);
    double tail = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        tail += std::norm(f.samples[i]) + std::norm(f.samples[n - 1 - i]);
    }
    return tail * f.grid.dx / total;
}

}  // namespace eraser
