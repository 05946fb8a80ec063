#include "eraser/pilotwave.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "eraser/error.hpp"

namespace eraser {
namespace {

constexpr double kNodeEps = 1e-12;
// h L < ln 2 keeps one RK4 step of a field with slope bound L monotone
constexpr double kMaxStepShear = 0.5;
constexpr double kRunGap = 0.1;
constexpr double kChirpStep = 0.25;
constexpr double kFirstPlaneFraction = 0.02;
constexpr double kSamplesPerFringe = 8.0;
constexpr double kMaxSubsteps = 4096.0;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t stream_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xD6E8FEB86659FD93ull));
}

// Uniform in [0, 1), 53 bits.
double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return static_cast<double>(stream_hash(seed, a, b) >> 11) * 0x1.0p-53;
}

void check_vector_field(const VectorField& f) {
    if (!(f.h.grid == f.v.grid) || f.h.wavelength != f.v.wavelength || f.h.z != f.v.z) {
        throw InputError("vector field components must share grid, wavelength and plane");
    }
    if (f.h.samples.size() != f.h.grid.n || f.v.samples.size() != f.v.grid.n || f.h.grid.n < 2) {
        throw InputError("vector field samples must match a grid of at least two points");
    }
}

std::vector<double> density_of(const VectorField& f) {
    std::vector<double> d(f.h.grid.n);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(f.h.samples[i]) + std::norm(f.v.samples[i]);
    return d;
}

double lerp_nodes(const Grid& g, const std::vector<double>& v, double x) {
    double t = (x - g.front()) / g.dx;
    if (!(t > 0.0)) return v.front();
    if (t >= static_cast<double>(g.n - 1)) return v.back();
    const auto i = static_cast<std::size_t>(t);
    const double w = t - static_cast<double>(i);
    return (1.0 - w) * v[i] + w * v[i + 1];
}

// Velocity from density and current at the nodes; sub-threshold nodes copy
// the nearest node above threshold.
void finish_velocity(const std::vector<double>& rho, const std::vector<double>& current, double k,
                     std::vector<double>& vel, std::vector<std::uint8_t>& reg) {
    const std::size_t n = rho.size();
    vel.assign(n, 0.0);
    reg.assign(n, 0);
    const double peak = *std::max_element(rho.begin(), rho.end());
    const double thresh = kNodeEps * peak;
    std::vector<std::size_t> good;
    for (std::size_t i = 0; i < n; ++i) {
        if (peak > 0.0 && rho[i] >= thresh) {
            vel[i] = current[i] / (k * rho[i]);
            good.push_back(i);
        } else {
            reg[i] = 1;
        }
    }
    if (good.empty()) return;
    std::size_t g = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!reg[i]) continue;
        while (g + 1 < good.size() && good[g + 1] <= i) ++g;
        std::size_t best = good[g];
        if (good[g] < i && g + 1 < good.size() && good[g + 1] - i < i - good[g]) best = good[g + 1];
        vel[i] = vel[best];
    }
}

VectorField apply_jones(const VectorField& f, const JonesMatrix& m, const SlitWindow* window) {
    VectorField out = f;
    for (std::size_t i = 0; i < f.h.grid.n; ++i) {
        const double w = window ? cell_coverage(f.h.grid.at(i), f.h.grid.dx, window->lo, window->hi)
                                : 1.0;
        if (w == 0.0) continue;
        const cplx h = f.h.samples[i];
        const cplx v = f.v.samples[i];
        const cplx nh = m(0, 0) * h + m(0, 1) * v;
        const cplx nv = m(1, 0) * h + m(1, 1) * v;
        out.h.samples[i] = w * nh + (1.0 - w) * h;
        out.v.samples[i] = w * nv + (1.0 - w) * v;
    }
    return out;
}

VectorField apply_element(const VectorField& f, const PlaneElement& e) {
    if (const auto* ap = std::get_if<Aperture>(&e.action)) {
        return {apply_aperture(f.h, *ap), apply_aperture(f.v, *ap)};
    }
    if (const auto* rp = std::get_if<RegionPlate>(&e.action)) return apply_jones(f, rp->m, &rp->window);
    return apply_jones(f, std::get<JonesMatrix>(e.action), nullptr);
}

// Width of the region holding all but a negligible fraction of the power.
double occupied_extent(const VectorField& f) {
    const auto rho = density_of(f);
    const double total = std::accumulate(rho.begin(), rho.end(), 0.0);
    const double cut = 1e-12 * total;
    double acc = 0.0;
    std::size_t lo = 0;
    while (lo < rho.size() && acc + rho[lo] <= cut) acc += rho[lo++];
    acc = 0.0;
    std::size_t hi = rho.size();
    while (hi > lo && acc + rho[hi - 1] <= cut) acc += rho[--hi];
    const double dx = f.h.grid.dx;
    return std::max(static_cast<double>(hi - lo) * dx, 10.0 * dx);
}

std::vector<double> distances(double span, std::size_t n, ZSpacing spacing, double first) {
    std::vector<double> d(n);
    const bool geometric = spacing == ZSpacing::geometric && first > 0.0 && first < span;
    for (std::size_t j = 0; j < n; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(n - 1);
        d[j] = geometric ? first * std::pow(span / first, t)
                         : span * static_cast<double>(j + 1) / static_cast<double>(n);
    }
    d.back() = span;
    return d;
}

// Cumulative of a density treated as constant over each cell, at the cell
// edges: cdf[i] is the mass left of the cell around node i.
std::vector<double> cell_cdf(const std::vector<double>& rho) {
    std::vector<double> cdf(rho.size() + 1, 0.0);
    for (std::size_t i = 0; i < rho.size(); ++i) cdf[i + 1] = cdf[i] + rho[i];
    return cdf;
}

double cdf_at(const Grid& g, const std::vector<double>& rho, const std::vector<double>& cdf,
              double x) {
    const double t = (x - g.front()) / g.dx + 0.5;
    if (!(t > 0.0)) return 0.0;
    if (t >= static_cast<double>(g.n)) return cdf.back();
    const auto i = static_cast<std::size_t>(t);
    return cdf[i] + rho[i] * (t - static_cast<double>(i));
}

double cdf_inverse(const Grid& g, const std::vector<double>& rho, const std::vector<double>& cdf,
                   double mass) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), mass);
    std::size_t i = static_cast<std::size_t>(it - cdf.begin());
    i = std::clamp<std::size_t>(i, 1, g.n) - 1;
    while (rho[i] == 0.0 && i > 0) --i;
    const double frac = rho[i] > 0.0 ? std::clamp((mass - cdf[i]) / rho[i], 0.0, 1.0) : 0.5;
    return g.at(i) + (frac - 0.5) * g.dx;
}

struct PlaneSpec {
    double z;
    std::ptrdiff_t element;  // applied to produce this plane, -1 for none
};

}  // namespace

VectorField VectorField::from(const ScalarField& f, const JonesVector& pol) {
    return {pol.h * f, pol.v * f};
}

Pattern GuidedWave::final_intensity() const {
    Pattern p;
    p.label = "final";
    p.rates = density.back();
    p.positions.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) p.positions[i] = grid.at(i);
    return p;
}

GuidedWave build_wave_stack(const VectorField& initial, const std::vector<PlaneElement>& elements,
                            double z_final, const StackOptions& opts) {
    check_vector_field(initial);
    const double z0 = initial.z();
    if (!std::isfinite(z_final) || z_final < z0) {
        throw InputError("final plane must not precede the initial plane");
    }
    if (opts.n_steps < 16) throw InputError("wave stack needs at least 16 steps");
    if (opts.grid.n < 2 || !(opts.grid.dx > 0.0)) throw InputError("stack grid needs two or more points");
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const double z = elements[i].z;
        if (!std::isfinite(z) || z < z0 || z > z_final) {
            throw InputError("element plane lies outside [initial plane, final plane]");
        }
        if (i > 0 && z < elements[i - 1].z) throw InputError("elements must be sorted by plane");
    }

    GuidedWave st;
    st.grid = opts.grid;
    st.wavelength = initial.h.wavelength;
    st.elements = elements;
    const double k = initial.h.wavenumber();

    VectorField start = initial;
    std::size_t next = 0;
    for (; next < elements.size() && elements[next].z == z0; ++next) {
        const auto& e = elements[next];
        start = apply_element(start, e);
        if (const auto* ap = std::get_if<Aperture>(&e.action)) st.initial_slits = ap->open_slits();
    }
    if (!(start.power() > 0.0)) throw InputError("initial wave has no power after the initial plane");
    st.initial = start;

    auto push_plane = [&](const Grid& g, double z, std::vector<double> rho, const std::vector<double>& cur,
                          const VectorField& field, bool keep) {
        std::vector<double> vel;
        std::vector<std::uint8_t> reg;
        finish_velocity(rho, cur, k, vel, reg);
        st.grids.push_back(g);
        st.z.push_back(z);
        st.density.push_back(std::move(rho));
        st.velocity.push_back(std::move(vel));
        st.regularized.push_back(std::move(reg));
        if (keep) st.fields.push_back(field);
    };

    if (z_final == z0) {
        push_plane(start.h.grid, z0, density_of(start), std::vector<double>(start.h.grid.n, 0.0),
                   start, true);
        st.grid = st.grids.back();
        return st;
    }

    double first = opts.first_step;
    if (first <= 0.0) {
        // Planes start where the slit waves begin to overlap and the
        // quadrature chirp advances well under a radian per source sample.
        // The layer before is crossed by the exact 1-D transport map (see
        // integrate_trajectories).
        first = std::max(2.0 * std::numbers::pi * occupied_extent(start) * initial.h.grid.dx /
                             (kChirpStep * st.wavelength),
                         kFirstPlaneFraction * (z_final - z0));
    }

    std::vector<PlaneSpec> specs{{z0, -1}};
    for (double d : distances(z_final - z0, opts.n_steps, opts.spacing, first)) {
        const double z = z0 + d;
        while (next < elements.size() && elements[next].z <= z) {
            const double ze = elements[next].z;
            if (specs.back().z < ze) specs.push_back({ze, -1});
            specs.push_back({ze, static_cast<std::ptrdiff_t>(next)});
            ++next;
        }
        if (specs.back().z < z) specs.push_back({z, -1});
    }

    // Plane 0 is the source-grid wave itself; its velocity by central differences.
    {
        const Grid& sg = start.h.grid;
        std::vector<double> cur(sg.n, 0.0);
        for (std::size_t i = 1; i + 1 < sg.n; ++i) {
            for (const auto* c : {&start.h.samples, &start.v.samples}) {
                const cplx d = ((*c)[i + 1] - (*c)[i - 1]) / (2.0 * sg.dx);
                cur[i] += std::imag(std::conj((*c)[i]) * d);
            }
        }
        push_plane(sg, z0, density_of(start), cur, start, opts.keep_fields);
    }

    // The propagated wave oscillates at up to S / (lambda dz) cycles per
    // meter for a source of extent S, so near planes get a proportionally
    // finer grid of the same size, growing until it matches the final grid.
    auto plane_grid = [&](const VectorField& src, double dz) {
        const Grid& fin = opts.grid;
        const double dx = dz * st.wavelength / (kSamplesPerFringe * occupied_extent(src));
        if (dx >= fin.dx) return fin;
        return Grid{fin.center, dx, fin.n};
    };

    VectorField source = start;  // wave the current segment propagates from
    VectorField field, grad;
    for (std::size_t p = 1; p < specs.size(); ++p) {
        const PlaneSpec& s = specs[p];
        Grid g;
        if (s.element >= 0) {
            const auto& e = elements[static_cast<std::size_t>(s.element)];
            field = apply_element(field, e);
            if (const auto* ap = std::get_if<Aperture>(&e.action)) {
                grad = {apply_aperture(grad.h, *ap), apply_aperture(grad.v, *ap)};
            } else {
                grad = apply_element(grad, e);
            }
            source = field;
            g = field.h.grid;
        } else {
            const double dz = s.z - source.z();
            g = plane_grid(source, dz);
            auto [h, dh] = fresnel_propagate_with_gradient(source.h, dz, g);
            auto [v, dv] = fresnel_propagate_with_gradient(source.v, dz, g);
            // keep z exact so plane lookups compare equal
            h.z = v.z = dh.z = dv.z = s.z;
            field = {std::move(h), std::move(v)};
            grad = {std::move(dh), std::move(dv)};
        }
        std::vector<double> cur(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            cur[i] = std::imag(std::conj(field.h.samples[i]) * grad.h.samples[i]) +
                     std::imag(std::conj(field.v.samples[i]) * grad.v.samples[i]);
        }
        push_plane(g, s.z, density_of(field), cur, field, opts.keep_fields || p + 1 == specs.size());
    }
    st.grid = st.grids.back();
    return st;
}

std::vector<double> sample_initial_positions(const VectorField& wave, std::size_t n,
                                             std::uint64_t seed, Sampling sampling) {
    check_vector_field(wave);
    if (n == 0) throw InputError("sample count must be at least 1");
    const Grid& g = wave.h.grid;
    const auto rho = density_of(wave);
    const auto cdf = cell_cdf(rho);
    const double total = cdf.back();
    if (!(total > 0.0) || !std::isfinite(total)) throw InputError("wave has zero total intensity");

    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double r = uniform(seed, j, 0);
        const double u = sampling == Sampling::stratified
                             ? (static_cast<double>(j) + r) / static_cast<double>(n)
                             : r;
        // cells with zero density have equal bounds and are never selected
        out[j] = cdf_inverse(g, rho, cdf, u * total);
    }
    return out;
}

Guidance guidance_velocity(const GuidedWave& stack, double z, double x) {
    if (stack.z.empty()) throw InputError("empty wave stack");
    if (!(z >= stack.z.front() && z <= stack.z.back())) {
        throw InputError("z lies outside the wave stack");
    }
    auto it = std::upper_bound(stack.z.begin(), stack.z.end(), z);
    std::size_t j1 = it == stack.z.end() ? stack.z.size() - 1 : static_cast<std::size_t>(it - stack.z.begin());
    std::size_t j0 = j1 == 0 ? 0 : j1 - 1;
    const double span = stack.z[j1] - stack.z[j0];
    const double t = span > 0.0 ? (z - stack.z[j0]) / span : 1.0;
    const double v = (1.0 - t) * lerp_nodes(stack.grids[j0], stack.velocity[j0], x) +
                     t * lerp_nodes(stack.grids[j1], stack.velocity[j1], x);
    bool reg = false;
    for (std::size_t j : {j0, j1}) {
        const Grid& g = stack.grids[j];
        const double pos = std::clamp((x - g.front()) / g.dx, 0.0, static_cast<double>(g.n - 1));
        const auto i0 = static_cast<std::size_t>(pos);
        const std::size_t i1 = std::min(i0 + 1, g.n - 1);
        reg = reg || stack.regularized[j][i0] || stack.regularized[j][i1];
    }
    return {v, reg};
}

const char* to_string(Lobe l) {
    switch (l) {
        case Lobe::upper: return "upper";
        case Lobe::lower: return "lower";
        case Lobe::none: break;
    }
    return "none";
}

const char* to_string(Passage p) {
    switch (p) {
        case Passage::upper: return "upper";
        case Passage::lower: return "lower";
        case Passage::blocked: return "blocked";
        case Passage::none: break;
    }
    return "none";
}

namespace {

Passage passage_of(const std::vector<SlitWindow>& open, double x, double tol) {
    for (const auto& w : open) {
        if (x >= w.lo - tol && x <= w.hi + tol) {
            switch (w.slit) {
                case Slit::upper: return Passage::upper;
                case Slit::lower: return Passage::lower;
                case Slit::none: return Passage::none;
            }
        }
    }
    return Passage::blocked;
}

}  // namespace

TrajectorySet integrate_trajectories(const GuidedWave& stack, std::vector<double> x0,
                                     std::uint64_t seed, const TrajectoryOptions& opts,
                                     std::size_t branch) {
    if (stack.z.empty()) throw InputError("empty wave stack");
    const std::size_t stride = std::max<std::size_t>(opts.record_stride, 1);
    std::sort(x0.begin(), x0.end());
    const std::size_t n = x0.size();
    const std::size_t planes = stack.z.size();

    TrajectorySet set;
    for (std::size_t j = 0; j < planes; ++j) {
        if (j % stride == 0 || j + 1 == planes) set.recorded_z.push_back(stack.z[j]);
    }
    set.trajectories.resize(n);
    std::vector<double> x = x0;
    std::vector<std::uint8_t> alive(n, 1);
    const double slit_tol = stack.initial.h.grid.dx;  // edge cells transmit partially
    for (std::size_t i = 0; i < n; ++i) {
        auto& t = set.trajectories[i];
        t.x0 = x0[i];
        t.branch = branch;
        t.path.reserve(set.recorded_z.size());
        t.path.push_back(x0[i]);
        if (opts.lobe_split) t.birth_lobe = x0[i] > *opts.lobe_split ? Lobe::upper : Lobe::lower;
        if (!stack.initial_slits.empty()) {
            t.slit_taken = passage_of(stack.initial_slits, x0[i], slit_tol);
            if (t.slit_taken == Passage::blocked) alive[i] = 0;
        }
    }

    std::size_t element_cursor = 0;
    while (element_cursor < stack.elements.size() && stack.elements[element_cursor].z == stack.z.front()) {
        ++element_cursor;
    }
    // Velocity slope per cell. Steps are subdivided where h |dv/dx| is large:
    // a single RK4 stage can jump across a sharp shear (slit edges,
    // near-nodes) and swap neighbours.
    auto slopes = [&](std::size_t j) {
        const Grid& g = stack.grids[j];
        const auto& v = stack.velocity[j];
        std::vector<double> s(g.n - 1);
        for (std::size_t c = 0; c + 1 < g.n; ++c) s[c] = std::abs(v[c + 1] - v[c]) / g.dx;
        return s;
    };
    auto max_slope = [](const Grid& g, const std::vector<double>& s, double lo, double hi) {
        const double top = static_cast<double>(g.n - 2);
        const auto c0 = static_cast<std::size_t>(std::clamp((lo - g.front()) / g.dx, 0.0, top));
        const auto c1 = static_cast<std::size_t>(std::clamp((hi - g.front()) / g.dx, 0.0, top));
        double m = 0.0;
        for (std::size_t c = c0; c <= c1; ++c) m = std::max(m, s[c]);
        return m;
    };
    std::vector<double> slope_b = slopes(0);
    for (std::size_t j = 0; j + 1 < planes; ++j) {
        const double h = stack.z[j + 1] - stack.z[j];
        const Grid& ga = stack.grids[j];
        const Grid& gb = stack.grids[j + 1];
        const auto& va = stack.velocity[j];
        const auto& vb = stack.velocity[j + 1];
        std::vector<double> slope_a = std::move(slope_b);
        slope_b = slopes(j + 1);
        if (j == 0 && h > 0.0) {
            // The layer next to the initial plane is thinner than the wave's
            // own evolution scale and is not resolved by the planes. A 1-D
            // guidance flow preserves order and carries |psi|^2 along, so its
            // map across the layer is the one matching cumulative mass.
            const auto c0 = cell_cdf(stack.density[0]);
            const auto c1 = cell_cdf(stack.density[1]);
            const double scale = c1.back() / c0.back();
            for (std::size_t i = 0; i < n; ++i) {
                if (!alive[i]) continue;
                const double m = cdf_at(ga, stack.density[0], c0, x[i]) * scale;
                x[i] = cdf_inverse(gb, stack.density[1], c1, m);
            }
        } else if (h == 0.0) {
            const auto& e = stack.elements.at(element_cursor);
            const std::uint64_t event = element_cursor++;
            for (std::size_t i = 0; i < n; ++i) {
                if (!alive[i]) continue;
                auto& t = set.trajectories[i];
                if (const auto* ap = std::get_if<Aperture>(&e.action)) {
                    t.slit_taken = passage_of(ap->open_slits(), x[i], ga.dx);
                    if (t.slit_taken == Passage::blocked) alive[i] = 0;
                    continue;
                }
                const double before = lerp_nodes(ga, stack.density[j], x[i]);
                const double after = lerp_nodes(gb, stack.density[j + 1], x[i]);
                const double keep = before > 0.0 ? std::clamp(after / before, 0.0, 1.0) : 0.0;
                if (uniform(seed, i, event + 1) >= keep) {
                    t.absorbed = true;
                    alive[i] = 0;
                }
            }
        } else {
            const auto& ra = stack.regularized[j];
            auto vel = [&](double t, double xx) {
                return (1.0 - t) * lerp_nodes(ga, va, xx) + t * lerp_nodes(gb, vb, xx);
            };
            // substeps keeping h |dv/dx| below the monotone bound over [lo, hi]
            auto need = [&](double lo, double hi) {
                const double lip = std::max(max_slope(ga, slope_a, lo - 2.0 * ga.dx, hi + 2.0 * ga.dx),
                                            max_slope(gb, slope_b, lo - 2.0 * gb.dx, hi + 2.0 * gb.dx));
                return static_cast<std::size_t>(
                    std::clamp(std::ceil(h * lip / kMaxStepShear), 1.0, kMaxSubsteps));
            };
            auto advance = [&](double xs, std::size_t sub) {
                const double hs = h / static_cast<double>(sub);
                for (std::size_t m = 0; m < sub; ++m) {
                    const double t0 = static_cast<double>(m) / static_cast<double>(sub);
                    const double th = (static_cast<double>(m) + 0.5) / static_cast<double>(sub);
                    const double t1 = static_cast<double>(m + 1) / static_cast<double>(sub);
                    const double k1 = vel(t0, xs);
                    const double k2 = vel(th, xs + 0.5 * hs * k1);
                    const double k3 = vel(th, xs + 0.5 * hs * k2);
                    const double k4 = vel(t1, xs + hs * k3);
                    xs += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
                return xs;
            };
            std::vector<std::size_t> live;
            for (std::size_t i = 0; i < n; ++i) {
                if (alive[i]) live.push_back(i);
            }
            // Neighbours closer than a fraction of a cell share one step
            // sequence, so they see the same discrete map and keep their
            // order. Groups whose results come out inverted (strong
            // compression brings them together within one interval) are
            // merged and redone with one shared step count.
            const double tight = kRunGap * std::min(ga.dx, gb.dx);
            std::vector<double> moved(n);
            auto solve = [&](std::size_t r0, std::size_t r1, std::size_t sub) {
                for (;;) {
                    std::size_t verified = sub;
                    for (std::size_t q = r0; q < r1; ++q) {
                        const double xi = x[live[q]];
                        moved[live[q]] = advance(xi, sub);
                        verified = std::max(verified, need(std::min(xi, moved[live[q]]),
                                                           std::max(xi, moved[live[q]])));
                    }
                    if (verified <= sub) return sub;
                    sub = verified;
                }
            };
            struct Group {
                std::size_t r0, r1, sub;
            };
            std::vector<Group> groups;
            std::size_t r0 = 0;
            while (r0 < live.size()) {
                std::size_t r1 = r0 + 1;
                while (r1 < live.size() && x[live[r1]] - x[live[r1 - 1]] < tight) ++r1;
                std::size_t sub = 1;
                for (std::size_t q = r0; q < r1; ++q) {
                    const double xi = x[live[q]];
                    const double reach = h * std::max(std::abs(vel(0.0, xi)), std::abs(vel(1.0, xi)));
                    sub = std::max(sub, need(xi - reach, xi + reach));
                }
                groups.push_back({r0, r1, solve(r0, r1, sub)});
                r0 = r1;
            }
            for (bool again = true; again;) {
                again = false;
                std::vector<Group> joined;
                for (std::size_t g = 0; g < groups.size();) {
                    Group cur = groups[g];
                    bool grew = false;
                    while (g + 1 < groups.size() &&
                           moved[live[cur.r1 - 1]] > moved[live[groups[g + 1].r0]]) {
                        cur.r1 = groups[g + 1].r1;
                        cur.sub = std::max(cur.sub, groups[g + 1].sub);
                        grew = true;
                        ++g;
                    }
                    ++g;
                    if (grew) {
                        cur.sub = solve(cur.r0, cur.r1, cur.sub);
                        again = true;
                    }
                    joined.push_back(cur);
                }
                groups = std::move(joined);
            }
            for (std::size_t i : live) {
                const double pos = (x[i] - ga.front()) / ga.dx;
                if (pos >= 0.0 && pos < static_cast<double>(ga.n - 1)) {
                    const auto c = static_cast<std::size_t>(pos);
                    if (ra[c] || ra[c + 1]) ++set.regularized_steps;
                }
                x[i] = moved[i];
            }
        }
        std::size_t prev = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            if (prev != n && x[i] < x[prev]) ++set.order_violations;
            prev = i;
        }
        if ((j + 1) % stride == 0 || j + 2 == planes) {
            for (std::size_t i = 0; i < n; ++i) set.trajectories[i].path.push_back(x[i]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) set.trajectories[i].x_final = x[i];
    return set;
}

TrajectorySet run_trajectories(const GuidedWave& stack, std::size_t n, std::uint64_t seed,
                               const TrajectoryOptions& opts) {
    auto x0 = sample_initial_positions(stack.initial, n, seed, opts.sampling);
    return integrate_trajectories(stack, std::move(x0), seed, opts);
}

std::vector<PilotBranch> pilot_branches(const BiphotonState& st, const IdlerRule& rule) {
    if (st.terms.empty()) throw InputError("biphoton state has no terms");
    const auto& terms = st.terms;
    const Grid grid = terms.front().signal.grid;
    for (const auto& t : terms) {
        if (!(t.signal.grid == grid) || t.signal.z != terms.front().signal.z) {
            throw InputError("signal fields must share one plane and grid");
        }
    }

    std::array<JonesVector, 2> basis;
    std::array<bool, 2> counted{true, true};
    std::array<std::string, 2> labels;
    if (rule.kind == IdlerRule::Kind::polarized) {
        if (!std::isfinite(rule.angle)) throw InputError("idler analyzer angle must be finite");
        basis = {JonesVector::linear(rule.angle),
                 JonesVector::linear(rule.angle + 0.5 * std::numbers::pi)};
        counted = {true, false};
        labels = {"pass", "fail"};
    } else {
        // Eigenbasis of the idler's reduced polarization state: the split that
        // leaves the two signal branches orthogonal.
        cplx q[2][2]{};
        for (const auto& a : terms) {
            for (const auto& b : terms) {
                const cplx w = a.amp * std::conj(b.amp) * overlap(b.signal, a.signal) *
                               inner(b.signal_pol, a.signal_pol) * overlap(b.idler, a.idler);
                const cplx ia[2]{a.idler_pol.h, a.idler_pol.v};
                const cplx ib[2]{b.idler_pol.h, b.idler_pol.v};
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c) q[r][c] += w * ia[r] * std::conj(ib[c]);
            }
        }
        const double a = q[0][0].real();
        const double d = q[1][1].real();
        const cplx b = q[0][1];
        const double mid = 0.5 * (a + d);
        const double rad = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
        if (rad <= 1e-9 * std::max(mid, 1e-300) || std::abs(b) <= 1e-15 * std::max(mid, 1e-300)) {
            basis = a >= d ? std::array{JonesVector::horizontal(), JonesVector::vertical()}
                           : std::array{JonesVector::vertical(), JonesVector::horizontal()};
        } else {
            JonesVector e{b, mid + rad - a};
            const double nrm = std::sqrt(e.norm2());
            e = (1.0 / nrm) * e;
            basis = {e, JonesVector{-std::conj(e.v), std::conj(e.h)}};
        }
        labels = {"branch0", "branch1"};
    }

    std::vector<PilotBranch> out;
    for (int bi = 0; bi < 2; ++bi) {
        VectorField w{ScalarField::zeros(grid, terms.front().signal.wavelength, terms.front().signal.z),
                      ScalarField::zeros(grid, terms.front().signal.wavelength, terms.front().signal.z)};
        for (const auto& t : terms) {
            const double inorm = std::sqrt(std::max(t.idler.power(), 0.0));
            const cplx c = t.amp * inner(basis[static_cast<std::size_t>(bi)], t.idler_pol) * inorm;
            if (c == cplx{}) continue;
            for (std::size_t i = 0; i < grid.n; ++i) {
                w.h.samples[i] += c * t.signal_pol.h * t.signal.samples[i];
                w.v.samples[i] += c * t.signal_pol.v * t.signal.samples[i];
            }
        }
        const double p = w.power();
        if (!(p > 1e-14)) continue;
        out.push_back({std::move(w), p, counted[static_cast<std::size_t>(bi)],
                       labels[static_cast<std::size_t>(bi)]});
    }
    if (out.empty()) throw InputError("biphoton state carries no signal power");
    return out;
}

Ensemble run_ensemble(std::vector<PilotBranch> branches, const std::vector<PlaneElement>& elements,
                      double z_final, const StackOptions& stack_opts, std::size_t n,
                      std::uint64_t seed, const TrajectoryOptions& opts) {
    if (branches.empty()) throw InputError("no pilot branches");
    if (n == 0) throw InputError("trajectory count must be at least 1");
    Ensemble e;
    e.branches = std::move(branches);
    // Allocation follows the power that reaches the first plane, so elements
    // at the initial plane (a polarizer behind the slits) act as Malus weights.
    std::vector<double> weight;
    double total = 0.0;
    for (const auto& b : e.branches) {
        e.stacks.push_back(build_wave_stack(b.wave, elements, z_final, stack_opts));
        weight.push_back(e.stacks.back().initial.power());
        total += weight.back();
    }
    if (!(total > 0.0)) throw InputError("no branch carries power past the initial plane");

    // largest remainder
    const std::size_t nb = e.branches.size();
    std::vector<std::size_t> count(nb);
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t b = 0; b < nb; ++b) {
        const double share = static_cast<double>(n) * weight[b] / total;
        count[b] = static_cast<std::size_t>(std::floor(share));
        used += count[b];
        rem.push_back({share - std::floor(share), b});
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto& l, auto& r) { return l.first > r.first; });
    for (std::size_t r = 0; used < n; ++r, ++used) ++count[rem[r % nb].second];

    for (std::size_t b = 0; b < nb; ++b) {
        if (count[b] == 0) continue;
        const std::uint64_t bseed = stream_hash(seed, 0xB4A3C4ull, b);
        auto x0 = sample_initial_positions(e.stacks[b].initial, count[b], bseed, opts.sampling);
        auto part = integrate_trajectories(e.stacks[b], std::move(x0), bseed, opts, b);
        e.set.recorded_z = part.recorded_z;
        e.set.order_violations += part.order_violations;
        e.set.regularized_steps += part.regularized_steps;
        for (auto& t : part.trajectories) e.set.trajectories.push_back(std::move(t));
    }
    return e;
}

std::vector<Trajectory> coincidence_filter(const Ensemble& e, const CoincidenceRule& rule) {
    std::vector<Trajectory> out;
    for (const auto& t : e.set.trajectories) {
        if (!t.arrived()) continue;
        bool keep = false;
        if (const auto* lr = std::get_if<LobeRule>(&rule)) {
            if (lr->lobe == Lobe::none) throw InputError("lobe rule needs upper or lower");
            if (t.birth_lobe == Lobe::none) throw UsageError("trajectories carry no birth lobe");
            keep = t.birth_lobe == lr->lobe;
        } else {
            keep = e.branches.at(t.branch).coincident;
        }
        if (keep) out.push_back(t);
    }
    return out;
}

Pattern arrival_histogram(const std::vector<Trajectory>& trajs, double lo, double hi,
                          std::size_t bins) {
    if (bins == 0 || !(hi > lo)) throw InputError("histogram needs bins >= 1 and hi > lo");
    Pattern p;
    p.label = "histogram";
    const double w = (hi - lo) / static_cast<double>(bins);
    p.positions.resize(bins);
    p.rates.assign(bins, 0.0);
    for (std::size_t b = 0; b < bins; ++b) p.positions[b] = lo + (static_cast<double>(b) + 0.5) * w;
    double counted = 0.0;
    for (const auto& t : trajs) {
        if (!t.arrived() || t.x_final < lo || t.x_final > hi) continue;
        const auto b = std::min(static_cast<std::size_t>((t.x_final - lo) / w), bins - 1);
        p.rates[b] += 1.0;
        counted += 1.0;
    }
    if (counted > 0.0) {
        for (auto& r : p.rates) r /= counted;
    }
    return p;
}

double integrate_linear(const Grid& g, const std::vector<double>& values, double lo, double hi) {
    if (values.size() != g.n || g.n < 2) throw InputError("values must match a grid of two or more points");
    auto cumulative = [&](double x) {
        const double t = std::clamp((x - g.front()) / g.dx, 0.0, static_cast<double>(g.n - 1));
        auto i = static_cast<std::size_t>(t);
        if (i >= g.n - 1) i = g.n - 2;
        double acc = 0.0;
        for (std::size_t m = 0; m < i; ++m) acc += 0.5 * (values[m] + values[m + 1]);
        const double f = t - static_cast<double>(i);
        acc += values[i] * f + 0.5 * (values[i + 1] - values[i]) * f * f;
        return acc * g.dx;
    };
    return cumulative(hi) - cumulative(lo);
}

namespace {

Pattern bin_density(const Grid& g, const std::vector<double>& rho, double lo, double hi,
                    std::size_t bins, std::string label) {
    if (bins == 0 || !(hi > lo)) throw InputError("binning needs bins >= 1 and hi > lo");
    // prefix sums once, then per-bin differences
    std::vector<double> prefix(g.n, 0.0);
    for (std::size_t m = 0; m + 1 < g.n; ++m) prefix[m + 1] = prefix[m] + 0.5 * (rho[m] + rho[m + 1]);
    auto cumulative = [&](double x) {
        const double t = std::clamp((x - g.front()) / g.dx, 0.0, static_cast<double>(g.n - 1));
        auto i = static_cast<std::size_t>(t);
        if (i >= g.n - 1) i = g.n - 2;
        const double f = t - static_cast<double>(i);
        return (prefix[i] + rho[i] * f + 0.5 * (rho[i + 1] - rho[i]) * f * f) * g.dx;
    };
    Pattern p;
    p.label = std::move(label);
    const double w = (hi - lo) / static_cast<double>(bins);
    p.positions.resize(bins);
    p.rates.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const double a = lo + static_cast<double>(b) * w;
        p.positions[b] = a + 0.5 * w;
        p.rates[b] = cumulative(a + w) - cumulative(a);
    }
    return p;
}

Pattern normalized(Pattern p) {
    const double s = std::accumulate(p.rates.begin(), p.rates.end(), 0.0);
    if (s > 0.0) {
        for (auto& r : p.rates) r /= s;
    }
    return p;
}

}  // namespace

Pattern binned_final_intensity(const Ensemble& e, bool coincident_only, double lo, double hi,
                               std::size_t bins) {
    if (e.stacks.empty()) throw InputError("ensemble has no stacks");
    const Grid& g = e.stacks.front().grid;
    std::vector<double> rho(g.n, 0.0);
    for (std::size_t b = 0; b < e.stacks.size(); ++b) {
        if (coincident_only && !e.branches[b].coincident) continue;
        const auto& d = e.stacks[b].density.back();
        for (std::size_t i = 0; i < g.n; ++i) rho[i] += d[i];
    }
    return normalized(bin_density(g, rho, lo, hi, bins, "final intensity"));
}

Pattern binned_which_slit_reference(const Ensemble& e, bool coincident_only, double lo, double hi,
                                    std::size_t bins) {
    if (e.stacks.empty()) throw InputError("ensemble has no stacks");
    const Grid& g = e.stacks.front().grid;
    std::vector<double> rho(g.n, 0.0);
    for (std::size_t b = 0; b < e.stacks.size(); ++b) {
        if (coincident_only && !e.branches[b].coincident) continue;
        const auto& st = e.stacks[b];
        if (st.initial_slits.empty()) {
            for (std::size_t i = 0; i < g.n; ++i) rho[i] += st.density.back()[i];
            continue;
        }
        const double dz = st.z.back() - st.z.front();
        for (const auto& w : st.initial_slits) {
            for (const auto* c : {&st.initial.h, &st.initial.v}) {
                const ScalarField part = mask_window(*c, w);
                if (!(part.power() > 0.0)) continue;
                const ScalarField f = fresnel_propagate(part, dz, g);
                for (std::size_t i = 0; i < g.n; ++i) rho[i] += std::norm(f.samples[i]);
            }
        }
    }
    return normalized(bin_density(g, rho, lo, hi, bins, "which-slit reference"));
}

}  // namespace eraser
