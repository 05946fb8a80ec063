#include "eraser/biphoton.hpp"

#include <algorithm>
#include <cmath>

#include "eraser/error.hpp"

namespace eraser {
namespace {

bool is_zero(const ScalarField& f) {
    return std::all_of(f.samples.begin(), f.samples.end(), [](cplx c) { return c == cplx{}; });
}

bool is_dead(const BiphotonTerm& t) {
    return t.amp == cplx{} || is_zero(t.signal) || is_zero(t.idler) ||
           t.signal_pol.norm2() == 0.0 || t.idler_pol.norm2() == 0.0;
}

double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (const auto& c : v) m = std::max(m, std::abs(c));
    return m;
}

bool fields_match(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid) || a.z != b.z || a.wavelength != b.wavelength) return false;
    const double tol = 1e-12 * std::max(max_abs(a.samples), max_abs(b.samples));
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        if (std::abs(a.samples[i] - b.samples[i]) > tol) return false;
    }
    return true;
}

bool pols_match(const JonesVector& a, const JonesVector& b) {
    return std::abs(a.h - b.h) <= 1e-12 && std::abs(a.v - b.v) <= 1e-12;
}

ScalarField propagate(const ScalarField& f, const Propagation& p) {
    return p.method == Propagator::fresnel ? fresnel_propagate(f, p.distance, p.out_grid)
                                           : fraunhofer_pattern(f, p.distance, p.out_grid);
}

ScalarField renormalized(ScalarField f) {
    const double p = f.power();
    if (!(p > 0.0)) throw InputError("source lobe has no power on the grid");
    const double s = 1.0 / std::sqrt(p);
    for (auto& x : f.samples) x *= s;
    return f;
}

void check_detection_plane(const BiphotonState& st, const Grid& scan, double plane_z) {
    if (st.terms.empty()) throw InputError("biphoton state has no terms");
    for (const auto& t : st.terms) {
        const double tol = 1e-12 * std::max(1.0, std::abs(plane_z));
        if (!(t.signal.grid == scan) || std::abs(t.signal.z - plane_z) > tol) {
            throw UsageError("signal fields have not been propagated to the detection plane");
        }
    }
}

// W[t'][t] = a_t conj(a_t') <sp_t'|sp_t> G[t'][t]
std::vector<std::vector<cplx>> weights(const BiphotonState& st,
                                       const std::vector<std::vector<cplx>>& g) {
    const std::size_t n = st.terms.size();
    std::vector<std::vector<cplx>> w(n, std::vector<cplx>(n));
    for (std::size_t tp = 0; tp < n; ++tp) {
        for (std::size_t t = 0; t < n; ++t) {
            const auto& a = st.terms[t];
            const auto& b = st.terms[tp];
            w[tp][t] = a.amp * std::conj(b.amp) * inner(b.signal_pol, a.signal_pol) * g[tp][t];
        }
    }
    return w;
}

double rate_at(const BiphotonState& st, const std::vector<std::vector<cplx>>& w, std::size_t i) {
    cplx r{};
    const std::size_t n = st.terms.size();
    for (std::size_t tp = 0; tp < n; ++tp) {
        const cplx sp = std::conj(st.terms[tp].signal.samples[i]);
        for (std::size_t t = 0; t < n; ++t) r += w[tp][t] * st.terms[t].signal.samples[i] * sp;
    }
    return r.real();
}

cplx half_overlap(const ScalarField& a, const ScalarField& b, double split, bool upper) {
    cplx sum{};
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        if ((a.grid.at(i) > split) != upper) continue;
        sum += std::conj(a.samples[i]) * b.samples[i];
    }
    return sum * a.grid.dx;
}

}  // namespace

const char* to_string(Propagator p) {
    return p == Propagator::fresnel ? "fresnel" : "fraunhofer";
}

BiphotonState source_walborn(const SourceConfig& cfg) {
    const ScalarField g = hermite_gauss(0, cfg.waist, cfg.grid, cfg.wavelength);
    const double r = 1.0 / std::sqrt(2.0);
    BiphotonState st;
    st.terms.push_back({r, g, g, JonesVector::horizontal(), JonesVector::vertical()});
    st.terms.push_back({r, g, g, JonesVector::vertical(), JonesVector::horizontal()});
    return st;
}

BiphotonState source_menzel(const SourceConfig& cfg) {
    const ScalarField hg1 = hermite_gauss(1, cfg.waist, cfg.grid, cfg.wavelength);
    ScalarField upper = hg1;
    ScalarField lower = hg1;
    for (std::size_t i = 0; i < hg1.grid.n; ++i) {
        if (hg1.grid.at(i) > 0.0) {
            lower.samples[i] = 0.0;
        } else {
            upper.samples[i] = 0.0;
        }
    }
    upper = renormalized(std::move(upper));
    lower = renormalized(std::move(lower));
    const double r = 1.0 / std::sqrt(2.0);
    BiphotonState st;
    st.terms.push_back({r, upper, upper, JonesVector::horizontal(), JonesVector::horizontal()});
    st.terms.push_back({r, lower, lower, JonesVector::horizontal(), JonesVector::horizontal()});
    return st;
}

BiphotonState source_product(const SourceConfig& cfg, int order) {
    const ScalarField m = hermite_gauss(order, cfg.waist, cfg.grid, cfg.wavelength);
    BiphotonState st;
    st.terms.push_back({1.0, m, m, JonesVector::horizontal(), JonesVector::vertical()});
    return st;
}

BiphotonState apply_signal_element(const BiphotonState& st, const ArmElement& e) {
    BiphotonState out;
    if (const auto* ap = std::get_if<Aperture>(&e)) {
        for (const auto& t : st.terms) {
            // validates the geometry against this term's grid
            ScalarField through = apply_aperture(t.signal, *ap);
            if (ap->kind == Aperture::Kind::single_slit) {
                BiphotonTerm n = t;
                n.signal = std::move(through);
                out.terms.push_back(std::move(n));
                continue;
            }
            if (t.slit != Slit::none) throw UsageError("term already passed a double slit");
            for (const auto& w : ap->open_slits()) {
                BiphotonTerm n = t;
                n.signal = mask_window(t.signal, w);
                n.slit = w.slit;
                n.slit_z = t.signal.z;
                out.terms.push_back(std::move(n));
            }
        }
    } else if (const auto* sp = std::get_if<SlitPlate>(&e)) {
        for (const auto& t : st.terms) {
            if (t.slit == Slit::none) throw UsageError("slit plate needs a preceding double slit");
            if (t.signal.z != t.slit_z) {
                throw UsageError("slit plate must sit at the slit plane, not after propagation");
            }
            BiphotonTerm n = t;
            if (t.slit == sp->slit) n.signal_pol = sp->m * t.signal_pol;
            out.terms.push_back(std::move(n));
        }
    } else if (const auto* pe = std::get_if<PolarizationElement>(&e)) {
        out = st;
        for (auto& t : out.terms) t.signal_pol = pe->m * t.signal_pol;
    } else {
        const auto& p = std::get<Propagation>(e);
        out = st;
        for (auto& t : out.terms) t.signal = propagate(t.signal, p);
    }
    std::erase_if(out.terms, is_dead);
    return merge_terms(out);
}

BiphotonState apply_idler_element(const BiphotonState& st, const ArmElement& e) {
    BiphotonState out = st;
    if (const auto* ap = std::get_if<Aperture>(&e)) {
        for (auto& t : out.terms) t.idler = apply_aperture(t.idler, *ap);
    } else if (std::holds_alternative<SlitPlate>(e)) {
        throw UsageError("slit plates act on the signal arm only");
    } else if (const auto* pe = std::get_if<PolarizationElement>(&e)) {
        for (auto& t : out.terms) t.idler_pol = pe->m * t.idler_pol;
    } else {
        const auto& p = std::get<Propagation>(e);
        for (auto& t : out.terms) t.idler = propagate(t.idler, p);
    }
    std::erase_if(out.terms, is_dead);
    return merge_terms(out);
}

BiphotonState merge_terms(const BiphotonState& st) {
    BiphotonState out;
    for (const auto& t : st.terms) {
        auto it = std::find_if(out.terms.begin(), out.terms.end(), [&](const BiphotonTerm& m) {
            return m.slit == t.slit && m.slit_z == t.slit_z && pols_match(m.signal_pol, t.signal_pol) &&
                   pols_match(m.idler_pol, t.idler_pol) && fields_match(m.signal, t.signal) &&
                   fields_match(m.idler, t.idler);
        });
        if (it == out.terms.end()) {
            out.terms.push_back(t);
        } else {
            it->amp += t.amp;
        }
    }
    std::erase_if(out.terms, [](const BiphotonTerm& t) { return t.amp == cplx{}; });
    return out;
}

std::vector<std::vector<cplx>> idler_gram(const BiphotonState& st, const IdlerDetector& det) {
    using Mode = IdlerDetector::Mode;
    const bool point = det.mode == Mode::point || det.mode == Mode::point_polarized;
    if (det.mode == Mode::lobe && !std::isfinite(det.x)) {
        throw InputError("idler lobe boundary must be finite");
    }
    const bool polarized = det.mode == Mode::polarized || det.mode == Mode::point_polarized;
    if (point) {
        if (!std::isfinite(det.x)) throw InputError("idler point position must be finite");
        for (const auto& t : st.terms) {
            if (det.x < t.idler.grid.front() || det.x > t.idler.grid.back()) {
                throw InputError("idler point detector lies outside the idler grid");
            }
        }
    }
    const JonesVector analyzer = polarized ? JonesVector::linear(det.angle) : JonesVector{};
    const std::size_t n = st.terms.size();
    std::vector<std::vector<cplx>> g(n, std::vector<cplx>(n));
    for (std::size_t tp = 0; tp < n; ++tp) {
        for (std::size_t t = 0; t < n; ++t) {
            const auto& a = st.terms[t];
            const auto& b = st.terms[tp];
            cplx spatial;
            if (point) {
                spatial = std::conj(b.idler.value_at(det.x)) * a.idler.value_at(det.x);
            } else if (det.mode == Mode::lobe) {
                spatial = half_overlap(b.idler, a.idler, det.x, det.upper);
            } else {
                spatial = overlap(b.idler, a.idler);
            }
            const cplx pol = polarized
                                 ? inner(b.idler_pol, analyzer) * inner(analyzer, a.idler_pol)
                                 : inner(b.idler_pol, a.idler_pol);
            g[tp][t] = spatial * pol;
        }
    }
    return g;
}

Pattern coincidence_pattern(const BiphotonState& st, const Grid& scan, double plane_z,
                            const IdlerDetector& det) {
    check_detection_plane(st, scan, plane_z);
    const auto w = weights(st, idler_gram(st, det));
    Pattern p;
    p.positions.resize(scan.n);
    p.rates.resize(scan.n);
    for (std::size_t i = 0; i < scan.n; ++i) {
        p.positions[i] = scan.at(i);
        p.rates[i] = std::max(0.0, rate_at(st, w, i));
    }
    return p;
}

Pattern singles_pattern(const BiphotonState& st, const Grid& scan, double plane_z) {
    return coincidence_pattern(st, scan, plane_z, IdlerDetector::bucket());
}

Pattern which_slit_reference(const BiphotonState& st, const Grid& scan, double plane_z,
                             const IdlerDetector& det) {
    check_detection_plane(st, scan, plane_z);
    std::vector<Slit> tags;
    for (const auto& t : st.terms) {
        if (std::find(tags.begin(), tags.end(), t.slit) == tags.end()) tags.push_back(t.slit);
    }
    Pattern sum;
    for (Slit s : tags) {
        BiphotonState part;
        for (const auto& t : st.terms) {
            if (t.slit == s) part.terms.push_back(t);
        }
        Pattern p = coincidence_pattern(part, scan, plane_z, det);
        if (sum.rates.empty()) {
            sum = std::move(p);
        } else {
            for (std::size_t i = 0; i < sum.rates.size(); ++i) sum.rates[i] += p.rates[i];
        }
    }
    sum.label = "which-slit reference";
    return sum;
}

LobeTable near_field_correlation(const BiphotonState& st, double split) {
    if (st.terms.empty()) throw InputError("biphoton state has no terms");
    const std::size_t n = st.terms.size();
    LobeTable table{};
    double total = 0.0;
    for (int ib = 0; ib < 2; ++ib) {
        const bool idler_upper = ib == 0;
        std::vector<std::vector<cplx>> g(n, std::vector<cplx>(n));
        for (std::size_t tp = 0; tp < n; ++tp) {
            for (std::size_t t = 0; t < n; ++t) {
                const auto& a = st.terms[t];
                const auto& b = st.terms[tp];
                g[tp][t] = half_overlap(b.idler, a.idler, split, idler_upper) *
                           inner(b.idler_pol, a.idler_pol);
            }
        }
        const auto w = weights(st, g);
        const Grid& sg = st.terms.front().signal.grid;
        for (const auto& t : st.terms) {
            if (!(t.signal.grid == sg)) throw UsageError("signal terms on different grids");
        }
        for (std::size_t i = 0; i < sg.n; ++i) {
            const int sb = sg.at(i) > split ? 0 : 1;
            const double r = std::max(0.0, rate_at(st, w, i)) * sg.dx;
            table[static_cast<std::size_t>(sb)][static_cast<std::size_t>(ib)] += r;
            total += r;
        }
    }
    if (!(total > 0.0)) throw InputError("state has no joint probability to tabulate");
    for (auto& row : table) {
        for (auto& x : row) x /= total;
    }
    return table;
}

double total_norm(const BiphotonState& st) {
    cplx sum{};
    for (const auto& a : st.terms) {
        for (const auto& b : st.terms) {
            sum += a.amp * std::conj(b.amp) * overlap(b.signal, a.signal) *
                   inner(b.signal_pol, a.signal_pol) * overlap(b.idler, a.idler) *
                   inner(b.idler_pol, a.idler_pol);
        }
    }
    return sum.real();
}

double integrated_rate(const Pattern& p) {
    if (p.positions.size() < 2) return 0.0;
    const double dx = (p.positions.back() - p.positions.front()) /
                      static_cast<double>(p.positions.size() - 1);
    double sum = 0.0;
    for (double r : p.rates) sum += r;
    return sum * dx;
}

}  // namespace eraser
