#include "eraser/bench/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "eraser/analysis.hpp"
#include "eraser/error.hpp"

namespace eraser::bench {

const char* to_string(Engine e) { return e == Engine::orthodox ? "orthodox" : "pilotwave"; }

const char* to_string(Mode m) {
    switch (m) {
        case Mode::coincidence: return "coincidence";
        case Mode::singles: return "singles";
        case Mode::correlation: return "correlation";
    }
    return "?";
}

namespace {

constexpr double kWavelength = 700e-9;
constexpr double kWaist = 200e-6;
constexpr std::size_t kSourceN = 2048;
constexpr std::size_t kStackN = 8192;
constexpr std::size_t kPlanes = 256;
constexpr double kSourceSpans = 8.0;
constexpr double kStackMargin = 1.5;

double si(const Decl& d, const std::string& key, double fallback) {
    const Arg* a = d.find(key);
    return a ? std::get<Quantity>(a->value).si() : fallback;
}

std::string word(const Decl& d, const std::string& key, const std::string& fallback) {
    const Arg* a = d.find(key);
    return a ? std::get<std::string>(a->value) : fallback;
}

std::uint64_t integer(const Decl& d, const std::string& key, std::uint64_t fallback) {
    const Arg* a = d.find(key);
    return a ? std::get<std::uint64_t>(a->value) : fallback;
}

double beam_radius(double waist, double wavelength, double z) {
    const double zr = 3.141592653589793 * waist * waist / wavelength;
    return waist * std::sqrt(1.0 + (z / zr) * (z / zr));
}

SlitWindow window_of(const Aperture& ap, Slit s) {
    for (const auto& w : ap.all_slits()) {
        if (w.slit == s) return w;
    }
    throw InputError("aperture has no such slit");
}

}  // namespace

Plan compile(const BenchSpec& spec, const std::string& scene) {
    Plan plan;
    plan.scene = scene;

    const Decl& src = spec.source;
    const std::string kind = src.word(0);
    if (kind == "walborn") {
        plan.source_kind = Plan::SourceKind::walborn;
    } else if (kind == "menzel") {
        plan.source_kind = Plan::SourceKind::menzel;
    } else {
        plan.source_kind =
            word(src, "mode", "hg0") == "hg1" ? Plan::SourceKind::hg1 : Plan::SourceKind::hg0;
    }
    const double wavelength = si(src, "wavelength", kWavelength);
    const double waist = si(src, "waist", kWaist);
    plan.source.wavelength = wavelength;
    plan.source.waist = waist;
    if (plan.source_kind == Plan::SourceKind::menzel || plan.source_kind == Plan::SourceKind::hg1) {
        plan.lobe_split = 0.0;
    }

    const Decl* grid_decl = spec.grid ? &*spec.grid : nullptr;
    const std::size_t source_n = grid_decl ? integer(*grid_decl, "source_n", kSourceN) : kSourceN;
    const std::size_t stack_n = grid_decl ? integer(*grid_decl, "stack_n", kStackN) : kStackN;
    const std::size_t planes = grid_decl ? integer(*grid_decl, "planes", kPlanes) : kPlanes;

    const Decl* signal = nullptr;
    const Decl* idler = nullptr;
    for (const auto& d : spec.detectors) {
        (d.word(0) == "signal" ? signal : idler) = &d;
    }
    const Range range = std::get<Range>(signal->find("scan")->value);
    const double lo = range.lo.si();
    const double hi = range.hi.si();
    plan.scan = Grid::span(lo, hi, integer(*signal, "steps", 2));
    plan.detector_z = si(*signal, "at", 0.0);
    plan.propagator =
        word(*signal, "propagator", "fresnel") == "fraunhofer" ? Propagator::fraunhofer : Propagator::fresnel;

    // Source grid: eight slit spans around the aperture, or four waists
    // either side when there is no aperture.
    for (const auto& e : spec.elements) {
        const std::string& k = e.word(0);
        try {
            if (k == "double_slit") {
                Aperture ap = Aperture::double_slit(si(e, "width", 0.0), si(e, "separation", 0.0),
                                                    si(e, "center", 0.0));
                const std::string open = word(e, "open", "both");
                ap.upper_open = open != "lower";
                ap.lower_open = open != "upper";
                ap.open_slits();
                plan.aperture = ap;
            } else if (k == "single_slit") {
                plan.aperture = Aperture::single_slit(si(e, "width", 0.0), si(e, "center", 0.0));
                plan.aperture->open_slits();
            }
        } catch (const InputError& err) {
            throw CompileError(e.line, err.what());
        }
    }
    const double source_half =
        plan.aperture ? 0.5 * kSourceSpans * plan.aperture->span() + std::abs(plan.aperture->center)
                      : 4.0 * waist;
    plan.source.grid = Grid::symmetric(source_half, source_n);
    const double scan_half = std::max(std::abs(lo), std::abs(hi));

    std::size_t idler_polarizers = 0;
    double idler_angle = 0.0;
    double plane = 0.0;
    double idler_plane = 0.0;
    std::vector<std::string> signal_steps;
    std::vector<std::string> idler_steps;
    for (const auto& e : spec.elements) {
        const std::string& k = e.word(0);
        const bool on_signal = word(e, "arm", "signal") == "signal";
        if (k == "double_slit" || k == "single_slit") {
            plan.slit_z = plane;
            plan.signal_elements.emplace_back(*plan.aperture);
            plan.pilot_elements.push_back({plane, *plan.aperture});
            signal_steps.push_back(k);
        } else if (k == "qwp") {
            const Slit s = word(e, "slit", "upper") == "upper" ? Slit::upper : Slit::lower;
            const JonesMatrix m = quarter_wave_plate(si(e, "angle", 0.0));
            plan.signal_elements.emplace_back(SlitPlate{s, m});
            plan.pilot_elements.push_back({plane, RegionPlate{window_of(*plan.aperture, s), m}});
            signal_steps.push_back("qwp");
        } else if (k == "polarizer") {
            const double angle = si(e, "angle", 0.0);
            if (on_signal) {
                plan.signal_elements.emplace_back(PolarizationElement{linear_polarizer(angle)});
                plan.pilot_elements.push_back({plane, linear_polarizer(angle)});
                signal_steps.push_back("polarizer");
            } else {
                plan.idler_elements.emplace_back(PolarizationElement{linear_polarizer(angle)});
                idler_steps.push_back("idler_polarizer");
                ++idler_polarizers;
                idler_angle = angle;
            }
        } else if (k == "propagate") {
            const double d = si(e, "distance", 0.0);
            if (on_signal) {
                plane += d;
                plan.signal_elements.emplace_back(
                    Propagation{d, Propagator::fresnel,
                                Grid::symmetric(std::max(source_half, scan_half), source_n)});
                signal_steps.push_back("propagate");
            } else {
                idler_plane += d;
                const double half =
                    std::max(source_half, 6.0 * beam_radius(waist, wavelength, idler_plane));
                plan.idler_elements.emplace_back(
                    Propagation{d, Propagator::fresnel, Grid::symmetric(half, source_n)});
                idler_steps.push_back("idler_propagate");
            }
        }
    }
    if (plan.detector_z > plane) {
        plan.signal_tail = Propagation{plan.detector_z - plane, plan.propagator, plan.scan};
    }

    plan.distance = plan.detector_z - plan.slit_z;
    plan.window_lo = lo;
    plan.window_hi = hi;
    if (plan.aperture && plan.distance > 0.0) {
        const Window w = Window::central_envelope(plan.aperture->width, wavelength, plan.distance);
        plan.window_lo = std::max(lo, w.lo + plan.aperture->center);
        plan.window_hi = std::min(hi, w.hi + plan.aperture->center);
        if (!(plan.window_lo < plan.window_hi)) {
            throw CompileError(signal->line, "scan range misses the central diffraction lobe");
        }
        if (plan.aperture->kind == Aperture::Kind::double_slit) {
            plan.expected_period = wavelength * plan.distance / plan.aperture->separation;
        }
        if (plan.propagator == Propagator::fraunhofer) {
            if (auto w = fraunhofer_warning(plan.distance, plan.aperture->span(), wavelength)) {
                plan.warnings.push_back(*w);
            }
        }
    }

    // Idler measurement.
    std::string idler_kind = idler ? idler->word(1) : "bucket";
    if (idler_kind == "bucket") {
        plan.idler = IdlerDetector::bucket();
    } else if (idler_kind == "point") {
        plan.idler = IdlerDetector::point(si(*idler, "x", 0.0));
    } else if (idler_kind == "polarized") {
        plan.idler = IdlerDetector::polarized(si(*idler, "angle", 0.0));
    } else if (idler_kind == "point+polarized") {
        plan.idler = IdlerDetector::point_polarized(si(*idler, "x", 0.0), si(*idler, "angle", 0.0));
    } else {
        const bool upper = word(*idler, "side", "upper") == "upper";
        plan.idler = IdlerDetector::lobe(upper, 0.0);
        plan.idler_lobe = upper ? Lobe::upper : Lobe::lower;
    }
    if (idler_kind == "polarized") {
        plan.idler_rule = {IdlerRule::Kind::polarized, plan.idler.angle};
    } else if (idler_polarizers == 1) {
        plan.idler_rule = {IdlerRule::Kind::polarized, idler_angle};
    }

    const double center = 0.5 * (lo + hi);
    const double half = kStackMargin * 0.5 * (hi - lo);
    plan.stack.grid = Grid::span(center - half, center + half, stack_n);
    plan.stack.n_steps = planes;

    std::map<std::string, int> seen;
    for (const auto& r : spec.runs) {
        RunPlan run;
        run.engine = r.word(0) == "orthodox" ? Engine::orthodox : Engine::pilotwave;
        run.mode = r.word(1) == "coincidence" ? Mode::coincidence
                   : r.word(1) == "singles"   ? Mode::singles
                                              : Mode::correlation;
        run.seed = integer(r, "seed", 1);
        run.n = integer(r, "n", run.n);
        run.bins = integer(r, "bins", run.bins);
        run.paths = integer(r, "paths", 0);
        const std::string stem = std::string(to_string(run.engine)) + "_" + to_string(run.mode);
        const int count = ++seen[stem];
        run.name = count == 1 ? stem : stem + "_" + std::to_string(count);

        run.shape.push_back("source");
        if (run.engine == Engine::orthodox) {
            run.shape.insert(run.shape.end(), signal_steps.begin(), signal_steps.end());
            if (run.mode == Mode::coincidence || run.mode == Mode::correlation) {
                run.shape.insert(run.shape.end(), idler_steps.begin(), idler_steps.end());
            }
            if (plan.signal_tail) run.shape.push_back("propagate");
            run.shape.push_back(run.mode == Mode::correlation ? "near_field_correlation"
                                                              : to_string(run.mode));
            plan.runs.push_back(std::move(run));
            continue;
        }

        if (idler_kind == "point" || idler_kind == "point+polarized") {
            throw CompileError(r.line, "pilotwave supports bucket/lobe/polarized idler rules");
        }
        if (idler_polarizers + (idler_kind == "polarized" ? 1 : 0) > 1) {
            throw CompileError(r.line, "pilotwave supports a single idler analyzer");
        }
        if ((plan.idler_lobe || run.mode == Mode::correlation) && !plan.lobe_split) {
            throw CompileError(r.line, "lobe outcomes need a first-order (two-lobe) source");
        }
        if (plan.idler_lobe && plan.idler_rule.kind == IdlerRule::Kind::polarized) {
            throw CompileError(r.line, "pilotwave lobe rule takes no idler analyzer");
        }
        if (plan.propagator == Propagator::fraunhofer) {
            plan.warnings.push_back("pilotwave run '" + run.name +
                                    "' propagates with the Fresnel integral");
        }
        run.shape.push_back("branches");
        run.shape.insert(run.shape.end(), signal_steps.begin(), signal_steps.end());
        run.shape.push_back("wave_stack");
        run.shape.push_back("trajectories");
        run.shape.push_back(run.mode == Mode::coincidence ? "coincidence_filter"
                            : run.mode == Mode::singles   ? "histogram"
                                                          : "lobe_table");
        plan.runs.push_back(std::move(run));
    }
    return plan;
}

}  // namespace eraser::bench
