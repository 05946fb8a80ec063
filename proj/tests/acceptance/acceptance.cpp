// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "eraser/analysis.hpp"
#include "eraser/bench/compiler.hpp"
#include "eraser/bench/csv.hpp"
#include "eraser/bench/format.hpp"
#include "eraser/bench/parser.hpp"
#include "eraser/bench/runner.hpp"
#include "eraser/bench/scenes.hpp"
#include "eraser/waveoptics.hpp"

using namespace eraser;
using namespace eraser::bench;

namespace {

// tolerances
constexpr double kFig1Visibility = 0.99;
constexpr double kFig1ClosedForm = 1e-3;
constexpr double kFig2Visibility = 1e-6;
constexpr double kFig3Phase = 1e-3;
constexpr double kFig3Visibility = 0.99;
constexpr double kFig3SumVisibility = 1e-9;
constexpr double kFig34Equivalence = 1e-9;
constexpr double kNearDiagonal = 1e-9;
constexpr double kNearOffDiagonal = 1e-9;
constexpr double kNearPersistence = 0.99;
constexpr double kFarOrthodox = 1e-6;
constexpr double kFarPilot = 0.9;
constexpr double kOneSlitFit = 0.05;
constexpr double kEquivarianceL1 = 0.02;
constexpr std::size_t kEquivarianceN = 100000;
constexpr std::size_t kEquivarianceBins = 200;
constexpr double kPropagatorL2 = 0.01;
constexpr double kGaussianWidth = 0.005;

constexpr double lam = 700e-9;
constexpr double pi = std::numbers::pi;

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const std::vector<std::string> kScenes = {
    "walborn_fig1",    "walborn_fig2",     "walborn_fig3",     "walborn_fig3_plus45", "walborn_fig3_minus45",
    "walborn_fig4",    "menzel_nearfield", "menzel_farfield",  "menzel_oneslit"};

struct Loaded {
    Plan plan;
    SceneResult result;
};

std::map<std::string, Loaded> scenes;
std::vector<std::string> corpus_errors;

const RunResult* find_run(const std::string& scene, Engine e) {
    auto it = scenes.find(scene);
    if (it == scenes.end()) return nullptr;
    for (const auto& r : it->second.result.runs)
        if (r.run.engine == e) return &r;
    return nullptr;
}

Window window_of(const std::string& scene) {
    const Plan& p = scenes.at(scene).plan;
    return {p.window_lo, p.window_hi};
}

void load_corpus() {
    Overrides ov;
    ov.n = kEquivarianceN;
    for (const auto& name : kScenes) {
        try {
            const EmbeddedScene* s = find_scene(name);
            if (!s) throw std::runtime_error("not shipped");
            const BenchSpec spec = parse(s->text);
            if (!(parse(format(spec)) == spec)) corpus_errors.push_back(name + ": round-trip differs");
            Plan plan = compile(spec, name);
            for (auto& r : plan.runs)
                if (r.engine == Engine::pilotwave) r.bins = kEquivarianceBins;
            SceneResult res = run_scene(plan, ov);
            scenes.emplace(name, Loaded{std::move(plan), std::move(res)});
        } catch (const std::exception& e) {
            corpus_errors.push_back(name + ": " + e.what());
        }
    }
}

void fig1() {
    const RunResult* r = find_run("walborn_fig1", Engine::orthodox);
    if (!r) return report(false, "fig1 interference", "scene did not run");
    const Plan& p = scenes.at("walborn_fig1").plan;
    Pattern cf{r->pattern.positions, {}, "closed form"};
    for (double x : cf.positions)
        cf.rates.push_back(double_slit_closed_form(80e-6, 250e-6, lam, p.distance, x));
    const double linf = l_inf_relative_distance(peak_normalize(r->pattern), peak_normalize(cf));
    report(r->visibility > kFig1Visibility && linf < kFig1ClosedForm, "fig1 interference",
           fmt("V=%.6f (> %g), Linf vs closed form=%.3e (< %g)", r->visibility, kFig1Visibility, linf,
               kFig1ClosedForm));
}

void fig2() {
    const RunResult* r = find_run("walborn_fig2", Engine::orthodox);
    if (!r) return report(false, "fig2 marked paths", "scene did not run");
    report(r->visibility < kFig2Visibility, "fig2 marked paths",
           fmt("V=%.3e (< %g)", r->visibility, kFig2Visibility));
}

void fig3() {
    const RunResult* plus = find_run("walborn_fig3_plus45", Engine::orthodox);
    const RunResult* minus = find_run("walborn_fig3_minus45", Engine::orthodox);
    if (!plus || !minus || !plus->fit || !minus->fit)
        return report(false, "fig3 eraser", "scene did not run or fit failed");
    const double phi_p = plus->fit->phase;
    const double phi_m = minus->fit->phase;
    const double dp = std::abs(phi_p);
    const double dm = std::abs(std::remainder(phi_m - pi, 2 * pi));
    const Pattern sum = scale(add(plus->pattern, minus->pattern), 0.5);
    const double vsum = visibility(sum, window_of("walborn_fig3_plus45"), *plus->reference);
    const bool ok = dp < kFig3Phase && dm < kFig3Phase && plus->visibility > kFig3Visibility &&
                    minus->visibility > kFig3Visibility && vsum < kFig3SumVisibility;
    report(ok, "fig3 eraser",
           fmt("phase(+45)=%.6f |phi|<%g, phase(-45)=%.6f |phi-pi|=%.6f<%g, V=%.6f/%.6f (> %g), "
               "V(sum/2)=%.3e (< %g)",
               phi_p, kFig3Phase, phi_m, dm, kFig3Phase, plus->visibility, minus->visibility,
               kFig3Visibility, vsum, kFig3SumVisibility));
}

void fig34() {
    const RunResult* a = find_run("walborn_fig3_plus45", Engine::orthodox);
    const RunResult* b = find_run("walborn_fig4", Engine::orthodox);
    if (!a || !b) return report(false, "fig3/fig4 equivalence", "scene did not run");
    const double d = l_inf_relative_distance(peak_normalize(a->pattern), peak_normalize(b->pattern));
    report(d < kFig34Equivalence, "fig3/fig4 equivalence",
           fmt("Linf relative=%.3e (< %g)", d, kFig34Equivalence));
}

void near_field() {
    const RunResult* o = find_run("menzel_nearfield", Engine::orthodox);
    if (!o || !o->table) return report(false, "menzel near field", "scene did not run");
    double diag = 0.0, off = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double v = (*o->table)[i][j];
            if (i == j) diag = std::max(diag, std::abs(v - 0.5));
            else off = std::max(off, std::abs(v));
        }
    // the persistence criterion is stated at the scene's own ensemble size
    double persistence = -1.0;
    std::size_t n = 0;
    try {
        const Plan& plan = scenes.at("menzel_nearfield").plan;
        for (const auto& run : plan.runs)
            if (run.engine == Engine::pilotwave) {
                RunPlan r = run;
                r.n = 10000;
                n = r.n;
                const RunResult res = execute(plan, r);
                if (res.lobe_persistence) persistence = *res.lobe_persistence;
            }
    } catch (const std::exception& e) {
        return report(false, "menzel near field", e.what());
    }
    report(diag < kNearDiagonal && off < kNearOffDiagonal && persistence > kNearPersistence,
           "menzel near field",
           fmt("max|diag-1/2|=%.3e (< %g), max off-diagonal=%.3e (< %g), pilot persistence=%.5f at n=%zu (> %g)",
               diag, kNearDiagonal, off, kNearOffDiagonal, persistence, n, kNearPersistence));
}

void far_field() {
    const RunResult* o = find_run("menzel_farfield", Engine::orthodox);
    const RunResult* p = find_run("menzel_farfield", Engine::pilotwave);
    const RunResult* o1 = find_run("menzel_oneslit", Engine::orthodox);
    const RunResult* p1 = find_run("menzel_oneslit", Engine::pilotwave);
    if (!o || !p || !o1 || !p1) return report(false, "menzel far field", "scene did not run");
    const double fo1 = o1->fit ? o1->fit->visibility : 1.0;
    const double fp1 = p1->fit ? p1->fit->visibility : 1.0;
    report(o->visibility < kFarOrthodox && p->visibility > kFarPilot && fo1 < kOneSlitFit && fp1 < kOneSlitFit,
           "menzel far field",
           fmt("orthodox V=%.3e (< %g), pilot V=%.4f at n=%zu (> %g), one slit fitted V orthodox=%.4f "
               "pilot=%.4f (< %g)",
               o->visibility, kFarOrthodox, p->visibility, p->simulated, kFarPilot, fo1, fp1, kOneSlitFit));
}

void equivariance() {
    bool ok = true;
    double worst = 0.0;
    std::string worst_scene;
    int count = 0;
    for (const auto& name : kScenes) {
        const RunResult* r = find_run(name, Engine::pilotwave);
        if (!r) {
            ok = false;
            continue;
        }
        ++count;
        const bool this_ok = r->l1 && *r->l1 < kEquivarianceL1 && r->simulated == kEquivarianceN &&
                             r->run.bins == kEquivarianceBins;
        ok = ok && this_ok;
        const double v = r->l1 ? *r->l1 : 2.0;
        if (v >= worst) {
            worst = v;
            worst_scene = name;
        }
    }
    report(ok, "equivariance",
           fmt("%d pilot-wave scenes at n=%zu, %zu bins, worst L1=%.4f (%s) (< %g)", count, kEquivarianceN,
               kEquivarianceBins, worst, worst_scene.c_str(), kEquivarianceL1));
}

void no_crossing() {
    std::size_t violations = 0;
    std::size_t trajectories = 0;
    bool ran = true;
    for (const auto& name : kScenes) {
        const RunResult* r = find_run(name, Engine::pilotwave);
        if (!r) {
            ran = false;
            continue;
        }
        violations += r->order_violations;
        trajectories += r->simulated;
    }
    report(ran && violations == 0, "no crossing",
           fmt("%zu order violations over %zu trajectories", violations, trajectories));
}

ScalarField plane_wave(const Grid& g) {
    ScalarField f = ScalarField::zeros(g, lam);
    for (auto& s : f.samples) s = 1.0;
    return f;
}

double second_moment(const ScalarField& f) {
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < f.grid.n; ++i) {
        const double p = std::norm(f.samples[i]);
        m0 += p;
        m2 += p * f.grid.at(i) * f.grid.at(i);
    }
    return m2 / m0;
}

void propagators() {
    const Aperture ap = Aperture::double_slit(80e-6, 250e-6);
    const ScalarField f = apply_aperture(plane_wave(Grid::symmetric(4 * ap.span(), 2048)), ap);
    const double fd = fraunhofer_distance(ap.span(), lam);
    double worst_l2 = 0.0;
    for (double m : {1.0, 2.0, 5.0}) {
        const double L = m * fd;
        const Grid out = Grid::symmetric(3 * lam * L / 80e-6, 2001);
        const Pattern a = normalize(intensity(fresnel_propagate(f, L, out))).pattern;
        const Pattern b = normalize(intensity(fraunhofer_pattern(f, L, out))).pattern;
        worst_l2 = std::max(worst_l2, l2_relative_distance(a, b));
    }

    const double w0 = 100e-6;
    const double zr = pi * w0 * w0 / lam;
    const ScalarField beam = hermite_gauss(0, w0, Grid::symmetric(600e-6, 2048), lam);
    double worst_w = 0.0;
    for (double z : {0.5 * zr, zr, 3.0 * zr}) {
        const double w = w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
        const ScalarField out = fresnel_propagate(beam, z, Grid::symmetric(5.0 * w, 2048));
        worst_w = std::max(worst_w, std::abs(2.0 * std::sqrt(second_moment(out)) / w - 1.0));
    }
    report(worst_l2 < kPropagatorL2 && worst_w < kGaussianWidth, "propagators",
           fmt("Fresnel vs Fraunhofer L2=%.3e at 1-5x Fraunhofer distance (< %g), Gaussian width error=%.3e (< %g)",
               worst_l2, kPropagatorL2, worst_w, kGaussianWidth));
}

std::string golden_headers() {
    std::ostringstream out;
    std::vector<std::string> names;
    for (const auto& s : embedded_scenes()) names.push_back(s.name);
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
        auto it = scenes.find(name);
        if (it == scenes.end()) continue;
        auto files = render(it->second.result);
        std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
        for (const auto& f : files) {
            std::istringstream in(f.text);
            std::string l0, l1;
            std::getline(in, l0);
            std::getline(in, l1);
            out << f.name << " | " << l0 << " | " << l1 << "\n";
        }
    }
    return out.str();
}

void corpus() {
    std::vector<std::string> problems = corpus_errors;
    const std::size_t shipped = embedded_scenes().size();
    if (shipped < 7) problems.push_back("fewer than 7 scenes");
    for (const auto& s : embedded_scenes())
        if (!scenes.contains(s.name)) problems.push_back(s.name + ": not exercised");

    std::ifstream in(ERASER_GOLDEN);
    std::ostringstream golden;
    golden << in.rdbuf();
    if (golden.str() != golden_headers()) problems.push_back("CSV headers differ from golden list");

    try {
        const auto& ref = scenes.at("walborn_fig3");
        Overrides ov;
        ov.n = kEquivarianceN;
        const auto a = render(ref.result);
        const auto b = render(run_scene(ref.plan, ov));
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].name == b[i].name && a[i].text == b[i].text;
        if (!same) problems.push_back("walborn_fig3 output differs between runs with the same seed");
    } catch (const std::exception& e) {
        problems.push_back(std::string("determinism: ") + e.what());
    }

    std::string detail = fmt("%zu scenes parsed, compiled, run and round-tripped; golden headers and fixed-seed "
                             "determinism checked",
                             scenes.size());
    for (const auto& p : problems) detail += "; " + p;
    report(problems.empty(), "scene corpus", detail);
}

}  // namespace

int main() {
    load_corpus();
    fig1();
    fig2();
    fig3();
    fig34();
    near_field();
    far_field();
    equivariance();
    no_crossing();
    propagators();
    corpus();
    std::printf("%d criteria failed\n", failures);
    return failures ? 1 : 0;
}
