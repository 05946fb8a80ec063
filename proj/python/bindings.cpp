#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eraser/analysis.hpp"
#include "eraser/bench/compiler.hpp"
#include "eraser/bench/csv.hpp"
#include "eraser/bench/format.hpp"
#include "eraser/bench/parser.hpp"
#include "eraser/bench/runner.hpp"
#include "eraser/bench/scenes.hpp"
#include "eraser/error.hpp"
#include "eraser/waveoptics.hpp"

namespace py = pybind11;
using namespace eraser;
using namespace eraser::bench;

namespace {

py::dict pattern_dict(const Pattern& p) {
    py::dict d;
    d["x"] = p.positions;
    d["rate"] = p.rates;
    return d;
}

py::dict run_dict(const RunResult& r) {
    py::dict d;
    d["name"] = r.run.name;
    d["engine"] = to_string(r.run.engine);
    d["mode"] = to_string(r.run.mode);
    d["seed"] = r.run.seed;
    d["visibility"] = r.visibility;
    if (r.run.mode != Mode::correlation) {
        d["pattern"] = pattern_dict(r.pattern);
        if (r.reference) d["reference"] = pattern_dict(*r.reference);
    }
    if (r.table) d["table"] = *r.table;
    if (r.fit) {
        py::dict f;
        f["visibility"] = r.fit->visibility;
        f["period"] = r.fit->period;
        f["phase"] = r.fit->phase;
        f["residual"] = r.fit->residual;
        f["classification"] = to_string(r.fit->classification);
        d["fit"] = f;
    }
    if (r.run.engine == Engine::pilotwave) {
        d["n"] = r.simulated;
        d["counted"] = r.counted;
        d["order_violations"] = r.order_violations;
        if (r.l1) d["l1"] = *r.l1;
        if (r.lobe_persistence) d["lobe_persistence"] = *r.lobe_persistence;
        py::list paths;
        for (const auto& t : r.paths) {
            py::dict p;
            p["x0"] = t.x0;
            p["slit"] = to_string(t.slit_taken);
            p["z"] = r.recorded_z;
            p["x"] = t.path;
            paths.append(p);
        }
        d["paths"] = paths;
    }
    return d;
}

Plan plan_of(const std::string& text, const std::string& name) { return compile(parse(text), name); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-photon quantum eraser simulations";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<CompileError>(m, "CompileError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

    m.def("scene_names", [] {
        std::vector<std::string> out;
        for (const auto& s : embedded_scenes()) out.push_back(s.name);
        return out;
    });
    m.def(
        "scene_text",
        [](const std::string& name) {
            const EmbeddedScene* s = find_scene(name);
            if (!s) throw py::key_error(name);
            return s->text;
        },
        py::arg("name"));
    m.def(
        "format_scene", [](const std::string& text) { return format(parse(text)); }, py::arg("text"),
        "Canonical text of a scene.");
    m.def(
        "validate",
        [](const std::string& text, const std::string& name) {
            const Plan p = plan_of(text, name);
            py::dict d;
            py::dict shapes;
            for (const auto& r : p.runs) shapes[py::str(r.name)] = r.shape;
            d["runs"] = shapes;
            d["warnings"] = p.warnings;
            return d;
        },
        py::arg("text"), py::arg("name") = "scene");
    m.def(
        "run",
        [](const std::string& text, const std::string& name, std::optional<std::uint64_t> seed,
           std::optional<std::size_t> n) {
            const Plan p = plan_of(text, name);
            SceneResult res;
            {
                py::gil_scoped_release release;
                res = run_scene(p, Overrides{seed, n});
            }
            py::list runs;
            for (const auto& r : res.runs) runs.append(run_dict(r));
            return runs;
        },
        py::arg("text"), py::arg("name") = "scene", py::arg("seed") = py::none(), py::arg("n") = py::none());
    m.def(
        "render",
        [](const std::string& text, const std::string& name, std::optional<std::uint64_t> seed,
           std::optional<std::size_t> n) {
            const Plan p = plan_of(text, name);
            std::vector<OutputFile> files;
            {
                py::gil_scoped_release release;
                files = render(run_scene(p, Overrides{seed, n}));
            }
            py::dict out;
            for (const auto& f : files) out[py::str(f.name)] = f.text;
            return out;
        },
        py::arg("text"), py::arg("name") = "scene", py::arg("seed") = py::none(), py::arg("n") = py::none(),
        "CSV files keyed by file name.");

    m.def(
        "visibility",
        [](const std::vector<double>& x, const std::vector<double>& rate, double lo, double hi) {
            return visibility(Pattern{x, rate, {}}, Window{lo, hi});
        },
        py::arg("x"), py::arg("rate"), py::arg("lo"), py::arg("hi"));
    m.def("double_slit_closed_form", &double_slit_closed_form, py::arg("width"), py::arg("separation"),
          py::arg("wavelength"), py::arg("distance"), py::arg("x"));
}
