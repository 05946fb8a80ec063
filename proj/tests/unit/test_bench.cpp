#include <algorithm>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "eraser/bench/compiler.hpp"
#include "eraser/bench/csv.hpp"
#include "eraser/bench/format.hpp"
#include "eraser/bench/parser.hpp"
#include "eraser/bench/runner.hpp"
#include "eraser/bench/scenes.hpp"

using namespace eraser;
using namespace eraser::bench;
using doctest::Approx;

namespace {

const std::string minimal =
    "source walborn\n"
    "element double_slit width=80um separation=250um\n"
    "detector signal scan=-5mm..5mm steps=101 at=1m\n"
    "run orthodox coincidence\n";

ParseError parse_error(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("no parse error for:\n" << text);
    return ParseError(0, 0, "", "");
}

std::vector<std::string> lines(const std::string& s, std::size_t count) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; out.size() < count && std::getline(in, l);) out.push_back(l);
    return out;
}

Plan orthodox_only(Plan p) {
    std::erase_if(p.runs, [](const RunPlan& r) { return r.engine != Engine::orthodox; });
    return p;
}

}  // namespace

TEST_CASE("empty input reports a missing source") {
    const ParseError e = parse_error("");
    CHECK(e.message() == "missing source");
    CHECK(e.line() == 1);
    CHECK(parse_error("# only a comment\n\n").message() == "missing source");
}

TEST_CASE("dimensioned values need a unit") {
    const ParseError e = parse_error(
        "source walborn\n"
        "element double_slit width=80um separation=250um\n"
        "element qwp slit=upper angle=45\n");
    CHECK(e.message() == "missing unit");
    CHECK(e.line() == 3);
    CHECK(e.column() == 30);  // the '4' of 45
    CHECK(e.token() == "45");

    const ParseError wrong = parse_error("source walborn waist=5deg\n");
    CHECK(wrong.message().find("unit must be") == 0);
    CHECK(wrong.token() == "deg");
    CHECK(parse_error("source walborn waist=5furlong\n").token() == "furlong");
}

TEST_CASE("syntax and schema errors carry positions") {
    CHECK(parse_error("source walborn color=red\n").message() == "unknown key");
    CHECK(parse_error("source walborn color=red\n").column() == 16);
    CHECK(parse_error("source walborn waist=1mm waist=2mm\n").message() == "duplicate key");
    CHECK(parse_error("lens f=1m\n").message() == "unknown statement");
    CHECK(parse_error("source laser\n").line() == 1);
    CHECK(parse_error("source walborn\nelement double_slit width=80um\n").message() ==
          "missing required key 'separation'");
    CHECK(parse_error(minimal + "run orthodox coincidence n=5\n").message() == "unknown key");
    CHECK(parse_error("source walborn\ndetector signal scan=5mm..-5mm steps=10 at=1m\n").message() ==
          "range needs lo < hi");
    CHECK(parse_error("source walborn\ngrid planes=4\n").message() == "value must be at least 16");
    CHECK(parse_error("source walborn\nelement double_slit width=-80um separation=250um\n").message() ==
          "length must be > 0");
}

TEST_CASE("semantic checks") {
    CHECK(parse_error(minimal + "source menzel\n").message() == "duplicate source");
    CHECK(parse_error(minimal + "detector signal scan=-1mm..1mm steps=10 at=1m\n").message() ==
          "duplicate signal detector");
    CHECK(parse_error(
              "source walborn\nelement double_slit width=80um separation=250um\n"
              "detector signal scan=-5mm..5mm steps=101 at=1m\n")
              .message() == "missing run");
    CHECK(parse_error("source walborn\nrun orthodox singles\n").message() == "missing signal detector");
    CHECK(parse_error(
              "source walborn\nelement qwp slit=upper angle=45deg\n"
              "element double_slit width=80um separation=250um\n"
              "detector signal scan=-5mm..5mm steps=101 at=1m\nrun orthodox coincidence\n")
              .line() == 2);
    CHECK(parse_error(
              "source walborn\nelement double_slit width=80um separation=250um open=upper\n"
              "element qwp slit=lower angle=45deg\n"
              "detector signal scan=-5mm..5mm steps=101 at=1m\nrun orthodox coincidence\n")
              .message() == "qwp sits on a closed slit");
    CHECK(parse_error(
              "source walborn\nelement double_slit width=80um separation=250um\n"
              "element propagate arm=signal distance=2m\n"
              "detector signal scan=-5mm..5mm steps=101 at=1m\nrun orthodox coincidence\n")
              .message() == "detector plane precedes elements");
}

TEST_CASE("parsed values keep what was written") {
    const BenchSpec s = parse("source custom mode=hg1 waist=0.2mm  # comment\n" + minimal.substr(15));
    CHECK(s.source.word(0) == "custom");
    const Quantity w = std::get<Quantity>(s.source.find("waist")->value);
    CHECK(w.value == 0.2);
    CHECK(w.unit == "mm");
    CHECK(w.si() == Approx(2e-4));
    CHECK(w.dimension() == Dimension::length);
    CHECK(Quantity{90, "deg"}.si() == Approx(1.5707963267948966));
    CHECK(s.source.find("waist")->column == 24);
    const Range r = std::get<Range>(s.detectors[0].find("scan")->value);
    CHECK(r.lo.si() == Approx(-5e-3));
    CHECK(std::get<std::uint64_t>(s.detectors[0].find("steps")->value) == 101);
    CHECK_FALSE(s.grid.has_value());
}

TEST_CASE("every shipped scene parses and round-trips through the formatter") {
    const auto& scenes = embedded_scenes();
    CHECK(scenes.size() >= 8);
    for (const char* name : {"walborn_fig1", "walborn_fig2", "walborn_fig3", "walborn_fig3_plus45",
                             "walborn_fig3_minus45", "walborn_fig4", "menzel_nearfield",
                             "menzel_farfield", "menzel_oneslit"}) {
        CAPTURE(name);
        const EmbeddedScene* s = find_scene(name);
        REQUIRE(s != nullptr);
        const BenchSpec spec = parse(s->text);
        const std::string text = format(spec);
        CHECK(parse(text) == spec);
        CHECK(format(parse(text)) == text);

        std::ifstream in(std::string(ERASER_SCENE_DIR) + "/" + name + ".bench");
        std::ostringstream disk;
        disk << in.rdbuf();
        CHECK(disk.str() == s->text);
    }
    CHECK(find_scene("scenes/walborn_fig1.bench") == find_scene("walborn_fig1"));
    CHECK(find_scene("nope") == nullptr);
}

TEST_CASE("formatter output") {
    const BenchSpec s = parse("source walborn waist=5mm\n" + minimal.substr(15) + "grid stack_n=1024\n");
    const std::string text = format(s);
    CHECK(lines(text, 2)[0] == "source walborn waist=5mm");
    CHECK(lines(text, 2)[1] == "grid stack_n=1024");
    CHECK(format(Value{Range{{-5, "mm"}, {0.25, "m"}}}) == "-5mm..0.25m");
}

TEST_CASE("compiled plans") {
    const Plan f1 = compile(parse(find_scene("walborn_fig1")->text), "walborn_fig1");
    REQUIRE(f1.runs.size() == 2);
    CHECK(f1.runs[0].shape == std::vector<std::string>{"source", "double_slit", "propagate", "coincidence"});
    CHECK(f1.runs[0].name == "orthodox_coincidence");
    CHECK(f1.runs[1].n == 100000);
    CHECK(f1.runs[1].bins == 200);
    CHECK(f1.source.grid.n == 2048);
    CHECK(f1.source.grid.back() == Approx(4 * 330e-6));
    CHECK(f1.source.waist == Approx(5e-3));
    CHECK(f1.stack.grid.n == 8192);
    CHECK(f1.stack.n_steps == 256);
    CHECK(f1.expected_period == Approx(700e-9 / 250e-6));
    CHECK(f1.signal_tail.has_value());

    const Plan nf = compile(parse(find_scene("menzel_nearfield")->text), "menzel_nearfield");
    CHECK_FALSE(nf.signal_tail.has_value());
    for (const auto& r : nf.runs) CHECK(std::count(r.shape.begin(), r.shape.end(), "propagate") == 0);
    CHECK(nf.runs[0].shape.back() == "near_field_correlation");
    CHECK(nf.lobe_split == 0.0);

    const Plan f4 = compile(parse(find_scene("walborn_fig4")->text));
    CHECK(f4.idler_rule.kind == IdlerRule::Kind::polarized);
    CHECK(f4.idler_elements.size() == 1);

    CHECK(compile(parse(minimal + "run orthodox coincidence\n")).runs[1].name == "orthodox_coincidence_2");
}

TEST_CASE("compile errors and warnings") {
    const std::string point = minimal + "detector idler point x=0m\nrun pilotwave coincidence\n";
    try {
        compile(parse(point));
        FAIL("expected a compile error");
    } catch (const CompileError& e) {
        CHECK(std::string(e.what()) == "pilotwave supports bucket/lobe/polarized idler rules");
        CHECK(e.line() == 6);
    }
    CHECK_NOTHROW(compile(parse(minimal + "detector idler point x=0m\n")));
    CHECK_THROWS_AS(compile(parse(minimal + "detector idler lobe side=upper\nrun pilotwave coincidence\n")),
                    CompileError);

    const Plan near = compile(parse(
        "source walborn\nelement double_slit width=80um separation=250um\n"
        "detector signal scan=-5mm..5mm steps=101 at=0.1m propagator=fraunhofer\n"
        "run orthodox coincidence\n"));
    REQUIRE(near.warnings.size() == 1);
}

TEST_CASE("orthodox runs through the scene runner") {
    const Plan f2 = orthodox_only(compile(parse(find_scene("walborn_fig2")->text), "walborn_fig2"));
    const SceneResult r = run_scene(f2);
    REQUIRE(r.runs.size() == 1);
    CHECK(r.runs[0].visibility < 1e-6);
    CHECK(r.runs[0].pattern.rates.size() == 1001);

    const Plan nf = orthodox_only(compile(parse(find_scene("menzel_nearfield")->text), "menzel_nearfield"));
    const RunResult c = execute(nf, nf.runs[0]);
    REQUIRE(c.table.has_value());
    CHECK((*c.table)[0][0] == Approx(0.5));
    CHECK((*c.table)[0][1] < 1e-9);
}

TEST_CASE("CSV layout") {
    const Plan f1 = orthodox_only(compile(parse(find_scene("walborn_fig1")->text), "walborn_fig1"));
    const auto files = render(run_scene(f1));
    REQUIRE(files.size() == 1);
    CHECK(files[0].name == "walborn_fig1_orthodox_coincidence.csv");
    const auto head = lines(files[0].text, 3);
    CHECK(head[0] == "# scene=walborn_fig1 engine=orthodox mode=coincidence seed=42");
    CHECK(head[1] == "x_m,rate");
    CHECK(head[2].rfind("-0.005,", 0) == 0);
    CHECK(std::count(files[0].text.begin(), files[0].text.end(), '\n') == 1003);

    const Plan nf = orthodox_only(compile(parse(find_scene("menzel_nearfield")->text), "menzel_nearfield"));
    const auto corr = render(run_scene(nf));
    CHECK(lines(corr[0].text, 3)[1] == "signal_lobe,idler_lobe,probability");
    const std::string row = lines(corr[0].text, 3)[2];
    REQUIRE(row.rfind("upper,upper,", 0) == 0);
    CHECK(std::stod(row.substr(12)) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("guided-wave runs are deterministic and write trajectories") {
    const Plan f3 = compile(parse(find_scene("walborn_fig3")->text), "walborn_fig3");
    Overrides ov;
    ov.n = 2000;
    ov.seed = 7;
    const auto a = render(run_scene(f3, ov));
    const auto b = render(run_scene(f3, ov));
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].name == b[i].name);
        CHECK(a[i].text == b[i].text);
    }
    CHECK(a[2].name == "walborn_fig3_pilotwave_coincidence_trajectories.csv");
    CHECK(lines(a[2].text, 2)[1] == "x0_m,slit,z_m,x_m");
    CHECK(lines(a[1].text, 1)[0] == "# scene=walborn_fig3 engine=pilotwave mode=coincidence seed=7");
}
