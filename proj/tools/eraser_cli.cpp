#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "eraser/bench/compiler.hpp"
#include "eraser/bench/csv.hpp"
#include "eraser/bench/parser.hpp"
#include "eraser/bench/runner.hpp"
#include "eraser/bench/scenes.hpp"

namespace fs = std::filesystem;
using namespace eraser;
using namespace eraser::bench;

namespace {

struct Loaded {
    std::string name;
    std::string text;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A path on disk wins; otherwise the shipped scene with that stem.
Loaded load(const std::string& arg) {
    if (fs::is_regular_file(arg)) {
        std::ifstream in(arg, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        if (!in && !in.eof()) throw IoError("cannot read " + arg);
        return {scene_stem(arg), ss.str()};
    }
    if (const auto* s = find_scene(arg)) return {s->name, s->text};
    throw IoError("no such scene file or shipped scene: " + arg);
}

Plan prepare(const Loaded& scene) {
    const Plan plan = compile(parse(scene.text), scene.name);
    for (const auto& w : plan.warnings) std::cerr << scene.name << ": warning: " << w << "\n";
    return plan;
}

std::string shape(const RunPlan& r) {
    std::string out;
    for (const auto& s : r.shape) out += (out.empty() ? "" : " -> ") + s;
    return out;
}

void summarize(const RunResult& r) {
    std::printf("%-22s", r.run.name.c_str());
    if (r.table) {
        const auto& t = *r.table;
        std::printf(" P(uu)=%.4f P(ul)=%.4f P(lu)=%.4f P(ll)=%.4f", t[0][0], t[0][1], t[1][0], t[1][1]);
    } else {
        std::printf(" visibility=%.6f", r.visibility);
        if (r.fit) {
            std::printf(" fit_V=%.6f phase=%.6f %s", r.fit->visibility, r.fit->phase,
                        to_string(r.fit->classification));
        }
    }
    if (r.run.engine == Engine::pilotwave) {
        std::printf(" n=%zu counted=%zu crossings=%zu", r.simulated, r.counted, r.order_violations);
        if (r.l1) std::printf(" L1=%.4f", *r.l1);
        if (r.lobe_persistence) std::printf(" lobe_persistence=%.4f", *r.lobe_persistence);
    }
    std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum eraser optical bench"};
    app.require_subcommand(1);

    std::string scene_arg;
    std::string out_dir = ".";
    std::string format = "csv";
    std::uint64_t seed = 0;
    std::size_t n = 0;

    auto* run = app.add_subcommand("run", "Run every run statement of a scene and write CSVs");
    run->add_option("scene", scene_arg, "Scene file or shipped scene name")->required();
    run->add_option("--out", out_dir, "Output directory");
    auto* seed_opt = run->add_option("--seed", seed, "Seed for every run");
    run->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv"}));
    auto* n_opt = run->add_option("--n", n, "Trajectory count for guided-wave runs")
                      ->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "Parse and compile a scene without running it");
    validate->add_option("scene", scene_arg, "Scene file or shipped scene name")->required();

    auto* scenes = app.add_subcommand("scenes", "Shipped scenes");
    scenes->require_subcommand(1);
    auto* list = scenes->add_subcommand("list", "List shipped scene names");
    std::string show_name;
    auto* show = scenes->add_subcommand("show", "Print a shipped scene");
    show->add_option("name", show_name)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (list->parsed()) {
            for (const auto& s : embedded_scenes()) std::printf("%s\n", s.name.c_str());
            return 0;
        }
        if (show->parsed()) {
            const auto* s = find_scene(show_name);
            if (!s) throw IoError("no shipped scene named " + show_name);
            std::fputs(s->text.c_str(), stdout);
            return 0;
        }

        const Loaded scene = load(scene_arg);
        Plan plan;
        try {
            plan = prepare(scene);
        } catch (const ParseError& e) {
            std::cerr << scene.name << ":" << e.what() << "\n";
            return 1;
        } catch (const CompileError& e) {
            std::cerr << scene.name << ":" << e.line() << ": " << e.what() << "\n";
            return 1;
        }

        if (validate->parsed()) {
            for (const auto& r : plan.runs) std::printf("%s: %s\n", r.name.c_str(), shape(r).c_str());
            return 0;
        }

        Overrides ov;
        if (*seed_opt) ov.seed = seed;
        if (*n_opt) ov.n = n;
        const SceneResult result = run_scene(plan, ov);
        fs::create_directories(out_dir);
        for (const auto& f : render(result)) {
            const fs::path p = fs::path(out_dir) / f.name;
            std::ofstream out(p, std::ios::binary);
            out << f.text;
            if (!out) throw IoError("cannot write " + p.string());
        }
        for (const auto& r : result.runs) summarize(r);
        return 0;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}
