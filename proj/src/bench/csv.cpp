#include "eraser/bench/csv.hpp"

#include <charconv>

namespace eraser::bench {

namespace {

void put(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

std::string header(const std::string& scene, const RunResult& r) {
    return "# scene=" + scene + " engine=" + to_string(r.run.engine) +
           " mode=" + to_string(r.run.mode) + " seed=" + std::to_string(r.run.seed) + "\n";
}

}  // namespace

std::string pattern_csv(const std::string& scene, const RunResult& r) {
    std::string out = header(scene, r) + "x_m,rate\n";
    for (std::size_t i = 0; i < r.pattern.positions.size(); ++i) {
        put(out, r.pattern.positions[i]);
        out += ',';
        put(out, r.pattern.rates[i]);
        out += '\n';
    }
    return out;
}

std::string trajectory_csv(const std::string& scene, const RunResult& r) {
    std::string out = header(scene, r) + "x0_m,slit,z_m,x_m\n";
    for (const auto& t : r.paths) {
        for (std::size_t k = 0; k < t.path.size() && k < r.recorded_z.size(); ++k) {
            put(out, t.x0);
            out += ',';
            out += to_string(t.slit_taken);
            out += ',';
            put(out, r.recorded_z[k]);
            out += ',';
            put(out, t.path[k]);
            out += '\n';
        }
    }
    return out;
}

std::string correlation_csv(const std::string& scene, const RunResult& r) {
    static const char* names[2] = {"upper", "lower"};
    std::string out = header(scene, r) + "signal_lobe,idler_lobe,probability\n";
    for (int s = 0; s < 2; ++s) {
        for (int i = 0; i < 2; ++i) {
            out += names[s];
            out += ',';
            out += names[i];
            out += ',';
            put(out, (*r.table)[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)]);
            out += '\n';
        }
    }
    return out;
}

std::vector<OutputFile> render(const SceneResult& result) {
    std::vector<OutputFile> files;
    const std::string& scene = result.plan.scene;
    for (const auto& r : result.runs) {
        const std::string stem = scene + "_" + r.run.name;
        if (r.table) {
            files.push_back({stem + ".csv", correlation_csv(scene, r)});
        } else {
            files.push_back({stem + ".csv", pattern_csv(scene, r)});
        }
        if (!r.paths.empty()) files.push_back({stem + "_trajectories.csv", trajectory_csv(scene, r)});
    }
    return files;
}

}  // namespace eraser::bench
