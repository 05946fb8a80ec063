#pragma once

#include <string>
#include <vector>

#include "eraser/bench/runner.hpp"

namespace eraser::bench {

struct OutputFile {
    std::string name;  // file name, no directory
    std::string text;
};

/// `# scene=<s> engine=<e> mode=<m> seed=<n>` followed by `x_m,rate` rows.
std::string pattern_csv(const std::string& scene, const RunResult& r);
/// Long format `x0_m,slit,z_m,x_m`, one row per recorded plane per path.
std::string trajectory_csv(const std::string& scene, const RunResult& r);
/// `signal_lobe,idler_lobe,probability`
std::string correlation_csv(const std::string& scene, const RunResult& r);

/// One file per run, plus a trajectory file for guided-wave runs that record paths.
std::vector<OutputFile> render(const SceneResult& result);

}  // namespace eraser::bench
