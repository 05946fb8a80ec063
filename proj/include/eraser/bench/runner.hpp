#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eraser/analysis.hpp"
#include "eraser/bench/compiler.hpp"

namespace eraser::bench {

struct RunResult {
    RunPlan run;
    /// Rate per meter on the scan (orthodox) or on histogram bin centers.
    Pattern pattern;
    /// Incoherent which-slit sum at the same positions.
    std::optional<Pattern> reference;
    std::optional<LobeTable> table;
    double visibility = 0.0;  // envelope-normalized, central window
    std::optional<FringeFit> fit;
    std::string fit_error;

    // guided-wave engine only
    std::optional<double> l1;  // all counted arrivals vs binned |psi|^2
    std::size_t order_violations = 0;
    std::size_t simulated = 0;
    std::size_t counted = 0;
    std::optional<double> lobe_persistence;  // birth lobe == slit taken
    std::vector<double> recorded_z;
    std::vector<Trajectory> paths;
};

struct SceneResult {
    Plan plan;
    std::vector<RunResult> runs;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
};

/// Source state of the plan on the source grid.
BiphotonState source_state(const Plan& plan);
/// State at the signal detection plane, with or without the idler arm's elements.
BiphotonState detector_state(const Plan& plan, bool idler_elements);

RunResult execute(const Plan& plan, const RunPlan& run);
SceneResult run_scene(const Plan& plan, const Overrides& overrides = {});

}  // namespace eraser::bench
