#pragma once

// Turns a parsed scene into concrete engine inputs with every default
// resolved. Nothing here runs an engine.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eraser/bench/ast.hpp"
#include "eraser/biphoton.hpp"
#include "eraser/pilotwave.hpp"

namespace eraser::bench {

class CompileError : public std::runtime_error {
public:
    CompileError(std::size_t line, const std::string& message)
        : std::runtime_error(message), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

enum class Engine { orthodox, pilotwave };
enum class Mode { coincidence, singles, correlation };

const char* to_string(Engine e);
const char* to_string(Mode m);

struct RunPlan {
    Engine engine = Engine::orthodox;
    Mode mode = Mode::coincidence;
    std::uint64_t seed = 1;
    std::size_t n = 100000;  // pilotwave only
    std::size_t bins = 200;
    std::size_t paths = 0;  // trajectories written out
    std::string name;       // output stem, unique within the scene
    std::vector<std::string> shape;
};

struct Plan {
    std::string scene;

    enum class SourceKind { walborn, menzel, hg0, hg1 };
    SourceKind source_kind = SourceKind::walborn;
    SourceConfig source;

    /// Orthodox arm sequences. The signal arm ends at the detector plane on
    /// `scan`; `signal_tail` is that last hop (absent in the near field).
    std::vector<ArmElement> signal_elements;
    std::optional<Propagation> signal_tail;
    std::vector<ArmElement> idler_elements;
    IdlerDetector idler;

    Grid scan;
    double detector_z = 0.0;
    Propagator propagator = Propagator::fresnel;

    std::optional<Aperture> aperture;
    double slit_z = 0.0;
    /// Slit plane to detector.
    double distance = 0.0;
    double expected_period = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;

    std::vector<PlaneElement> pilot_elements;
    StackOptions stack;
    std::optional<double> lobe_split;
    /// Set when the idler outcome for the guided-wave engine is a lobe.
    std::optional<Lobe> idler_lobe;
    IdlerRule idler_rule;

    std::vector<RunPlan> runs;
    std::vector<std::string> warnings;
};

/// Resolves defaults: wavelength 700 nm, waist 200 um, source grid of 2048
/// samples over eight slit spans, guided-wave final grid 1.5x the scan with
/// 8192 samples and 256 planes, 200 bins, n = 1e5.
Plan compile(const BenchSpec& spec, const std::string& scene = "scene");

}  // namespace eraser::bench
