#pragma once

// Guided-trajectory engine. The full wave passes every open slit and a
// localized particle follows the polarization-summed phase-gradient flow,
// dx/dz = Im(sum_c psi_c* d_x psi_c) / (k sum_c |psi_c|^2), with z playing
// the role of time in the paraxial picture.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eraser/biphoton.hpp"
#include "eraser/waveoptics.hpp"

namespace eraser {

/// Two polarization components on a shared grid.
struct VectorField {
    ScalarField h;
    ScalarField v;

    static VectorField from(const ScalarField& f, const JonesVector& pol);

    double power() const { return h.power() + v.power(); }
    double z() const { return h.z; }
};

/// Jones matrix applied inside one slit window only (a slit-local plate).
struct RegionPlate {
    SlitWindow window;
    JonesMatrix m;
};

struct PlaneElement {
    double z = 0.0;
    std::variant<Aperture, RegionPlate, JonesMatrix> action;
};

enum class ZSpacing { uniform, geometric };

struct StackOptions {
    std::size_t n_steps = 256;
    /// Final-plane grid. Intermediate planes use the same size and center
    /// with a half-width that grows with z, so the near field stays resolved.
    Grid grid;
    /// Geometric spacing concentrates planes near the slit, where the flow
    /// varies on the scale z itself.
    ZSpacing spacing = ZSpacing::geometric;
    /// Distance of the first plane after the initial one; 0 picks it from the
    /// source sampling so quadrature aliases stay clear of the beam.
    double first_step = 0.0;
    /// Keep every plane's field (otherwise only the final plane).
    bool keep_fields = false;
};

struct GuidedWave {
    Grid grid;               // final plane
    std::vector<Grid> grids;  // per plane; plane 0 is the source grid
    double wavelength = 0.0;
    std::vector<double> z;  // ascending; an element plane appears twice (before, after)
    std::vector<std::vector<double>> density;
    std::vector<std::vector<double>> velocity;
    std::vector<std::vector<std::uint8_t>> regularized;
    std::vector<VectorField> fields;  // all planes if keep_fields, else the final plane
    VectorField initial;              // on the source grid, after initial-plane elements
    std::vector<PlaneElement> elements;
    std::vector<SlitWindow> initial_slits;  // open windows of an initial-plane aperture

    const VectorField& final_field() const { return fields.back(); }
    Pattern final_intensity() const;
};

/// Propagate both components plane by plane, applying each element at its
/// plane. Elements must be sorted by z and lie in [initial.z, z_final].
/// z_final == initial.z gives a single-plane stack.
GuidedWave build_wave_stack(const VectorField& initial, const std::vector<PlaneElement>& elements,
                            double z_final, const StackOptions& opts);

enum class Sampling { iid, stratified };

/// Draws from the density (|psi_h|^2 + |psi_v|^2) dx by inverse CDF over
/// grid cells. Deterministic for a fixed seed. `stratified` uses one draw
/// per equal-probability stratum, which keeps the marginal distribution and
/// removes most Monte Carlo noise from histogram comparisons.
std::vector<double> sample_initial_positions(const VectorField& wave, std::size_t n,
                                             std::uint64_t seed,
                                             Sampling sampling = Sampling::iid);

struct Guidance {
    double velocity = 0.0;  // dx/dz
    bool regularized = false;
};

Guidance guidance_velocity(const GuidedWave& stack, double z, double x);

enum class Lobe { none, upper, lower };
enum class Passage { none, upper, lower, blocked };

const char* to_string(Lobe l);
const char* to_string(Passage p);

struct Trajectory {
    double x0 = 0.0;
    std::vector<double> path;  // x at TrajectorySet::recorded_z
    Lobe birth_lobe = Lobe::none;
    Passage slit_taken = Passage::none;
    bool absorbed = false;  // removed by a polarizing element
    std::size_t branch = 0;
    double x_final = 0.0;

    bool arrived() const { return slit_taken != Passage::blocked && !absorbed; }
};

struct TrajectoryOptions {
    Sampling sampling = Sampling::stratified;
    std::size_t record_stride = 8;
    /// Birth lobe boundary (node of a first-order source); unset -> Lobe::none.
    std::optional<double> lobe_split;
};

struct TrajectorySet {
    std::vector<double> recorded_z;
    std::vector<Trajectory> trajectories;
    /// Adjacent-pair order inversions summed over every plane.
    std::size_t order_violations = 0;
    std::size_t regularized_steps = 0;
};

/// RK4 through the stack planes, one step per plane interval, subdivided
/// where the velocity shears faster than the step resolves. The layer up to
/// the first plane is crossed by the cumulative-mass map.
TrajectorySet integrate_trajectories(const GuidedWave& stack, std::vector<double> x0,
                                     std::uint64_t seed, const TrajectoryOptions& opts,
                                     std::size_t branch = 0);

TrajectorySet run_trajectories(const GuidedWave& stack, std::size_t n, std::uint64_t seed,
                               const TrajectoryOptions& opts = {});

/// A conditioned signal wave. Weight is its power; `coincident` marks
/// branches whose idler outcome is counted.
struct PilotBranch {
    VectorField wave;
    double weight = 0.0;
    bool coincident = true;
    std::string label;
};

/// Idler outcome rule for the guided-wave engine.
struct IdlerRule {
    enum class Kind { bucket, polarized };
    Kind kind = Kind::bucket;
    double angle = 0.0;
};

/// Split the signal's own wave by idler polarization outcome: for each idler
/// basis vector e the branch wave is sum_t a_t <e|i_t> s_t (x) sp_t. A bucket
/// idler counts both outcomes; an analyzer at theta counts only theta.
std::vector<PilotBranch> pilot_branches(const BiphotonState& st, const IdlerRule& rule);

struct Ensemble {
    std::vector<PilotBranch> branches;
    std::vector<GuidedWave> stacks;
    TrajectorySet set;
};

/// Allocate n trajectories across branches by the power each carries past the
/// initial plane (largest remainder) and integrate each branch through its
/// own stack. Deterministic in the seed.
Ensemble run_ensemble(std::vector<PilotBranch> branches, const std::vector<PlaneElement>& elements,
                      double z_final, const StackOptions& stack_opts, std::size_t n,
                      std::uint64_t seed, const TrajectoryOptions& opts);

/// Menzel rule: idler lobe outcome equals the shared birth lobe.
struct LobeRule {
    Lobe lobe = Lobe::upper;
};
/// Walborn rule: the pair counts when its branch passed the idler analyzer.
struct BranchRule {};

using CoincidenceRule = std::variant<LobeRule, BranchRule>;

/// Arrived trajectories selected by the rule.
std::vector<Trajectory> coincidence_filter(const Ensemble& e, const CoincidenceRule& rule);

/// Final positions binned on `bins` equal cells over [lo, hi], normalized to
/// unit total over the range. Positions are bin centers.
Pattern arrival_histogram(const std::vector<Trajectory>& trajs, double lo, double hi,
                          std::size_t bins);

/// Final-plane density of the selected branches integrated over the same bins
/// and normalized.
Pattern binned_final_intensity(const Ensemble& e, bool coincident_only, double lo, double hi,
                               std::size_t bins);

/// Incoherent sum of each open slit's wave alone at the final plane, binned.
Pattern binned_which_slit_reference(const Ensemble& e, bool coincident_only, double lo, double hi,
                                    std::size_t bins);

/// Integral over [lo, hi] of the piecewise-linear interpolant of `values`.
double integrate_linear(const Grid& g, const std::vector<double>& values, double lo, double hi);

}  // namespace eraser
