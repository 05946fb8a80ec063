#include "eraser/bench/runner.hpp"

#include <algorithm>

#include "eraser/error.hpp"

namespace eraser::bench {

namespace {

// Near-field patterns are read straight off the slit-plane fields.
BiphotonState resampled(BiphotonState st, const Grid& scan, double z) {
    for (auto& t : st.terms) {
        ScalarField f = ScalarField::zeros(scan, t.signal.wavelength, z);
        for (std::size_t i = 0; i < scan.n; ++i) f.samples[i] = t.signal.value_at(scan.at(i));
        t.signal = std::move(f);
    }
    return st;
}

void measure(const Plan& plan, RunResult& r) {
    const Window w{plan.window_lo, plan.window_hi};
    r.visibility = r.reference ? visibility(r.pattern, w, *r.reference) : visibility(r.pattern, w);
    if (plan.expected_period > 0.0) {
        try {
            r.fit = r.reference ? fit_fringe(r.pattern, plan.expected_period, w, *r.reference)
                                : fit_fringe(r.pattern, plan.expected_period, w);
        } catch (const FitError& e) {
            r.fit_error = e.what();
        }
    }
}

Pattern per_meter(Pattern p, double lo, double hi) {
    const double width = (hi - lo) / static_cast<double>(p.rates.size());
    for (auto& v : p.rates) v /= width;
    return p;
}

std::size_t lobe_index(bool upper) { return upper ? 0 : 1; }

RunResult run_orthodox(const Plan& plan, const RunPlan& run) {
    RunResult r;
    r.run = run;
    const bool with_idler = run.mode != Mode::singles;
    BiphotonState st = detector_state(plan, with_idler);
    if (run.mode == Mode::correlation) {
        const double split = plan.aperture ? plan.aperture->center : 0.0;
        r.table = near_field_correlation(st, split);
        return r;
    }
    if (!plan.signal_tail) st = resampled(std::move(st), plan.scan, plan.detector_z);
    const bool double_slit = plan.aperture && plan.aperture->kind == Aperture::Kind::double_slit;
    if (run.mode == Mode::coincidence) {
        r.pattern = coincidence_pattern(st, plan.scan, plan.detector_z, plan.idler);
        if (double_slit) r.reference = which_slit_reference(st, plan.scan, plan.detector_z, plan.idler);
    } else {
        r.pattern = singles_pattern(st, plan.scan, plan.detector_z);
        if (double_slit) {
            r.reference =
                which_slit_reference(st, plan.scan, plan.detector_z, IdlerDetector::bucket());
        }
    }
    measure(plan, r);
    return r;
}

RunResult run_pilot(const Plan& plan, const RunPlan& run) {
    RunResult r;
    r.run = run;
    const BiphotonState src = source_state(plan);
    IdlerRule rule = plan.idler_rule;
    if (run.mode != Mode::coincidence) rule = {};
    auto branches = pilot_branches(src, rule);

    TrajectoryOptions opts;
    opts.lobe_split = plan.lobe_split;
    const Ensemble e =
        run_ensemble(std::move(branches), plan.pilot_elements, plan.detector_z, plan.stack, run.n,
                     run.seed, opts);
    r.order_violations = e.set.order_violations;
    r.simulated = e.set.trajectories.size();
    r.recorded_z = e.set.recorded_z;

    const std::vector<Trajectory> all = coincidence_filter(e, BranchRule{});
    if (plan.lobe_split) {
        std::size_t same = 0;
        std::size_t with_slit = 0;
        for (const auto& t : all) {
            if (t.slit_taken != Passage::upper && t.slit_taken != Passage::lower) continue;
            ++with_slit;
            same += (t.slit_taken == Passage::upper) == (t.birth_lobe == Lobe::upper);
        }
        if (with_slit > 0) {
            r.lobe_persistence = static_cast<double>(same) / static_cast<double>(with_slit);
        }
    }

    // paths: evenly spaced in initial position among the counted arrivals
    if (run.paths > 0 && !all.empty()) {
        std::vector<const Trajectory*> order;
        for (const auto& t : all) order.push_back(&t);
        std::stable_sort(order.begin(), order.end(),
                         [](const Trajectory* a, const Trajectory* b) { return a->x0 < b->x0; });
        const std::size_t k = std::min(run.paths, order.size());
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t idx = k == 1 ? order.size() / 2 : j * (order.size() - 1) / (k - 1);
            r.paths.push_back(*order[idx]);
        }
    }

    const double lo = plan.scan.front();
    const double hi = plan.scan.back();
    r.l1 = l1_distance(arrival_histogram(all, lo, hi, run.bins),
                       binned_final_intensity(e, true, lo, hi, run.bins));

    if (run.mode == Mode::correlation) {
        LobeTable table{};
        const double split = *plan.lobe_split;
        for (const auto& t : all) {
            const bool signal_upper = t.slit_taken == Passage::upper ||
                                      (t.slit_taken == Passage::none && t.x_final > split);
            table[lobe_index(signal_upper)][lobe_index(t.birth_lobe == Lobe::upper)] += 1.0;
        }
        for (auto& row : table)
            for (auto& v : row) v /= static_cast<double>(std::max<std::size_t>(all.size(), 1));
        r.table = table;
        r.counted = all.size();
        return r;
    }

    const std::vector<Trajectory> kept =
        plan.idler_lobe && run.mode == Mode::coincidence ? coincidence_filter(e, LobeRule{*plan.idler_lobe})
                                                         : all;
    r.counted = kept.size();
    r.pattern = per_meter(arrival_histogram(kept, lo, hi, run.bins), lo, hi);
    r.pattern.label = "histogram";
    if (plan.aperture && plan.aperture->kind == Aperture::Kind::double_slit && plan.distance > 0.0) {
        r.reference = per_meter(binned_which_slit_reference(e, true, lo, hi, run.bins), lo, hi);
    }
    measure(plan, r);
    return r;
}

}  // namespace

BiphotonState source_state(const Plan& plan) {
    switch (plan.source_kind) {
        case Plan::SourceKind::walborn: return source_walborn(plan.source);
        case Plan::SourceKind::menzel: return source_menzel(plan.source);
        case Plan::SourceKind::hg0: return source_product(plan.source, 0);
        case Plan::SourceKind::hg1: return source_product(plan.source, 1);
    }
    throw InputError("unknown source kind");
}

BiphotonState detector_state(const Plan& plan, bool idler_elements) {
    BiphotonState st = source_state(plan);
    for (const auto& e : plan.signal_elements) st = merge_terms(apply_signal_element(st, e));
    if (idler_elements) {
        for (const auto& e : plan.idler_elements) st = merge_terms(apply_idler_element(st, e));
    }
    if (plan.signal_tail) st = merge_terms(apply_signal_element(st, *plan.signal_tail));
    return st;
}

RunResult execute(const Plan& plan, const RunPlan& run) {
    return run.engine == Engine::orthodox ? run_orthodox(plan, run) : run_pilot(plan, run);
}

SceneResult run_scene(const Plan& plan, const Overrides& overrides) {
    SceneResult out;
    out.plan = plan;
    for (RunPlan run : plan.runs) {
        if (overrides.seed) run.seed = *overrides.seed;
        if (overrides.n && run.engine == Engine::pilotwave) run.n = *overrides.n;
        out.runs.push_back(execute(plan, run));
    }
    return out;
}

}  // namespace eraser::bench
