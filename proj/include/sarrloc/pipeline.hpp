#pragma once
// End-to-end runs: detection, boundary-point collection, ellipse fitting,
// localization, and metrics for every anchor-transmitter pair, plus the
// multi-anchor triangulation reference.

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <sarrloc/baseline.hpp>
#include <sarrloc/blockage.hpp>
#include <sarrloc/boundary.hpp>
#include <sarrloc/calibration.hpp>
#include <sarrloc/eval.hpp>
#include <sarrloc/fitting.hpp>
#include <sarrloc/geometry.hpp>
#include <sarrloc/simulator.hpp>

namespace sarrloc {

struct PipelineConfig {
    DetectionConfig detection = default_detection_config();
    GridConfig grid;
    FitMethod method{FitMethod::kSplit};
    double frame_rotation_rad{0.0};
    std::optional<CalibrationModel> calibration;  // applied to ingested track positions
    PathLossModel path_loss{2.0, -40.0};          // triangulation reference ranging
    bool run_triangulation{true};
};

/// Inputs for a run on recorded (or pre-simulated) data. Traces are keyed
/// by (anchor id, transmitter id); tracks live in world coordinates.
/// Transmitter positions in the scenario serve as ground truth when
/// truth_available is set.
struct RecordedRun {
    Scenario scenario;  // nodes, wavelength, channel; tracks filled in
    std::map<std::pair<std::string, std::string>, RssiTrace> traces;
    bool truth_available{true};
};

struct PairReport {
    std::string anchor_id;
    std::string tx_id;
    std::string status;  // "ok" or "insufficient_events"
    std::vector<BlockageEvent> events;
    std::size_t dropped_events{0};
    std::size_t point_count{0};
    FitMethod method{FitMethod::kSplit};
    double loss{0.0};
    double distance_m{0.0};
    double bearing_rad{0.0};
    Point2 position;  // world frame
    double mean_clear_power_dbm{0.0};

    bool has_truth{false};
    double localization_error_m{0.0};
    ConfusionDurations confusion;
    std::vector<double> boundary_distances_m;  // sorted
};

struct TriangulationReport {
    std::string tx_id;
    Point2 position;
    bool has_truth{false};
    double localization_error_m{0.0};
};

struct RunReport {
    std::uint64_t seed{0};
    double horizon_s{0.0};
    std::vector<PairReport> pairs;
    std::vector<TriangulationReport> triangulation;
    bool has_truth{false};
    double median_error_m{0.0};
    double mean_error_m{0.0};

    void check_consistency() const {
        for (const auto& p : pairs) {
            if (p.status == "ok" && p.point_count != 2 * (p.events.size() - p.dropped_events))
                throw std::logic_error("RunReport: boundary point count mismatch for " +
                                       p.anchor_id + "-" + p.tx_id);
        }
    }
};

namespace detail {

inline PairReport process_pair(const Scenario& scenario, const std::string& anchor_id,
                               const std::string& tx_id, const RssiTrace& trace,
                               bool truth_available, const PipelineConfig& cfg) {
    PairReport report;
    report.anchor_id = anchor_id;
    report.tx_id = tx_id;
    const Point2 anchor_pos = scenario.anchor(anchor_id).position;

    report.events = detect_multi(trace, cfg.detection);

    // events feed the boundary stage through the track that covers them
    BoundaryPointSet points;
    std::size_t assigned = 0;
    for (const auto& track : scenario.tracks) {
        std::vector<BlockageEvent> covered;
        for (const auto& ev : report.events)
            if (track.covers(ev.t_start_s) && track.covers(ev.t_end_s)) covered.push_back(ev);
        const auto part = collect_boundary_points(track.relative_to(anchor_pos), covered);
        assigned += covered.size() - part.dropped_events;
        points.points.insert(points.points.end(), part.points.begin(), part.points.end());
    }
    report.dropped_events = report.events.size() - assigned;
    report.point_count = points.points.size();

    // mean received power over samples clear of any detected blockage,
    // the ranging input for the triangulation reference
    {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const double t = trace.time_at(i);
            bool clear = true;
            for (const auto& ev : report.events)
                if (t >= ev.t_start_s && t <= ev.t_end_s) {
                    clear = false;
                    break;
                }
            if (clear) {
                sum += trace.samples_dbm[i];
                ++n;
            }
        }
        report.mean_clear_power_dbm = n > 0 ? sum / static_cast<double>(n) : 0.0;
    }

    if (points.points.empty()) {
        report.status = "insufficient_events";
        return report;
    }
    report.status = "ok";

    const FitResult fit_result = fit(points, scenario.wavelength_m, cfg.grid, cfg.method);
    report.method = fit_result.method;
    report.loss = fit_result.loss;
    report.distance_m = fit_result.distance_m;
    report.bearing_rad = fit_result.bearing_rad;
    report.position = localize({anchor_pos, cfg.frame_rotation_rad}, fit_result);

    if (truth_available) {
        report.has_truth = true;
        const FresnelParams truth = pair_params(scenario, anchor_id, tx_id);
        report.localization_error_m =
            localization_error(report.position, scenario.transmitter(tx_id).position);

        std::vector<TimeInterval> detected, gt;
        for (const auto& ev : report.events) detected.push_back({ev.t_start_s, ev.t_end_s});
        for (const auto& track : scenario.tracks) {
            const auto s = ground_truth_sections(scenario, anchor_id, tx_id, track);
            gt.insert(gt.end(), s.begin(), s.end());
        }
        const double horizon = trace.observation_length();
        report.confusion =
            confusion(SectionSet(horizon, std::move(detected)), SectionSet(horizon, std::move(gt)));

        std::vector<Point2> raw;
        raw.reserve(points.points.size());
        for (const auto& p : points.points) raw.push_back(p.position);
        report.boundary_distances_m = boundary_distance_cdf(raw, truth);
    }
    return report;
}

inline void finalize_report(RunReport& report, const Scenario& scenario, bool truth_available,
                            const PipelineConfig& cfg) {
    // triangulation reference from per-anchor clear-air power means
    if (cfg.run_triangulation && scenario.anchors.size() >= 3) {
        for (const auto& tx : scenario.transmitters) {
            std::vector<AnchorReading> readings;
            for (const auto& pair : report.pairs)
                if (pair.tx_id == tx.id)
                    readings.push_back({scenario.anchor(pair.anchor_id).position,
                                        pair.mean_clear_power_dbm});
            if (readings.size() < 3) continue;
            TriangulationReport tri;
            tri.tx_id = tx.id;
            tri.position = trilaterate(readings, cfg.path_loss);
            if (truth_available) {
                tri.has_truth = true;
                tri.localization_error_m = localization_error(tri.position, tx.position);
            }
            report.triangulation.push_back(tri);
        }
    }

    std::vector<double> errors;
    for (const auto& p : report.pairs)
        if (p.has_truth && p.status == "ok") errors.push_back(p.localization_error_m);
    report.has_truth = !errors.empty();
    if (report.has_truth) {
        std::sort(errors.begin(), errors.end());
        const std::size_t n = errors.size();
        report.median_error_m =
            n % 2 == 1 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
        double sum = 0.0;
        for (double e : errors) sum += e;
        report.mean_error_m = sum / static_cast<double>(n);
    }
    report.check_consistency();
}

}  // namespace detail

/// Simulates every (anchor, transmitter) trace of the scenario and runs the
/// full localization chain on each, with ground-truth metrics. Pairs are
/// processed concurrently; the report order is the scenario's listed order,
/// so the result does not depend on scheduling.
inline RunReport run_pipeline(const Scenario& scenario, const PipelineConfig& cfg) {
    scenario.validate();
    cfg.detection.validate();
    RunReport report;
    report.seed = scenario.rng_seed;

    std::vector<std::future<PairReport>> futures;
    for (const auto& anchor : scenario.anchors) {
        for (const auto& tx : scenario.transmitters) {
            futures.push_back(std::async(std::launch::async, [&scenario, &cfg, anchor, tx] {
                const RssiTrace trace = synth_rssi(scenario, anchor.id, tx.id, scenario.channel);
                return detail::process_pair(scenario, anchor.id, tx.id, trace, true, cfg);
            }));
        }
    }
    for (auto& f : futures) report.pairs.push_back(f.get());
    // observation length of the synthesized traces (last grid sample)
    report.horizon_s = std::floor(scenario.resolved_duration() /
                                  scenario.channel.sample_interval_s + 1e-9) *
                       scenario.channel.sample_interval_s;
    detail::finalize_report(report, scenario, true, cfg);
    return report;
}

/// Same chain over recorded traces and tracks. Metrics are attached only
/// when the run carries ground truth.
inline RunReport run_pipeline(const RecordedRun& run, const PipelineConfig& cfg) {
    run.scenario.validate();
    cfg.detection.validate();
    RunReport report;
    report.seed = run.scenario.rng_seed;

    Scenario scenario = run.scenario;
    if (cfg.calibration) {
        cfg.calibration->validate();
        std::vector<ObstacleTrack> calibrated;
        for (const auto& track : scenario.tracks) {
            std::vector<Point2> centers(track.centers());
            for (auto& c : centers) c = cfg.calibration->apply(c);
            calibrated.push_back(
                ObstacleTrack::with_chord_directions(track.times(), std::move(centers),
                                                     track.width()));
        }
        scenario.tracks = std::move(calibrated);
    }

    std::vector<std::future<PairReport>> futures;
    for (const auto& anchor : scenario.anchors) {
        for (const auto& tx : scenario.transmitters) {
            const auto it = run.traces.find({anchor.id, tx.id});
            if (it == run.traces.end())
                throw std::invalid_argument("run_pipeline: missing trace for pair " + anchor.id +
                                            "-" + tx.id);
            const RssiTrace* trace = &it->second;
            report.horizon_s = std::max(report.horizon_s, trace->observation_length());
            futures.push_back(
                std::async(std::launch::async, [&scenario, &cfg, &run, anchor, tx, trace] {
                    return detail::process_pair(scenario, anchor.id, tx.id, *trace,
                                                run.truth_available, cfg);
                }));
        }
    }
    for (auto& f : futures) report.pairs.push_back(f.get());
    detail::finalize_report(report, scenario, run.truth_available, cfg);
    return report;
}

}  // namespace sarrloc
