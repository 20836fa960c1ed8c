#pragma once
// File formats: delimited-text traces and tracks, JSON scenarios, configs,
// calibration models, and run reports. Report serialization keeps a stable
// key order so identical runs produce byte-identical files.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <sarrloc/pipeline.hpp>

namespace sarrloc::io {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path.string());
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write file: " + path.string());
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// traces: time_s,rssi_dbm

inline void write_trace_csv(const std::filesystem::path& path, const RssiTrace& trace) {
    auto out = detail::open_output(path);
    out << "time_s,rssi_dbm\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << detail::format_double(trace.time_at(i)) << ','
            << detail::format_double(trace.samples_dbm[i]) << '\n';
}

/// Reads a trace; irregular timestamps are resampled onto a uniform grid at
/// the median inter-sample spacing.
inline RssiTrace read_trace_csv(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("time_s,rssi_dbm", 0) != 0)
        throw std::invalid_argument("trace file missing 'time_s,rssi_dbm' header: " +
                                    path.string());
    std::vector<double> times, values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 2)
            throw std::invalid_argument("malformed trace row: " + line);
        times.push_back(std::stod(fields[0]));
        values.push_back(std::stod(fields[1]));
    }
    if (times.size() < 2) throw std::invalid_argument("trace too short: " + path.string());

    std::vector<double> gaps;
    for (std::size_t i = 1; i < times.size(); ++i) gaps.push_back(times[i] - times[i - 1]);
    std::sort(gaps.begin(), gaps.end());
    const double median_gap = gaps[gaps.size() / 2];
    if (!(median_gap > 0.0)) throw std::invalid_argument("non-increasing trace timestamps");

    bool uniform = true;
    for (double g : gaps)
        if (std::abs(g - median_gap) > 1e-6 * std::max(1.0, median_gap)) uniform = false;
    if (uniform) return RssiTrace(std::move(values), median_gap, times.front());
    return resample_uniform(times, values, median_gap);
}

// ---------------------------------------------------------------------------
// tracks: time_s,x_m,y_m with optional nx,ny heading columns

inline void write_track_csv(const std::filesystem::path& path, const ObstacleTrack& track) {
    auto out = detail::open_output(path);
    out << "time_s,x_m,y_m,nx,ny\n";
    for (std::size_t i = 0; i < track.size(); ++i)
        out << detail::format_double(track.times()[i]) << ','
            << detail::format_double(track.centers()[i].x) << ','
            << detail::format_double(track.centers()[i].y) << ','
            << detail::format_double(track.directions()[i].x) << ','
            << detail::format_double(track.directions()[i].y) << '\n';
}

inline ObstacleTrack read_track_csv(const std::filesystem::path& path, double width_m) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("time_s,x_m,y_m", 0) != 0)
        throw std::invalid_argument("track file missing 'time_s,x_m,y_m' header: " +
                                    path.string());
    const bool has_heading = line.find(",nx,ny") != std::string::npos;
    std::vector<double> times;
    std::vector<Point2> centers;
    std::vector<Vec2> dirs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() < 3) throw std::invalid_argument("malformed track row: " + line);
        times.push_back(std::stod(fields[0]));
        centers.push_back({std::stod(fields[1]), std::stod(fields[2])});
        if (has_heading && fields.size() >= 5)
            dirs.push_back(Vec2{std::stod(fields[3]), std::stod(fields[4])}.normalized());
    }
    if (has_heading && dirs.size() == times.size())
        return ObstacleTrack(std::move(times), std::move(centers), std::move(dirs), width_m);
    return ObstacleTrack::with_chord_directions(std::move(times), std::move(centers), width_m);
}

// ---------------------------------------------------------------------------
// scenario JSON

inline ordered_json channel_to_json(const ChannelConfig& ch) {
    return ordered_json{{"baseline_dbm", ch.baseline_dbm},
                        {"blockage_depth_db", ch.blockage_depth_db},
                        {"edge_ramp_s", ch.edge_ramp_s},
                        {"noise_sigma_db", ch.noise_sigma_db},
                        {"sample_interval_s", ch.sample_interval_s},
                        {"path_loss_exponent", ch.path_loss_exponent}};
}

inline ChannelConfig channel_from_json(const ordered_json& j) {
    ChannelConfig ch;
    ch.baseline_dbm = j.value("baseline_dbm", ch.baseline_dbm);
    ch.blockage_depth_db = j.value("blockage_depth_db", ch.blockage_depth_db);
    ch.edge_ramp_s = j.value("edge_ramp_s", ch.edge_ramp_s);
    ch.noise_sigma_db = j.value("noise_sigma_db", ch.noise_sigma_db);
    ch.sample_interval_s = j.value("sample_interval_s", ch.sample_interval_s);
    ch.path_loss_exponent = j.value("path_loss_exponent", ch.path_loss_exponent);
    return ch;
}

/// Scenario serialization. Obstacle motion is described as straight lines
/// walked back and forth; loading resolves them into sampled tracks laid
/// out one after another with an idle gap in between.
inline ordered_json scenario_to_json(const Scenario& sc,
                                     const ordered_json& lines = ordered_json::array()) {
    ordered_json j;
    j["arena"] = {{"width_m", sc.arena_width_m}, {"depth_m", sc.arena_depth_m}};
    j["lambda_m"] = sc.wavelength_m;
    j["rng_seed"] = sc.rng_seed;
    j["duration_s"] = sc.duration_s;
    j["anchors"] = ordered_json::array();
    for (const auto& a : sc.anchors)
        j["anchors"].push_back({{"id", a.id}, {"x_m", a.position.x}, {"y_m", a.position.y}});
    j["transmitters"] = ordered_json::array();
    for (const auto& t : sc.transmitters)
        j["transmitters"].push_back({{"id", t.id}, {"x_m", t.position.x}, {"y_m", t.position.y}});
    j["channel"] = channel_to_json(sc.channel);
    j["lines"] = lines;
    return j;
}

struct LoadedScenario {
    Scenario scenario;
    ordered_json lines;  // preserved for round-tripping
};

inline LoadedScenario scenario_from_json(const ordered_json& j) {
    LoadedScenario loaded;
    Scenario& sc = loaded.scenario;
    if (j.contains("arena")) {
        sc.arena_width_m = j["arena"].value("width_m", sc.arena_width_m);
        sc.arena_depth_m = j["arena"].value("depth_m", sc.arena_depth_m);
    }
    sc.wavelength_m = j.value("lambda_m", sc.wavelength_m);
    sc.rng_seed = j.value("rng_seed", sc.rng_seed);
    sc.duration_s = j.value("duration_s", 0.0);
    for (const auto& a : j.value("anchors", ordered_json::array()))
        sc.anchors.push_back({a.at("id").get<std::string>(),
                              {a.at("x_m").get<double>(), a.at("y_m").get<double>()}});
    for (const auto& t : j.value("transmitters", ordered_json::array()))
        sc.transmitters.push_back({t.at("id").get<std::string>(),
                                   {t.at("x_m").get<double>(), t.at("y_m").get<double>()}});
    if (j.contains("channel")) sc.channel = channel_from_json(j["channel"]);

    loaded.lines = j.value("lines", ordered_json::array());
    const double gap_s = j.value("gap_between_lines_s", 10.0);
    double start = 0.0;
    for (const auto& line : loaded.lines) {
        const Segment2 seg{{line.at("x0_m").get<double>(), line.at("y0_m").get<double>()},
                           {line.at("x1_m").get<double>(), line.at("y1_m").get<double>()}};
        const double speed = line.value("speed_mps", 0.57);
        const double width = line.value("width_m", 0.9);
        const int trips = line.value("round_trips", 6);
        const double interval = line.value("sample_interval_s", sc.channel.sample_interval_s);
        sc.tracks.push_back(synth_track(seg, speed, width, trips, interval, start));
        start = sc.tracks.back().end_time() + gap_s;
    }
    if (sc.duration_s == 0.0 && !sc.tracks.empty())
        sc.duration_s = sc.tracks.back().end_time() + 5.0;
    return loaded;
}

inline ordered_json load_json(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

inline void save_json(const std::filesystem::path& path, const ordered_json& j) {
    auto out = detail::open_output(path);
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// pipeline config JSON

inline ordered_json config_to_json(const PipelineConfig& cfg) {
    ordered_json templates = ordered_json::array();
    for (const auto& w : cfg.detection.templates)
        templates.push_back({{"ramp_fraction", w.ramp_fraction}, {"timescale_s", w.timescale_s}});
    ordered_json j;
    j["detection"] = {{"correlation_threshold", cfg.detection.correlation_threshold},
                      {"scan_step_s", cfg.detection.scan_step_s},
                      {"templates", templates}};
    j["grid"] = {{"d_min_m", cfg.grid.d_min_m},
                 {"d_max_m", cfg.grid.d_max_m},
                 {"d_step_m", cfg.grid.d_step_m},
                 {"theta_step_deg", cfg.grid.theta_step_rad * 180.0 / std::numbers::pi},
                 {"refine_levels", cfg.grid.refine_levels}};
    j["method"] = cfg.method == FitMethod::kSplit ? "split" : "plain";
    j["frame_rotation_rad"] = cfg.frame_rotation_rad;
    j["path_loss"] = {{"exponent", cfg.path_loss.exponent},
                      {"ref_power_dbm", cfg.path_loss.ref_power_dbm}};
    j["run_triangulation"] = cfg.run_triangulation;
    return j;
}

inline PipelineConfig config_from_json(const ordered_json& j) {
    PipelineConfig cfg;
    if (j.contains("detection")) {
        const auto& d = j["detection"];
        cfg.detection.correlation_threshold =
            d.value("correlation_threshold", cfg.detection.correlation_threshold);
        cfg.detection.scan_step_s = d.value("scan_step_s", cfg.detection.scan_step_s);
        if (d.contains("templates") && !d["templates"].empty()) {
            cfg.detection.templates.clear();
            for (const auto& w : d["templates"])
                cfg.detection.templates.push_back({w.at("ramp_fraction").get<double>(),
                                                   w.at("timescale_s").get<double>()});
        }
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        cfg.grid.d_min_m = g.value("d_min_m", cfg.grid.d_min_m);
        cfg.grid.d_max_m = g.value("d_max_m", cfg.grid.d_max_m);
        cfg.grid.d_step_m = g.value("d_step_m", cfg.grid.d_step_m);
        if (g.contains("theta_step_deg"))
            cfg.grid.theta_step_rad = g["theta_step_deg"].get<double>() * std::numbers::pi / 180.0;
        cfg.grid.refine_levels = g.value("refine_levels", cfg.grid.refine_levels);
    }
    const std::string method = j.value("method", "split");
    if (method == "split")
        cfg.method = FitMethod::kSplit;
    else if (method == "plain")
        cfg.method = FitMethod::kPlain;
    else
        throw std::invalid_argument("config: unknown method '" + method + "'");
    cfg.frame_rotation_rad = j.value("frame_rotation_rad", 0.0);
    if (j.contains("path_loss")) {
        cfg.path_loss.exponent = j["path_loss"].value("exponent", cfg.path_loss.exponent);
        cfg.path_loss.ref_power_dbm =
            j["path_loss"].value("ref_power_dbm", cfg.path_loss.ref_power_dbm);
    }
    cfg.run_triangulation = j.value("run_triangulation", cfg.run_triangulation);
    return cfg;
}

// ---------------------------------------------------------------------------
// calibration JSON

inline ordered_json calibration_to_json(const CalibrationModel& m) {
    return ordered_json{{"x", {{"scale", m.x.scale}, {"offset", m.x.offset}}},
                        {"y", {{"scale", m.y.scale}, {"offset", m.y.offset}}}};
}

inline CalibrationModel calibration_from_json(const ordered_json& j) {
    CalibrationModel m;
    m.x = {j.at("x").at("scale").get<double>(), j.at("x").at("offset").get<double>()};
    m.y = {j.at("y").at("scale").get<double>(), j.at("y").at("offset").get<double>()};
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// run report JSON

inline ordered_json report_to_json(const RunReport& report) {
    ordered_json j;
    j["seed"] = report.seed;
    j["horizon_s"] = report.horizon_s;
    j["pairs"] = ordered_json::array();
    for (const auto& p : report.pairs) {
        ordered_json pj;
        pj["anchor"] = p.anchor_id;
        pj["tx"] = p.tx_id;
        pj["status"] = p.status;
        pj["event_count"] = p.events.size();
        pj["events_dropped"] = p.dropped_events;
        pj["boundary_points"] = p.point_count;
        ordered_json evs = ordered_json::array();
        for (const auto& ev : p.events)
            evs.push_back({{"t_start_s", ev.t_start_s},
                           {"t_end_s", ev.t_end_s},
                           {"correlation", ev.correlation},
                           {"template_index", ev.template_index}});
        pj["event_log"] = std::move(evs);
        if (p.status == "ok") {
            pj["fit"] = {{"method", p.method == FitMethod::kSplit ? "split" : "plain"},
                         {"d_m", p.distance_m},
                         {"theta_rad", p.bearing_rad},
                         {"loss", p.loss}};
            pj["position_m"] = {p.position.x, p.position.y};
        }
        if (p.has_truth) {
            pj["localization_error_m"] = p.localization_error_m;
            pj["confusion"] = {{"tp_s", p.confusion.tp_s},
                               {"tn_s", p.confusion.tn_s},
                               {"fp_s", p.confusion.fp_s},
                               {"fn_s", p.confusion.fn_s},
                               {"accuracy", p.confusion.accuracy()}};
            const auto& cdf = p.boundary_distances_m;
            if (!cdf.empty())
                pj["boundary_cdf_m"] = {{"p50", percentile(cdf, 50.0)},
                                        {"p90", percentile(cdf, 90.0)},
                                        {"p95", percentile(cdf, 95.0)},
                                        {"max", cdf.back()}};
            pj["boundary_distances_m"] = cdf;
        }
        j["pairs"].push_back(std::move(pj));
    }
    j["triangulation"] = ordered_json::array();
    for (const auto& t : report.triangulation) {
        ordered_json tj;
        tj["tx"] = t.tx_id;
        tj["position_m"] = {t.position.x, t.position.y};
        if (t.has_truth) tj["localization_error_m"] = t.localization_error_m;
        j["triangulation"].push_back(std::move(tj));
    }
    if (report.has_truth)
        j["summary"] = {{"median_error_m", report.median_error_m},
                        {"mean_error_m", report.mean_error_m}};
    return j;
}

// ---------------------------------------------------------------------------
// run directories (simulate output / recorded data)

inline std::string trace_filename(const std::string& anchor_id, const std::string& tx_id) {
    return "trace_" + anchor_id + "_" + tx_id + ".csv";
}

inline std::string track_filename(std::size_t index) {
    return "track_" + std::to_string(index) + ".csv";
}

/// Loads a run directory: scenario.json plus trace/track files written by
/// the simulator (or converted from a recording).
inline RecordedRun load_run_dir(const std::filesystem::path& dir) {
    RecordedRun run;
    const auto scenario_json = load_json(dir / "scenario.json");
    auto loaded = scenario_from_json(scenario_json);
    run.scenario = std::move(loaded.scenario);

    // recorded tracks replace any line-derived ones when present
    const double fallback_width = scenario_json.value("obstacle_width_m", 0.9);
    std::vector<ObstacleTrack> tracks;
    for (std::size_t i = 0;; ++i) {
        const auto path = dir / track_filename(i);
        if (!std::filesystem::exists(path)) break;
        const double width = run.scenario.tracks.size() > i ? run.scenario.tracks[i].width()
                                                            : fallback_width;
        tracks.push_back(read_track_csv(path, width));
    }
    if (!tracks.empty()) run.scenario.tracks = std::move(tracks);

    for (const auto& anchor : run.scenario.anchors)
        for (const auto& tx : run.scenario.transmitters) {
            const auto path = dir / trace_filename(anchor.id, tx.id);
            if (std::filesystem::exists(path))
                run.traces.emplace(std::make_pair(anchor.id, tx.id), read_trace_csv(path));
        }
    return run;
}

}  // namespace sarrloc::io
