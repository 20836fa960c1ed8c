// sarrloc command-line tool: scenario simulation, camera calibration,
// blockage detection, single-link localization, full-run evaluation, and
// plot-data export.
//
// Exit codes: 0 success, 2 input or validation error, 3 fit failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <sarrloc/io.hpp>
#include <sarrloc/pipeline.hpp>

namespace fs = std::filesystem;
using namespace sarrloc;

namespace {

PipelineConfig load_config(const std::string& explicit_path) {
    std::string path = explicit_path;
    if (path.empty()) {
        if (const char* env = std::getenv("SARRLOC_CONFIG")) path = env;
    }
    if (path.empty()) return PipelineConfig{};
    return io::config_from_json(io::load_json(path));
}

Point2 parse_point(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("expected 'x,y' but got '" + text + "'");
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

void emit_json(const io::ordered_json& j, const std::string& out_path) {
    if (out_path.empty())
        std::cout << j.dump(2) << '\n';
    else
        io::save_json(out_path, j);
}

int cmd_simulate(const std::string& scenario_path, const std::string& preset,
                 const std::string& out_dir, std::optional<std::uint64_t> seed) {
    Scenario scenario;
    io::ordered_json lines = io::ordered_json::array();
    if (!preset.empty()) {
        if (preset != "reference-room")
            throw std::invalid_argument("unknown preset '" + preset + "'");
        scenario = reference_room_scenario(seed.value_or(1));
    } else {
        if (scenario_path.empty())
            throw std::invalid_argument("simulate needs --scenario or --preset");
        auto loaded = io::scenario_from_json(io::load_json(scenario_path));
        scenario = std::move(loaded.scenario);
        lines = std::move(loaded.lines);
        if (seed) scenario.rng_seed = *seed;
    }
    scenario.validate();
    if (scenario.tracks.empty())
        throw std::invalid_argument("scenario has no obstacle lines");

    fs::create_directories(out_dir);
    io::save_json(fs::path(out_dir) / "scenario.json", io::scenario_to_json(scenario, lines));
    for (std::size_t i = 0; i < scenario.tracks.size(); ++i)
        io::write_track_csv(fs::path(out_dir) / io::track_filename(i), scenario.tracks[i]);

    io::ordered_json truth;
    truth["pairs"] = io::ordered_json::array();
    for (const auto& anchor : scenario.anchors) {
        for (const auto& tx : scenario.transmitters) {
            const auto trace = synth_rssi(scenario, anchor.id, tx.id, scenario.channel);
            io::write_trace_csv(fs::path(out_dir) / io::trace_filename(anchor.id, tx.id), trace);

            const auto fp = pair_params(scenario, anchor.id, tx.id);
            io::ordered_json sections = io::ordered_json::array();
            for (const auto& track : scenario.tracks)
                for (const auto& s : ground_truth_sections(scenario, anchor.id, tx.id, track))
                    sections.push_back({s.start_s, s.end_s});
            truth["pairs"].push_back({{"anchor", anchor.id},
                                      {"tx", tx.id},
                                      {"d_m", fp.distance()},
                                      {"theta_rad", fp.bearing()},
                                      {"sections_s", std::move(sections)}});
        }
    }
    io::save_json(fs::path(out_dir) / "truth.json", truth);
    std::cout << "wrote " << scenario.anchors.size() * scenario.transmitters.size()
              << " traces, " << scenario.tracks.size() << " tracks to " << out_dir << '\n';
    return 0;
}

int cmd_calibrate(const std::string& pairs_path, const std::string& out_path) {
    auto in = std::ifstream(pairs_path);
    if (!in) throw std::invalid_argument("cannot open file: " + pairs_path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("raw_x,raw_y,true_x,true_y", 0) != 0)
        throw std::invalid_argument("calibration file needs 'raw_x,raw_y,true_x,true_y' header");
    std::vector<std::pair<Point2, Point2>> pairs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::vector<double> v;
        while (std::getline(ss, f, ',')) v.push_back(std::stod(f));
        if (v.size() != 4) throw std::invalid_argument("malformed calibration row: " + line);
        pairs.push_back({{v[0], v[1]}, {v[2], v[3]}});
    }
    const auto model = fit_calibration(pairs);
    emit_json(io::calibration_to_json(model), out_path);
    return 0;
}

int cmd_detect(const std::string& trace_path, const std::string& config_path,
               const std::string& out_path) {
    const auto cfg = load_config(config_path);
    const auto trace = io::read_trace_csv(trace_path);
    const auto events = detect_multi(trace, cfg.detection);
    io::ordered_json j;
    j["trace"] = trace_path;
    j["events"] = io::ordered_json::array();
    for (const auto& ev : events)
        j["events"].push_back({{"t_start_s", ev.t_start_s},
                               {"t_end_s", ev.t_end_s},
                               {"correlation", ev.correlation},
                               {"template_index", ev.template_index}});
    emit_json(j, out_path);
    return 0;
}

int cmd_localize(const std::string& trace_path, const std::vector<std::string>& track_paths,
                 const std::string& anchor_text, double lambda, double width,
                 const std::string& config_path, const std::string& calibration_path,
                 const std::string& out_path) {
    const auto cfg = load_config(config_path);
    const Point2 anchor = parse_point(anchor_text);
    const auto trace = io::read_trace_csv(trace_path);

    std::optional<CalibrationModel> calibration;
    if (!calibration_path.empty())
        calibration = io::calibration_from_json(io::load_json(calibration_path));

    const auto events = detect_multi(trace, cfg.detection);
    BoundaryPointSet points;
    std::size_t assigned = 0;
    for (const auto& path : track_paths) {
        ObstacleTrack track = io::read_track_csv(path, width);
        if (calibration) {
            std::vector<Point2> centers(track.centers());
            for (auto& c : centers) c = calibration->apply(c);
            track = ObstacleTrack::with_chord_directions(track.times(), std::move(centers),
                                                         track.width());
        }
        std::vector<BlockageEvent> covered;
        for (const auto& ev : events)
            if (track.covers(ev.t_start_s) && track.covers(ev.t_end_s)) covered.push_back(ev);
        const auto part = collect_boundary_points(track.relative_to(anchor), covered);
        assigned += covered.size() - part.dropped_events;
        points.points.insert(points.points.end(), part.points.begin(), part.points.end());
    }
    if (events.size() > assigned)
        std::cerr << "warning: " << events.size() - assigned
                  << " event(s) outside every track span were dropped\n";

    io::ordered_json j;
    j["events"] = events.size();
    j["boundary_points"] = points.points.size();
    if (points.points.empty()) {
        j["status"] = "insufficient_events";
        emit_json(j, out_path);
        return 0;
    }
    const auto fit_result = fit(points, lambda, cfg.grid, cfg.method);
    const Point2 position = localize({anchor, cfg.frame_rotation_rad}, fit_result);
    j["status"] = "ok";
    j["fit"] = {{"method", fit_result.method == FitMethod::kSplit ? "split" : "plain"},
                {"d_m", fit_result.distance_m},
                {"theta_rad", fit_result.bearing_rad},
                {"loss", fit_result.loss}};
    j["position_m"] = {position.x, position.y};
    emit_json(j, out_path);
    return 0;
}

int cmd_evaluate(const std::string& run_dir, const std::string& config_path,
                 const std::string& calibration_path, const std::string& out_path) {
    auto cfg = load_config(config_path);
    if (!calibration_path.empty())
        cfg.calibration = io::calibration_from_json(io::load_json(calibration_path));
    const auto run = io::load_run_dir(run_dir);
    const auto report = run_pipeline(run, cfg);
    for (const auto& p : report.pairs)
        if (p.status != "ok")
            std::cerr << "warning: " << p.anchor_id << "-" << p.tx_id
                      << ": insufficient events, no position emitted\n";
    emit_json(io::report_to_json(report), out_path);
    return 0;
}

int cmd_export_plot(const std::string& report_path, const std::string& out_dir) {
    const auto j = io::load_json(report_path);
    fs::create_directories(out_dir);

    std::ofstream errors(fs::path(out_dir) / "errors.csv");
    errors << "anchor,tx,method,error_m\n";
    for (const auto& p : j.value("pairs", io::ordered_json::array())) {
        if (p.contains("localization_error_m"))
            errors << p["anchor"].get<std::string>() << ',' << p["tx"].get<std::string>()
                   << ",sarrloc," << p["localization_error_m"].dump() << '\n';
        if (p.contains("boundary_distances_m")) {
            const auto name = "boundary_cdf_" + p["anchor"].get<std::string>() + "_" +
                              p["tx"].get<std::string>() + ".csv";
            std::ofstream cdf(fs::path(out_dir) / name);
            cdf << "distance_m,cdf\n";
            const auto& d = p["boundary_distances_m"];
            for (std::size_t i = 0; i < d.size(); ++i)
                cdf << d[i].dump() << ',' << static_cast<double>(i + 1) / d.size() << '\n';
        }
    }
    for (const auto& t : j.value("triangulation", io::ordered_json::array()))
        if (t.contains("localization_error_m"))
            errors << "A+B+C," << t["tx"].get<std::string>() << ",triangulation,"
                   << t["localization_error_m"].dump() << '\n';

    std::ofstream conf(fs::path(out_dir) / "confusion.csv");
    conf << "anchor,tx,tp_s,tn_s,fp_s,fn_s,accuracy\n";
    for (const auto& p : j.value("pairs", io::ordered_json::array()))
        if (p.contains("confusion"))
            conf << p["anchor"].get<std::string>() << ',' << p["tx"].get<std::string>() << ','
                 << p["confusion"]["tp_s"].dump() << ',' << p["confusion"]["tn_s"].dump() << ','
                 << p["confusion"]["fp_s"].dump() << ',' << p["confusion"]["fn_s"].dump() << ','
                 << p["confusion"]["accuracy"].dump() << '\n';
    std::cout << "wrote plot tables to " << out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-anchor RSSI localization from dynamic blockage events"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Synthesize traces, tracks, and ground truth");
    std::string sim_scenario, sim_preset, sim_out;
    std::optional<std::uint64_t> sim_seed;
    sim->add_option("--scenario", sim_scenario, "Scenario JSON file");
    sim->add_option("--preset", sim_preset, "Built-in scenario preset (reference-room)");
    sim->add_option("--out", sim_out, "Output directory")->required();
    std::uint64_t sim_seed_raw = 0;
    auto* seed_opt = sim->add_option("--seed", sim_seed_raw, "Override the scenario RNG seed");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Fit a camera position calibration model");
    std::string cal_pairs, cal_out;
    cal->add_option("--pairs", cal_pairs, "CSV raw_x,raw_y,true_x,true_y")->required();
    cal->add_option("--out", cal_out, "Output model JSON (stdout when omitted)");

    // detect
    auto* det = app.add_subcommand("detect", "Detect blockage events in a trace");
    std::string det_trace, det_config, det_out;
    det->add_option("--trace", det_trace, "Trace CSV (time_s,rssi_dbm)")->required();
    det->add_option("--config", det_config, "Pipeline config JSON");
    det->add_option("--out", det_out, "Output events JSON (stdout when omitted)");

    // localize
    auto* loc = app.add_subcommand("localize", "Localize one transmitter from a trace and tracks");
    std::string loc_trace, loc_anchor, loc_config, loc_calibration, loc_out;
    std::vector<std::string> loc_tracks;
    double loc_lambda = 0.0574, loc_width = 0.9;
    loc->add_option("--trace", loc_trace, "Trace CSV")->required();
    loc->add_option("--track", loc_tracks, "Track CSV (repeatable)")->required();
    loc->add_option("--anchor", loc_anchor, "Anchor position 'x,y' in meters")->required();
    loc->add_option("--lambda", loc_lambda, "Carrier wavelength in meters");
    loc->add_option("--width", loc_width, "Obstacle width in meters");
    loc->add_option("--config", loc_config, "Pipeline config JSON");
    loc->add_option("--calibration", loc_calibration, "Calibration model JSON");
    loc->add_option("--out", loc_out, "Output JSON (stdout when omitted)");

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "Run the full pipeline over a run directory");
    std::string eva_run, eva_config, eva_calibration, eva_out;
    eva->add_option("--run", eva_run, "Run directory (simulate output)")->required();
    eva->add_option("--config", eva_config, "Pipeline config JSON");
    eva->add_option("--calibration", eva_calibration, "Calibration model JSON");
    eva->add_option("--out", eva_out, "Output report JSON (stdout when omitted)");

    // export-plot
    auto* exp = app.add_subcommand("export-plot", "Export CDF and error tables from a report");
    std::string exp_report, exp_out;
    exp->add_option("--report", exp_report, "Report JSON from evaluate")->required();
    exp->add_option("--out", exp_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (seed_opt->count() > 0) sim_seed = sim_seed_raw;
        if (sim->parsed()) return cmd_simulate(sim_scenario, sim_preset, sim_out, sim_seed);
        if (cal->parsed()) return cmd_calibrate(cal_pairs, cal_out);
        if (det->parsed()) return cmd_detect(det_trace, det_config, det_out);
        if (loc->parsed())
            return cmd_localize(loc_trace, loc_tracks, loc_anchor, loc_lambda, loc_width,
                                loc_config, loc_calibration, loc_out);
        if (eva->parsed()) return cmd_evaluate(eva_run, eva_config, eva_calibration, eva_out);
        if (exp->parsed()) return cmd_export_plot(exp_report, exp_out);
    } catch (const FitFailure& e) {
        std::cerr << "fit failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
