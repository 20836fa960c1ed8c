#pragma once
// Scenario simulator: obstacle trajectories along straight lines, RSSI
// traces with zone-blockage attenuation plus Gaussian noise, and exact
// ground-truth blockage sections for every anchor-transmitter pair.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <sarrloc/blockage.hpp>
#include <sarrloc/eval.hpp>
#include <sarrloc/geometry.hpp>

namespace sarrloc {

struct ChannelConfig {
    double baseline_dbm{-40.0};       // received power at 1 m when path loss is on,
                                      // otherwise the flat baseline
    double blockage_depth_db{10.0};   // attenuation while the zone is blocked
    double edge_ramp_s{0.2};          // linear onset/recovery inside the overlap
    double noise_sigma_db{1.0};
    double sample_interval_s{0.05};
    double path_loss_exponent{0.0};   // 0 disables distance-dependent baseline

    void validate() const {
        if (!(blockage_depth_db > 0.0))
            throw std::invalid_argument("ChannelConfig: blockage depth must be > 0");
        if (!(noise_sigma_db >= 0.0))
            throw std::invalid_argument("ChannelConfig: noise sigma must be >= 0");
        if (!(sample_interval_s > 0.0))
            throw std::invalid_argument("ChannelConfig: sample interval must be > 0");
        if (!(edge_ramp_s >= 0.0))
            throw std::invalid_argument("ChannelConfig: edge ramp must be >= 0");
    }
};

struct Scenario {
    struct Node {
        std::string id;
        Point2 position;
    };

    std::vector<Node> anchors;
    std::vector<Node> transmitters;
    double wavelength_m{0.0574};
    std::vector<ObstacleTrack> tracks;
    std::uint64_t rng_seed{1};
    double arena_width_m{6.0};
    double arena_depth_m{6.0};
    double duration_s{0.0};  // 0 = end of the last track
    ChannelConfig channel;

    const Node& anchor(const std::string& id) const { return find(anchors, id, "anchor"); }
    const Node& transmitter(const std::string& id) const {
        return find(transmitters, id, "transmitter");
    }

    double resolved_duration() const {
        if (duration_s > 0.0) return duration_s;
        double end = 0.0;
        for (const auto& t : tracks) end = std::max(end, t.end_time());
        return end;
    }

    void validate() const {
        if (!(wavelength_m > 0.0))
            throw std::invalid_argument("Scenario: wavelength must be > 0");
        if (anchors.empty() || transmitters.empty())
            throw std::invalid_argument("Scenario: need at least one anchor and transmitter");
        for (const auto& n : anchors) check_in_arena(n);
        for (const auto& n : transmitters) check_in_arena(n);
        channel.validate();
    }

private:
    static const Node& find(const std::vector<Node>& nodes, const std::string& id,
                            const char* kind) {
        for (const auto& n : nodes)
            if (n.id == id) return n;
        throw std::invalid_argument(std::string("Scenario: unknown ") + kind + " id: " + id);
    }

    void check_in_arena(const Node& n) const {
        if (n.position.x < 0.0 || n.position.x > arena_width_m || n.position.y < 0.0 ||
            n.position.y > arena_depth_m)
            throw std::invalid_argument("Scenario: node outside arena: " + n.id);
    }
};

/// Zone parameters of one link, in the anchor-relative frame.
inline FresnelParams pair_params(const Scenario& scenario, const std::string& anchor_id,
                                 const std::string& tx_id) {
    const Point2 a = scenario.anchor(anchor_id).position;
    const Point2 t = scenario.transmitter(tx_id).position;
    const Point2 rel = t - a;
    const double d = rel.norm();
    if (d <= 0.0) throw std::invalid_argument("pair_params: anchor and transmitter coincide");
    return {d, std::atan2(rel.y, rel.x), scenario.wavelength_m};
}

/// Constant-speed back-and-forth motion along a line, sampled uniformly;
/// the heading flips at each end.
inline ObstacleTrack synth_track(const Segment2& line, double speed_mps, double width_m,
                                 int round_trips, double interval_s, double start_time_s = 0.0) {
    if (!(speed_mps > 0.0)) throw std::invalid_argument("synth_track: speed must be > 0");
    if (round_trips < 1) throw std::invalid_argument("synth_track: need at least one round trip");
    if (!(interval_s > 0.0)) throw std::invalid_argument("synth_track: interval must be > 0");
    const Point2 span = line.b - line.a;
    const double length = span.norm();
    if (length < 1e-9) throw std::invalid_argument("synth_track: degenerate line");
    const Vec2 forward = span * (1.0 / length);

    const double duration = 2.0 * length * round_trips / speed_mps;
    const auto count = static_cast<std::size_t>(std::floor(duration / interval_s + 1e-9)) + 1;

    std::vector<double> times(count);
    std::vector<Point2> centers(count);
    std::vector<Vec2> dirs(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) * interval_s;
        const double phase = std::fmod(t * speed_mps, 2.0 * length);
        const bool outbound = phase < length;
        const double s = outbound ? phase : 2.0 * length - phase;
        times[i] = start_time_s + t;
        centers[i] = line.a + forward * s;
        dirs[i] = outbound ? forward : forward * -1.0;
    }
    return ObstacleTrack(std::move(times), std::move(centers), std::move(dirs), width_m);
}

/// Maximal intervals during which the obstacle overlaps the link's zone.
/// The overlap indicator comes from the analytic segment test; boundaries
/// are found by a fine scan plus bisection to 1e-4 s.
inline std::vector<TimeInterval> ground_truth_sections(const Scenario& scenario,
                                                       const std::string& anchor_id,
                                                       const std::string& tx_id,
                                                       const ObstacleTrack& track) {
    const FresnelParams fp = pair_params(scenario, anchor_id, tx_id);
    const Point2 anchor = scenario.anchor(anchor_id).position;
    const auto overlapping = [&](double t) {
        const Segment2 world = obstacle_region(track, t);
        return ffz_segment_min_value({world.a - anchor, world.b - anchor}, fp) <= 1.0;
    };
    const auto boundary_between = [&](double lo, double hi, bool lo_state) {
        while (hi - lo > 1e-5) {
            const double mid = 0.5 * (lo + hi);
            if (overlapping(mid) == lo_state)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    constexpr double kScanStep = 1e-3;
    std::vector<TimeInterval> sections;
    double t = track.start_time();
    bool inside = overlapping(t);
    double section_start = inside ? t : 0.0;
    while (t < track.end_time()) {
        const double next = std::min(t + kScanStep, track.end_time());
        const bool next_inside = overlapping(next);
        if (next_inside != inside) {
            const double crossing = boundary_between(t, next, inside);
            if (inside)
                sections.push_back({section_start, crossing});
            else
                section_start = crossing;
            inside = next_inside;
        }
        t = next;
    }
    if (inside) sections.push_back({section_start, track.end_time()});
    return sections;
}

namespace detail {

// Deterministic per-stream seed derived from the scenario seed and ids.
inline std::uint64_t mix_seed(std::uint64_t seed, const std::string& a, const std::string& b) {
    std::uint64_t h = seed ^ 0x9E3779B97F4A7C15ULL;
    const auto fold = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001B3ULL;
        }
        h ^= h >> 31;
    };
    fold(a);
    fold(b);
    // splitmix64 finalizer
    h += 0x9E3779B97F4A7C15ULL;
    h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
    h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
    return h ^ (h >> 31);
}

// Trapezoid attenuation profile: the decline begins at first contact and
// the recovery completes at last contact, so the ramps lie inside the
// overlap section and the attenuation is zero exactly while the zone is
// clear. Overlapping profiles take the max.
inline double overlap_shape(double t, const std::vector<TimeInterval>& sections, double ramp) {
    double shape = 0.0;
    for (const auto& sec : sections) {
        if (t <= sec.start_s || t >= sec.end_s) continue;
        double v = 1.0;
        if (ramp > 0.0) {
            // short sections never reach the full depth
            v = std::min(1.0, std::min((t - sec.start_s) / ramp, (sec.end_s - t) / ramp));
        }
        shape = std::max(shape, v);
    }
    return shape;
}

}  // namespace detail

/// Synthesizes the received-power trace of one link over the scenario
/// duration. The power sits at the baseline (optionally path-loss shifted),
/// drops by the blockage depth while any track overlaps the zone with a
/// linear ramp of edge_ramp_s on each side, and carries white Gaussian
/// noise. Fully reproducible from (scenario, channel, seed).
inline RssiTrace synth_rssi(const Scenario& scenario, const std::string& anchor_id,
                            const std::string& tx_id, const ChannelConfig& channel) {
    channel.validate();
    std::vector<TimeInterval> sections;
    for (const auto& track : scenario.tracks) {
        auto s = ground_truth_sections(scenario, anchor_id, tx_id, track);
        sections.insert(sections.end(), s.begin(), s.end());
    }

    double baseline = channel.baseline_dbm;
    if (channel.path_loss_exponent > 0.0) {
        const double d = pair_params(scenario, anchor_id, tx_id).distance();
        baseline -= 10.0 * channel.path_loss_exponent * std::log10(std::max(d, 0.01));
    }

    const double duration = scenario.resolved_duration();
    if (!(duration > 0.0)) throw std::invalid_argument("synth_rssi: scenario has no duration");
    const auto count =
        static_cast<std::size_t>(std::floor(duration / channel.sample_interval_s + 1e-9)) + 1;

    std::mt19937_64 rng(detail::mix_seed(scenario.rng_seed, anchor_id, tx_id));
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<double> samples(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) * channel.sample_interval_s;
        double power = baseline - channel.blockage_depth_db *
                                      detail::overlap_shape(t, sections, channel.edge_ramp_s);
        if (channel.noise_sigma_db > 0.0) power += channel.noise_sigma_db * noise(rng);
        samples[i] = power;
    }
    return RssiTrace(std::move(samples), channel.sample_interval_s, 0.0);
}

/// Scenario mirroring the reference indoor layout: a 6 x 6 m room, anchors
/// along the bottom wall, two transmitters near the top wall, and a 0.9 m
/// board walked back and forth along six horizontal lines at 0.57 m/s, six
/// round trips per line. The sixth line sits beyond every transmitter and
/// never blocks a zone.
inline Scenario reference_room_scenario(std::uint64_t seed = 1,
                                      double gap_between_lines_s = 10.0) {
    Scenario sc;
    sc.rng_seed = seed;
    sc.wavelength_m = 0.0574;
    // anchors sit inboard so every line crossing stays clear of the
    // obstacle's turnaround points
    sc.anchors = {{"A", {1.2, 0.4}}, {"B", {3.0, 0.3}}, {"C", {4.8, 0.4}}};
    sc.transmitters = {{"TD1", {2.2, 5.3}}, {"TD2", {3.8, 5.4}}};
    sc.channel = ChannelConfig{-40.0, 10.0, 0.2, 1.0, 0.05, 2.0};

    const double speed = 0.57;
    const double width = 0.9;
    const int round_trips = 6;
    // the highest blocking line passes near the transmitters, where the
    // zone taper pins the link distance
    const double line_y[6] = {1.8, 2.6, 3.4, 4.2, 4.9, 5.8};
    double start = 0.0;
    for (double y : line_y) {
        const Segment2 line{{0.45, y}, {5.55, y}};
        sc.tracks.push_back(synth_track(line, speed, width, round_trips,
                                        sc.channel.sample_interval_s, start));
        start = sc.tracks.back().end_time() + gap_between_lines_s;
    }
    sc.duration_s = sc.tracks.back().end_time() + 5.0;
    return sc;
}

}  // namespace sarrloc
