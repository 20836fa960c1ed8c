#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <sarrloc/simulator.hpp>

using namespace sarrloc;

namespace {

// Minimal scene: anchor bottom-left, transmitter top, one horizontal line
// crossed by the obstacle `round_trips` times in each direction.
Scenario small_scene(std::uint64_t seed, double line_y = 2.0, int round_trips = 1) {
    Scenario sc;
    sc.rng_seed = seed;
    sc.wavelength_m = 0.0574;
    sc.anchors = {{"A", {1.0, 0.5}}};
    sc.transmitters = {{"T", {2.0, 5.0}}};
    sc.channel = ChannelConfig{-40.0, 10.0, 0.2, 1.0, 0.05, 0.0};
    sc.tracks.push_back(
        synth_track({{0.45, line_y}, {5.55, line_y}}, 0.57, 0.9, round_trips, 0.05));
    sc.duration_s = sc.tracks.back().end_time() + 2.0;
    return sc;
}

// Dense 1 kHz oracle: maximal runs of the overlap indicator.
std::vector<TimeInterval> dense_sections(const Scenario& sc, const std::string& anchor_id,
                                         const std::string& tx_id, const ObstacleTrack& track) {
    const FresnelParams fp = pair_params(sc, anchor_id, tx_id);
    const Point2 anchor = sc.anchor(anchor_id).position;
    std::vector<TimeInterval> out;
    bool inside = false;
    double start = 0.0;
    for (double t = track.start_time(); t <= track.end_time(); t += 1e-3) {
        const Segment2 w = obstacle_region(track, t);
        const bool now = segment_intersects_ffz({w.a - anchor, w.b - anchor}, fp);
        if (now && !inside) start = t;
        if (!now && inside) out.push_back({start, t});
        inside = now;
    }
    if (inside) out.push_back({start, track.end_time()});
    return out;
}

}  // namespace

TEST_CASE("synth_track timing and headings", "[simulator]") {
    const auto track = synth_track({{0.0, 2.0}, {6.0, 2.0}}, 0.6, 0.9, 1, 0.1);
    CHECK(track.end_time() == Catch::Approx(20.0));  // 2 * 6 m / 0.6 m/s
    CHECK(track.width() == Catch::Approx(0.9));

    const auto out = track.state_at(5.0);  // outbound at x = 3
    CHECK(out.center.x == Catch::Approx(3.0));
    CHECK(out.direction.x == Catch::Approx(1.0));

    const auto back = track.state_at(15.0);  // inbound at x = 3
    CHECK(back.center.x == Catch::Approx(3.0));
    CHECK(back.direction.x == Catch::Approx(-1.0));

    CHECK_THROWS_AS(synth_track({{1.0, 1.0}, {1.0, 1.0}}, 0.6, 0.9, 1, 0.1),
                    std::invalid_argument);
}

TEST_CASE("ground truth sections count crossings", "[simulator]") {
    const auto sc = small_scene(1, 2.0, 2);  // two round trips = four crossings
    const auto sections = ground_truth_sections(sc, "A", "T", sc.tracks[0]);
    CHECK(sections.size() == 4);
    for (const auto& s : sections) CHECK(s.end_s > s.start_s);

    // a line beyond the transmitter never blocks
    const auto clear = small_scene(1, 5.6, 1);
    CHECK(ground_truth_sections(clear, "A", "T", clear.tracks[0]).empty());
}

TEST_CASE("ground truth sections match the 1 kHz dense oracle", "[simulator]") {
    for (std::uint64_t seed : {1ull, 2ull}) {
        const auto sc = small_scene(seed, seed == 1 ? 1.3 : 3.7, 2);
        const auto analytic = ground_truth_sections(sc, "A", "T", sc.tracks[0]);
        const auto dense = dense_sections(sc, "A", "T", sc.tracks[0]);
        REQUIRE(analytic.size() == dense.size());
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            CHECK(analytic[i].start_s == Catch::Approx(dense[i].start_s).margin(1.5e-3));
            CHECK(analytic[i].end_s == Catch::Approx(dense[i].end_s).margin(1.5e-3));
        }
    }
}

TEST_CASE("noiseless dip matches the section with interior ramps", "[simulator]") {
    auto sc = small_scene(3, 2.5, 1);
    sc.channel.noise_sigma_db = 0.0;
    const auto sections = ground_truth_sections(sc, "A", "T", sc.tracks[0]);
    REQUIRE(sections.size() == 2);

    const auto trace = synth_rssi(sc, "A", "T", sc.channel);
    // dip = strictly below baseline; the decline starts at first contact and
    // the recovery completes at last contact
    std::vector<TimeInterval> dips;
    std::vector<TimeInterval> floors;
    bool in_dip = false, in_floor = false;
    double start = 0.0, floor_start = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const bool low = trace.samples_dbm[i] < -40.0 - 1e-9;
        const bool full = trace.samples_dbm[i] < -50.0 + 1e-9;
        if (low && !in_dip) start = trace.time_at(i);
        if (!low && in_dip) dips.push_back({start, trace.time_at(i)});
        if (full && !in_floor) floor_start = trace.time_at(i);
        if (!full && in_floor) floors.push_back({floor_start, trace.time_at(i)});
        in_dip = low;
        in_floor = full;
    }
    if (in_dip) dips.push_back({start, trace.time_at(trace.size() - 1)});

    REQUIRE(dips.size() == sections.size());
    REQUIRE(floors.size() == sections.size());
    const double tol = sc.channel.sample_interval_s + 1e-9;
    for (std::size_t i = 0; i < dips.size(); ++i) {
        CHECK(std::abs(dips[i].start_s - sections[i].start_s) <= tol);
        CHECK(std::abs(dips[i].end_s - sections[i].end_s) <= tol);
        // full depth is reached one edge ramp inside the section
        CHECK(std::abs(floors[i].start_s - (sections[i].start_s + sc.channel.edge_ramp_s)) <=
              2.0 * tol);
        CHECK(std::abs(floors[i].end_s - (sections[i].end_s - sc.channel.edge_ramp_s)) <=
              2.0 * tol);
    }
}

TEST_CASE("non-blocking line produces baseline plus noise only", "[simulator]") {
    const auto sc = small_scene(4, 5.6, 1);
    const auto trace = synth_rssi(sc, "A", "T", sc.channel);
    double mean = 0.0;
    for (double v : trace.samples_dbm) {
        CHECK(std::abs(v + 40.0) < 6.0);  // well within 6 sigma
        mean += v;
    }
    mean /= static_cast<double>(trace.size());
    CHECK(mean == Catch::Approx(-40.0).margin(0.5));
}

TEST_CASE("synthesis is reproducible and seed-sensitive", "[simulator]") {
    const auto sc = small_scene(5);
    const auto a = synth_rssi(sc, "A", "T", sc.channel);
    const auto b = synth_rssi(sc, "A", "T", sc.channel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples_dbm[i] == b.samples_dbm[i]);

    auto other = small_scene(6);
    const auto c = synth_rssi(other, "A", "T", other.channel);
    std::size_t diffs = 0;
    for (std::size_t i = 0; i < std::min(a.size(), c.size()); ++i)
        if (a.samples_dbm[i] != c.samples_dbm[i]) ++diffs;
    CHECK(diffs > a.size() / 2);
}

TEST_CASE("path loss shifts the baseline per link distance", "[simulator]") {
    auto sc = small_scene(7, 5.6, 1);  // non-blocking line: baseline only
    sc.channel.noise_sigma_db = 0.0;
    sc.channel.path_loss_exponent = 2.0;
    const auto trace = synth_rssi(sc, "A", "T", sc.channel);
    const double d = pair_params(sc, "A", "T").distance();
    const double expected = -40.0 - 20.0 * std::log10(d);
    CHECK(trace.samples_dbm[0] == Catch::Approx(expected).margin(1e-9));
}

TEST_CASE("reference room scenario layout", "[simulator]") {
    const auto sc = reference_room_scenario(1);
    sc.validate();
    CHECK(sc.anchors.size() == 3);
    CHECK(sc.transmitters.size() == 2);
    REQUIRE(sc.tracks.size() == 6);

    // tracks are sequential with gaps
    for (std::size_t i = 1; i < sc.tracks.size(); ++i)
        CHECK(sc.tracks[i].start_time() > sc.tracks[i - 1].end_time());

    // the last line never blocks any link; every other line blocks each one
    for (const auto& anchor : sc.anchors) {
        for (const auto& tx : sc.transmitters) {
            CHECK(ground_truth_sections(sc, anchor.id, tx.id, sc.tracks[5]).empty());
            for (int line = 0; line < 5; ++line) {
                const auto sections =
                    ground_truth_sections(sc, anchor.id, tx.id, sc.tracks[line]);
                CHECK(sections.size() == 12);  // one per one-way pass
            }
        }
    }
}
