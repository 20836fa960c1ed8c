#pragma once
// Zone-boundary points from blockage events and obstacle tracks.
//
// At the instant a blockage starts the obstacle's leading edge has just
// reached the zone boundary; at the instant it ends the trailing edge has
// just left it. Each event therefore yields two boundary points, one on
// either side of the anchor-transmitter line, which the split-curve fit
// consumes separately.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <sarrloc/blockage.hpp>
#include <sarrloc/geometry.hpp>

namespace sarrloc {

enum class PointKind { kStart, kEnd };
enum class PointSide { kLeft, kRight, kUnassigned };

struct BoundaryPoint {
    Point2 position;
    PointKind kind{PointKind::kStart};
    std::size_t event_index{0};
    PointSide side{PointSide::kUnassigned};
};

struct BoundaryPointSet {
    std::vector<BoundaryPoint> points;
    std::size_t dropped_events{0};
};

/// Leading edge of the obstacle at the blockage start time.
inline BoundaryPoint boundary_point_start(const ObstacleTrack& track, double t_start,
                                          std::size_t event_index = 0) {
    return {obstacle_region(track, t_start).a, PointKind::kStart, event_index,
            PointSide::kUnassigned};
}

/// Trailing edge of the obstacle at the blockage end time.
inline BoundaryPoint boundary_point_end(const ObstacleTrack& track, double t_end,
                                        std::size_t event_index = 0) {
    return {obstacle_region(track, t_end).b, PointKind::kEnd, event_index,
            PointSide::kUnassigned};
}

/// Labels the two points of one event with the side of the estimated center
/// line they fall on. The center line runs from the anchor (origin) through
/// the midpoint of the two points, which approximates the link axis, so the
/// cross product of the midpoint ray with a point gives the point's
/// cross-axis sign: positive is the left half. Each event contributes one
/// point per side. (For a midpoint ray with positive x this is exactly the
/// below-the-line slope test; the cross form stays correct for every
/// bearing, including the vertical ray.)
inline void split_sides(BoundaryPoint& start_point, BoundaryPoint& end_point) {
    const Point2 mid = (start_point.position + end_point.position) * 0.5;
    const Point2 e = end_point.position;
    const bool end_right = mid.x * e.y - mid.y * e.x < 0.0;
    if (end_right) {
        start_point.side = PointSide::kLeft;
        end_point.side = PointSide::kRight;
    } else {
        start_point.side = PointSide::kRight;
        end_point.side = PointSide::kLeft;
    }
}

/// Boundary points for every event whose start and end times the track
/// covers; events outside the track span are counted as dropped.
inline BoundaryPointSet collect_boundary_points(const ObstacleTrack& track,
                                                const std::vector<BlockageEvent>& events) {
    BoundaryPointSet set;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        if (!track.covers(ev.t_start_s) || !track.covers(ev.t_end_s)) {
            ++set.dropped_events;
            continue;
        }
        BoundaryPoint ps = boundary_point_start(track, ev.t_start_s, i);
        BoundaryPoint pe = boundary_point_end(track, ev.t_end_s, i);
        split_sides(ps, pe);
        set.points.push_back(ps);
        set.points.push_back(pe);
    }
    return set;
}

}  // namespace sarrloc
