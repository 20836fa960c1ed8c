#pragma once
// First-Fresnel-zone geometry in the horizontal plane.
//
// Everything here works in an anchor-relative frame: the receiving anchor
// sits at the origin and the transmitter at distance d along bearing theta.
// The first Fresnel zone boundary is the ellipse with those two points as
// foci, semi-major axis (2d + lambda)/4 and semi-minor axis
// sqrt(lambda (4d + lambda))/4 around the midpoint of the link.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace sarrloc {

struct Point2 {
    double x{0.0};
    double y{0.0};

    constexpr Point2() = default;
    constexpr Point2(double px, double py) : x(px), y(py) {}

    constexpr Point2 operator+(const Point2& r) const { return {x + r.x, y + r.y}; }
    constexpr Point2 operator-(const Point2& r) const { return {x - r.x, y - r.y}; }
    constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
    friend constexpr Point2 operator*(double s, const Point2& p) { return {p.x * s, p.y * s}; }

    constexpr double dot(const Point2& r) const { return x * r.x + y * r.y; }
    double norm() const { return std::hypot(x, y); }

    /// Unit vector in the same direction; {0,0} when shorter than eps.
    Point2 normalized(double eps = 1e-12) const {
        const double n = norm();
        if (n <= eps) return {0.0, 0.0};
        return {x / n, y / n};
    }

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

using Vec2 = Point2;

struct Segment2 {
    Point2 a;
    Point2 b;
};

inline double normalize_angle_0_2pi(double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (angle >= 0.0 && angle < two_pi) return angle;
    angle = std::fmod(angle, two_pi);
    if (angle < 0.0) angle += two_pi;
    // fmod can land exactly on two_pi after the correction
    if (angle >= two_pi) angle -= two_pi;
    return angle;
}

/// Link parameters that determine a first Fresnel zone: transmitter distance
/// from the anchor, bearing from the +x axis, and carrier wavelength.
class FresnelParams {
public:
    FresnelParams(double distance_m, double bearing_rad, double wavelength_m)
        : d_(distance_m), theta_(normalize_angle_0_2pi(bearing_rad)), lambda_(wavelength_m) {
        if (!(std::isfinite(d_) && d_ > 0.0))
            throw std::invalid_argument("FresnelParams: distance must be finite and > 0");
        if (!(std::isfinite(lambda_) && lambda_ > 0.0))
            throw std::invalid_argument("FresnelParams: wavelength must be finite and > 0");
        if (!std::isfinite(bearing_rad))
            throw std::invalid_argument("FresnelParams: bearing must be finite");
    }

    double distance() const { return d_; }
    double bearing() const { return theta_; }
    double wavelength() const { return lambda_; }

    double semi_major() const { return (2.0 * d_ + lambda_) / 4.0; }
    double semi_minor() const { return std::sqrt(lambda_ * (4.0 * d_ + lambda_)) / 4.0; }

    Point2 axis_direction() const { return {std::cos(theta_), std::sin(theta_)}; }
    Point2 center() const { return axis_direction() * (d_ / 2.0); }
    Point2 transmitter() const { return axis_direction() * d_; }

    /// Point on the zone boundary at ellipse parameter phi (phi = 0 is the
    /// vertex beyond the transmitter).
    Point2 boundary_point(double phi) const {
        const Point2 u = axis_direction();
        const Point2 v{-u.y, u.x};
        return center() + u * (semi_major() * std::cos(phi)) + v * (semi_minor() * std::sin(phi));
    }

private:
    double d_;
    double theta_;
    double lambda_;
};

/// Square-root argument of a half-boundary curve went negative: the point
/// lies beyond the major-axis extent of the ellipse.
class OutOfBandError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace detail {

// Coordinates of p in the frame aligned with the link axis: first is the
// along-axis coordinate x', second the cross-axis coordinate y' (positive
// on the left of the axis when looking from anchor to transmitter).
struct AxisCoords {
    double along;
    double cross;
};

inline AxisCoords to_axis_frame(Point2 p, const FresnelParams& fp) {
    const double c = std::cos(fp.bearing());
    const double s = std::sin(fp.bearing());
    return {p.x * c + p.y * s, p.y * c - p.x * s};
}

}  // namespace detail

/// Evaluates the first-Fresnel-zone quadratic form. The result is 1 on the
/// zone boundary, < 1 strictly inside and > 1 outside.
inline double ffz_value(Point2 p, const FresnelParams& fp) {
    if (!p.finite()) throw std::domain_error("ffz_value: non-finite point");
    const auto [along, cross] = detail::to_axis_frame(p, fp);
    const double d = fp.distance();
    const double lambda = fp.wavelength();
    const double u = 4.0 * along - 2.0 * d;
    const double major = 2.0 * d + lambda;
    return (u * u) / (major * major) + (16.0 * cross * cross) / (lambda * (4.0 * d + lambda));
}

inline bool ffz_contains(Point2 p, const FresnelParams& fp) {
    return ffz_value(p, fp) <= 1.0;
}

enum class CurveSide { kLeft, kRight };

/// Signed residual against one half of the zone boundary, split along the
/// link axis. The right half carries "+sqrt" and vanishes where the
/// cross-axis coordinate is negative; the left half is the mirror image.
/// Throws OutOfBandError when p lies beyond the major-axis extent.
inline double curve_residual(Point2 p, const FresnelParams& fp, CurveSide side) {
    if (!p.finite()) throw std::domain_error("curve_residual: non-finite point");
    const auto [along, cross] = detail::to_axis_frame(p, fp);
    const double d = fp.distance();
    const double lambda = fp.wavelength();
    const double u = 4.0 * along - 2.0 * d;
    const double major = 2.0 * d + lambda;
    double arg = 1.0 - (u * u) / (major * major);
    if (arg < 0.0) {
        if (arg < -1e-12) throw OutOfBandError("curve_residual: point beyond major-axis extent");
        arg = 0.0;
    }
    const double root = std::sqrt(lambda * (4.0 * d + lambda)) / 4.0 * std::sqrt(arg);
    return side == CurveSide::kRight ? cross + root : cross - root;
}

/// Smallest ffz_value attained on the segment. The form is quadratic in the
/// segment parameter, so the minimum is at an endpoint or the parabola
/// vertex; no sampling involved.
inline double ffz_segment_min_value(const Segment2& seg, const FresnelParams& fp) {
    if (!seg.a.finite() || !seg.b.finite())
        throw std::domain_error("ffz_segment_min_value: non-finite segment");
    const double c = std::cos(fp.bearing());
    const double s = std::sin(fp.bearing());
    const double d = fp.distance();
    const double lambda = fp.wavelength();
    const double major = 2.0 * d + lambda;
    const double minor_sq = lambda * (4.0 * d + lambda);

    const Point2 delta = seg.b - seg.a;
    const double along0 = seg.a.x * c + seg.a.y * s;
    const double cross0 = seg.a.y * c - seg.a.x * s;
    const double dalong = delta.x * c + delta.y * s;
    const double dcross = delta.y * c - delta.x * s;

    const double u0 = 4.0 * along0 - 2.0 * d;
    const double du = 4.0 * dalong;

    // F(t) = (u0 + t du)^2 / major^2 + 16 (cross0 + t dcross)^2 / minor_sq
    const double q2 = (du * du) / (major * major) + (16.0 * dcross * dcross) / minor_sq;
    const double q1 = 2.0 * (u0 * du) / (major * major) + (32.0 * cross0 * dcross) / minor_sq;
    const auto at = [&](double t) {
        const double u = u0 + t * du;
        const double w = cross0 + t * dcross;
        return (u * u) / (major * major) + (16.0 * w * w) / minor_sq;
    };

    double best = std::min(at(0.0), at(1.0));
    if (q2 > 0.0) {
        const double t = -q1 / (2.0 * q2);
        if (t > 0.0 && t < 1.0) best = std::min(best, at(t));
    }
    return best;
}

inline bool segment_intersects_ffz(const Segment2& seg, const FresnelParams& fp) {
    return ffz_segment_min_value(seg, fp) <= 1.0;
}

namespace detail {

// Golden-section minimization of f over [lo, hi]; f must be unimodal there.
template <typename F>
double golden_section_min(F&& f, double lo, double hi, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c1 = b - inv_phi * (b - a);
    double c2 = a + inv_phi * (b - a);
    double f1 = f(c1), f2 = f(c2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - inv_phi * (b - a);
            f1 = f(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + inv_phi * (b - a);
            f2 = f(c2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Euclidean distance from p to the zone boundary, found by 1-D search over
/// the ellipse parameter. A coarse scan brackets every local minimum of the
/// (at most bimodal) distance function and each bracket is refined by
/// golden-section search; accurate to well under 1e-6 m.
inline double boundary_distance(Point2 p, const FresnelParams& fp) {
    if (!p.finite()) throw std::domain_error("boundary_distance: non-finite point");
    constexpr int kScan = 96;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const auto dist_sq = [&](double phi) {
        const Point2 q = fp.boundary_point(phi) - p;
        return q.dot(q);
    };

    double scan[kScan];
    for (int i = 0; i < kScan; ++i) scan[i] = dist_sq(i * two_pi / kScan);

    // Refine around every cyclic local minimum of the scan (up to 3 restarts
    // covers the possible minima of point-to-ellipse distance).
    double best = std::numeric_limits<double>::infinity();
    int restarts = 0;
    for (int i = 0; i < kScan && restarts < 3; ++i) {
        const double prev = scan[(i + kScan - 1) % kScan];
        const double next = scan[(i + 1) % kScan];
        if (scan[i] <= prev && scan[i] <= next) {
            const double lo = (i - 1) * two_pi / kScan;
            const double hi = (i + 1) * two_pi / kScan;
            const double phi = detail::golden_section_min(dist_sq, lo, hi, 1e-10);
            best = std::min(best, dist_sq(phi));
            ++restarts;
        }
    }
    return std::sqrt(best);
}

/// Obstacle trajectory: time-stamped center positions with per-sample unit
/// motion directions and the physical width of the obstacle.
class ObstacleTrack {
public:
    ObstacleTrack(std::vector<double> times, std::vector<Point2> centers,
                  std::vector<Vec2> directions, double width_m)
        : times_(std::move(times)),
          centers_(std::move(centers)),
          directions_(std::move(directions)),
          width_(width_m) {
        if (times_.size() < 2) throw std::invalid_argument("ObstacleTrack: need at least 2 samples");
        if (centers_.size() != times_.size() || directions_.size() != times_.size())
            throw std::invalid_argument("ObstacleTrack: sample arrays must have equal length");
        if (!(std::isfinite(width_) && width_ > 0.0))
            throw std::invalid_argument("ObstacleTrack: width must be > 0");
        for (std::size_t i = 0; i < times_.size(); ++i) {
            if (!std::isfinite(times_[i]) || !centers_[i].finite())
                throw std::invalid_argument("ObstacleTrack: non-finite sample");
            if (i > 0 && !(times_[i] > times_[i - 1]))
                throw std::invalid_argument("ObstacleTrack: timestamps must strictly increase");
            if (std::abs(directions_[i].norm() - 1.0) > 1e-9)
                throw std::invalid_argument("ObstacleTrack: directions must be unit vectors");
        }
    }

    /// Builds a track from centers only; directions come from the chord to
    /// the next sample (the final sample reuses the last chord).
    static ObstacleTrack with_chord_directions(std::vector<double> times,
                                               std::vector<Point2> centers, double width_m) {
        if (centers.size() < 2)
            throw std::invalid_argument("ObstacleTrack: need at least 2 samples");
        std::vector<Vec2> dirs(centers.size());
        for (std::size_t i = 0; i + 1 < centers.size(); ++i) {
            dirs[i] = (centers[i + 1] - centers[i]).normalized();
            if (dirs[i].norm() == 0.0) {
                // stationary chord; carry the previous heading if any
                dirs[i] = i > 0 ? dirs[i - 1] : Vec2{1.0, 0.0};
            }
        }
        dirs.back() = dirs[dirs.size() - 2];
        return ObstacleTrack(std::move(times), std::move(centers), std::move(dirs), width_m);
    }

    double width() const { return width_; }
    double start_time() const { return times_.front(); }
    double end_time() const { return times_.back(); }
    bool covers(double t) const { return t >= start_time() && t <= end_time(); }
    std::size_t size() const { return times_.size(); }

    /// Same track with every center shifted by -origin (e.g. into the
    /// anchor-relative frame).
    ObstacleTrack relative_to(Point2 origin) const {
        std::vector<Point2> shifted(centers_.size());
        for (std::size_t i = 0; i < centers_.size(); ++i) shifted[i] = centers_[i] - origin;
        return ObstacleTrack(times_, std::move(shifted), directions_, width_);
    }

    const std::vector<double>& times() const { return times_; }
    const std::vector<Point2>& centers() const { return centers_; }
    const std::vector<Vec2>& directions() const { return directions_; }

    struct State {
        Point2 center;
        Vec2 direction;
    };

    /// Linear interpolation of the center; the direction is interpolated and
    /// renormalized. Across a direction reversal the interpolated vector can
    /// collapse; the nearer sample's heading is used then.
    State state_at(double t) const {
        if (!covers(t)) throw std::out_of_range("ObstacleTrack: time outside track span");
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        if (it == times_.begin()) ++it;
        if (it == times_.end()) --it;
        const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
        const std::size_t lo = hi - 1;
        const double span = times_[hi] - times_[lo];
        const double alpha = span > 0.0 ? (t - times_[lo]) / span : 0.0;
        const Point2 center = centers_[lo] * (1.0 - alpha) + centers_[hi] * alpha;
        Vec2 dir = (directions_[lo] * (1.0 - alpha) + directions_[hi] * alpha).normalized();
        if (dir.norm() == 0.0) dir = alpha < 0.5 ? directions_[lo] : directions_[hi];
        return {center, dir};
    }

private:
    std::vector<double> times_;
    std::vector<Point2> centers_;
    std::vector<Vec2> directions_;
    double width_;
};

/// Obstacle footprint at time t: the segment from the leading edge (center
/// plus half the width along the motion direction, stored in `a`) to the
/// trailing edge (stored in `b`).
inline Segment2 obstacle_region(const ObstacleTrack& track, double t) {
    const auto st = track.state_at(t);
    const Vec2 half = st.direction * (track.width() / 2.0);
    return {st.center + half, st.center - half};
}

}  // namespace sarrloc
