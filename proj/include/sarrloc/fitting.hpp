#pragma once
// Fresnel-ellipse fitting: recover the transmitter distance and bearing
// from zone-boundary points by coarse-to-fine grid search.
//
// Two losses are provided. The plain loss sums the squared deviation of the
// zone quadratic form from 1 over all points. The split loss fits the left
// and right half-boundary curves to the correspondingly labeled points,
// normalized per side so neither side dominates; it is the default because
// the signed half-curve residuals do not cancel across the axis the way the
// symmetric form can.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <sarrloc/boundary.hpp>
#include <sarrloc/geometry.hpp>

namespace sarrloc {

struct GridConfig {
    double d_min_m{0.3};
    double d_max_m{12.0};
    double d_step_m{0.05};
    double theta_min_rad{0.0};
    double theta_max_rad{2.0 * std::numbers::pi};
    double theta_step_rad{2.0 * std::numbers::pi / 720.0};  // half a degree
    int refine_levels{2};

    void validate() const {
        if (!(d_min_m > 0.0 && d_min_m < d_max_m))
            throw std::invalid_argument("GridConfig: need 0 < d_min < d_max");
        if (!(d_step_m > 0.0 && theta_step_rad > 0.0))
            throw std::invalid_argument("GridConfig: steps must be > 0");
        if (!(theta_min_rad < theta_max_rad))
            throw std::invalid_argument("GridConfig: need theta_min < theta_max");
        if (refine_levels < 0) throw std::invalid_argument("GridConfig: refine_levels >= 0");
    }

    /// Step sizes of the finest grid actually searched.
    double final_d_step() const { return d_step_m / std::pow(10.0, refine_levels); }
    double final_theta_step() const { return theta_step_rad / std::pow(10.0, refine_levels); }
};

enum class FitMethod { kPlain, kSplit };

struct FitResult {
    double distance_m{0.0};
    double bearing_rad{0.0};
    double wavelength_m{0.0};
    double loss{0.0};
    std::size_t point_count{0};
    FitMethod method{FitMethod::kSplit};

    FresnelParams params() const { return {distance_m, bearing_rad, wavelength_m}; }
};

class FitFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

struct RotatedPoint {
    double along;
    double cross;
    PointSide side;
};

inline std::vector<RotatedPoint> rotate_points(const std::vector<BoundaryPoint>& points,
                                               double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    std::vector<RotatedPoint> out;
    out.reserve(points.size());
    for (const auto& p : points)
        out.push_back({p.position.x * c + p.position.y * s,
                       p.position.y * c - p.position.x * s, p.side});
    return out;
}

// Plain loss over pre-rotated points: sum of (F - 1)^2.
inline double plain_loss_core(const std::vector<RotatedPoint>& pts, double d, double lambda) {
    const double major = 2.0 * d + lambda;
    const double minor_sq = lambda * (4.0 * d + lambda);
    double sum = 0.0;
    for (const auto& p : pts) {
        const double u = 4.0 * p.along - 2.0 * d;
        const double f =
            (u * u) / (major * major) + (16.0 * p.cross * p.cross) / minor_sq - 1.0;
        sum += f * f;
    }
    return sum;
}

// Split loss over pre-rotated, side-labeled points: per-side mean of the
// squared half-curve residual. Points beyond the major-axis extent get a
// continuous penalty in place of the undefined root term.
inline double split_loss_core(const std::vector<RotatedPoint>& pts, double d, double lambda) {
    const double major = 2.0 * d + lambda;
    const double half_minor = std::sqrt(lambda * (4.0 * d + lambda)) / 4.0;
    double left_sum = 0.0, right_sum = 0.0;
    std::size_t left_n = 0, right_n = 0;
    for (const auto& p : pts) {
        const double u = 4.0 * p.along - 2.0 * d;
        const double arg = 1.0 - (u * u) / (major * major);
        double residual;
        if (arg >= 0.0) {
            const double root = half_minor * std::sqrt(arg);
            residual = p.side == PointSide::kRight ? p.cross + root : p.cross - root;
        } else {
            residual = (std::abs(u) - major) / lambda + 1.0;
        }
        if (p.side == PointSide::kRight) {
            right_sum += residual * residual;
            ++right_n;
        } else {
            left_sum += residual * residual;
            ++left_n;
        }
    }
    double loss = 0.0;
    if (right_n > 0) loss += right_sum / static_cast<double>(right_n);
    if (left_n > 0) loss += left_sum / static_cast<double>(left_n);
    return loss;
}

inline bool has_side(const std::vector<BoundaryPoint>& points, PointSide side) {
    for (const auto& p : points)
        if (p.side == side) return true;
    return false;
}

}  // namespace detail

inline bool has_both_sides(const BoundaryPointSet& set) {
    return detail::has_side(set.points, PointSide::kLeft) &&
           detail::has_side(set.points, PointSide::kRight);
}

/// Sum over points of the squared deviation of the zone form from 1.
inline double plain_loss(const BoundaryPointSet& set, const FresnelParams& fp) {
    if (set.points.empty()) throw std::invalid_argument("plain_loss: no points");
    return detail::plain_loss_core(detail::rotate_points(set.points, fp.bearing()),
                                   fp.distance(), fp.wavelength());
}

/// Per-side mean squared half-curve residual. Falls back to the plain loss
/// when one side has no points (callers can check has_both_sides first).
/// Points are expected to carry side labels; an unassigned point counts
/// toward the left curve.
inline double split_loss(const BoundaryPointSet& set, const FresnelParams& fp) {
    if (set.points.empty()) throw std::invalid_argument("split_loss: no points");
    if (!has_both_sides(set)) return plain_loss(set, fp);
    return detail::split_loss_core(detail::rotate_points(set.points, fp.bearing()),
                                   fp.distance(), fp.wavelength());
}

/// Exhaustive grid search over (d, theta) followed by `refine_levels`
/// ten-times-finer local passes around the incumbent. Ties prefer smaller d,
/// then smaller theta, so the result is deterministic for any evaluation
/// order. Throws FitFailure when no finite loss is found.
inline FitResult fit(const BoundaryPointSet& set, double wavelength_m, const GridConfig& grid,
                     FitMethod method = FitMethod::kSplit) {
    grid.validate();
    if (set.points.size() < 2) throw std::invalid_argument("fit: need at least 2 points");
    if (!(std::isfinite(wavelength_m) && wavelength_m > 0.0))
        throw std::invalid_argument("fit: wavelength must be > 0");
    const bool use_split = method == FitMethod::kSplit && has_both_sides(set);

    constexpr double two_pi = 2.0 * std::numbers::pi;
    double best_loss = std::numeric_limits<double>::infinity();
    double best_d = 0.0, best_theta = 0.0;
    const auto consider = [&](double loss, double d, double theta) {
        theta = normalize_angle_0_2pi(theta);
        if (loss < best_loss ||
            (loss == best_loss && (d < best_d || (d == best_d && theta < best_theta)))) {
            best_loss = loss;
            best_d = d;
            best_theta = theta;
        }
    };
    const auto sweep_theta = [&](double theta, const std::vector<double>& d_values) {
        const auto rotated = detail::rotate_points(set.points, theta);
        for (double d : d_values) {
            const double loss = use_split
                                    ? detail::split_loss_core(rotated, d, wavelength_m)
                                    : detail::plain_loss_core(rotated, d, wavelength_m);
            if (std::isfinite(loss)) consider(loss, d, theta);
        }
    };

    // coarse pass over the full ranges
    {
        std::vector<double> d_values;
        for (std::size_t i = 0;; ++i) {
            const double d = grid.d_min_m + static_cast<double>(i) * grid.d_step_m;
            if (d > grid.d_max_m + grid.d_step_m * 0.5) break;
            d_values.push_back(std::min(d, grid.d_max_m));
        }
        const bool full_circle = grid.theta_max_rad - grid.theta_min_rad >= two_pi - 1e-12;
        const auto steps = static_cast<std::size_t>(
            std::floor((grid.theta_max_rad - grid.theta_min_rad) / grid.theta_step_rad + 1e-9));
        for (std::size_t k = 0; k <= steps; ++k) {
            const double theta = grid.theta_min_rad + static_cast<double>(k) * grid.theta_step_rad;
            if (full_circle && k == steps) break;  // 2*pi duplicates 0
            sweep_theta(theta, d_values);
        }
    }
    if (!std::isfinite(best_loss)) throw FitFailure("fit: no finite loss on the search grid");

    // local refinement: +-1.5 old steps around the incumbent, ten times finer
    double d_step = grid.d_step_m;
    double theta_step = grid.theta_step_rad;
    for (int level = 0; level < grid.refine_levels; ++level) {
        const double d_fine = d_step / 10.0;
        const double theta_fine = theta_step / 10.0;
        constexpr int kHalf = 15;
        std::vector<double> d_values;
        for (int i = -kHalf; i <= kHalf; ++i) {
            const double d = best_d + i * d_fine;
            if (d >= grid.d_min_m - 1e-12 && d <= grid.d_max_m + 1e-12)
                d_values.push_back(std::clamp(d, grid.d_min_m, grid.d_max_m));
        }
        const double theta_center = best_theta;
        for (int j = -kHalf; j <= kHalf; ++j) sweep_theta(theta_center + j * theta_fine, d_values);
        d_step = d_fine;
        theta_step = theta_fine;
    }

    return {best_d, best_theta, wavelength_m, best_loss, set.points.size(),
            use_split ? FitMethod::kSplit : FitMethod::kPlain};
}

struct AnchorPose {
    Point2 position;
    double rotation_rad{0.0};
};

/// Transmitter position in the world frame implied by a fit and the pose of
/// the anchor whose trace produced it.
inline Point2 localize(const AnchorPose& pose, const FitResult& fr) {
    const double bearing = fr.bearing_rad + pose.rotation_rad;
    return pose.position + Point2{std::cos(bearing), std::sin(bearing)} * fr.distance_m;
}

}  // namespace sarrloc
