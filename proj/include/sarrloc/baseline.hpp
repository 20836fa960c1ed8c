#pragma once
// Reference localization: log-distance path-loss ranging from three or more
// anchors followed by a nonlinear least-squares position solve.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <sarrloc/geometry.hpp>

namespace sarrloc {

/// Log-distance propagation: r = -10 n log10(d) + A, with A the received
/// power at the 1 m reference distance.
struct PathLossModel {
    double exponent{2.0};
    double ref_power_dbm{-40.0};

    void validate() const {
        if (!(exponent >= 1.5 && exponent <= 6.0))
            throw std::invalid_argument("PathLossModel: exponent outside [1.5, 6]");
        if (!std::isfinite(ref_power_dbm))
            throw std::invalid_argument("PathLossModel: non-finite reference power");
    }
};

struct AnchorReading {
    Point2 anchor_position;
    double mean_power_dbm{0.0};
};

inline double path_loss_power(double distance_m, const PathLossModel& model) {
    if (!(distance_m > 0.0)) throw std::invalid_argument("path_loss_power: distance must be > 0");
    return -10.0 * model.exponent * std::log10(distance_m) + model.ref_power_dbm;
}

inline double invert_path_loss(double power_dbm, const PathLossModel& model) {
    model.validate();
    if (!std::isfinite(power_dbm)) throw std::invalid_argument("invert_path_loss: non-finite power");
    return std::pow(10.0, (model.ref_power_dbm - power_dbm) / (10.0 * model.exponent));
}

inline bool anchors_collinear(std::span<const AnchorReading> readings, double tol = 1e-9) {
    if (readings.size() < 3) return true;
    const Point2 a = readings[0].anchor_position;
    const Point2 b = readings[1].anchor_position;
    for (std::size_t i = 2; i < readings.size(); ++i) {
        const Point2 u = b - a;
        const Point2 v = readings[i].anchor_position - a;
        if (std::abs(u.x * v.y - u.y * v.x) > tol) return false;
    }
    return true;
}

namespace detail {

inline double range_cost(Point2 pos, std::span<const Point2> anchors,
                         std::span<const double> ranges) {
    double cost = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const double r = (pos - anchors[i]).norm() - ranges[i];
        cost += r * r;
    }
    return cost;
}

// Damped Gauss-Newton on range residuals ||pos - a_i|| - d_i.
inline Point2 refine_position(Point2 pos, std::span<const Point2> anchors,
                              std::span<const double> ranges) {
    double mu = 1e-3;
    double cost = range_cost(pos, anchors, ranges);
    for (int iter = 0; iter < 100; ++iter) {
        double h11 = 0.0, h12 = 0.0, h22 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            const Point2 diff = pos - anchors[i];
            const double dist = diff.norm();
            if (dist < 1e-12) continue;  // residual has no defined direction here
            const double r = dist - ranges[i];
            const double jx = diff.x / dist;
            const double jy = diff.y / dist;
            h11 += jx * jx;
            h12 += jx * jy;
            h22 += jy * jy;
            g1 += jx * r;
            g2 += jy * r;
        }
        const double a11 = h11 + mu, a22 = h22 + mu;
        const double det = a11 * a22 - h12 * h12;
        if (std::abs(det) < 1e-18) break;
        const Point2 step{-(a22 * g1 - h12 * g2) / det, -(a11 * g2 - h12 * g1) / det};
        const Point2 trial = pos + step;
        const double trial_cost = range_cost(trial, anchors, ranges);
        if (trial_cost < cost) {
            pos = trial;
            cost = trial_cost;
            mu = std::max(mu * 0.3, 1e-12);
            if (step.norm() < 1e-12) break;
        } else {
            mu *= 10.0;
            if (mu > 1e12) break;
        }
    }
    return pos;
}

}  // namespace detail

/// Position minimizing the sum of squared range residuals, multi-started
/// from every pairwise circle intersection (or closest approach when the
/// circles miss) plus the anchor centroid. Readings are sorted internally
/// so the result does not depend on their order.
inline Point2 trilaterate(std::span<const AnchorReading> readings, const PathLossModel& model) {
    model.validate();
    if (readings.size() < 3)
        throw std::invalid_argument("trilaterate: need at least 3 anchor readings");

    std::vector<AnchorReading> sorted(readings.begin(), readings.end());
    std::sort(sorted.begin(), sorted.end(), [](const AnchorReading& a, const AnchorReading& b) {
        if (a.anchor_position.x != b.anchor_position.x)
            return a.anchor_position.x < b.anchor_position.x;
        if (a.anchor_position.y != b.anchor_position.y)
            return a.anchor_position.y < b.anchor_position.y;
        return a.mean_power_dbm < b.mean_power_dbm;
    });

    std::vector<Point2> anchors;
    std::vector<double> ranges;
    Point2 centroid{0.0, 0.0};
    for (const auto& r : sorted) {
        anchors.push_back(r.anchor_position);
        ranges.push_back(invert_path_loss(r.mean_power_dbm, model));
        centroid = centroid + r.anchor_position;
    }
    centroid = centroid * (1.0 / static_cast<double>(anchors.size()));

    std::vector<Point2> starts{centroid};
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        for (std::size_t j = i + 1; j < anchors.size(); ++j) {
            const Point2 delta = anchors[j] - anchors[i];
            const double dist = delta.norm();
            if (dist < 1e-12) continue;
            const double a = (dist * dist + ranges[i] * ranges[i] - ranges[j] * ranges[j]) /
                             (2.0 * dist);
            const Point2 base = anchors[i] + delta * (a / dist);
            const double h_sq = ranges[i] * ranges[i] - a * a;
            if (h_sq > 0.0) {
                const double h = std::sqrt(h_sq);
                const Point2 perp{-delta.y / dist, delta.x / dist};
                starts.push_back(base + perp * h);
                starts.push_back(base - perp * h);
            } else {
                starts.push_back(base);
            }
        }
    }

    Point2 best{};
    double best_cost = std::numeric_limits<double>::infinity();
    for (const Point2& s : starts) {
        const Point2 candidate = detail::refine_position(s, anchors, ranges);
        const double cost = detail::range_cost(candidate, anchors, ranges);
        if (cost < best_cost - 1e-15 ||
            (std::abs(cost - best_cost) <= 1e-15 &&
             (candidate.x < best.x || (candidate.x == best.x && candidate.y < best.y)))) {
            best = candidate;
            best_cost = cost;
        }
    }
    return best;
}

}  // namespace sarrloc
