#pragma once
// Evaluation metrics: time-section confusion durations, boundary-point
// distance CDFs, and localization error.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <sarrloc/geometry.hpp>

namespace sarrloc {

struct TimeInterval {
    double start_s{0.0};
    double end_s{0.0};

    double length() const { return end_s - start_s; }
};

/// Disjoint, sorted set of time intervals inside a fixed observation horizon.
/// Construction normalizes: intervals are clipped to [0, horizon], sorted,
/// and overlapping or touching intervals merged, so the algebra below is
/// total.
class SectionSet {
public:
    explicit SectionSet(double horizon_s, std::vector<TimeInterval> intervals = {})
        : horizon_(horizon_s) {
        if (!(std::isfinite(horizon_) && horizon_ >= 0.0))
            throw std::invalid_argument("SectionSet: horizon must be finite and >= 0");
        for (auto iv : intervals) {
            iv.start_s = std::max(iv.start_s, 0.0);
            iv.end_s = std::min(iv.end_s, horizon_);
            if (iv.end_s > iv.start_s) intervals_.push_back(iv);
        }
        std::sort(intervals_.begin(), intervals_.end(),
                  [](const TimeInterval& a, const TimeInterval& b) {
                      return a.start_s < b.start_s;
                  });
        std::vector<TimeInterval> merged;
        for (const auto& iv : intervals_) {
            if (!merged.empty() && iv.start_s <= merged.back().end_s)
                merged.back().end_s = std::max(merged.back().end_s, iv.end_s);
            else
                merged.push_back(iv);
        }
        intervals_ = std::move(merged);
    }

    double horizon() const { return horizon_; }
    const std::vector<TimeInterval>& intervals() const { return intervals_; }

    double total_length() const {
        double sum = 0.0;
        for (const auto& iv : intervals_) sum += iv.length();
        return sum;
    }

    bool contains(double t) const {
        for (const auto& iv : intervals_)
            if (t >= iv.start_s && t <= iv.end_s) return true;
        return false;
    }

    SectionSet intersect(const SectionSet& other) const {
        std::vector<TimeInterval> out;
        std::size_t i = 0, j = 0;
        while (i < intervals_.size() && j < other.intervals_.size()) {
            const auto& a = intervals_[i];
            const auto& b = other.intervals_[j];
            const double lo = std::max(a.start_s, b.start_s);
            const double hi = std::min(a.end_s, b.end_s);
            if (hi > lo) out.push_back({lo, hi});
            (a.end_s < b.end_s ? i : j) += 1;
        }
        return SectionSet(horizon_, std::move(out));
    }

    SectionSet complement() const {
        std::vector<TimeInterval> out;
        double cursor = 0.0;
        for (const auto& iv : intervals_) {
            if (iv.start_s > cursor) out.push_back({cursor, iv.start_s});
            cursor = iv.end_s;
        }
        if (cursor < horizon_) out.push_back({cursor, horizon_});
        return SectionSet(horizon_, std::move(out));
    }

private:
    double horizon_;
    std::vector<TimeInterval> intervals_;
};

/// Durations of the four agreement classes between a detected and a
/// ground-truth section set over a shared horizon. Ratios are relative to
/// the horizon.
struct ConfusionDurations {
    double tp_s{0.0};
    double tn_s{0.0};
    double fp_s{0.0};
    double fn_s{0.0};
    double horizon_s{0.0};

    double tp_ratio() const { return tp_s / horizon_s; }
    double tn_ratio() const { return tn_s / horizon_s; }
    double fp_ratio() const { return fp_s / horizon_s; }
    double fn_ratio() const { return fn_s / horizon_s; }
    /// agreement fraction (tp + tn) / horizon
    double accuracy() const { return (tp_s + tn_s) / horizon_s; }
};

inline ConfusionDurations confusion(const SectionSet& detected, const SectionSet& truth) {
    if (std::abs(detected.horizon() - truth.horizon()) > 1e-9)
        throw std::invalid_argument("confusion: section sets cover different horizons");
    ConfusionDurations out;
    out.horizon_s = detected.horizon();
    out.tp_s = detected.intersect(truth).total_length();
    out.fp_s = detected.total_length() - out.tp_s;
    out.fn_s = truth.total_length() - out.tp_s;
    out.tn_s = out.horizon_s - out.tp_s - out.fp_s - out.fn_s;
    return out;
}

// Forward declaration; the full set lives in boundary.hpp.
struct BoundaryPoint;

/// Sorted distances from each point to the reference zone boundary — the
/// empirical CDF support.
inline std::vector<double> boundary_distance_cdf(const std::vector<Point2>& points,
                                                 const FresnelParams& truth) {
    if (points.empty())
        throw std::invalid_argument("boundary_distance_cdf: no points");
    std::vector<double> distances;
    distances.reserve(points.size());
    for (const auto& p : points) distances.push_back(boundary_distance(p, truth));
    std::sort(distances.begin(), distances.end());
    return distances;
}

/// Nearest-rank percentile of a sorted sample, q in [0, 100].
inline double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("percentile: empty sample");
    const double rank = q / 100.0 * static_cast<double>(sorted.size());
    auto idx = static_cast<std::size_t>(std::ceil(rank));
    idx = std::min(std::max<std::size_t>(idx, 1), sorted.size()) - 1;
    return sorted[idx];
}

inline double localization_error(Point2 estimate, Point2 truth) {
    return (estimate - truth).norm();
}

}  // namespace sarrloc
