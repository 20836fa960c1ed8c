#pragma once
// Per-axis affine calibration of camera-derived positions to world meters.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <sarrloc/geometry.hpp>

namespace sarrloc {

struct AxisAffine {
    double scale{1.0};
    double offset{0.0};

    double apply(double v) const { return scale * v + offset; }
};

struct CalibrationModel {
    AxisAffine x;
    AxisAffine y;

    Point2 apply(Point2 raw) const { return {x.apply(raw.x), y.apply(raw.y)}; }

    void validate() const {
        if (x.scale == 0.0 || y.scale == 0.0)
            throw std::invalid_argument("CalibrationModel: zero scale");
    }
};

namespace detail {

inline AxisAffine fit_axis(const std::vector<double>& raw, const std::vector<double>& truth) {
    const auto n = static_cast<double>(raw.size());
    double raw_mean = 0.0, truth_mean = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw_mean += raw[i];
        truth_mean += truth[i];
    }
    raw_mean /= n;
    truth_mean /= n;
    double var = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        var += (raw[i] - raw_mean) * (raw[i] - raw_mean);
        cov += (raw[i] - raw_mean) * (truth[i] - truth_mean);
    }
    if (var < 1e-12 * std::max(1.0, raw_mean * raw_mean))
        throw std::invalid_argument("fit_calibration: raw axis is degenerate");
    const double scale = cov / var;
    return {scale, truth_mean - scale * raw_mean};
}

}  // namespace detail

/// Ordinary least squares per axis over (raw, true) position pairs.
inline CalibrationModel fit_calibration(const std::vector<std::pair<Point2, Point2>>& pairs) {
    if (pairs.size() < 2)
        throw std::invalid_argument("fit_calibration: need at least 2 pairs");
    std::vector<double> rx, ry, tx, ty;
    for (const auto& [raw, truth] : pairs) {
        rx.push_back(raw.x);
        ry.push_back(raw.y);
        tx.push_back(truth.x);
        ty.push_back(truth.y);
    }
    return {detail::fit_axis(rx, tx), detail::fit_axis(ry, ty)};
}

}  // namespace sarrloc
