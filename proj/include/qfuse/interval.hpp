#pragma once

#include <cmath>

#include "qfuse/errors.hpp"

namespace qfuse {

/// Closed interval [lower, upper] in parameter units.
struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    Interval() = default;
    Interval(double lo, double hi) : lower(lo), upper(hi) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
            throw InvalidArgument("Interval: requires finite lower <= upper");
        }
    }

    double midpoint() const { return 0.5 * (lower + upper); }
    double length() const { return upper - lower; }
    double half_width() const { return 0.5 * (upper - lower); }

    bool contains(double x) const { return lower <= x && x <= upper; }

    bool intersects(const Interval& other) const {
        return lower <= other.upper && other.lower <= upper;
    }

    /// Distance between two intervals; 0 when they intersect.
    double gap_to(const Interval& other) const {
        if (intersects(other)) return 0.0;
        return other.lower > upper ? other.lower - upper : lower - other.upper;
    }
};

} // namespace qfuse
