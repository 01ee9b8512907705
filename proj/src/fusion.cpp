#include "qfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "qfuse/errors.hpp"
#include "qfuse/stats.hpp"

namespace qfuse {

namespace {

void require_nonempty(std::size_t n, const char* what) {
    if (n == 0) {
        throw InvalidArgument(std::string(what) + " requires at least one sensor");
    }
}

// Atomic piece of the real line induced by the sorted interval endpoints:
// either a single endpoint {x} or the open segment between two neighbours.
struct Piece {
    double lo = 0.0;
    double hi = 0.0;
    bool is_point = false;
    int count = 0;
};

// Decompose the line into endpoint singletons and open gaps, each with its
// overlap count. Closed intervals make every open segment's count a lower
// bound for the counts at its bounding points, so maximal runs of max-count
// pieces always start and end on points.
std::vector<Piece> atomic_pieces(const std::vector<Interval>& intervals) {
    std::vector<double> endpoints;
    endpoints.reserve(intervals.size() * 2);
    for (const Interval& iv : intervals) {
        endpoints.push_back(iv.lower);
        endpoints.push_back(iv.upper);
    }
    std::sort(endpoints.begin(), endpoints.end());
    endpoints.erase(std::unique(endpoints.begin(), endpoints.end()), endpoints.end());

    std::vector<Piece> pieces;
    pieces.reserve(endpoints.size() * 2);
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        if (i > 0) {
            Piece gap;
            gap.lo = endpoints[i - 1];
            gap.hi = endpoints[i];
            gap.is_point = false;
            gap.count = overlap_at(intervals, 0.5 * (gap.lo + gap.hi));
            pieces.push_back(gap);
        }
        Piece pt;
        pt.lo = pt.hi = endpoints[i];
        pt.is_point = true;
        pt.count = overlap_at(intervals, endpoints[i]);
        pieces.push_back(pt);
    }
    return pieces;
}

} // namespace

void KalmanState::validate() const {
    if (!std::isfinite(mean) || !std::isfinite(variance) || !std::isfinite(q) ||
        !std::isfinite(r)) {
        throw InvalidArgument("Kalman state must be finite");
    }
    if (variance < 0.0) {
        throw InvalidArgument("Kalman variance must be non-negative");
    }
    if (q < 0.0) {
        throw InvalidArgument("Kalman process noise q must be non-negative");
    }
    if (r <= 0.0) {
        throw InvalidArgument("Kalman measurement variance r must be positive");
    }
}

int overlap_at(const std::vector<Interval>& intervals, double x) {
    int count = 0;
    for (const Interval& iv : intervals) {
        if (iv.contains(x)) {
            ++count;
        }
    }
    return count;
}

std::vector<OverlapRegion> max_overlap_regions(const std::vector<Interval>& intervals) {
    require_nonempty(intervals.size(), "max_overlap_regions");

    const std::vector<Piece> pieces = atomic_pieces(intervals);
    int max_count = 0;
    for (const Piece& p : pieces) {
        max_count = std::max(max_count, p.count);
    }

    // Merge adjacent max-count pieces into maximal closed regions.
    std::vector<OverlapRegion> regions;
    std::size_t i = 0;
    while (i < pieces.size()) {
        if (pieces[i].count != max_count) {
            ++i;
            continue;
        }
        const double lo = pieces[i].lo;
        double hi = pieces[i].hi;
        while (i + 1 < pieces.size() && pieces[i + 1].count == max_count) {
            ++i;
            hi = pieces[i].hi;
        }
        regions.push_back(OverlapRegion{Interval(lo, hi), max_count});
        ++i;
    }
    return regions;
}

std::vector<double> similarity_scores(const std::vector<Interval>& intervals) {
    require_nonempty(intervals.size(), "similarity_scores");

    const std::vector<OverlapRegion> regions = max_overlap_regions(intervals);
    const int max_count = regions.front().count;
    const double m = static_cast<double>(intervals.size());

    std::vector<double> scores;
    scores.reserve(intervals.size());
    for (const Interval& iv : intervals) {
        double gap = std::numeric_limits<double>::infinity();
        bool intersects = false;
        for (const OverlapRegion& region : regions) {
            if (iv.intersects(region.interval)) {
                intersects = true;
                break;
            }
            gap = std::min(gap, iv.gap_to(region.interval));
        }
        if (intersects) {
            scores.push_back(0.5 + 0.5 * static_cast<double>(max_count) / m);
        } else {
            const double hw = iv.half_width();
            const double relative = hw > 0.0 ? 1.0 - gap / hw : 0.0;
            scores.push_back(0.5 * std::max(0.0, relative));
        }
    }
    return scores;
}

FaultClass classify_score(double score) {
    if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
        throw InvalidArgument("similarity score must lie in [0, 1]");
    }
    if (score >= 0.95) {
        return FaultClass::NonFaulty;
    }
    if (score >= 0.5) {
        return FaultClass::TamelyFaulty;
    }
    return FaultClass::WidelyFaulty;
}

FusionResult brooks_iyengar_fuse(const std::vector<Interval>& intervals) {
    require_nonempty(intervals.size(), "brooks_iyengar_fuse");

    const int m = static_cast<int>(intervals.size());
    const std::vector<Piece> pieces = atomic_pieces(intervals);
    int max_count = 0;
    for (const Piece& p : pieces) {
        max_count = std::max(max_count, p.count);
    }

    // Agreement threshold M - floor((M-1)/3): a stretch of the line enters
    // the fuse only when at least that many sensors endorse it, mirroring
    // the consensus fault budget. When not even the best stretch reaches
    // the threshold (single sensor, scattered disjoint sets) the densest
    // stretches stand in so the fuse still answers.
    const int threshold = std::min(m - (m - 1) / 3, max_count);

    // Merge adjacent equal-count pieces into the constant-count regions of
    // the overlap diagram, then average accepted region midpoints with
    // their agreement counts as weights.
    struct DiagramRegion {
        double lo, hi;
        int count;
    };
    std::vector<DiagramRegion> accepted;
    long total_count = 0;
    std::size_t i = 0;
    while (i < pieces.size()) {
        if (pieces[i].count < threshold) {
            ++i;
            continue;
        }
        const int count = pieces[i].count;
        const double lo = pieces[i].lo;
        double hi = pieces[i].hi;
        while (i + 1 < pieces.size() && pieces[i + 1].count == count) {
            ++i;
            hi = pieces[i].hi;
        }
        accepted.push_back(DiagramRegion{lo, hi, count});
        total_count += count;
        ++i;
    }

    double estimate = 0.0;
    for (const DiagramRegion& region : accepted) {
        const double weight =
            static_cast<double>(region.count) / static_cast<double>(total_count);
        estimate += weight * (0.5 * (region.lo + region.hi));
    }

    const std::vector<OverlapRegion> regions = max_overlap_regions(intervals);

    FusionResult result;
    result.estimate = estimate;
    result.scores = similarity_scores(intervals);
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        bool intersects = false;
        for (const OverlapRegion& region : regions) {
            if (intervals[i].intersects(region.interval)) {
                intersects = true;
                break;
            }
        }
        if (!intersects) {
            result.excluded.insert(static_cast<int>(i));
        }
    }
    result.effective_count = regions.front().count;
    return result;
}

std::vector<double> vector_brooks_iyengar(const std::vector<std::vector<Interval>>& boxes) {
    require_nonempty(boxes.size(), "vector_brooks_iyengar");
    const std::size_t dims = boxes.front().size();
    if (dims == 0) {
        throw InvalidArgument("vector_brooks_iyengar requires at least one dimension");
    }
    for (const auto& box : boxes) {
        if (box.size() != dims) {
            throw InvalidArgument("vector_brooks_iyengar requires equal-dimension boxes");
        }
    }

    std::vector<double> fused(dims, 0.0);
    std::vector<Interval> column;
    column.reserve(boxes.size());
    for (std::size_t j = 0; j < dims; ++j) {
        column.clear();
        for (const auto& box : boxes) {
            column.push_back(box[j]);
        }
        fused[j] = brooks_iyengar_fuse(column).estimate;
    }
    return fused;
}

FusionResult predictive_outlier_fuse(const std::vector<SensorReading>& readings) {
    require_nonempty(readings.size(), "predictive_outlier_fuse");

    std::vector<Interval> intervals;
    intervals.reserve(readings.size());
    for (const SensorReading& reading : readings) {
        intervals.push_back(reading.interval);
    }

    FusionResult result;
    result.scores = similarity_scores(intervals);
    for (std::size_t i = 0; i < readings.size(); ++i) {
        if (result.scores[i] < 0.5) {
            result.excluded.insert(static_cast<int>(i));
        }
    }
    if (result.excluded.size() == readings.size()) {
        throw NoSurvivors("predictive_outlier_fuse excluded every sensor");
    }

    // Inverse-variance weights: per-sensor variance is proportional to
    // 1 / V^2, so the weights reduce to V^2. A survivor set whose tags are
    // all zero carries no variance ranking; fall back to equal weights.
    double weight_sum = 0.0;
    double weighted_estimate = 0.0;
    for (std::size_t i = 0; i < readings.size(); ++i) {
        if (result.excluded.count(static_cast<int>(i)) != 0) {
            continue;
        }
        const double w = readings[i].visibility * readings[i].visibility;
        weight_sum += w;
        weighted_estimate += w * readings[i].estimate;
    }
    if (weight_sum > 0.0) {
        result.estimate = weighted_estimate / weight_sum;
    } else {
        double sum = 0.0;
        for (std::size_t i = 0; i < readings.size(); ++i) {
            if (result.excluded.count(static_cast<int>(i)) == 0) {
                sum += readings[i].estimate;
            }
        }
        result.estimate = sum / static_cast<double>(readings.size() - result.excluded.size());
    }
    result.effective_count =
        static_cast<int>(readings.size()) - static_cast<int>(result.excluded.size());
    return result;
}

double simple_average(const std::vector<double>& estimates) {
    return mean(estimates);
}

double bayesian_weighted_fuse(const std::vector<double>& estimates,
                              const std::vector<double>& visibilities) {
    require_nonempty(estimates.size(), "bayesian_weighted_fuse");
    if (estimates.size() != visibilities.size()) {
        throw InvalidArgument("bayesian_weighted_fuse requires one visibility per estimate");
    }

    double weight_sum = 0.0;
    double weighted_estimate = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double v = visibilities[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw InvalidArgument("visibility must lie in [0, 1]");
        }
        const double w = v * v;
        weight_sum += w;
        weighted_estimate += w * estimates[i];
    }
    if (weight_sum == 0.0) {
        throw NoInformation("bayesian_weighted_fuse: every visibility weight is zero");
    }
    return weighted_estimate / weight_sum;
}

KalmanState kalman_step(const KalmanState& state, double fused_measurement, int sensors) {
    state.validate();
    if (sensors < 1) {
        throw InvalidArgument("kalman_step requires at least one sensor");
    }
    if (!std::isfinite(fused_measurement)) {
        throw InvalidArgument("kalman_step requires a finite measurement");
    }

    const double predicted_variance = state.variance + state.q;
    const double measurement_variance = state.r / static_cast<double>(sensors);
    const double gain = predicted_variance / (predicted_variance + measurement_variance);

    KalmanState next = state;
    next.mean = state.mean + gain * (fused_measurement - state.mean);
    next.variance = (1.0 - gain) * predicted_variance;
    return next;
}

} // namespace qfuse
