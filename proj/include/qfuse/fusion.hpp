#pragma once

#include <cstddef>
#include <set>
#include <vector>

#include "qfuse/interval.hpp"
#include "qfuse/sensor.hpp"

namespace qfuse {

/// Maximal subinterval on which the overlap function attains its maximum,
/// together with that count.
struct OverlapRegion {
    Interval interval{};
    int count = 0;
};

/// Score-derived sensor classification.
enum class FaultClass { NonFaulty, TamelyFaulty, WidelyFaulty };

/// Output of an interval-fusion pass.
struct FusionResult {
    double estimate = 0.0;
    std::vector<double> scores;   // per-sensor similarity in [0, 1]
    std::set<int> excluded;       // sensor indices left out of the fusion
    int effective_count = 0;
};

/// Scalar Kalman filter state for a random-walk parameter observed through
/// M-sensor averages. r is the per-sensor measurement variance 1/(4 N eta^2);
/// each update uses variance r / M.
struct KalmanState {
    double mean = 0.0;
    double variance = 1.0;
    double q = 0.0;   // process noise variance per step
    double r = 1.0;   // per-sensor measurement variance

    void validate() const;
};

/// O(x): number of closed intervals containing x.
int overlap_at(const std::vector<Interval>& intervals, double x);

/// All maximal regions where the overlap function attains its global
/// maximum. Sorted-endpoint sweep, O(M log M). Throws on empty input.
std::vector<OverlapRegion> max_overlap_regions(const std::vector<Interval>& intervals);

/// Similarity score per sensor: intersecting sensors get
/// 0.5 + 0.5 * count / M, non-intersecting ones 0.5 * max(0, 1 - gap / hw).
std::vector<double> similarity_scores(const std::vector<Interval>& intervals);

/// Classify a similarity score (>= 0.95 non-faulty, >= 0.5 tamely, else widely).
FaultClass classify_score(double score);

/// Brooks-Iyengar fusion: count-weighted mean of the midpoints of the
/// overlap diagram's constant-count regions whose agreement reaches
/// M - floor((M-1)/3) (the consensus fault budget), falling back to the
/// max-overlap regions when nothing does. excluded lists sensors missing
/// every max-overlap region; effective_count is the max agreement count.
FusionResult brooks_iyengar_fuse(const std::vector<Interval>& intervals);

/// Per-dimension Brooks-Iyengar over d-dimensional interval boxes.
std::vector<double> vector_brooks_iyengar(const std::vector<std::vector<Interval>>& boxes);

/// Exclude sensors scoring below 0.5, then inverse-variance fuse the
/// survivors (weights V_i^2; uniform when all tags are zero).
FusionResult predictive_outlier_fuse(const std::vector<SensorReading>& readings);

/// Arithmetic mean. Throws on empty input.
double simple_average(const std::vector<double>& estimates);

/// Visibility-weighted fusion: sum(V_i^2 T_i) / sum(V_i^2).
double bayesian_weighted_fuse(const std::vector<double>& estimates,
                              const std::vector<double>& visibilities);

/// One scalar Kalman predict + update with measurement variance r / sensors.
KalmanState kalman_step(const KalmanState& state, double fused_measurement, int sensors);

} // namespace qfuse
