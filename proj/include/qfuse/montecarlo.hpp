#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qfuse/bounds.hpp"
#include "qfuse/fusion.hpp"
#include "qfuse/sensor.hpp"

namespace qfuse {

/// Estimators the experiment harness can race against each other.
enum class Method { Naive, BrooksIyengar, Outlier, Bayesian, Kalman, Entangled };

/// Canonical lower-case names used by the CLI and CSV output.
std::string method_name(Method method);
Method method_from_name(const std::string& name);

/// One Monte Carlo campaign: which sensor counts, which estimators, what
/// physics, how many trials, and the seed that fixes every stream.
struct ExperimentConfig {
    int atoms = 1000;
    double sensitivity = 0.1;   // rad per parameter unit
    double t_true = 25.0;       // parameter value being estimated
    std::vector<int> sensor_counts = {2, 4, 8, 16, 32, 64};
    double fault_fraction = 0.0;   // Byzantine fraction, f = floor(frac * M)
    double visibility = 1.0;       // honest per-sensor and network visibility
    double tau_prep = 0.0;         // entanglement preparation overhead
    int trials = 10000;
    std::uint64_t seed = 0;
    std::vector<Method> methods = {Method::Naive, Method::BrooksIyengar,
                                   Method::Entangled};
    ByzantineModel byzantine{};
    double alpha = 0.05;           // confidence level for reading intervals
    Strategy strategy = Strategy::BFT;

    void validate() const;
};

/// Aggregated error statistics for one (method, sensor count) cell.
struct TrialStats {
    Method method{};
    int sensors = 0;
    double rmse = 0.0;
    double rmse_stderr = 0.0;   // delta-method standard error of the RMSE
    double mean_bias = 0.0;
};

/// Per-method dB gain over naive averaging at one sensor count.
struct RecoveryGain {
    Method method{};
    int sensors = 0;
    double gain_db = 0.0;
};

/// Result of the empirical classical/entangled crossover search.
struct CrossoverResult {
    double v_star = 0.0;
    bool no_crossing = false;   // true when one side wins over the whole range
};

/// Fig-3-style single-trial snapshot scenarios.
enum class Scenario { NoFault, Byzantine, ByzantineDecohered };

/// One sensor's full story inside an overlap snapshot.
struct SnapshotSensor {
    int sensor_id = 0;
    double estimate = 0.0;
    Interval interval{};
    double visibility = 0.0;
    double score = 0.0;
    FaultClass fault_class = FaultClass::NonFaulty;
    bool excluded = false;   // left out of the max-overlap agreement
    bool byzantine = false;  // ground truth, not visible to the fusion
};

/// Everything a plot of one fusion round needs.
struct OverlapSnapshot {
    Scenario scenario = Scenario::NoFault;
    double t_true = 0.0;
    std::vector<SnapshotSensor> sensors;
    std::vector<OverlapRegion> regions;
    double bi_estimate = 0.0;
    double naive_estimate = 0.0;
};

/// Run `trials` seeded rounds for every (sensor count, method) pair and
/// aggregate RMSE, its standard error, and mean bias. Derived per-trial
/// streams make the result independent of evaluation order and of which
/// other methods are enabled.
std::vector<TrialStats> run_experiment(const ExperimentConfig& config);

/// Least-squares slope of log10(rmse) against log10(M).
double fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

/// Finite-difference log-log slope between consecutive points, reported at
/// the right endpoint of each step.
std::vector<std::pair<double, double>> local_slope_curve(
    const std::vector<std::pair<double, double>>& points);

/// 20 log10(rmse_naive / rmse_method) for every configured method.
std::vector<RecoveryGain> byzantine_recovery_gain(const ExperimentConfig& config);

/// Bisection search for the visibility V* at which degraded entangled
/// fusion (V_eff = V e^{-tau_prep}, contrast-loss noise over the
/// strategy's surviving sensors) stops beating the classical BFT
/// reference running at its standard quantum limit. Evaluated at the
/// first entry of config.sensor_counts; V* resolved to about +/-0.02.
CrossoverResult empirical_crossover(const ExperimentConfig& config, Strategy strategy);

/// Sample one fusion round and return every interval, score, class,
/// max-overlap region, and both fused estimates.
OverlapSnapshot overlap_snapshot(const ExperimentConfig& config, Scenario scenario);

} // namespace qfuse
