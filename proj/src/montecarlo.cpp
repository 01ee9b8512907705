#include "qfuse/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "qfuse/errors.hpp"
#include "qfuse/rng.hpp"
#include "qfuse/stats.hpp"

namespace qfuse {

namespace {

// Lane tags keep the derived streams of the harness components apart, so
// enabling one experiment never perturbs another's draws.
enum LaneTag : std::uint64_t {
    kReadingsLane = 1,
    kEntangledLane = 2,
    kCrossClassicalLane = 3,
    kCrossProbeLane = 4,
    kSnapshotLane = 5,
};

std::uint64_t lane_key(LaneTag tag, std::uint64_t a, std::uint64_t b = 0) {
    return (static_cast<std::uint64_t>(tag) << 56) ^ (a << 24) ^ b;
}

std::vector<Method> unique_methods(const std::vector<Method>& methods) {
    std::vector<Method> result;
    for (Method m : methods) {
        if (std::find(result.begin(), result.end(), m) == result.end()) {
            result.push_back(m);
        }
    }
    return result;
}

int fault_count(double fault_fraction, int sensors) {
    return static_cast<int>(std::floor(fault_fraction * static_cast<double>(sensors)));
}

// Choose f distinct faulty ids by a partial Fisher-Yates shuffle; consumes
// exactly f draws from the stream.
std::vector<char> sample_fault_flags(SplitMix64& rng, int sensors, int faults) {
    std::vector<int> ids(static_cast<std::size_t>(sensors));
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = 0; i < faults; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(sensors - i)));
        std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
    std::vector<char> faulty(static_cast<std::size_t>(sensors), 0);
    for (int i = 0; i < faults; ++i) {
        faulty[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])] = 1;
    }
    return faulty;
}

// Single-shot noise scale 1/(2 sqrt(N) eta) in parameter units.
double single_sensor_sigma(int atoms, double sensitivity) {
    return 1.0 / (2.0 * std::sqrt(static_cast<double>(atoms)) * sensitivity);
}

// One estimate from the partially-entangled network over m_fused surviving
// sensors. The network keeps full entanglement with probability V_eff^2
// (noise sigma/m_fused) and degrades to independent averaging otherwise
// (noise sigma/sqrt(m_fused)), so its mean squared error interpolates the
// two regimes exactly as the visibility-weighted information budget says
// it must. Consumes exactly three uniforms.
double entangled_estimate(SplitMix64& rng, const ExperimentConfig& config, int m_fused) {
    const double v_eff = config.visibility * std::exp(-config.tau_prep);
    const double sigma = single_sensor_sigma(config.atoms, config.sensitivity);
    const double m = static_cast<double>(m_fused);
    const bool entangled_shot = rng.uniform01() < v_eff * v_eff;
    const double sd = entangled_shot ? sigma / m : sigma / std::sqrt(m);
    return rng.gaussian(config.t_true, sd);
}

struct ErrorAccumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    double sum_quad = 0.0;
    long count = 0;

    void add(double e) {
        sum += e;
        sum_sq += e * e;
        sum_quad += e * e * e * e;
        ++count;
    }

    TrialStats finish(Method method, int sensors) const {
        const double n = static_cast<double>(count);
        const double mse = sum_sq / n;
        const double rmse = std::sqrt(mse);
        // Delta method: Var(rmse) ~= Var(mse) / (4 mse).
        const double var_mse = std::max(0.0, sum_quad / n - mse * mse) / n;
        const double stderr_rmse = rmse > 0.0 ? std::sqrt(var_mse) / (2.0 * rmse) : 0.0;
        return TrialStats{method, sensors, rmse, stderr_rmse, sum / n};
    }
};

} // namespace

std::string method_name(Method method) {
    switch (method) {
        case Method::Naive: return "naive";
        case Method::BrooksIyengar: return "brooks-iyengar";
        case Method::Outlier: return "outlier";
        case Method::Bayesian: return "bayesian";
        case Method::Kalman: return "kalman";
        case Method::Entangled: return "entangled";
    }
    throw InvalidArgument("unknown method enum value");
}

Method method_from_name(const std::string& name) {
    if (name == "naive") return Method::Naive;
    if (name == "brooks-iyengar" || name == "bi") return Method::BrooksIyengar;
    if (name == "outlier") return Method::Outlier;
    if (name == "bayesian") return Method::Bayesian;
    if (name == "kalman") return Method::Kalman;
    if (name == "entangled") return Method::Entangled;
    throw InvalidArgument("unknown method name: " + name);
}

void ExperimentConfig::validate() const {
    if (atoms < 1) {
        throw InvalidArgument("config requires atoms >= 1");
    }
    if (!std::isfinite(sensitivity) || sensitivity <= 0.0) {
        throw InvalidArgument("config requires positive sensitivity");
    }
    if (!std::isfinite(t_true)) {
        throw InvalidArgument("config requires finite t_true");
    }
    if (trials < 1) {
        throw InvalidArgument("config requires trials >= 1");
    }
    if (sensor_counts.empty()) {
        throw InvalidArgument("config requires at least one sensor count");
    }
    for (int m : sensor_counts) {
        if (m < 1) {
            throw InvalidArgument("config sensor counts must be >= 1");
        }
    }
    if (!std::isfinite(fault_fraction) || fault_fraction < 0.0 || fault_fraction >= 1.0) {
        throw InvalidArgument("config requires fault_fraction in [0, 1)");
    }
    if (!std::isfinite(visibility) || visibility <= 0.0 || visibility > 1.0) {
        throw InvalidArgument("config requires visibility in (0, 1]");
    }
    if (!std::isfinite(tau_prep) || tau_prep < 0.0) {
        throw InvalidArgument("config requires tau_prep >= 0");
    }
    if (!std::isfinite(alpha) || alpha <= 0.0 || alpha >= 1.0) {
        throw InvalidArgument("config requires alpha in (0, 1)");
    }
    if (methods.empty()) {
        throw InvalidArgument("config requires at least one method");
    }
    byzantine.validate();
    for (int m : sensor_counts) {
        // Throws FaultBudgetExceeded when the induced f breaks the strategy's
        // budget at this sensor count.
        m_eff(m, fault_count(fault_fraction, m), strategy);
    }
}

std::vector<TrialStats> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::vector<Method> methods = unique_methods(config.methods);
    const bool needs_readings =
        std::any_of(methods.begin(), methods.end(),
                    [](Method m) { return m != Method::Entangled; });

    SensorParams honest;
    honest.atoms = config.atoms;
    honest.sensitivity = config.sensitivity;
    honest.visibility0 = config.visibility;
    honest.t2 = 1.0;
    honest.mode = config.visibility == 1.0 ? SensorMode::Coherent : SensorMode::Decohered;

    SensorParams corrupted = honest;
    corrupted.mode = SensorMode::Byzantine;

    const double r_per_sensor =
        1.0 / (4.0 * static_cast<double>(config.atoms) * config.sensitivity * config.sensitivity);

    std::vector<TrialStats> results;
    results.reserve(config.sensor_counts.size() * methods.size());

    for (int sensors : config.sensor_counts) {
        const int faults = fault_count(config.fault_fraction, sensors);
        const int m_fused = m_eff(sensors, faults, config.strategy);
        std::map<Method, ErrorAccumulator> acc;

        std::vector<SensorReading> readings;
        std::vector<double> estimates;
        std::vector<double> visibilities;
        std::vector<Interval> intervals;

        for (int trial = 0; trial < config.trials; ++trial) {
            if (needs_readings) {
                SplitMix64 rng(stream_seed(
                    config.seed, lane_key(kReadingsLane, static_cast<std::uint64_t>(sensors)),
                    static_cast<std::uint64_t>(trial)));
                const std::vector<char> faulty = sample_fault_flags(rng, sensors, faults);

                readings.clear();
                estimates.clear();
                visibilities.clear();
                intervals.clear();
                for (int id = 0; id < sensors; ++id) {
                    const SensorParams& params =
                        faulty[static_cast<std::size_t>(id)] ? corrupted : honest;
                    readings.push_back(sample_measurement(params, config.t_true,
                                                          config.byzantine, rng, id, 0.0,
                                                          config.alpha));
                    estimates.push_back(readings.back().estimate);
                    visibilities.push_back(readings.back().visibility);
                    intervals.push_back(readings.back().interval);
                }
            }

            for (Method method : methods) {
                double estimate = 0.0;
                switch (method) {
                    case Method::Naive:
                        estimate = simple_average(estimates);
                        break;
                    case Method::BrooksIyengar:
                        estimate = brooks_iyengar_fuse(intervals).estimate;
                        break;
                    case Method::Outlier:
                        estimate = predictive_outlier_fuse(readings).estimate;
                        break;
                    case Method::Bayesian:
                        estimate = bayesian_weighted_fuse(estimates, visibilities);
                        break;
                    case Method::Kalman: {
                        // One filter step from a diffuse prior on this trial's
                        // averaged measurement; r is the per-sensor variance
                        // the update divides by the sensor count.
                        const KalmanState prior{0.0, 1e12, 0.0, r_per_sensor};
                        estimate =
                            kalman_step(prior, simple_average(estimates), sensors).mean;
                        break;
                    }
                    case Method::Entangled: {
                        SplitMix64 ent_rng(stream_seed(
                            config.seed,
                            lane_key(kEntangledLane, static_cast<std::uint64_t>(sensors)),
                            static_cast<std::uint64_t>(trial)));
                        estimate = entangled_estimate(ent_rng, config, m_fused);
                        break;
                    }
                }
                acc[method].add(estimate - config.t_true);
            }
        }

        for (Method method : methods) {
            results.push_back(acc[method].finish(method, sensors));
        }
    }
    return results;
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) {
        throw InvalidArgument("fit_loglog_slope requires at least 3 points");
    }
    double sx = 0.0, sy = 0.0;
    for (const auto& [m, rmse] : points) {
        if (!(m > 0.0) || !(rmse > 0.0)) {
            throw InvalidArgument("fit_loglog_slope requires positive coordinates");
        }
        sx += std::log10(m);
        sy += std::log10(rmse);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [m, rmse] : points) {
        const double dx = std::log10(m) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log10(rmse) - my);
    }
    if (sxx == 0.0) {
        throw InvalidArgument("fit_loglog_slope requires at least two distinct M values");
    }
    return sxy / sxx;
}

std::vector<std::pair<double, double>> local_slope_curve(
    const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) {
        throw InvalidArgument("local_slope_curve requires at least 2 points");
    }
    std::vector<std::pair<double, double>> slopes;
    slopes.reserve(points.size() - 1);
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto& [m0, r0] = points[i];
        const auto& [m1, r1] = points[i + 1];
        if (!(m0 > 0.0) || !(m1 > 0.0) || !(r0 > 0.0) || !(r1 > 0.0)) {
            throw InvalidArgument("local_slope_curve requires positive coordinates");
        }
        if (!(m1 > m0)) {
            throw InvalidArgument("local_slope_curve requires strictly increasing M");
        }
        slopes.emplace_back(m1, (std::log10(r1) - std::log10(r0)) /
                                    (std::log10(m1) - std::log10(m0)));
    }
    return slopes;
}

std::vector<RecoveryGain> byzantine_recovery_gain(const ExperimentConfig& config) {
    if (!(config.fault_fraction > 0.0)) {
        throw InvalidArgument("byzantine_recovery_gain requires a positive fault fraction");
    }
    ExperimentConfig run = config;
    if (std::find(run.methods.begin(), run.methods.end(), Method::Naive) ==
        run.methods.end()) {
        run.methods.insert(run.methods.begin(), Method::Naive);
    }
    const std::vector<TrialStats> stats = run_experiment(run);

    std::map<int, double> naive_rmse;
    for (const TrialStats& stat : stats) {
        if (stat.method == Method::Naive) {
            naive_rmse[stat.sensors] = stat.rmse;
        }
    }
    std::vector<RecoveryGain> gains;
    gains.reserve(stats.size());
    for (const TrialStats& stat : stats) {
        gains.push_back(RecoveryGain{
            stat.method, stat.sensors,
            20.0 * std::log10(naive_rmse.at(stat.sensors) / stat.rmse)});
    }
    return gains;
}

CrossoverResult empirical_crossover(const ExperimentConfig& config, Strategy strategy) {
    config.validate();
    const int sensors = config.sensor_counts.front();
    const int faults = fault_count(config.fault_fraction, sensors);
    const int m_classical = m_eff(sensors, faults, Strategy::BFT);
    const int m_entangled = m_eff(sensors, faults, strategy);
    const double sigma = single_sensor_sigma(config.atoms, config.sensitivity);
    const double overhead = std::exp(-config.tau_prep);

    // Classical reference: the idealized BFT consensus running at its
    // standard quantum limit — the faults cost 2f sensors, the surviving
    // fully-coherent sensors are averaged.
    double sum_sq = 0.0;
    for (int trial = 0; trial < config.trials; ++trial) {
        SplitMix64 rng(stream_seed(
            config.seed, lane_key(kCrossClassicalLane, static_cast<std::uint64_t>(sensors)),
            static_cast<std::uint64_t>(trial)));
        double mean_est = 0.0;
        for (int i = 0; i < m_classical; ++i) {
            mean_est += rng.gaussian(0.0, sigma);
        }
        mean_est /= static_cast<double>(m_classical);
        sum_sq += mean_est * mean_est;
    }
    const double classical_rmse = std::sqrt(sum_sq / static_cast<double>(config.trials));

    // Entangled arm: contrast-loss noise 1/(2 sqrt(N) eta V_eff m_eff).
    int probe = 0;
    const auto entangled_rmse = [&](double v) -> double {
        const double v_eff = v * overhead;
        if (!(v_eff > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        const double sd = sigma / (v_eff * static_cast<double>(m_entangled));
        const std::uint64_t lane =
            lane_key(kCrossProbeLane, static_cast<std::uint64_t>(sensors),
                     static_cast<std::uint64_t>(probe++));
        double s = 0.0;
        for (int trial = 0; trial < config.trials; ++trial) {
            SplitMix64 rng(stream_seed(config.seed, lane, static_cast<std::uint64_t>(trial)));
            const double e = rng.gaussian(0.0, sd);
            s += e * e;
        }
        return std::sqrt(s / static_cast<double>(config.trials));
    };

    double lo = 1e-3; // V = 0 is divergent; start just above it
    double hi = 1.0;
    if (entangled_rmse(hi) > classical_rmse) {
        return CrossoverResult{1.0, true}; // classical wins over the whole range
    }
    if (entangled_rmse(lo) < classical_rmse) {
        return CrossoverResult{0.0, true}; // entangled wins over the whole range
    }
    while (hi - lo > 0.01) {
        const double mid = 0.5 * (lo + hi);
        if (entangled_rmse(mid) > classical_rmse) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return CrossoverResult{0.5 * (lo + hi), false};
}

OverlapSnapshot overlap_snapshot(const ExperimentConfig& config, Scenario scenario) {
    config.validate();
    const int sensors = config.sensor_counts.front();
    const int faults =
        scenario == Scenario::NoFault ? 0 : fault_count(config.fault_fraction, sensors);

    SensorParams honest;
    honest.atoms = config.atoms;
    honest.sensitivity = config.sensitivity;
    honest.visibility0 = config.visibility;
    honest.t2 = 1.0;
    honest.mode = config.visibility == 1.0 ? SensorMode::Coherent : SensorMode::Decohered;
    SensorParams corrupted = honest;
    corrupted.mode = SensorMode::Byzantine;

    SplitMix64 rng(stream_seed(config.seed,
                               lane_key(kSnapshotLane, static_cast<std::uint64_t>(sensors)),
                               static_cast<std::uint64_t>(scenario)));
    const std::vector<char> faulty = sample_fault_flags(rng, sensors, faults);

    std::vector<SensorReading> readings;
    std::vector<double> estimates;
    std::vector<Interval> intervals;
    for (int id = 0; id < sensors; ++id) {
        const bool is_byz = faulty[static_cast<std::size_t>(id)] != 0;
        // In the decohered scenario honest sensors measure progressively
        // later, so their visibility has decayed progressively further.
        const double timestamp =
            (scenario == Scenario::ByzantineDecohered && !is_byz)
                ? static_cast<double>(id + 1) / static_cast<double>(sensors)
                : 0.0;
        readings.push_back(sample_measurement(is_byz ? corrupted : honest, config.t_true,
                                              config.byzantine, rng, id, timestamp,
                                              config.alpha));
        estimates.push_back(readings.back().estimate);
        intervals.push_back(readings.back().interval);
    }

    const FusionResult fused = brooks_iyengar_fuse(intervals);

    OverlapSnapshot snapshot;
    snapshot.scenario = scenario;
    snapshot.t_true = config.t_true;
    snapshot.regions = max_overlap_regions(intervals);
    snapshot.bi_estimate = fused.estimate;
    snapshot.naive_estimate = simple_average(estimates);
    for (int id = 0; id < sensors; ++id) {
        const std::size_t i = static_cast<std::size_t>(id);
        SnapshotSensor row;
        row.sensor_id = id;
        row.estimate = readings[i].estimate;
        row.interval = readings[i].interval;
        row.visibility = readings[i].visibility;
        row.score = fused.scores[i];
        row.fault_class = classify_score(row.score);
        row.excluded = fused.excluded.count(id) != 0;
        row.byzantine = faulty[i] != 0;
        snapshot.sensors.push_back(row);
    }
    return snapshot;
}

} // namespace qfuse
