#include "qfuse/sensor.hpp"

#include <cmath>
#include <string>

#include "qfuse/stats.hpp"

namespace qfuse {

void SensorParams::validate() const {
    if (atoms < 1) throw InvalidArgument("SensorParams: atoms must be >= 1");
    if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
        throw InvalidArgument("SensorParams: sensitivity must be positive");
    }
    if (!(visibility0 >= 0.0 && visibility0 <= 1.0)) {
        throw InvalidArgument("SensorParams: visibility0 must lie in [0, 1]");
    }
    if (!(t2 > 0.0)) throw InvalidArgument("SensorParams: t2 must be positive");
    if (mode == SensorMode::Coherent && visibility0 != 1.0) {
        throw InvalidArgument("SensorParams: Coherent mode requires visibility0 = 1");
    }
}

void ByzantineModel::validate() const {
    if (!(spread >= 0.0) || !std::isfinite(spread) || !std::isfinite(offset)) {
        throw InvalidArgument("ByzantineModel: spread must be finite and >= 0");
    }
}

double phase_from_parameter(double t, double eta) {
    if (!std::isfinite(t) || !std::isfinite(eta)) {
        throw InvalidArgument("phase_from_parameter: non-finite input");
    }
    if (!(eta > 0.0)) throw InvalidArgument("phase_from_parameter: eta must be positive");
    return eta * t;
}

double effective_visibility(double v0, double t, double t2) {
    if (!(v0 >= 0.0 && v0 <= 1.0)) {
        throw InvalidArgument("effective_visibility: v0 must lie in [0, 1]");
    }
    if (!(t >= 0.0)) throw InvalidArgument("effective_visibility: t must be >= 0");
    if (!(t2 > 0.0)) throw InvalidArgument("effective_visibility: t2 must be positive");
    return v0 * std::exp(-t / t2);
}

double phase_variance(int atoms, double visibility) {
    if (atoms < 1) throw InvalidArgument("phase_variance: atoms must be >= 1");
    if (visibility == 0.0) {
        throw DivergentVariance("phase_variance: fully decohered sensor (V = 0)");
    }
    if (!(visibility > 0.0 && visibility <= 1.0)) {
        throw InvalidArgument("phase_variance: visibility must lie in (0, 1]");
    }
    return 1.0 / (4.0 * static_cast<double>(atoms) * visibility * visibility);
}

Interval confidence_interval(double estimate, int atoms, double eta,
                             double visibility, double alpha) {
    if (visibility == 0.0) {
        throw DivergentVariance("confidence_interval: fully decohered sensor (V = 0)");
    }
    if (!(visibility > 0.0 && visibility <= 1.0)) {
        throw InvalidArgument("confidence_interval: visibility must lie in (0, 1]");
    }
    if (!(eta > 0.0)) throw InvalidArgument("confidence_interval: eta must be positive");
    if (atoms < 1) throw InvalidArgument("confidence_interval: atoms must be >= 1");
    const double z = two_sided_z(alpha);
    const double w = 1.0 / (2.0 * std::sqrt(static_cast<double>(atoms)) * eta * visibility);
    return Interval(estimate - z * w, estimate + z * w);
}

namespace {

SensorReading byzantine_reading(double t_true, const ByzantineModel& byz,
                                SplitMix64& rng, int sensor_id, double timestamp,
                                double alpha) {
    double estimate = 0.0;
    double half = 0.0;
    const double z = two_sided_z(alpha);
    switch (byz.kind) {
    case ByzantineKind::ConstantOffset:
        estimate = t_true + byz.offset + byz.spread * rng.uniform(-1.0, 1.0);
        half = z * byz.spread;
        break;
    case ByzantineKind::UniformArbitrary:
        estimate = t_true + rng.uniform(-byz.spread, byz.spread);
        half = z * byz.spread;
        break;
    case ByzantineKind::WideInterval:
        estimate = t_true + byz.offset + byz.spread * rng.uniform(-1.0, 1.0);
        half = 5.0 * z * byz.spread;
        break;
    }
    SensorReading r;
    r.sensor_id = sensor_id;
    r.estimate = estimate;
    r.interval = Interval(estimate - half, estimate + half);
    r.visibility = 0.0;
    r.timestamp = timestamp;
    return r;
}

} // namespace

SensorReading sample_measurement(const SensorParams& params, double t_true,
                                 const ByzantineModel& byz, SplitMix64& rng,
                                 int sensor_id, double timestamp, double alpha) {
    params.validate();
    byz.validate();
    if (!std::isfinite(t_true)) {
        throw InvalidArgument("sample_measurement: t_true must be finite");
    }

    if (params.mode == SensorMode::Byzantine) {
        return byzantine_reading(t_true, byz, rng, sensor_id, timestamp, alpha);
    }

    const double v = effective_visibility(params.visibility0, timestamp, params.t2);
    if (v == 0.0) {
        throw DivergentVariance("sample_measurement: sensor visibility decayed to 0");
    }
    // parameter-space sigma: sqrt(1 / (4 N eta^2 V^2))
    const double sigma =
        1.0 / (2.0 * std::sqrt(static_cast<double>(params.atoms)) * params.sensitivity * v);

    SensorReading r;
    r.sensor_id = sensor_id;
    r.estimate = rng.gaussian(t_true, sigma);
    r.interval = confidence_interval(r.estimate, params.atoms, params.sensitivity, v, alpha);
    r.visibility = v;
    r.timestamp = timestamp;
    return r;
}

} // namespace qfuse
