#pragma once

#include <cstdint>

#include "qfuse/interval.hpp"
#include "qfuse/rng.hpp"

namespace qfuse {

enum class SensorMode { Coherent, Decohered, Byzantine };

/// Per-sensor physics: atom count N, sensitivity eta (rad per parameter
/// unit), initial visibility V0, coherence time T2, and fault mode.
struct SensorParams {
    int atoms = 1000;
    double sensitivity = 0.1;
    double visibility0 = 1.0;
    double t2 = 1.0;
    SensorMode mode = SensorMode::Coherent;

    /// Throws InvalidArgument on any violated field invariant.
    void validate() const;
};

enum class ByzantineKind { ConstantOffset, UniformArbitrary, WideInterval };

/// How a Byzantine sensor fabricates its report. The offset shifts the
/// reported center away from the truth; the spread jitters the estimate and
/// sets the width of the reported interval.
struct ByzantineModel {
    ByzantineKind kind = ByzantineKind::ConstantOffset;
    double offset = 5.0;
    double spread = 1.0;

    void validate() const;
};

/// One sensor report: point estimate, confidence interval, visibility tag.
struct SensorReading {
    int sensor_id = 0;
    double estimate = 0.0;
    Interval interval{};
    double visibility = 1.0;
    double timestamp = 0.0;
};

/// Phase shift theta = eta * T imprinted by the parameter.
double phase_from_parameter(double t, double eta);

/// Exponential visibility decay V(t) = v0 * exp(-t / t2).
double effective_visibility(double v0, double t, double t2);

/// Phase variance 1/(4 N V^2) of a projective readout at visibility V.
/// Throws DivergentVariance at V = 0.
double phase_variance(int atoms, double visibility);

/// Parameter-space confidence interval at level 1 - alpha:
/// estimate +/- z_{alpha/2} / (2 sqrt(N) eta V).
Interval confidence_interval(double estimate, int atoms, double eta,
                             double visibility, double alpha);

/// Draw one reading. Honest sensors sample a Gaussian at the projection
/// noise of their current visibility; Byzantine sensors fabricate a report
/// per the ByzantineModel. Deterministic given the rng state.
SensorReading sample_measurement(const SensorParams& params, double t_true,
                                 const ByzantineModel& byz, SplitMix64& rng,
                                 int sensor_id = 0, double timestamp = 0.0,
                                 double alpha = 0.05);

} // namespace qfuse
