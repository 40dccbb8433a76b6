#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cbb84::stats {

/// Error rate `r` estimated from `n` sampled bits.
struct SamplingModel {
    double r = 0.0;
    std::uint64_t n = 1;
};

/// Threshold `T` of the code and starting error rate `r0` for repeated purification.
struct RecursionModel {
    double threshold = 0.0;
    double r0 = 0.0;
};

/// Throws std::invalid_argument unless 0 <= r <= 1 and n >= 1.
void validate(const SamplingModel& model);
/// Throws std::invalid_argument unless 0 < T < 1 and 0 < r0 < 1.
void validate(const RecursionModel& model);

/// sqrt(r (1 - r) / n)
double sigma(const SamplingModel& model);

/// r + z * sigma, clamped to [0, 1]. Requires z >= 0.
double confidence_threshold(const SamplingModel& model, double z);

/// Standard normal upper tail 1 - Phi(x).
double normal_upper_tail(double x);

/// Gaussian probability that the true rate exceeds `threshold` given the
/// estimate r: 1 - Phi((threshold - r) / sigma). Requires threshold >= r.
/// A degenerate model (sigma = 0) yields 0.
double cheat_probability(const SamplingModel& model, double threshold);

/// Exact binomial tail P(X / n > threshold) for X ~ Bin(n, r). Requires n <= 10^6.
double cheat_probability_binomial(const SamplingModel& model, double threshold);

struct RecursionStep {
    std::size_t step = 0;  ///< 1-based index i of r_i
    double rate = 0.0;
    /// Value fell below the normal double range (subnormal or floored).
    bool underflow = false;
    /// exp() returned zero and the value was raised to the smallest positive double.
    bool floored = false;
};

/// r_{i+1} = exp(-T^2 / r_i), for i = 0 .. steps-1; returns r_1 .. r_steps.
std::vector<RecursionStep> iterate_error_rate(const RecursionModel& model, std::size_t steps);

}  // namespace cbb84::stats
