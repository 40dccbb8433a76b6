#include "cbb84/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cbb84::stats {

void validate(const SamplingModel& model) {
    if (!(model.r >= 0.0 && model.r <= 1.0)) {
        throw std::invalid_argument("error rate r must be in [0, 1], got " + std::to_string(model.r));
    }
    if (model.n < 1) {
        throw std::invalid_argument("sample size n must be at least 1");
    }
}

void validate(const RecursionModel& model) {
    if (!(model.threshold > 0.0 && model.threshold < 1.0)) {
        throw std::invalid_argument("threshold T must be in (0, 1), got " + std::to_string(model.threshold));
    }
    if (!(model.r0 > 0.0 && model.r0 < 1.0)) {
        throw std::invalid_argument("initial rate r0 must be in (0, 1), got " + std::to_string(model.r0));
    }
}

double sigma(const SamplingModel& model) {
    validate(model);
    return std::sqrt(model.r * (1.0 - model.r) / static_cast<double>(model.n));
}

double confidence_threshold(const SamplingModel& model, double z) {
    if (!(z >= 0.0)) {
        throw std::invalid_argument("z must be non-negative");
    }
    return std::clamp(model.r + z * sigma(model), 0.0, 1.0);
}

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double cheat_probability(const SamplingModel& model, double threshold) {
    const double s = sigma(model);
    if (threshold < model.r) {
        throw std::invalid_argument("threshold must be at least r");
    }
    if (s == 0.0) return 0.0;
    return normal_upper_tail((threshold - model.r) / s);
}

double cheat_probability_binomial(const SamplingModel& model, double threshold) {
    validate(model);
    if (model.n > 1'000'000) {
        throw std::invalid_argument("exact binomial tail limited to n <= 10^6");
    }
    const auto n = model.n;
    const double r = model.r;
    // Smallest k with k / n > threshold.
    const double bound = threshold * static_cast<double>(n);
    auto first = static_cast<std::uint64_t>(std::max(0.0, std::floor(bound) + 1.0));
    if (first > n) return 0.0;
    if (r == 0.0) return first == 0 ? 1.0 : 0.0;
    if (r == 1.0) return 1.0;

    const double log_r = std::log(r);
    const double log_q = std::log1p(-r);
    const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
    double total = 0.0;
    for (std::uint64_t k = first; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double log_term = log_n_fact - std::lgamma(kd + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0) +
                                kd * log_r + static_cast<double>(n - k) * log_q;
        const double term = std::exp(log_term);
        total += term;
        // Past the mode the terms only shrink.
        if (kd > r * static_cast<double>(n) + 1.0 && term < total * 1e-17) break;
    }
    return std::min(total, 1.0);
}

std::vector<RecursionStep> iterate_error_rate(const RecursionModel& model, std::size_t steps) {
    validate(model);
    if (steps < 1) {
        throw std::invalid_argument("steps must be at least 1");
    }
    const double t2 = model.threshold * model.threshold;
    std::vector<RecursionStep> out;
    out.reserve(steps);
    double current = model.r0;
    for (std::size_t i = 1; i <= steps; ++i) {
        RecursionStep step;
        step.step = i;
        double next = std::exp(-t2 / current);
        if (next == 0.0) {
            next = std::numeric_limits<double>::denorm_min();
            step.floored = true;
        }
        step.underflow = next < std::numeric_limits<double>::min();
        step.rate = next;
        out.push_back(step);
        current = next;
    }
    return out;
}

}  // namespace cbb84::stats
