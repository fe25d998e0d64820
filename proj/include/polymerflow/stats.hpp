#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace polymerflow {

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

MeanSE mean_se(std::span<const double> xs);

double sample_variance(std::span<const double> xs);

// Self-normalized importance-sampling mean of f with delta-method standard
// error; weights are passed in log space.
struct WeightedMean {
    double mean = 0.0;
    double se = 0.0;
    double ess = 0.0;
};

WeightedMean weighted_mean(std::span<const double> values, std::span<const double> log_weights);

double effective_sample_size(std::span<const double> log_weights);

// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value.
double ks_two_sample(std::span<const double> a, std::span<const double> b,
                     double* p_value = nullptr);

// Integrated autocorrelation time 1 + 2 sum rho_k, summed until the first
// crossing below 0.05 (capped at n/4).
double integrated_autocorr_time(std::span<const double> trace);

// Simple worker pool: applies fn to 0..n-1, pulling indices atomically.
// workers <= 1 runs in the calling thread.
void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn);

}  // namespace polymerflow
