#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "polymerflow/field_sim.hpp"

namespace polymerflow {

// Radius of one path: time average of the squared deviation from the
// center of mass, by grid quadrature (R) and by Parseval over the
// orthonormal modes (R_spec).
struct RadiusReport {
    double T = 0.0;
    double J = 1.0;
    double R = 0.0;
    double R_spec = 0.0;
    std::vector<double> theta2_trace;  // per-snapshot squared deviation
};

RadiusReport radius(const PathSample& path);

// Cheap modes-only radius, identical to RadiusReport::R_spec.
double spectral_radius(const PathSample& path);

// Per-mode time averages (1/T) int X_n^2 dt for n = 1..N; their sum over n,
// divided by J, is the squared spectral radius.
std::vector<double> parseval_decomposition(const PathSample& path);

// Partial sum of (1/pi^2) sum n^-2 [cos(pi n x1) - cos(pi n x2)]^2 with the
// 4/(pi^2 n_max) tail bound attached.
struct SeriesValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

SeriesValue increment_variance(double x1, double x2, long n_max);

// n_max -> infinity limit of the same series; equals |x1 - x2| / 2.
double increment_variance_limit(double x1, double x2);

// Mean spatial profile created by a unit tilt, and its gap between two points.
double drift_profile(double x);                 // sqrt(2) cos(pi x) / pi^2
double drift_gap(double x1, double x2);
double drift_gap_lower_bound(double x1, double x2);  // piecewise product bound

// Density at zero of the pinned-field increment u(x2) - u(x1) under tilt a:
// Gaussian with mean a * drift_gap and variance increment_variance_limit.
double pinned_increment_density0(double x1, double x2, double a);

// Expected self-intersection of the tilted pinned field per unit time:
// the double integral of pinned_increment_density0 over the unit square,
// with the |x1-x2|^{-1/2} diagonal handled by a sqrt substitution and
// geometric panels.
struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool warning = false;  // estimated error above 0.5%
};

QuadratureResult overlap_integral(double a);

// Large-deviation rate of the time average of a squared OU process.
double ldp_rate(double c, double gamma);

struct OuTailPoint {
    double T = 0.0;
    double p_hat = 0.0;
    long exceedances = 0;
    double rate = 0.0;       // -(1/T) log p_hat
    bool low_count = false;  // fewer than 50 exceedances
    double mean_time_avg = 0.0;
    double mean_se = 0.0;
};

struct OuTailReport {
    double gamma = 1.0;
    double c = 1.0;
    double dt = 0.01;
    long n_samples = 0;
    bool stationary_start = false;
    std::vector<OuTailPoint> points;
    // log(p_i / p_{i+1}) / (T_{i+1} - T_i): cancels the T-independent
    // prefactor that dominates the per-T rates at moderate horizons.
    std::vector<double> differenced_rates;
};

OuTailReport ou_tail_experiment(double gamma, std::span<const double> T_list, double c,
                                long n_samples, std::uint64_t seed,
                                bool stationary_start = false, double dt = 0.01,
                                int workers = 1);

// KS p-value between the law of (1/T) int X_n^2 dt for the spectral mode n
// and the rescaled unit-rate OU prediction (pi n)^{-2} (1/T') int Y^2.
double ou_coupling_ks_pvalue(int mode_n, double T, int n_samples, std::uint64_t seed,
                             double dt = 0.002);

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

// Weighted least squares of log R against log J.
ExponentFit fit_scaling_exponent(std::span<const double> J, std::span<const double> R,
                                 std::span<const double> R_stderr);

struct Rational {
    long num = 0;
    long den = 1;
    double value() const { return static_cast<double>(num) / den; }
};

enum class FloryCase { MovingPolymer1D, MovingPolymer2D, Saw2D };

// Solves the repulsion/elastic exponent balance exactly.
Rational flory_balance(FloryCase which);

}  // namespace polymerflow
