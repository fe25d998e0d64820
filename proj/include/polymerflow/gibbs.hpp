#pragma once

#include <cstdint>
#include <vector>

#include "polymerflow/field_sim.hpp"

namespace polymerflow {

// Importance-weighted collection of paths representing the Gibbs measure.
struct WeightedEnsemble {
    std::vector<PathSample> paths;
    std::vector<double> log_weights;
    double ess = 0.0;
    bool degeneracy_warning = false;  // ess < 10% of the ensemble size
};

// log_weights = -beta * energy; energies must already be on the paths.
WeightedEnsemble reweight(std::vector<PathSample> paths, double beta);

// Self-normalized Gibbs mean of a per-path functional with its standard error.
struct QMean {
    double mean = 0.0;
    double se = 0.0;
};

QMean q_mean(const WeightedEnsemble& ensemble, std::span<const double> values);

struct HFactor {
    double beta = 0.0;
    double J = 0.0;
    double value = 1.0;
};

// 1 below the crossover beta J^{7/2} = e, log(beta J^{7/2}) above.
HFactor h_factor(double beta, double J);

// log of the tilted measure's normalizing constant: T a^2 / 2.
double tilt_log_normalizer(double T, double a);

// Variational lower bound on the free-energy rate (1/T) log Z.
struct PartitionBound {
    double beta_scaled = 0.0;        // beta J^{7/2}
    double rate_unit_interval = 0.0; // -beta_scaled * I1(a) - a^2/2
    double rate = 0.0;               // J-rescaled: rate_unit_interval / J^2
    double a_recommended = 0.0;      // (beta_scaled / e)^{1/3}
};

PartitionBound partition_lower_bound(double beta, double J, double a);

struct McmcDiagnostics {
    double acceptance_rate = 0.0;
    bool acceptance_out_of_range = false;  // outside [5%, 95%]: retune the step
    double pcn_step_initial = 0.0;
    double pcn_step_final = 0.0;
    double autocorr_time = 1.0;
    int thin = 1;
    int burn_in = 0;
    std::vector<double> energy_trace;  // post burn-in, one entry per sweep
    std::vector<double> radius_trace;

    nlohmann::json to_json() const;
};

// Preconditioned Crank-Nicolson chain on the driving noise of the path.
// The prior on the noise is exactly N(0, I), so the proposal
// sqrt(1-s^2) xi + s eta preserves the free measure and acceptance depends
// only on the energy difference. Returns thinned states with unit weights.
WeightedEnsemble mcmc_sample(const SimConfig& config, double beta, int n_sweeps,
                             double pcn_step, std::uint64_t seed,
                             McmcDiagnostics* diagnostics = nullptr,
                             int keep_max = 256, double bin_width = 0.0,
                             double target_acceptance = 0.3);

// Versioned ensemble record; per-path seeds travel inside each path's config.
nlohmann::json ensemble_to_json(const WeightedEnsemble& ensemble);
WeightedEnsemble ensemble_from_json(const nlohmann::json& j);

}  // namespace polymerflow
