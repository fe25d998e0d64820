#include "polymerflow/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polymerflow/analysis.hpp"
#include "polymerflow/local_time.hpp"
#include "polymerflow/rng.hpp"
#include "polymerflow/stats.hpp"

namespace polymerflow {

WeightedEnsemble reweight(std::vector<PathSample> paths, double beta) {
    if (paths.empty()) throw std::invalid_argument("reweight: empty ensemble");
    WeightedEnsemble out;
    out.log_weights.reserve(paths.size());
    for (const auto& p : paths) {
        if (!p.energy) throw std::invalid_argument("reweight: path energy missing");
        out.log_weights.push_back(-beta * *p.energy);
    }
    out.paths = std::move(paths);
    out.ess = effective_sample_size(out.log_weights);
    out.degeneracy_warning = out.ess < 0.1 * out.paths.size();
    return out;
}

QMean q_mean(const WeightedEnsemble& ensemble, std::span<const double> values) {
    const WeightedMean wm = weighted_mean(values, ensemble.log_weights);
    return {wm.mean, wm.se};
}

HFactor h_factor(double beta, double J) {
    if (!(beta > 0.0) || !(J > 0.0))
        throw std::invalid_argument("h_factor: beta and J must be positive");
    const double z = beta * std::pow(J, 3.5);
    HFactor h{beta, J, 1.0};
    if (z > std::exp(1.0)) h.value = std::log(z);
    return h;
}

double tilt_log_normalizer(double T, double a) {
    if (T < 0.0) throw std::invalid_argument("tilt_log_normalizer: T must be >= 0");
    return 0.5 * T * a * a;
}

PartitionBound partition_lower_bound(double beta, double J, double a) {
    if (!(beta > 0.0) || !(a > 0.0))
        throw std::invalid_argument("partition_lower_bound: beta and a must be positive");
    PartitionBound b;
    b.beta_scaled = beta * std::pow(J, 3.5);
    const QuadratureResult i1 = overlap_integral(a);
    b.rate_unit_interval = -b.beta_scaled * i1.value - 0.5 * a * a;
    b.rate = b.rate_unit_interval / (J * J);
    b.a_recommended = std::cbrt(b.beta_scaled / std::exp(1.0));
    return b;
}

WeightedEnsemble mcmc_sample(const SimConfig& config, double beta, int n_sweeps,
                             double pcn_step, std::uint64_t seed,
                             McmcDiagnostics* diagnostics, int keep_max,
                             double bin_width, double target_acceptance) {
    if (!(pcn_step > 0.0) || pcn_step > 1.0)
        throw std::invalid_argument("mcmc_sample: pcn step must lie in (0,1]");
    if (n_sweeps < 10) throw std::invalid_argument("mcmc_sample: too few sweeps");
    if (config.tilt != 0.0)
        throw std::invalid_argument("mcmc_sample: chain runs on the free measure");
    config.validate();
    if (bin_width <= 0.0) bin_width = default_bin_width(config.J, config.grid);

    SimConfig chain_config = config;
    chain_config.seed = rng::Stream::derive(seed, rng::kChainInit).key;
    DrivingNoise noise = draw_noise(chain_config);
    const std::size_t n_init = noise.init.size();
    const std::size_t n_innov = noise.innovations.size();

    auto evaluate = [&](const DrivingNoise& nz, PathSample& path, double& energy,
                        double& rad) {
        path = simulate_from_noise(chain_config, nz);
        energy = path_energy(path, bin_width, beta).energy;
        rad = spectral_radius(path);
    };

    PathSample current;
    double energy = 0.0, rad = 0.0;
    evaluate(noise, current, energy, rad);

    const int burn_in = std::max(1, n_sweeps / 5);
    const auto accept_stream = rng::Stream::derive(seed, rng::kChainAccept);
    double s = pcn_step;
    long accepted = 0, accepted_tune = 0;
    const int tune_window = 20;

    McmcDiagnostics diag;
    diag.pcn_step_initial = pcn_step;
    diag.burn_in = burn_in;

    const int n_post = n_sweeps - burn_in;
    const int stride = std::max(1, (n_post + keep_max - 1) / std::max(1, keep_max));

    WeightedEnsemble out;
    DrivingNoise proposal;
    proposal.init.resize(n_init);
    proposal.innovations.resize(n_innov);
    PathSample cand;

    for (int sweep = 0; sweep < n_sweeps; ++sweep) {
        const auto prop_stream =
            rng::Stream::derive(seed, rng::kChainProposal, static_cast<std::uint64_t>(sweep));
        const double keep = std::sqrt(1.0 - s * s);
        for (std::size_t i = 0; i < n_init; ++i)
            proposal.init[i] = keep * noise.init[i] + s * prop_stream.normal(i);
        for (std::size_t i = 0; i < n_innov; ++i)
            proposal.innovations[i] =
                keep * noise.innovations[i] + s * prop_stream.normal(n_init + i);

        double cand_energy = 0.0, cand_rad = 0.0;
        evaluate(proposal, cand, cand_energy, cand_rad);
        const double log_u = std::log(1.0 - accept_stream.uniform(sweep));
        if (log_u < -beta * (cand_energy - energy)) {
            std::swap(noise.init, proposal.init);
            std::swap(noise.innovations, proposal.innovations);
            std::swap(current, cand);
            energy = cand_energy;
            rad = cand_rad;
            ++accepted;
            ++accepted_tune;
        }

        if (sweep < burn_in) {
            if ((sweep + 1) % tune_window == 0) {
                const double acc = static_cast<double>(accepted_tune) / tune_window;
                s = std::clamp(s * std::exp(0.3 * (acc - target_acceptance)), 1e-4, 1.0);
                accepted_tune = 0;
            }
            continue;
        }
        diag.energy_trace.push_back(energy);
        diag.radius_trace.push_back(rad);
        const int post_index = sweep - burn_in;
        if (post_index % stride == 0) {
            out.paths.push_back(current);
            out.paths.back().energy = energy;
        }
    }

    diag.acceptance_rate = static_cast<double>(accepted) / n_sweeps;
    diag.acceptance_out_of_range =
        beta > 0.0 && (diag.acceptance_rate < 0.05 || diag.acceptance_rate > 0.95);
    diag.pcn_step_final = s;
    diag.autocorr_time = integrated_autocorr_time(diag.energy_trace);
    diag.thin = stride;
    if (diagnostics) *diagnostics = diag;

    out.log_weights.assign(out.paths.size(), 0.0);
    out.ess = static_cast<double>(out.paths.size());
    out.degeneracy_warning = false;
    return out;
}

nlohmann::json McmcDiagnostics::to_json() const {
    return nlohmann::json{{"acceptance_rate", acceptance_rate},
                          {"acceptance_out_of_range", acceptance_out_of_range},
                          {"pcn_step_initial", pcn_step_initial},
                          {"pcn_step_final", pcn_step_final},
                          {"autocorr_time", autocorr_time},
                          {"thin", thin},
                          {"burn_in", burn_in}};
}

nlohmann::json ensemble_to_json(const WeightedEnsemble& ensemble) {
    nlohmann::json j;
    j["format"] = "polymerflow.ensemble";
    j["version"] = 1;
    j["ess"] = ensemble.ess;
    j["degeneracy_warning"] = ensemble.degeneracy_warning;
    j["log_weights"] = ensemble.log_weights;
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : ensemble.paths) paths.push_back(to_json(p));
    j["paths"] = std::move(paths);
    return j;
}

WeightedEnsemble ensemble_from_json(const nlohmann::json& j) {
    if (j.at("format") != "polymerflow.ensemble" || j.at("version").get<int>() != 1)
        throw std::invalid_argument("ensemble_from_json: unsupported record");
    WeightedEnsemble e;
    e.ess = j.at("ess");
    e.degeneracy_warning = j.at("degeneracy_warning");
    e.log_weights = j.at("log_weights").get<std::vector<double>>();
    for (const auto& pj : j.at("paths")) e.paths.push_back(path_from_json(pj));
    return e;
}

}  // namespace polymerflow
