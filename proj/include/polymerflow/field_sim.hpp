#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polymerflow/spectral.hpp"

#include <json.hpp>

namespace polymerflow {

enum class InitialCondition { Zero, Stationary, Explicit };

struct SimConfig {
    double J = 1.0;
    double T = 1.0;
    double dt = 0.01;
    int obs_stride = 1;      // snapshots kept every obs_stride steps
    int modes = 256;         // N
    int grid = 512;          // M
    InitialCondition u0 = InitialCondition::Stationary;
    std::vector<double> u0_values;  // explicit u0 on the M+1 grid
    double tilt = 0.0;              // drift amplitude a
    std::uint64_t seed = 0;
    bool noise = true;              // off = deterministic validation mode
    double tail_budget = 1e-3;      // warn when tail_variance(N,J) exceeds this

    int n_steps() const;
    int n_obs() const;  // number of stored snapshots, including t=0

    // Throws std::invalid_argument on hard errors; returns soft warnings.
    std::vector<std::string> validate() const;
};

// The complete set of standard normals that drives one path.
struct DrivingNoise {
    std::vector<double> init;         // modes (one per mode 1..N; unused entries 0)
    std::vector<double> innovations;  // n_steps x (N+1), row-major
};

DrivingNoise draw_noise(const SimConfig& config);

struct PathSample {
    SimConfig config;
    std::vector<double> times;        // observation instants, 0 .. T
    std::vector<double> mode_matrix;  // n_obs x (N+1), row-major
    std::optional<double> energy;     // time integral of the self-intersection
    double log_weight = 0.0;          // log d(tilted)/d(free) along the path
    std::uint64_t rng_fingerprint = 0;

    int n_obs() const { return static_cast<int>(times.size()); }
    int n_modes() const { return config.modes; }
    std::span<const double> modes_at(int obs) const {
        return {mode_matrix.data() + static_cast<std::size_t>(obs) * (config.modes + 1),
                static_cast<std::size_t>(config.modes + 1)};
    }
    ModeState state_at(int obs) const;
};

// Evolves every mode by its exact transition; deterministic in (config, seed).
PathSample simulate(const SimConfig& config);

// Deterministic path map given the noise (used by the pCN sampler).
PathSample simulate_from_noise(const SimConfig& config, const DrivingNoise& noise);

// Same dynamics under the drift tilt a phi_1: mode 1 acquires a constant
// drift and the exact log Radon-Nikodym weight is accumulated from the
// bridged Brownian increments of mode 1.
PathSample simulate_tilted(const SimConfig& config);

// Stationary pinned field on [0,1]: u(0,x) - u(0,x0) sampled by modes.
struct PinnedField {
    double x0 = 0.5;
    double tilt = 0.0;
    std::vector<double> values;  // grid values of the pinned difference, M+1 points

    int cells() const { return static_cast<int>(values.size()) - 1; }
};

PinnedField sample_pinned(double x0, double tilt, int modes, int grid_cells,
                          std::uint64_t seed);

// Two-sample KS statistic between the laws of u(t1,x1)-u(t1,x2) and
// u(t2,x1)-u(t2,x2) over an ensemble of independent paths.
double shift_invariance_check(const SimConfig& config, double t1, double t2,
                              int n_samples, double x1, double x2,
                              double* p_value = nullptr, int workers = 1);

// Pathwise transform v(t,x) = J^{-1/2} u(J^2 t, J x): maps a path on [0,J]
// to one on [0,1] exactly in mode coordinates. Requires tilt = 0; stored
// energy is dropped so downstream estimates are recomputed on the new scale.
PathSample to_unit_interval(const PathSample& path);
PathSample from_unit_interval(const PathSample& path, double J);

nlohmann::json to_json(const PathSample& path);
PathSample path_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& config);
SimConfig config_from_json(const nlohmann::json& j);

}  // namespace polymerflow
