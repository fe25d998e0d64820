#include "polymerflow/field_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polymerflow/rng.hpp"
#include "polymerflow/stats.hpp"

namespace polymerflow {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double mode_lambda(int n, double J) { return static_cast<double>(n) * n * kPi * kPi / (J * J); }
}  // namespace

int SimConfig::n_steps() const { return static_cast<int>(std::llround(T / dt)); }

int SimConfig::n_obs() const { return n_steps() / obs_stride + 1; }

std::vector<std::string> SimConfig::validate() const {
    if (!(J > 0.0)) throw std::invalid_argument("config: J must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("config: T must be positive");
    if (!(dt > 0.0) || dt > T) throw std::invalid_argument("config: need 0 < dt <= T");
    const int steps = n_steps();
    if (steps < 1 || std::abs(steps * dt - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("config: dt must divide T");
    if (obs_stride < 1 || steps % obs_stride != 0)
        throw std::invalid_argument("config: obs_stride must divide the step count");
    if (modes < 1) throw std::invalid_argument("config: need at least one mode");
    if (grid < 2) throw std::invalid_argument("config: grid must have >= 2 cells");
    if (modes > grid) throw std::invalid_argument("config: modes must not exceed grid cells");
    if (u0 == InitialCondition::Explicit &&
        u0_values.size() != static_cast<std::size_t>(grid) + 1)
        throw std::invalid_argument("config: explicit u0 needs grid+1 values");
    if (!std::isfinite(tilt)) throw std::invalid_argument("config: tilt must be finite");
    std::vector<std::string> warnings;
    const double tail = tail_variance(modes, J);
    if (tail > tail_budget) {
        warnings.push_back("mode truncation bias " + std::to_string(tail) +
                           " exceeds budget " + std::to_string(tail_budget));
    }
    return warnings;
}

ModeState PathSample::state_at(int obs) const {
    ModeState s;
    s.J = config.J;
    s.time = times[obs];
    auto row = modes_at(obs);
    s.coefficients.assign(row.begin(), row.end());
    return s;
}

DrivingNoise draw_noise(const SimConfig& config) {
    config.validate();
    const int N = config.modes;
    const int steps = config.n_steps();
    DrivingNoise noise;
    noise.init.assign(N + 1, 0.0);
    const auto init_stream = rng::Stream::derive(config.seed, rng::kPathInit);
    for (int n = 1; n <= N; ++n) noise.init[n] = init_stream.normal(n);
    noise.innovations.assign(static_cast<std::size_t>(steps) * (N + 1), 0.0);
    const auto innov_stream = rng::Stream::derive(config.seed, rng::kPathInnovation);
    for (std::size_t i = 0; i < noise.innovations.size(); ++i)
        noise.innovations[i] = innov_stream.normal(i);
    return noise;
}

PathSample simulate_from_noise(const SimConfig& config, const DrivingNoise& noise) {
    config.validate();
    const int N = config.modes;
    const int steps = config.n_steps();
    const int width = N + 1;
    if (noise.innovations.size() != static_cast<std::size_t>(steps) * width)
        throw std::invalid_argument("simulate: noise shape does not match config");

    std::vector<double> lambda(width), decay(width), step_sd(width);
    for (int n = 0; n < width; ++n) {
        lambda[n] = mode_lambda(n, config.J);
        decay[n] = std::exp(-lambda[n] * config.dt);
        step_sd[n] = config.noise ? ou_step_stddev(lambda[n], config.dt) : 0.0;
    }

    // Initial coefficients.
    std::vector<double> x(width, 0.0);
    switch (config.u0) {
        case InitialCondition::Zero:
            break;
        case InitialCondition::Stationary:
            if (config.noise)
                for (int n = 1; n < width; ++n)
                    x[n] = ou_stationary_draw(lambda[n], noise.init[n]);
            break;
        case InitialCondition::Explicit: {
            // Trapezoid projection of u0 onto each eigenfunction.
            const int M = config.grid;
            const double h = config.J / M;
            for (int n = 0; n < width; ++n) {
                const EigenPair e = eigen(n, config.J);
                double s = 0.5 * (config.u0_values[0] * e.eval(0.0) +
                                  config.u0_values[M] * e.eval(config.J));
                for (int i = 1; i < M; ++i) s += config.u0_values[i] * e.eval(i * h);
                x[n] = s * h;
            }
            break;
        }
    }

    PathSample path;
    path.config = config;
    path.times.reserve(config.n_obs());
    path.mode_matrix.reserve(static_cast<std::size_t>(config.n_obs()) * width);
    auto record = [&](double t) {
        path.times.push_back(t);
        path.mode_matrix.insert(path.mode_matrix.end(), x.begin(), x.end());
    };
    record(0.0);

    const bool tilted = config.tilt != 0.0;
    // Exact joint law of (OU integral, Brownian increment) for mode 1:
    // cov = (1 - e^{-lambda dt}) / lambda.
    double bridge_scale = 0.0, bridge_resid = 0.0, drift_step = 0.0;
    rng::Stream bridge_stream;
    double brownian_total = 0.0;
    if (tilted) {
        const double c = -std::expm1(-lambda[1] * config.dt) / lambda[1];
        const double sd = ou_step_stddev(lambda[1], config.dt);
        bridge_scale = c / sd;
        bridge_resid = std::sqrt(std::max(0.0, config.dt - c * c / (sd * sd)));
        drift_step = config.tilt * c;
        bridge_stream = rng::Stream::derive(config.seed, rng::kPathBridge);
    }

    const double* z = noise.innovations.data();
    for (int k = 1; k <= steps; ++k) {
        const double* row = z + static_cast<std::size_t>(k - 1) * width;
        for (int n = 0; n < width; ++n) x[n] = decay[n] * x[n] + step_sd[n] * row[n];
        if (tilted) {
            x[1] += drift_step;
            const double zb = config.noise ? bridge_stream.normal(k - 1) : 0.0;
            brownian_total += bridge_scale * row[1] * (config.noise ? 1.0 : 0.0) +
                              bridge_resid * zb;
        }
        if (k % config.obs_stride == 0) record(k * config.dt);
    }

    if (tilted)
        path.log_weight = config.tilt * brownian_total +
                          0.5 * config.tilt * config.tilt * config.T;
    path.rng_fingerprint = rng::Stream::derive(config.seed, rng::kPathInnovation).key;
    return path;
}

PathSample simulate(const SimConfig& config) {
    return simulate_from_noise(config, draw_noise(config));
}

PathSample simulate_tilted(const SimConfig& config) {
    if (!std::isfinite(config.tilt))
        throw std::invalid_argument("simulate_tilted: tilt must be finite");
    return simulate(config);
}

PinnedField sample_pinned(double x0, double tilt, int modes, int grid_cells,
                          std::uint64_t seed) {
    if (x0 < 0.0 || x0 > 1.0)
        throw std::invalid_argument("sample_pinned: pin must lie in [0,1]");
    if (modes < 1 || grid_cells < 2) throw std::invalid_argument("sample_pinned: bad sizes");
    const auto stream = rng::Stream::derive(seed, rng::kPinnedField);
    ModeState state;
    state.J = 1.0;
    state.coefficients.assign(modes + 1, 0.0);
    for (int n = 1; n <= modes; ++n) {
        const double lam = mode_lambda(n, 1.0);
        state.coefficients[n] = ou_stationary_draw(lam, stream.normal(n));
    }
    state.coefficients[1] += tilt / mode_lambda(1, 1.0);

    FieldSnapshot snap = synthesize(state, grid_cells);
    // Pin by subtracting u(x0); reuse the synthesized value when x0 is on-grid.
    const double pos = x0 * grid_cells;
    const int idx = static_cast<int>(std::llround(pos));
    double at_pin;
    if (std::abs(pos - idx) < 1e-12) {
        at_pin = snap.values[idx];
    } else {
        at_pin = 0.0;
        for (int n = 1; n <= modes; ++n)
            at_pin += state.coefficients[n] * eigen(n, 1.0).eval(x0);
    }
    PinnedField field;
    field.x0 = x0;
    field.tilt = tilt;
    field.values.resize(snap.values.size());
    for (std::size_t i = 0; i < snap.values.size(); ++i)
        field.values[i] = snap.values[i] - at_pin;
    return field;
}

double shift_invariance_check(const SimConfig& config, double t1, double t2,
                              int n_samples, double x1, double x2, double* p_value,
                              int workers) {
    config.validate();
    if (n_samples < 8) throw std::invalid_argument("shift_invariance_check: too few samples");
    const double obs_dt = config.dt * config.obs_stride;
    auto obs_index = [&](double t) {
        const int i = static_cast<int>(std::llround(t / obs_dt));
        if (i < 0 || i >= config.n_obs())
            throw std::invalid_argument("shift_invariance_check: probe time off the grid");
        return i;
    };
    const int i1 = obs_index(t1), i2 = obs_index(t2);

    std::vector<double> phi_gap(config.modes + 1, 0.0);
    for (int n = 1; n <= config.modes; ++n) {
        const EigenPair e = eigen(n, config.J);
        phi_gap[n] = e.eval(x1) - e.eval(x2);
    }
    auto increment = [&](const PathSample& p, int obs) {
        auto row = p.modes_at(obs);
        double v = 0.0;
        for (int n = 1; n <= config.modes; ++n) v += row[n] * phi_gap[n];
        return v;
    };

    // Independent ensembles for the two probe times; a shared ensemble would
    // break the independence the KS p-value assumes. Equal probe times reduce
    // to comparing a sample with itself.
    std::vector<double> a(n_samples), b(n_samples);
    const bool same = (i1 == i2);
    const std::int64_t total = same ? n_samples : 2 * n_samples;
    parallel_for(total, workers, [&](std::int64_t i) {
        SimConfig c = config;
        c.seed = rng::mix64(config.seed + rng::kGolden * (i + 1));
        const PathSample p = simulate(c);
        if (i < n_samples) {
            a[i] = increment(p, i1);
            if (same) b[i] = increment(p, i2);
        } else {
            b[i - n_samples] = increment(p, i2);
        }
    });
    return ks_two_sample(a, b, p_value);
}

namespace {
PathSample rescale(const PathSample& path, double length_ratio) {
    // length_ratio = J_new / J_old; time factor r^2, amplitude factor sqrt(r).
    if (path.config.tilt != 0.0)
        throw std::invalid_argument("scale transform requires an untilted path");
    if (path.times.empty()) throw std::invalid_argument("scale transform: empty path");
    const double r = length_ratio;
    PathSample out = path;
    out.config.J = path.config.J * r;
    out.config.T = path.config.T * r * r;
    out.config.dt = path.config.dt * r * r;
    for (double& t : out.times) t *= r * r;
    // Field values scale by sqrt(r); the orthonormal basis carries another
    // 1/sqrt(r), so coefficients scale by r.
    for (double& c : out.mode_matrix) c *= r;
    if (!out.config.u0_values.empty())
        for (double& v : out.config.u0_values) v *= std::sqrt(r);
    out.energy.reset();
    return out;
}
}  // namespace

PathSample to_unit_interval(const PathSample& path) {
    return rescale(path, 1.0 / path.config.J);
}

PathSample from_unit_interval(const PathSample& path, double J) {
    if (!(J > 0.0)) throw std::invalid_argument("from_unit_interval: J must be positive");
    if (std::abs(path.config.J - 1.0) > 1e-12)
        throw std::invalid_argument("from_unit_interval: path must live on [0,1]");
    return rescale(path, J);
}

static std::string u0_name(InitialCondition u0) {
    switch (u0) {
        case InitialCondition::Zero: return "zero";
        case InitialCondition::Stationary: return "stationary";
        case InitialCondition::Explicit: return "explicit";
    }
    return "stationary";
}

static InitialCondition u0_from_name(const std::string& s) {
    if (s == "zero") return InitialCondition::Zero;
    if (s == "stationary") return InitialCondition::Stationary;
    if (s == "explicit") return InitialCondition::Explicit;
    throw std::invalid_argument("unknown initial condition: " + s);
}

nlohmann::json config_to_json(const SimConfig& c) {
    nlohmann::json j{{"J", c.J},           {"T", c.T},
                     {"dt", c.dt},         {"obs_stride", c.obs_stride},
                     {"modes", c.modes},   {"grid", c.grid},
                     {"u0", u0_name(c.u0)}, {"tilt", c.tilt},
                     {"seed", c.seed},     {"noise", c.noise},
                     {"tail_budget", c.tail_budget}};
    if (c.u0 == InitialCondition::Explicit) j["u0_values"] = c.u0_values;
    return j;
}

SimConfig config_from_json(const nlohmann::json& j) {
    SimConfig c;
    c.J = j.at("J");
    c.T = j.at("T");
    c.dt = j.at("dt");
    c.obs_stride = j.at("obs_stride");
    c.modes = j.at("modes");
    c.grid = j.at("grid");
    c.u0 = u0_from_name(j.at("u0"));
    c.tilt = j.at("tilt");
    c.seed = j.at("seed");
    c.noise = j.at("noise");
    c.tail_budget = j.at("tail_budget");
    if (c.u0 == InitialCondition::Explicit)
        c.u0_values = j.at("u0_values").get<std::vector<double>>();
    return c;
}

nlohmann::json to_json(const PathSample& path) {
    nlohmann::json j;
    j["format"] = "polymerflow.path";
    j["version"] = 1;
    j["config"] = config_to_json(path.config);
    j["times"] = path.times;
    j["modes"] = path.mode_matrix;
    if (path.energy)
        j["energy"] = *path.energy;
    else
        j["energy"] = nullptr;
    j["log_weight"] = path.log_weight;
    j["rng_fingerprint"] = path.rng_fingerprint;
    return j;
}

PathSample path_from_json(const nlohmann::json& j) {
    if (j.at("format") != "polymerflow.path")
        throw std::invalid_argument("path_from_json: not a path record");
    if (j.at("version").get<int>() != 1)
        throw std::invalid_argument("path_from_json: unsupported version");
    PathSample p;
    p.config = config_from_json(j.at("config"));
    p.times = j.at("times").get<std::vector<double>>();
    p.mode_matrix = j.at("modes").get<std::vector<double>>();
    if (!j.at("energy").is_null()) p.energy = j.at("energy").get<double>();
    p.log_weight = j.at("log_weight");
    p.rng_fingerprint = j.at("rng_fingerprint");
    return p;
}

}  // namespace polymerflow
