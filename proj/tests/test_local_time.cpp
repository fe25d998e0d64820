#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "polymerflow/analysis.hpp"
#include "polymerflow/field_sim.hpp"
#include "polymerflow/local_time.hpp"
#include "polymerflow/rng.hpp"
#include "polymerflow/stats.hpp"

using namespace polymerflow;

namespace {

FieldSnapshot ramp(double c, double J, int M) {
    FieldSnapshot s;
    s.J = J;
    s.values.resize(M + 1);
    for (int i = 0; i <= M; ++i) s.values[i] = c * (i * J / M);
    return s;
}

FieldSnapshot stationary_snapshot(int modes, int grid, std::uint64_t seed) {
    const auto stream = rng::Stream::derive(seed, rng::kPinnedField);
    ModeState st;
    st.J = 1.0;
    st.coefficients.assign(modes + 1, 0.0);
    for (int n = 1; n <= modes; ++n)
        st.coefficients[n] = ou_stationary_draw(n * n * 9.869604401089358, stream.normal(n));
    return synthesize(st, grid);
}

}  // namespace

TEST_SUITE_BEGIN("local_time");

TEST_CASE("unit ramp occupies unit density") {
    const FieldSnapshot s = ramp(1.0, 1.0, 8192);
    const LocalTimeProfile p = occupation_histogram(s, 1.0 / 512);
    CHECK(p.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(p.degenerate);
    // Interior bins all sit at density 1.
    int ones = 0;
    for (double d : p.densities)
        if (std::abs(d - 1.0) < 1e-9) ++ones;
    CHECK(ones >= static_cast<int>(p.densities.size()) - 4);
    CHECK(self_intersection(p) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("constant snapshot concentrates in one bin") {
    FieldSnapshot s;
    s.J = 2.0;
    s.values.assign(129, 3.7);
    const double delta = 0.05;
    const LocalTimeProfile p = occupation_histogram(s, delta);
    CHECK(p.degenerate);
    CHECK(self_intersection(p) == doctest::Approx(s.J * s.J / delta).epsilon(1e-12));
}

TEST_CASE("linear profile closed form: integral J/c") {
    const double c = 2.0, J = 2.0;
    const FieldSnapshot s = ramp(c, J, 4096);
    const LocalTimeProfile p = occupation_histogram(s, 0.01);
    CHECK(self_intersection(p) == doctest::Approx(J / c).epsilon(0.01));
    CHECK(p.total_mass() == doctest::Approx(J).epsilon(1e-12));
}

TEST_CASE("mirrored quadratic profile against the binned closed form") {
    // u(x) = A x^2 - A J^2/4 on [0, J/2], mirrored; A = 4R/J^2 with R = 1.
    const double J = 1.0, R = 1.0, A = 4.0 * R / (J * J);
    const int M = 4096;
    const double delta = 1.0 / 256;
    FieldSnapshot s;
    s.J = J;
    s.values.resize(M + 1);
    for (int i = 0; i <= M; ++i) {
        const double x = i * J / M;
        const double xm = std::min(x, J - x);
        s.values[i] = A * xm * xm - A * J * J / 4.0;
    }
    const LocalTimeProfile p = occupation_histogram(s, delta);
    const double est = self_intersection(p);

    // Oracle: occupation density 1/sqrt(A(y+R)) on (-R, 0); bin masses by the
    // antiderivative, using the same center-of-mass anchoring as the profile.
    double mean = 0.5 * (s.values.front() + s.values.back());
    for (int i = 1; i < M; ++i) mean += s.values[i];
    mean /= M;
    double oracle = 0.0;
    const long k0 = static_cast<long>(std::floor((-R - mean) / delta)) - 1;
    const long k1 = static_cast<long>(std::ceil((0.0 - mean) / delta)) + 1;
    for (long k = k0; k <= k1; ++k) {
        const double lo = std::max(mean + k * delta, -R);
        const double hi = std::min(mean + (k + 1) * delta, 0.0);
        if (hi <= lo) continue;
        const double mass = 2.0 / std::sqrt(A) * (std::sqrt(hi + R) - std::sqrt(lo + R));
        oracle += (mass / delta) * (mass / delta) * delta;
    }
    CHECK(std::abs(est - oracle) / oracle < 0.02);
}

TEST_CASE("kernel and histogram estimators agree on stationary fields") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
        const FieldSnapshot s = stationary_snapshot(256, 512, seed);
        const double hist = self_intersection(occupation_histogram(s, 0.02));
        const double kern = self_intersection_kernel(s, 0.02);
        CHECK(std::abs(hist - kern) / hist < 0.05);
    }
}

TEST_CASE("kernel estimator on the unit ramp") {
    const FieldSnapshot s = ramp(1.0, 1.0, 4096);
    CHECK(self_intersection_kernel(s, 0.01) == doctest::Approx(1.0).epsilon(0.01));
    CHECK_THROWS_AS(self_intersection_kernel(s, 0.0), std::invalid_argument);
}

TEST_CASE("two-resolution stability on smooth fields") {
    const FieldSnapshot s = stationary_snapshot(256, 2048, 99);
    const double a = self_intersection(occupation_histogram(s, 0.02));
    const double b = self_intersection(occupation_histogram(s, 0.04));
    CHECK(std::abs(a - b) / a < 0.05);
}

TEST_CASE("path energy: quadrature stability and beta scaling") {
    SimConfig c;
    c.J = 1.0;
    c.T = 1.0;
    c.dt = 0.005;
    c.obs_stride = 4;
    c.modes = 128;
    c.grid = 256;
    c.seed = 31337;
    PathSample coarse = simulate(c);
    const PathEnergy e0 = path_energy(coarse, 0.02, 0.0);
    CHECK(e0.log_gibbs_factor == 0.0);
    CHECK(*coarse.energy == e0.energy);
    CHECK(e0.energy >= 0.0);

    SimConfig c2 = c;
    c2.obs_stride = 2;  // halve the observation spacing, same noise
    PathSample fine = simulate(c2);
    const PathEnergy e1 = path_energy(fine, 0.02, 0.0);
    CHECK(std::abs(e1.energy - e0.energy) / e0.energy < 0.02);

    const PathEnergy eb = path_energy(fine, 0.02, 2.5);
    CHECK(eb.log_gibbs_factor == doctest::Approx(-2.5 * eb.energy));
}

TEST_CASE("pathwise energy-radius inequality") {
    SimConfig c;
    c.J = 1.0;
    c.T = 1.0;
    c.dt = 0.01;
    c.obs_stride = 2;
    c.modes = 128;
    c.grid = 256;
    for (int i = 0; i < 40; ++i) {
        SimConfig ci = c;
        ci.seed = 8000 + i;
        PathSample p = simulate(ci);
        const double energy = path_energy(p, 0.02, 0.0).energy;
        const double R = radius(p).R;
        CHECK(energy >= 0.9 * c.T * c.J * c.J / (32.0 * R));
    }
}

TEST_CASE("profile CSV export") {
    const FieldSnapshot s = ramp(1.0, 1.0, 256);
    const LocalTimeProfile p = occupation_histogram(s, 0.1);
    const auto path =
        (std::filesystem::temp_directory_path() / "polymerflow_profile.csv").string();
    write_profile_csv(p, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "bin_center,density");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(p.densities.size()));
    std::filesystem::remove(path);
}

TEST_CASE("rescaled path energies carry the J^(7/2) factor") {
    SimConfig c;
    c.J = 2.0;
    c.T = 2.0;
    c.dt = 0.005;
    c.obs_stride = 2;
    c.modes = 192;
    c.grid = 384;
    c.seed = 777;
    PathSample u = simulate(c);
    PathSample v = to_unit_interval(u);
    const double eu = path_energy(u, default_bin_width(2.0, c.grid), 0.0).energy;
    const double ev = path_energy(v, default_bin_width(1.0, c.grid), 0.0).energy;
    const double factor = std::pow(2.0, 3.5);
    CHECK(std::abs(eu - factor * ev) / eu < 0.05);
}

TEST_SUITE_END();
