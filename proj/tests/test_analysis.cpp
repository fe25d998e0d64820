#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "polymerflow/analysis.hpp"
#include "polymerflow/field_sim.hpp"
#include "polymerflow/rng.hpp"
#include "polymerflow/stats.hpp"

using namespace polymerflow;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_SUITE_BEGIN("analysis");

TEST_CASE("radius: constant and single-mode paths") {
    SimConfig c;
    c.J = 1.0;
    c.T = 0.1;
    c.dt = 0.05;
    c.obs_stride = 1;
    c.modes = 4;
    c.grid = 64;
    c.noise = false;
    c.u0 = InitialCondition::Zero;
    PathSample p = simulate(c);
    // Overwrite the (zero) trajectory with a frozen spatial shape.
    for (int k = 0; k < p.n_obs(); ++k) {
        double* row = p.mode_matrix.data() + static_cast<std::size_t>(k) * (c.modes + 1);
        row[0] = 2.0;  // constant offset only
    }
    CHECK(radius(p).R == doctest::Approx(0.0).epsilon(1e-12));
    for (int k = 0; k < p.n_obs(); ++k) {
        double* row = p.mode_matrix.data() + static_cast<std::size_t>(k) * (c.modes + 1);
        row[1] = -0.75;
    }
    const RadiusReport rep = radius(p);
    CHECK(rep.R == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(rep.R_spec == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("radius: grid and spectral routes agree on random states") {
    SimConfig c;
    c.J = 1.0;
    c.T = 0.1;
    c.dt = 0.01;
    c.obs_stride = 5;
    c.modes = 256;
    c.grid = 512;
    c.seed = 555;
    const PathSample p = simulate(c);
    const RadiusReport rep = radius(p);
    CHECK(std::abs(rep.R - rep.R_spec) / rep.R < 1e-6);
    CHECK(spectral_radius(p) == doctest::Approx(rep.R_spec).epsilon(1e-14));
}

TEST_CASE("parseval decomposition sums to the spectral radius") {
    SimConfig c;
    c.J = 1.0;
    c.T = 0.5;
    c.dt = 0.01;
    c.obs_stride = 5;
    c.modes = 64;
    c.grid = 128;
    c.seed = 2222;
    const PathSample p = simulate(c);
    const auto s = parseval_decomposition(p);
    double total = 0.0;
    for (double v : s) total += v;
    const double r2 = spectral_radius(p) * spectral_radius(p);
    CHECK(total == doctest::Approx(r2).epsilon(1e-12));
}

TEST_CASE("parseval modes match stationary values and the truncation tail") {
    SimConfig c;
    c.J = 1.0;
    c.T = 2.0;
    c.dt = 0.01;
    c.obs_stride = 2;
    c.modes = 48;
    c.grid = 96;
    const int n_paths = 300;
    std::vector<double> mode_means(c.modes, 0.0);
    parallel_for(n_paths, 1, [&](std::int64_t i) {
        SimConfig ci = c;
        ci.seed = rng::mix64(1234 + rng::kGolden * (i + 1));
        const auto s = parseval_decomposition(simulate(ci));
        for (int m = 0; m < c.modes; ++m) mode_means[m] += s[m];
    });
    for (double& v : mode_means) v /= n_paths;
    // Low modes: stationary mean 1/(2 lambda_n) within a loose MC band.
    for (int m = 1; m <= 3; ++m) {
        const double target = 1.0 / (2.0 * m * m * kPi * kPi);
        CHECK(std::abs(mode_means[m - 1] - target) < 0.15 * target);
    }
    // Tail above N = 8 matches the closed-form stationary tail.
    double tail = 0.0;
    for (int m = 9; m <= c.modes; ++m) tail += mode_means[m - 1];
    const double target = tail_variance(8, 1.0) - tail_variance(c.modes, 1.0);
    CHECK(std::abs(tail - target) < 0.1 * target);
}

TEST_CASE("increment variance series") {
    const SeriesValue j01 = increment_variance(0.0, 1.0, 100000);
    CHECK(std::abs(j01.value - 0.5) < 1e-4);
    CHECK(j01.tail_bound == doctest::Approx(4.0 / (kPi * kPi * 1e5)));
    CHECK(increment_variance(0.37, 0.37, 100).value == 0.0);
    CHECK(std::abs(increment_variance(0.0, 0.5, 100000).value - 0.25) < 1e-4);
    // Partial sums are monotone nondecreasing in the cutoff.
    double prev = 0.0;
    for (long n : {10L, 100L, 1000L, 10000L}) {
        const double v = increment_variance(0.2, 0.9, n).value;
        CHECK(v >= prev);
        prev = v;
    }
    // The series approaches |x1-x2|/2 across the square.
    for (double x1 : {0.0, 0.15, 0.4, 0.8}) {
        for (double x2 : {0.05, 0.33, 0.65, 1.0}) {
            const SeriesValue sv = increment_variance(x1, x2, 100000);
            CHECK(std::abs(sv.value - increment_variance_limit(x1, x2)) <
                  sv.tail_bound + 1e-9);
        }
    }
    CHECK_THROWS_AS(increment_variance(-0.1, 0.5, 10), std::invalid_argument);
}

TEST_CASE("drift profile, gap and its lower bound") {
    CHECK(drift_profile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(drift_profile(0.0) == doctest::Approx(0.143289792063).epsilon(1e-11));
    CHECK(drift_gap(0.0, 1.0) == doctest::Approx(0.286579584125).epsilon(1e-11));
    // Piecewise bound holds across the grid.
    for (int i = 0; i <= 100; ++i) {
        for (int j = i; j <= 100; ++j) {
            const double x1 = i / 100.0, x2 = j / 100.0;
            CHECK(drift_gap(x1, x2) >= drift_gap_lower_bound(x1, x2) - 1e-14);
        }
    }
    CHECK(drift_gap_lower_bound(0.0, 1.0) ==
          doctest::Approx(std::sqrt(2.0) / (8.0 * kPi * kPi)));
}

TEST_CASE("pinned increment density at zero") {
    CHECK(pinned_increment_density0(0.0, 1.0, 0.0) ==
          doctest::Approx(0.564189583548).epsilon(1e-11));
    CHECK(pinned_increment_density0(0.2, 0.8, 1e6) < 1e-12);
    CHECK_THROWS_AS(pinned_increment_density0(0.4, 0.4, 0.0), std::invalid_argument);
}

TEST_CASE("pinned increment density against a kernel density estimate") {
    const int draws = 30000, grid = 1024, modes = 1024;
    const double a = 1.0;
    const int i1 = 205, i2 = 819;  // x1 = 0.2002, x2 = 0.7998
    const double x1 = i1 / double(grid), x2 = i2 / double(grid);
    const double bw = 0.04;
    double acc = 0.0;
    for (int d = 0; d < draws; ++d) {
        const PinnedField f =
            sample_pinned(0.5, a, modes, grid, rng::mix64(31337 + 7 * d));
        const double z = f.values[i2] - f.values[i1];
        if (std::abs(z) < bw) acc += (bw - std::abs(z)) / (bw * bw);
    }
    const double kde = acc / draws;
    const double target = pinned_increment_density0(x1, x2, a);
    CHECK(std::abs(kde - target) / target < 0.05);
}

TEST_CASE("overlap integral: closed form at zero tilt, monotone decrease") {
    const QuadratureResult r0 = overlap_integral(0.0);
    CHECK(std::abs(r0.value - 8.0 / (3.0 * std::sqrt(kPi))) / r0.value < 1e-6);
    CHECK_FALSE(r0.warning);
    double prev = r0.value;
    for (double a : {0.3, 1.0, 3.0, 10.0, 100.0, 1000.0}) {
        const double v = overlap_integral(a).value;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("overlap integral against an independent discretization") {
    // Plain 2-D Riemann evaluation with a log-graded separation grid.
    for (double a : {0.5, 5.0}) {
        double total = 0.0;
        const int nh = 4000, nx = 400;
        double h_prev = 0.0;
        for (int k = 1; k <= nh; ++k) {
            const double h = std::pow(10.0, -12.0 + 12.0 * k / nh);
            const double hm = 0.5 * (h + h_prev);
            double inner = 0.0;
            const int n = nx;
            for (int i = 0; i < n; ++i) {
                const double x1 = (i + 0.5) * (1.0 - hm) / n;
                inner += pinned_increment_density0(x1, x1 + hm, a);
            }
            inner *= (1.0 - hm) / n;
            total += 2.0 * inner * (h - h_prev);
            h_prev = h;
        }
        const double quad = overlap_integral(a).value;
        CHECK(std::abs(total - quad) / quad < 0.005);
    }
}

TEST_CASE("ldp rate function") {
    CHECK(ldp_rate(1.0, 1.0) == doctest::Approx(0.125));
    CHECK(ldp_rate(0.5, 1.0) == doctest::Approx(0.0));
    CHECK(std::isinf(ldp_rate(0.0, 1.0)));
    CHECK(std::isinf(ldp_rate(-2.0, 1.0)));
    // Convex in c with the minimum at 1/(2 gamma).
    const double gamma = 0.7;
    double prev = ldp_rate(1.0 / (2.0 * gamma), gamma);
    CHECK(prev == doctest::Approx(0.0));
    for (double c = 1.0 / (2.0 * gamma) + 0.1;; c += 0.1) {
        const double v = ldp_rate(c, gamma);
        CHECK(v > prev);
        prev = v;
        if (c > 3.0) break;
    }
    CHECK_THROWS_AS(ldp_rate(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("ou tail experiment: structure and stationary mean") {
    const std::vector<double> Ts{2.0, 4.0};
    const OuTailReport rep = ou_tail_experiment(1.0, Ts, 1.0, 20000, 99, true, 0.01, 1);
    REQUIRE(rep.points.size() == 2);
    CHECK(rep.points[0].T == 2.0);
    CHECK(rep.points[0].exceedances > 50);
    CHECK_FALSE(rep.points[0].low_count);
    CHECK(rep.points[1].rate < rep.points[0].rate);  // improving with T
    REQUIRE(rep.differenced_rates.size() == 1);
    // Stationary start: mean of S_T/T is exactly 1/(2 gamma).
    for (const auto& pt : rep.points)
        CHECK(std::abs(pt.mean_time_avg - 0.5) < 3.0 * pt.mean_se);
}

TEST_CASE("ou tail experiment: zero start mean carries the transient") {
    const std::vector<double> Ts{2.0};
    const OuTailReport rep = ou_tail_experiment(1.0, Ts, 1.0, 20000, 7, false, 0.01, 1);
    const double T = 2.0;
    const double expected = 0.5 - (1.0 - std::exp(-2.0 * T)) / (4.0 * T);
    CHECK(std::abs(rep.points[0].mean_time_avg - expected) < 3.0 * rep.points[0].mean_se);
}

TEST_CASE("mode coupling to the unit-rate process") {
    CHECK(ou_coupling_ks_pvalue(2, 2.0, 500, 2024) > 0.01);
    CHECK(ou_coupling_ks_pvalue(5, 0.5, 500, 2025) > 0.01);
}

TEST_CASE("exponent fit") {
    const std::vector<double> J{0.5, 1.0, 2.0, 4.0};
    std::vector<double> R(J.size()), err(J.size(), 1e-12);
    for (std::size_t i = 0; i < J.size(); ++i) R[i] = std::pow(J[i], 5.0 / 3.0);
    const ExponentFit fit = fit_scaling_exponent(J, R, err);
    CHECK(fit.slope == doctest::Approx(5.0 / 3.0).epsilon(1e-9));
    CHECK(fit.slope_stderr < 1e-10);
    CHECK(fit.slope_stderr > 0.0);
    const std::vector<double> two_J{1.0, 2.0, 1.0};
    CHECK_THROWS_AS(
        fit_scaling_exponent(two_J, std::vector<double>{1.0, 2.0, 1.0},
                             std::vector<double>{0.1, 0.1, 0.1}),
        std::invalid_argument);
    // Weighted fit downweights a noisy outlier.
    std::vector<double> Rn = R;
    Rn[3] *= 1.5;
    std::vector<double> errn = err;
    errn[3] = 10.0;
    const ExponentFit fit2 = fit_scaling_exponent(J, Rn, errn);
    CHECK(fit2.slope == doctest::Approx(5.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("flory balance solves the exponent equations exactly") {
    const Rational one_d = flory_balance(FloryCase::MovingPolymer1D);
    CHECK(one_d.num == 5);
    CHECK(one_d.den == 3);
    const Rational two_d = flory_balance(FloryCase::MovingPolymer2D);
    CHECK(two_d.num == 5);
    CHECK(two_d.den == 4);
    const Rational saw = flory_balance(FloryCase::Saw2D);
    CHECK(saw.num == 3);
    CHECK(saw.den == 4);
}

TEST_SUITE_END();
