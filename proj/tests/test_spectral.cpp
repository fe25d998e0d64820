#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "polymerflow/rng.hpp"
#include "polymerflow/spectral.hpp"

using namespace polymerflow;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

// Reference image sum in long double, used as the independent oracle for
// single-point kernel values.
long double kernel_oracle(long double t, long double x, long double y, long double J) {
    const long double norm = 1.0L / std::sqrt(4.0L * 3.14159265358979323846264338328L * t);
    long double sum = 0.0L;
    for (int k = -60; k <= 60; ++k) {
        const long double d = x - y - 2.0L * k * J;
        const long double r = x + y - 2.0L * k * J;
        sum += std::exp(-d * d / (4.0L * t)) + std::exp(-r * r / (4.0L * t));
    }
    return norm * sum;
}
}  // namespace

TEST_SUITE_BEGIN("spectral");

TEST_CASE("eigenpairs") {
    CHECK(eigen(0, 1.0).lambda == 0.0);
    CHECK(eigen(0, 1.0).eval(0.37) == doctest::Approx(1.0));
    CHECK(eigen(1, 1.0).eval(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(eigen(2, 1.0).lambda == doctest::Approx(4.0 * kPi * kPi).epsilon(1e-15));
    // lambda strictly increasing, J scaling
    double prev = -1.0;
    for (int n = 0; n < 12; ++n) {
        const double l = eigen(n, 2.0).lambda;
        CHECK(l > prev);
        CHECK(l == doctest::Approx(eigen(n, 1.0).lambda / 4.0));
        prev = l;
    }
    CHECK_THROWS_AS(eigen(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(eigen(-1, 1.0), std::invalid_argument);
}

TEST_CASE("eigenfunctions orthonormal by quadrature") {
    const int M = 4096;
    for (double J : {1.0, 2.0}) {
        for (int n = 0; n <= 32; n += 4) {
            for (int m = n; m <= 32; m += 4) {
                const EigenPair en = eigen(n, J), em = eigen(m, J);
                double s = 0.5 * (en.eval(0) * em.eval(0) + en.eval(J) * em.eval(J));
                for (int i = 1; i < M; ++i) {
                    const double x = J * i / M;
                    s += en.eval(x) * em.eval(x);
                }
                s *= J / M;
                CHECK(std::abs(s - (n == m ? 1.0 : 0.0)) < 1e-10);
            }
        }
    }
}

TEST_CASE("heat kernel near-diagonal value and image tail") {
    // Whole-line kernel dominates at small t away from the boundary.
    const double g = heat_kernel_image(0.01, 0.5, 0.5, 1.0);
    const double free_term = 1.0 / std::sqrt(4.0 * kPi * 0.01);
    CHECK(std::abs(g - free_term) < 1e-10);
    CHECK(g == doctest::Approx(static_cast<double>(kernel_oracle(0.01L, 0.5L, 0.5L, 1.0L)))
                   .epsilon(1e-14));
    CHECK_THROWS_AS(heat_kernel_image(0.0, 0.2, 0.3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(heat_kernel_spectral(-1.0, 0.2, 0.3, 1.0), std::invalid_argument);
}

TEST_CASE("dual kernel forms agree") {
    CHECK(std::abs(heat_kernel_image(0.1, 0.3, 0.7, 1.0) -
                   heat_kernel_spectral(0.1, 0.3, 0.7, 1.0)) < 1e-10);
    CHECK(std::abs(heat_kernel_image(0.05, 0.0, 0.0, 2.0) -
                   heat_kernel_spectral(0.05, 0.0, 0.0, 2.0)) < 1e-10);
    // symmetry in (x, y)
    CHECK(heat_kernel_image(0.07, 0.2, 0.9, 1.0) ==
          doctest::Approx(heat_kernel_image(0.07, 0.9, 0.2, 1.0)).epsilon(1e-14));
}

TEST_CASE("spectral kernel long-time limit and truncation flag") {
    CHECK(heat_kernel_spectral(50.0, 0.1, 0.9, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    bool truncated = false;
    heat_kernel_spectral(1e-7, 0.5, 0.5, 1.0, 0, 64, &truncated);
    CHECK(truncated);
    truncated = false;
    heat_kernel_spectral(1.0, 0.5, 0.5, 1.0, 0, 64, &truncated);
    CHECK_FALSE(truncated);
}

TEST_CASE("kernel mass conservation") {
    const int M = 2048;
    for (double t : {1e-3, 0.1, 1.0}) {
        for (double x : {0.0, 0.3, 0.9}) {
            double s = 0.5 * (heat_kernel(t, x, 0.0, 1.0) + heat_kernel(t, x, 1.0, 1.0));
            for (int i = 1; i < M; ++i) s += heat_kernel(t, x, i / double(M), 1.0);
            s /= M;
            CHECK(std::abs(s - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("kernel semigroup property") {
    const int M = 2048;
    for (auto [s, t] : {std::pair{0.02, 0.03}, {0.1, 0.3}}) {
        const double x = 0.3, y = 0.8;
        double acc = 0.5 * (heat_kernel(s, x, 0.0, 1.0) * heat_kernel(t, 0.0, y, 1.0) +
                            heat_kernel(s, x, 1.0, 1.0) * heat_kernel(t, 1.0, y, 1.0));
        for (int i = 1; i < M; ++i) {
            const double z = i / double(M);
            acc += heat_kernel(s, x, z, 1.0) * heat_kernel(t, z, y, 1.0);
        }
        acc /= M;
        CHECK(std::abs(acc - heat_kernel(s + t, x, y, 1.0)) < 1e-6);
    }
}

TEST_CASE("ou transition closed forms") {
    CHECK(ou_transition(1.7, 0.0, 1.0, 0.25) == doctest::Approx(1.7 + 0.25).epsilon(1e-15));
    CHECK(std::abs(ou_transition(1.0, kPi * kPi, 1000.0, 0.0)) < 1e-12);
    const double var = ou_step_stddev(kPi * kPi, 0.1) * ou_step_stddev(kPi * kPi, 0.1);
    CHECK(var == doctest::Approx(0.0436232716056).epsilon(1e-9));
    CHECK_THROWS_AS(ou_transition(0.0, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("ou transition variance against Monte Carlo") {
    const auto stream = rng::Stream::derive(7121, rng::kOuExperiment);
    const double lam = kPi * kPi, dt = 0.1;
    const long n = 1000000;
    double s = 0.0, ss = 0.0;
    for (long i = 0; i < n; ++i) {
        const double v = ou_transition(0.0, lam, dt, stream.normal(i));
        s += v;
        ss += v * v;
    }
    const double mean = s / n;
    const double var = ss / n - mean * mean;
    const double target = 0.0436232716056;
    const double se = target * std::sqrt(2.0 / n);
    CHECK(std::abs(var - target) < 4.0 * se);
}

TEST_CASE("ou exactness: two half steps compose to one step") {
    for (double dt : {0.01, 0.2, 3.0}) {
        const double lam = kPi * kPi;
        const double q = std::exp(-lam * dt / 2);
        const double half = ou_step_stddev(lam, dt / 2);
        const double composed = half * half * q * q + half * half;
        const double whole = ou_step_stddev(lam, dt);
        CHECK(composed == doctest::Approx(whole * whole).epsilon(1e-14));
    }
}

TEST_CASE("ou stationary draw") {
    CHECK_THROWS_AS(ou_stationary_draw(0.0, 1.0), std::invalid_argument);
    CHECK(std::abs(ou_stationary_draw(1e12, 1.0)) < 1e-5);
    const auto stream = rng::Stream::derive(99, rng::kOuExperiment);
    const double lam = kPi * kPi;
    const long n = 500000;
    double ss = 0.0;
    for (long i = 0; i < n; ++i) {
        const double v = ou_stationary_draw(lam, stream.normal(i));
        ss += v * v;
    }
    const double target = 0.0506605918212;  // 1/(2 pi^2)
    CHECK(std::abs(ss / n - target) < 4.0 * target * std::sqrt(2.0 / n));
    // Sum of stationary variances over all modes: (1/2pi^2) * zeta(2) = 1/12.
    CHECK(inverse_square_tail(0) == doctest::Approx(kPi * kPi / 6.0).epsilon(1e-13));
    CHECK(inverse_square_tail(0) / (2.0 * kPi * kPi) ==
          doctest::Approx(1.0 / 12.0).epsilon(1e-13));
}

TEST_CASE("synthesis: flat and single-mode states") {
    ModeState flat;
    flat.J = 1.0;
    flat.coefficients = {3.25, 0.0};
    const FieldSnapshot s0 = synthesize(flat, 16);
    for (double v : s0.values) CHECK(v == doctest::Approx(3.25).epsilon(1e-14));

    ModeState one;
    one.J = 1.0;
    one.coefficients = {0.0, 1.0};
    const FieldSnapshot s1 = synthesize(one, 64);
    for (int i = 0; i <= 64; ++i)
        CHECK(s1.values[i] ==
              doctest::Approx(std::sqrt(2.0) * std::cos(kPi * i / 64)).epsilon(1e-12));
}

TEST_CASE("fast synthesis equals direct summation") {
    const auto stream = rng::Stream::derive(2024, rng::kPathInit);
    for (double J : {1.0, 0.5, 2.0}) {
        ModeState st;
        st.J = J;
        st.coefficients.resize(129);
        for (std::size_t i = 0; i < st.coefficients.size(); ++i)
            st.coefficients[i] = stream.normal(i + 1000 * static_cast<int>(J * 2));
        const FieldSnapshot fast = synthesize(st, 256);
        const FieldSnapshot slow = synthesize_direct(st, 256);
        for (int i = 0; i <= 256; ++i)
            CHECK(std::abs(fast.values[i] - slow.values[i]) < 1e-12);
    }
}

TEST_CASE("tail variance") {
    CHECK(tail_variance(1, 1.0) == doctest::Approx(0.0326727415122).epsilon(1e-10));
    CHECK(tail_variance(64, 2.0) == doctest::Approx(4.0 * tail_variance(64, 1.0)));
    CHECK(tail_variance(100000, 1.0) < 1e-6);   // vanishes as N grows
    CHECK(tail_variance(8, 1.0) > tail_variance(16, 1.0));
    // Euler-Maclaurin tail against a direct partial sum (the remainder beyond
    // the cutoff is 1/(n+1/2) to O(n^-3)).
    double direct = 1.0 / 2000000.5;
    for (long n = 2000000; n > 16; --n) direct += 1.0 / (double(n) * n);
    CHECK(inverse_square_tail(16) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_SUITE_END();
