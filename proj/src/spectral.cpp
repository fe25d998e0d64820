#include "polymerflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace polymerflow {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

double EigenPair::eval(double x) const {
    if (n == 0) return 1.0 / std::sqrt(J);
    return std::sqrt(2.0 / J) * std::cos(n * kPi * x / J);
}

EigenPair eigen(int n, double J) {
    if (n < 0) throw std::invalid_argument("eigen: n must be nonnegative");
    if (!(J > 0.0)) throw std::invalid_argument("eigen: J must be positive");
    EigenPair e;
    e.n = n;
    e.J = J;
    e.lambda = static_cast<double>(n) * n * kPi * kPi / (J * J);
    return e;
}

double heat_kernel_image(double t, double x, double y, double J, int k_max) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel_image: t must be positive");
    if (!(J > 0.0)) throw std::invalid_argument("heat_kernel_image: J must be positive");
    if (k_max <= 0) {
        // Images beyond 2J + 10 sqrt(2t) contribute below 1e-14.
        k_max = static_cast<int>(std::ceil((2.0 * J + 10.0 * std::sqrt(2.0 * t)) / (2.0 * J))) + 1;
    }
    const double norm = 1.0 / std::sqrt(4.0 * kPi * t);
    const double inv4t = 1.0 / (4.0 * t);
    double sum = 0.0;
    for (int k = -k_max; k <= k_max; ++k) {
        const double d = x - y - 2.0 * k * J;
        const double r = x + y - 2.0 * k * J;
        sum += std::exp(-d * d * inv4t) + std::exp(-r * r * inv4t);
    }
    return norm * sum;
}

double heat_kernel_spectral(double t, double x, double y, double J, int n_max,
                            int n_ceiling, bool* truncated) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel_spectral: t must be positive");
    if (!(J > 0.0)) throw std::invalid_argument("heat_kernel_spectral: J must be positive");
    if (truncated) *truncated = false;
    if (n_max <= 0) {
        // exp(-lambda_n t) < 1e-16  <=>  n > J sqrt(16 ln 10 / t) / pi
        const double need = J * std::sqrt(36.85 / t) / kPi;
        n_max = static_cast<int>(std::ceil(need)) + 1;
        if (n_max > n_ceiling) {
            n_max = n_ceiling;
            if (truncated) *truncated = true;
        }
    }
    const double a = kPi * x / J;
    const double b = kPi * y / J;
    const double rate = kPi * kPi * t / (J * J);
    double sum = 1.0;  // n = 0 term of J * G: phi_0(x) phi_0(y) J = 1
    for (int n = 1; n <= n_max; ++n) {
        const double e = std::exp(-rate * n * n);
        if (e == 0.0) break;
        sum += 2.0 * e * std::cos(n * a) * std::cos(n * b);
    }
    return sum / J;
}

double heat_kernel(double t, double x, double y, double J) {
    const double crossover = J * J / (kPi * kPi);
    if (t < crossover) return heat_kernel_image(t, x, y, J);
    return heat_kernel_spectral(t, x, y, J);
}

double ou_step_stddev(double lambda, double dt) {
    if (lambda == 0.0) return std::sqrt(dt);
    return std::sqrt(-std::expm1(-2.0 * lambda * dt) / (2.0 * lambda));
}

double ou_transition(double x, double lambda, double dt, double noise) {
    if (!(dt > 0.0)) throw std::invalid_argument("ou_transition: dt must be positive");
    return std::exp(-lambda * dt) * x + ou_step_stddev(lambda, dt) * noise;
}

double ou_stationary_draw(double lambda, double noise) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("ou_stationary_draw: lambda must be positive");
    return noise / std::sqrt(2.0 * lambda);
}

namespace {

// Per-thread DCT-I workspace, one per grid size. FFTW planning is not
// thread-safe, so plan creation is serialized; execution on thread-local
// buffers is safe.
struct DctWorkspace {
    int n = 0;  // transform length M+1
    double* in = nullptr;
    double* out = nullptr;
    fftw_plan plan = nullptr;
};

std::mutex planner_mutex;

DctWorkspace& workspace_for(int n_points) {
    thread_local std::map<int, DctWorkspace> cache;
    auto it = cache.find(n_points);
    if (it == cache.end()) {
        DctWorkspace w;
        w.n = n_points;
        w.in = fftw_alloc_real(n_points);
        w.out = fftw_alloc_real(n_points);
        {
            std::lock_guard<std::mutex> lock(planner_mutex);
            w.plan = fftw_plan_r2r_1d(n_points, w.in, w.out, FFTW_REDFT00, FFTW_ESTIMATE);
        }
        it = cache.emplace(n_points, w).first;
    }
    return it->second;
}

}  // namespace

FieldSnapshot synthesize_direct(const ModeState& state, int grid_cells) {
    if (grid_cells < 2) throw std::invalid_argument("synthesize: grid must have >= 2 cells");
    const int M = grid_cells;
    const int N = static_cast<int>(state.coefficients.size()) - 1;
    FieldSnapshot snap;
    snap.J = state.J;
    snap.values.assign(M + 1, 0.0);
    const double c0 = 1.0 / std::sqrt(state.J);
    const double cn = std::sqrt(2.0 / state.J);
    for (int i = 0; i <= M; ++i) {
        double v = (N >= 0) ? state.coefficients[0] * c0 : 0.0;
        for (int n = 1; n <= N; ++n)
            v += state.coefficients[n] * cn * std::cos(n * kPi * i / M);
        snap.values[i] = v;
    }
    return snap;
}

FieldSnapshot synthesize(const ModeState& state, int grid_cells) {
    if (grid_cells < 2) throw std::invalid_argument("synthesize: grid must have >= 2 cells");
    const int M = grid_cells;
    const int N = static_cast<int>(state.coefficients.size()) - 1;
    if (N > M)
        throw std::invalid_argument("synthesize: mode count above grid resolution");
    auto& w = workspace_for(M + 1);
    const double c0 = 1.0 / std::sqrt(state.J);
    const double cn = std::sqrt(2.0 / state.J);
    for (int i = 0; i <= M; ++i) w.in[i] = 0.0;
    if (N >= 0) w.in[0] = state.coefficients[0] * c0;
    for (int n = 1; n <= N && n < M; ++n) w.in[n] = 0.5 * cn * state.coefficients[n];
    if (N == M) w.in[M] = cn * state.coefficients[M];
    fftw_execute(w.plan);
    FieldSnapshot snap;
    snap.J = state.J;
    snap.values.assign(w.out, w.out + M + 1);
    return snap;
}

double inverse_square_tail(int N) {
    if (N < 0) throw std::invalid_argument("inverse_square_tail: N must be nonnegative");
    double sum = 0.0;
    int base = N;
    // Sum a few terms directly so the asymptotic series starts from a large base.
    while (base < N + 24) {
        ++base;
        sum += 1.0 / (static_cast<double>(base) * base);
    }
    // sum_{n>base} n^-2 = trigamma(base+1), by its asymptotic expansion.
    const double x = base + 1.0;
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    sum += inv * (1.0 + inv * (0.5 + inv * (1.0 / 6.0 + inv2 * (-1.0 / 30.0 +
                  inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0))))));
    return sum;
}

double tail_variance(int N, double J) {
    if (N < 1) throw std::invalid_argument("tail_variance: N must be >= 1");
    return J * J / (2.0 * kPi * kPi) * inverse_square_tail(N);
}

}  // namespace polymerflow
