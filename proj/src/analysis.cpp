#include "polymerflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "polymerflow/rng.hpp"
#include "polymerflow/spectral.hpp"
#include "polymerflow/stats.hpp"

namespace polymerflow {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSqrt2 = 1.414213562373095048801688724209698;
}  // namespace

RadiusReport radius(const PathSample& path) {
    const int n = path.n_obs();
    if (n < 1) throw std::invalid_argument("radius: empty path");
    const double J = path.config.J;
    const int M = path.config.grid;
    RadiusReport rep;
    rep.J = J;
    rep.T = path.times.back();
    rep.theta2_trace.resize(n);
    double grid_acc = 0.0, spec_acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const FieldSnapshot snap = synthesize(path.state_at(i), M);
        double mean = 0.5 * (snap.values.front() + snap.values.back());
        for (int k = 1; k < M; ++k) mean += snap.values[k];
        mean /= M;
        double dev = 0.5 * ((snap.values.front() - mean) * (snap.values.front() - mean) +
                            (snap.values.back() - mean) * (snap.values.back() - mean));
        for (int k = 1; k < M; ++k)
            dev += (snap.values[k] - mean) * (snap.values[k] - mean);
        const double theta2 = dev / M;  // (1/J) * trapezoid = (h/J) * sum = sum / M
        rep.theta2_trace[i] = theta2;

        auto row = path.modes_at(i);
        double s = 0.0;
        for (int m = 1; m <= path.config.modes; ++m) s += row[m] * row[m];
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        grid_acc += w * theta2;
        spec_acc += w * s / J;
    }
    const double denom = (n > 1) ? (n - 1) : 1;
    rep.R = std::sqrt(grid_acc / denom);
    rep.R_spec = std::sqrt(spec_acc / denom);
    return rep;
}

double spectral_radius(const PathSample& path) {
    const int n = path.n_obs();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        auto row = path.modes_at(i);
        double s = 0.0;
        for (int m = 1; m <= path.config.modes; ++m) s += row[m] * row[m];
        acc += ((i == 0 || i == n - 1) ? 0.5 : 1.0) * s;
    }
    const double denom = (n > 1) ? (n - 1) : 1;
    return std::sqrt(acc / denom / path.config.J);
}

std::vector<double> parseval_decomposition(const PathSample& path) {
    const int n = path.n_obs();
    if (n < 2) throw std::invalid_argument("parseval_decomposition: need >= 2 snapshots");
    std::vector<double> s(path.config.modes, 0.0);
    for (int i = 0; i < n; ++i) {
        auto row = path.modes_at(i);
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        for (int m = 1; m <= path.config.modes; ++m) s[m - 1] += w * row[m] * row[m];
    }
    for (double& v : s) v /= (n - 1);
    return s;
}

SeriesValue increment_variance(double x1, double x2, long n_max) {
    if (x1 < 0.0 || x1 > 1.0 || x2 < 0.0 || x2 > 1.0)
        throw std::invalid_argument("increment_variance: arguments must lie in [0,1]");
    if (n_max < 1) throw std::invalid_argument("increment_variance: n_max must be >= 1");
    // cos(n a), cos(n b) by the Chebyshev recurrence; error growth over
    // n_max = 1e6 terms stays far below the 1/n^2 weights.
    const double a = kPi * x1, b = kPi * x2;
    double ca2 = std::cos(a), cb2 = std::cos(b);  // cos(1*.)
    double ca1 = 1.0, cb1 = 1.0;                  // cos(0*.)
    const double ka = 2.0 * std::cos(a), kb = 2.0 * std::cos(b);
    double sum = 0.0;
    for (long n = 1; n <= n_max; ++n) {
        const double d = ca2 - cb2;
        sum += d * d / (static_cast<double>(n) * n);
        const double na = ka * ca2 - ca1;
        const double nb = kb * cb2 - cb1;
        ca1 = ca2;
        ca2 = na;
        cb1 = cb2;
        cb2 = nb;
    }
    SeriesValue out;
    out.value = sum / (kPi * kPi);
    out.tail_bound = 4.0 / (kPi * kPi * n_max);
    return out;
}

double increment_variance_limit(double x1, double x2) { return 0.5 * std::abs(x2 - x1); }

double drift_profile(double x) { return kSqrt2 * std::cos(kPi * x) / (kPi * kPi); }

double drift_gap(double x1, double x2) { return drift_profile(x1) - drift_profile(x2); }

double drift_gap_lower_bound(double x1, double x2) {
    if (x1 > x2) std::swap(x1, x2);
    const double s = x1 + x2;
    if (s <= 1.0) return kSqrt2 / (8.0 * kPi * kPi) * (x2 - x1) * s;
    return kSqrt2 / (2.0 * kPi * kPi) * (x2 - x1) * (1.0 - 0.5 * s);
}

double pinned_increment_density0(double x1, double x2, double a) {
    if (x1 == x2)
        throw std::invalid_argument("pinned_increment_density0: degenerate pair");
    const double v = increment_variance_limit(x1, x2);
    const double m = a * drift_gap(x1, x2);
    return std::exp(-m * m / (2.0 * v)) / std::sqrt(2.0 * kPi * v);
}

namespace {

// 12-point Gauss-Legendre nodes/weights on [-1,1].
constexpr int kGL = 12;
constexpr double kGLx[kGL] = {
    -0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
    -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
    0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
    0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
constexpr double kGLw[kGL] = {
    0.04717533638651183, 0.10693932599531843, 0.16007832854334622,
    0.20316742672306592, 0.23349253653835481, 0.24914704581340277,
    0.24914704581340277, 0.23349253653835481, 0.20316742672306592,
    0.16007832854334622, 0.10693932599531843, 0.04717533638651183};

template <class F>
double gauss(const F& f, double lo, double hi, int points) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    if (points >= kGL) {
        for (int i = 0; i < kGL; ++i) s += kGLw[i] * f(mid + half * kGLx[i]);
    } else {
        // 6-point rule from the even subset is good enough for the error probe.
        static constexpr double x6[6] = {-0.9324695142031521, -0.6612093864662645,
                                         -0.2386191860831969, 0.2386191860831969,
                                         0.6612093864662645,  0.9324695142031521};
        static constexpr double w6[6] = {0.1713244923791704, 0.3607615730481386,
                                         0.4679139345726910, 0.4679139345726910,
                                         0.3607615730481386, 0.1713244923791704};
        for (int i = 0; i < 6; ++i) s += w6[i] * f(mid + half * x6[i]);
    }
    return s * half;
}

template <class F>
double adaptive_simpson(const F& f, double lo, double hi, double fl, double fm, double fh,
                        double tol, int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh);
    const double left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fm);
    const double right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fh);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, lo, mid, fl, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, mid, hi, fm, frm, fh, 0.5 * tol, depth - 1);
}

template <class F>
double integrate_adaptive(const F& f, double lo, double hi, double tol) {
    const double mid = 0.5 * (lo + hi);
    return adaptive_simpson(f, lo, hi, f(lo), f(mid), f(hi), tol, 30);
}

// Inner integral over the off-diagonal position at fixed separation h.
double overlap_inner(double h, double a) {
    if (h >= 1.0) return 0.0;
    const double v = 0.5 * h;
    const double norm = 1.0 / std::sqrt(2.0 * kPi * v);
    if (a == 0.0) return norm * (1.0 - h);
    auto f = [&](double x1) {
        const double m = a * drift_gap(x1, x1 + h);
        return std::exp(-m * m / (2.0 * v));
    };
    const double raw = integrate_adaptive(f, 0.0, 1.0 - h, 1e-9 * (1.0 - h));
    return norm * raw;
}

}  // namespace

QuadratureResult overlap_integral(double a) {
    if (a < 0.0) throw std::invalid_argument("overlap_integral: tilt must be >= 0");
    // I = 2 int_0^1 inner(h) dh; substitute h = s^2 so the h^{-1/2} edge is
    // regular, then use geometric panels in s to resolve the large-a scales.
    auto g = [&](double s) { return 4.0 * s * overlap_inner(s * s, a); };
    std::vector<double> edges;
    edges.push_back(0.0);
    for (double s = 1e-4; s < 1.0; s *= 1.4142135623730951) edges.push_back(s);
    edges.push_back(1.0);
    double total = 0.0, probe = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        total += gauss(g, edges[i], edges[i + 1], kGL);
        probe += gauss(g, edges[i], edges[i + 1], 6);
    }
    QuadratureResult r;
    r.value = total;
    r.error_estimate = std::abs(total - probe);
    r.warning = r.error_estimate > 0.005 * std::abs(total);
    return r;
}

double ldp_rate(double c, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("ldp_rate: gamma must be positive");
    if (c <= 0.0) return std::numeric_limits<double>::infinity();
    const double z = 2.0 * gamma * c - 1.0;
    return z * z / (8.0 * c);
}

OuTailReport ou_tail_experiment(double gamma, std::span<const double> T_list, double c,
                                long n_samples, std::uint64_t seed, bool stationary_start,
                                double dt, int workers) {
    if (!(gamma > 0.0)) throw std::invalid_argument("ou_tail_experiment: gamma > 0 required");
    if (T_list.empty() || n_samples < 1)
        throw std::invalid_argument("ou_tail_experiment: empty request");
    std::vector<double> Ts(T_list.begin(), T_list.end());
    std::sort(Ts.begin(), Ts.end());
    std::vector<long> steps(Ts.size());
    for (std::size_t i = 0; i < Ts.size(); ++i) {
        steps[i] = std::lround(Ts[i] / dt);
        if (std::abs(steps[i] * dt - Ts[i]) > 1e-9)
            throw std::invalid_argument("ou_tail_experiment: dt must divide every T");
    }
    const double q = std::exp(-gamma * dt);
    const double sd = ou_step_stddev(gamma, dt);
    const double sd0 = 1.0 / std::sqrt(2.0 * gamma);

    std::vector<std::vector<double>> avg(Ts.size(),
                                         std::vector<double>(n_samples, 0.0));
    parallel_for(n_samples, workers, [&](std::int64_t p) {
        const auto stream =
            rng::Stream::derive(seed, rng::kOuExperiment, static_cast<std::uint64_t>(p));
        double x = stationary_start ? sd0 * stream.normal(0) : 0.0;
        double prev = x * x;
        double S = 0.0;
        std::size_t which = 0;
        const long last = steps.back();
        for (long k = 1; k <= last; ++k) {
            x = q * x + sd * stream.normal(k);
            const double x2 = x * x;
            S += 0.5 * (prev + x2) * dt;
            prev = x2;
            while (which < Ts.size() && k == steps[which]) {
                avg[which][p] = S / Ts[which];
                ++which;
            }
        }
    });

    OuTailReport rep;
    rep.gamma = gamma;
    rep.c = c;
    rep.dt = dt;
    rep.n_samples = n_samples;
    rep.stationary_start = stationary_start;
    for (std::size_t i = 0; i < Ts.size(); ++i) {
        OuTailPoint pt;
        pt.T = Ts[i];
        long count = 0;
        for (double v : avg[i]) count += (v > c);
        pt.exceedances = count;
        pt.p_hat = static_cast<double>(count) / n_samples;
        pt.rate = count > 0 ? -std::log(pt.p_hat) / Ts[i]
                            : std::numeric_limits<double>::infinity();
        pt.low_count = count < 50;
        const MeanSE ms = mean_se(avg[i]);
        pt.mean_time_avg = ms.mean;
        pt.mean_se = ms.se;
        rep.points.push_back(pt);
    }
    for (std::size_t i = 0; i + 1 < Ts.size(); ++i) {
        const double p0 = rep.points[i].p_hat, p1 = rep.points[i + 1].p_hat;
        rep.differenced_rates.push_back(
            (p0 > 0 && p1 > 0) ? std::log(p0 / p1) / (Ts[i + 1] - Ts[i])
                               : std::numeric_limits<double>::infinity());
    }
    return rep;
}

double ou_coupling_ks_pvalue(int mode_n, double T, int n_samples, std::uint64_t seed,
                             double dt) {
    if (mode_n < 1) throw std::invalid_argument("ou_coupling_ks_pvalue: mode must be >= 1");
    const double lam = mode_n * mode_n * kPi * kPi;
    auto time_average = [&](double rate, double horizon, double step,
                            const rng::Stream& stream) {
        const long n = std::lround(horizon / step);
        const double q = std::exp(-rate * step);
        const double sd = ou_step_stddev(rate, step);
        double x = 0.0, prev = 0.0, S = 0.0;
        for (long k = 1; k <= n; ++k) {
            x = q * x + sd * stream.normal(k);
            const double x2 = x * x;
            S += 0.5 * (prev + x2) * step;
            prev = x2;
        }
        return S / horizon;
    };
    std::vector<double> direct(n_samples), coupled(n_samples);
    for (int p = 0; p < n_samples; ++p) {
        const auto sa = rng::Stream::derive(seed, rng::kOuExperiment, 2 * p);
        const auto sb = rng::Stream::derive(seed, rng::kOuExperiment, 2 * p + 1);
        direct[p] = time_average(lam, T, dt, sa);
        // Unit-rate process run on the dilated clock, then scaled back.
        coupled[p] = time_average(1.0, lam * T, lam * dt, sb) / lam;
    }
    double p_value = 0.0;
    ks_two_sample(direct, coupled, &p_value);
    return p_value;
}

ExponentFit fit_scaling_exponent(std::span<const double> J, std::span<const double> R,
                                 std::span<const double> R_stderr) {
    if (J.size() != R.size() || J.size() != R_stderr.size())
        throw std::invalid_argument("fit_scaling_exponent: size mismatch");
    std::vector<double> uniq(J.begin(), J.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (uniq.size() < 3)
        throw std::invalid_argument("fit_scaling_exponent: need >= 3 distinct J values");
    double sw = 0.0, sx = 0.0, sy = 0.0;
    std::vector<double> x(J.size()), y(J.size()), w(J.size());
    for (std::size_t i = 0; i < J.size(); ++i) {
        if (!(J[i] > 0.0) || !(R[i] > 0.0) || !(R_stderr[i] > 0.0))
            throw std::invalid_argument("fit_scaling_exponent: inputs must be positive");
        x[i] = std::log(J[i]);
        y[i] = std::log(R[i]);
        const double sigma = R_stderr[i] / R[i];  // stderr of log R
        w[i] = 1.0 / (sigma * sigma);
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < J.size(); ++i) {
        sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
        sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
    }
    ExponentFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    fit.slope_stderr = std::sqrt(1.0 / sxx);
    return fit;
}

namespace {
long gcd_positive(long a, long b) { return std::gcd(a, b); }
}  // namespace

Rational flory_balance(FloryCase which) {
    // Each energy term is T^t J^j R^r (Saw2D scales in T instead of J).
    struct Term {
        long t, j, r;
    };
    Term repulsion{}, elastic{};
    bool scale_in_T = false;
    switch (which) {
        case FloryCase::MovingPolymer1D:
            repulsion = {1, 2, -1};  // T J^2 / R
            elastic = {1, -3, 2};    // T R^2 / J^3
            break;
        case FloryCase::MovingPolymer2D:
            repulsion = {1, 2, -2};  // T J^2 / R^2
            elastic = {1, -3, 2};    // T R^2 / J^3
            break;
        case FloryCase::Saw2D:
            repulsion = {2, 0, -2};  // T^2 / R^2
            elastic = {-1, 0, 2};    // R^2 / T
            scale_in_T = true;
            break;
    }
    // Equate and solve for the exponent of R in the scaling variable.
    const long dv = scale_in_T ? (repulsion.t - elastic.t) : (repulsion.j - elastic.j);
    const long dr = elastic.r - repulsion.r;
    Rational out{dv, dr};
    const long g = gcd_positive(std::abs(out.num), std::abs(out.den));
    if (g > 0) {
        out.num /= g;
        out.den /= g;
    }
    if (out.den < 0) {
        out.num = -out.num;
        out.den = -out.den;
    }
    return out;
}

}  // namespace polymerflow
