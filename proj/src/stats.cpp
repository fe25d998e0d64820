#include "polymerflow/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace polymerflow {

MeanSE mean_se(std::span<const double> xs) {
    MeanSE r;
    r.n = xs.size();
    if (r.n == 0) return r;
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / r.n;
    if (r.n < 2) return r;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (r.n - 1.0) / r.n);
    return r;
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    double m = 0.0;
    for (double x : xs) m += x;
    m /= xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / (xs.size() - 1.0);
}

WeightedMean weighted_mean(std::span<const double> values, std::span<const double> log_weights) {
    if (values.size() != log_weights.size() || values.empty())
        throw std::invalid_argument("weighted_mean: size mismatch");
    const double lmax = *std::max_element(log_weights.begin(), log_weights.end());
    double sw = 0.0, sww = 0.0, swf = 0.0;
    std::vector<double> w(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        w[i] = std::exp(log_weights[i] - lmax);
        sw += w[i];
        sww += w[i] * w[i];
        swf += w[i] * values[i];
    }
    WeightedMean r;
    r.mean = swf / sw;
    r.ess = sw * sw / sww;
    double s2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - r.mean;
        s2 += w[i] * w[i] * d * d;
    }
    r.se = std::sqrt(s2) / sw;
    return r;
}

double effective_sample_size(std::span<const double> log_weights) {
    if (log_weights.empty()) return 0.0;
    const double lmax = *std::max_element(log_weights.begin(), log_weights.end());
    double sw = 0.0, sww = 0.0;
    for (double lw : log_weights) {
        const double w = std::exp(lw - lmax);
        sw += w;
        sww += w * w;
    }
    return sw * sw / sww;
}

namespace {
// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2k^2 lambda^2}.
double kolmogorov_q(double lambda) {
    if (lambda < 1e-10) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}
}  // namespace

double ks_two_sample(std::span<const double> a, std::span<const double> b, double* p_value) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const std::size_t na = sa.size(), nb = sb.size();
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < na && ib < nb) {
        const double v = std::min(sa[ia], sb[ib]);
        while (ia < na && sa[ia] <= v) ++ia;
        while (ib < nb && sb[ib] <= v) ++ib;
        d = std::max(d, std::abs(double(ia) / na - double(ib) / nb));
    }
    if (p_value) {
        const double ne = std::sqrt(double(na) * nb / (na + nb));
        *p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
    }
    return d;
}

double integrated_autocorr_time(std::span<const double> trace) {
    const std::size_t n = trace.size();
    if (n < 8) return 1.0;
    double m = 0.0;
    for (double x : trace) m += x;
    m /= n;
    double c0 = 0.0;
    for (double x : trace) c0 += (x - m) * (x - m);
    c0 /= n;
    if (c0 <= 0.0) return 1.0;
    double tau = 1.0;
    const std::size_t kmax = n / 4;
    for (std::size_t k = 1; k <= kmax; ++k) {
        double ck = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) ck += (trace[i] - m) * (trace[i + k] - m);
        ck /= (n - k);
        const double rho = ck / c0;
        if (rho < 0.05) break;
        tau += 2.0 * rho;
    }
    return tau;
}

void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn) {
    if (n <= 0) return;
    if (workers <= 1 || n == 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = static_cast<int>(std::min<std::int64_t>(workers, n));
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace polymerflow
