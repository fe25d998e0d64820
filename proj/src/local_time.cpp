#include "polymerflow/local_time.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polymerflow/manifest.hpp"

namespace polymerflow {

double LocalTimeProfile::total_mass() const {
    double m = 0.0;
    for (double d : densities) m += d;
    return m * bin_width;
}

LocalTimeProfile occupation_histogram(const FieldSnapshot& snapshot, double bin_width) {
    if (!(bin_width > 0.0))
        throw std::invalid_argument("occupation_histogram: bin width must be positive");
    const int M = snapshot.cells();
    if (M < 1) throw std::invalid_argument("occupation_histogram: empty snapshot");
    for (double v : snapshot.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("occupation_histogram: non-finite snapshot");

    // Spatial mean by trapezoid; anchors the bin grid.
    double mean = 0.5 * (snapshot.values.front() + snapshot.values.back());
    for (int i = 1; i < M; ++i) mean += snapshot.values[i];
    mean /= M;

    double lo = snapshot.values[0], hi = snapshot.values[0];
    for (double v : snapshot.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const long b_lo = static_cast<long>(std::floor((lo - mean) / bin_width)) - 1;
    const long b_hi = static_cast<long>(std::floor((hi - mean) / bin_width)) + 1;

    LocalTimeProfile profile;
    profile.bin_width = bin_width;
    profile.domain_length = snapshot.J;
    profile.origin = mean + b_lo * bin_width;
    profile.densities.assign(b_hi - b_lo + 1, 0.0);

    const double cell_mass = snapshot.J / M;
    for (int i = 0; i < M; ++i) {
        const double mid = 0.5 * (snapshot.values[i] + snapshot.values[i + 1]);
        const long b = static_cast<long>(std::floor((mid - mean) / bin_width)) - b_lo;
        profile.densities[b] += cell_mass;
    }
    for (double& d : profile.densities) d /= bin_width;

    // Degeneracy flag: near-constant fields put almost all mass in <= 2 bins.
    std::vector<double> top(profile.densities.begin(), profile.densities.end());
    std::partial_sort(top.begin(), top.begin() + std::min<std::size_t>(2, top.size()),
                      top.end(), std::greater<>());
    double top2 = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(2, top.size()); ++i) top2 += top[i];
    profile.degenerate = top2 * bin_width > 0.9 * snapshot.J;
    return profile;
}

double self_intersection(const LocalTimeProfile& profile) {
    double s = 0.0;
    for (double d : profile.densities) s += d * d;
    return s * profile.bin_width;
}

double self_intersection_kernel(std::span<const double> grid_values, double J,
                                double bandwidth) {
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("self_intersection_kernel: bandwidth must be positive");
    const int M = static_cast<int>(grid_values.size()) - 1;
    if (M < 1) throw std::invalid_argument("self_intersection_kernel: empty snapshot");
    std::vector<double> mids(M);
    for (int i = 0; i < M; ++i) mids[i] = 0.5 * (grid_values[i] + grid_values[i + 1]);
    std::sort(mids.begin(), mids.end());
    // Triangular kernel vanishes beyond the bandwidth, so only sorted
    // neighbours within it contribute. Diagonal terms contribute K(0) = 1/eps.
    double acc = M / bandwidth;
    const double inv_eps2 = 1.0 / (bandwidth * bandwidth);
    int j0 = 0;
    double off = 0.0;
    for (int i = 0; i < M; ++i) {
        while (mids[i] - mids[j0] >= bandwidth) ++j0;
        for (int j = j0; j < i; ++j)
            off += (bandwidth - (mids[i] - mids[j])) * inv_eps2;
    }
    acc += 2.0 * off;
    const double cell = J / M;
    return acc * cell * cell;
}

double self_intersection_kernel(const FieldSnapshot& snapshot, double bandwidth) {
    return self_intersection_kernel(snapshot.values, snapshot.J, bandwidth);
}

PathEnergy path_energy(PathSample& path, double bin_width, double beta) {
    if (path.n_obs() < 2) throw std::invalid_argument("path_energy: need >= 2 snapshots");
    const int n = path.n_obs();
    double integral = 0.0;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const FieldSnapshot snap = synthesize(path.state_at(i), path.config.grid);
        const double s = self_intersection(occupation_histogram(snap, bin_width));
        if (i > 0) integral += 0.5 * (prev + s) * (path.times[i] - path.times[i - 1]);
        prev = s;
    }
    path.energy = integral;
    return {integral, -beta * integral};
}

double default_bin_width(double J, int grid_cells) {
    return 0.64 * std::sqrt(J / (2.0 * grid_cells));
}

void write_profile_csv(const LocalTimeProfile& profile, const std::string& path) {
    const std::vector<std::string> header{"bin_center", "density"};
    CsvWriter csv(path, header);
    for (std::size_t b = 0; b < profile.densities.size(); ++b)
        csv.row({profile.origin + (b + 0.5) * profile.bin_width, profile.densities[b]});
}

}  // namespace polymerflow
