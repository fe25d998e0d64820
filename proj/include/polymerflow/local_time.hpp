#pragma once

#include "polymerflow/field_sim.hpp"
#include "polymerflow/spectral.hpp"

namespace polymerflow {

// Binned occupation density of one snapshot: bin b covers
// [origin + b*bin_width, origin + (b+1)*bin_width).
struct LocalTimeProfile {
    double bin_width = 0.0;
    double origin = 0.0;
    double domain_length = 1.0;
    std::vector<double> densities;
    bool degenerate = false;  // >90% of mass in at most two bins

    double total_mass() const;
};

// Each grid cell contributes its measure J/M to the bin holding its midpoint
// value. Bins are anchored at the snapshot's spatial mean, so the profile is
// invariant under rigid vertical shifts of the field.
LocalTimeProfile occupation_histogram(const FieldSnapshot& snapshot, double bin_width);

// sum of density^2 * bin_width: the self-intersection of one snapshot.
double self_intersection(const LocalTimeProfile& profile);

// Independent pair-sum estimator of the same quantity: (J/M)^2 times the sum
// of a triangular kernel of the given bandwidth over all midpoint value pairs.
double self_intersection_kernel(const FieldSnapshot& snapshot, double bandwidth);
double self_intersection_kernel(std::span<const double> grid_values, double J,
                                double bandwidth);

// Trapezoid-in-time accumulation of self_intersection over the stored
// snapshots; stores the energy back on the path.
struct PathEnergy {
    double energy = 0.0;
    double log_gibbs_factor = 0.0;
};

PathEnergy path_energy(PathSample& path, double bin_width, double beta);

// delta ~ 0.64 sqrt(J / (2M)): about 0.02 sqrt(J) at M = 512.
double default_bin_width(double J, int grid_cells);

// CSV rows of (bin_center, density).
void write_profile_csv(const LocalTimeProfile& profile, const std::string& path);

}  // namespace polymerflow
