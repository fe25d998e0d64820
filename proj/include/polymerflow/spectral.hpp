#pragma once

#include <vector>

namespace polymerflow {

// Neumann eigenpair of the Laplacian on [0,J]. Eigenfunctions are
// orthonormal on [0,J]: phi_0 = 1/sqrt(J), phi_n = sqrt(2/J) cos(n pi x / J).
struct EigenPair {
    int n = 0;
    double J = 1.0;
    double lambda = 0.0;

    double eval(double x) const;
};

EigenPair eigen(int n, double J);

// Neumann heat kernel on [0,J] by reflected images of the whole-line kernel.
// k_max <= 0 selects the number of images automatically so the discarded
// tail is below 1e-14.
double heat_kernel_image(double t, double x, double y, double J, int k_max = 0);

// Same kernel from the eigenfunction expansion. n_max <= 0 picks the
// truncation from exp(-lambda_n t) < 1e-16; if that requires more than
// n_ceiling terms the sum is capped and *truncated is set.
double heat_kernel_spectral(double t, double x, double y, double J, int n_max = 0,
                            int n_ceiling = 4096, bool* truncated = nullptr);

// Routes to the image form for t below J^2/pi^2 and the spectral form above.
double heat_kernel(double t, double x, double y, double J);

// One exact transition step of dX = -lambda X dt + dB.
double ou_step_stddev(double lambda, double dt);
double ou_transition(double x, double lambda, double dt, double noise);

// Draw from the stationary law N(0, 1/(2 lambda)); lambda must be positive.
double ou_stationary_draw(double lambda, double noise);

// Mode coefficients of the field at one instant.
struct ModeState {
    double J = 1.0;
    double time = 0.0;
    std::vector<double> coefficients;  // X^(0) .. X^(N)
};

// Field values on the uniform grid x_i = i J / M, i = 0..M.
struct FieldSnapshot {
    double J = 1.0;
    std::vector<double> values;

    int cells() const { return static_cast<int>(values.size()) - 1; }
};

// Evaluates u(x_i) = sum_n X^(n) phi_n(x_i). The default path uses a DCT-I
// transform; synthesize_direct is the plain summation it must match.
FieldSnapshot synthesize(const ModeState& state, int grid_cells);
FieldSnapshot synthesize_direct(const ModeState& state, int grid_cells);

// Stationary variance carried by the discarded modes:
// sum_{n>N} 1/(2 lambda_n) = (J^2 / 2 pi^2) sum_{n>N} n^-2.
double tail_variance(int N, double J);

// sum_{n>N} n^-2 by Euler-Maclaurin.
double inverse_square_tail(int N);

}  // namespace polymerflow
