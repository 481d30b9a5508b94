#pragma once

#include "boa/model.hpp"
#include "boa/state.hpp"

namespace boa {

/// Brute-force single-point values of the adiabatic quantities, assembled
/// by Richardson finite differences of the eigenproblem directly (projector
/// samples for the gauge-invariant pieces, the model's analytic frame for
/// the gauge-dependent Berry connection). Independent of the grid-based
/// field machinery; used to freeze expected values in tests and by the
/// `oracle` CLI subcommand.
struct AdiabaticPointOracle {
    Eigen::Vector2d berry;       // A_j(x); from the analytic frame gauge
    double born_huang = 0.0;     // phi_j(x)
    Eigen::Matrix2cd mass;       // m_lk(x) (top-left d x d block used)
    double b_norm = 0.0;         // sqrt(sum_axis ||B_axis||_2^2)
};

AdiabaticPointOracle adiabatic_point_oracle(const ElectronicModel& model, const Point& x, int band,
                                            double h = 1e-4);

/// <T> of a Gaussian packet with 1/eps-scaled momentum: |k0|^2/2 + d eps^2/(8 sigma^2).
double gaussian_kinetic_expectation(const Point& momentum, double sigma, double eps, int dim);

/// Closed-form free evolution of gaussian_packet(spec) at time t under
/// i eps d_t psi = -eps^2/2 Laplacian psi, sampled on the grid (per-axis
/// product of dispersing Gaussians, discretely normalized).
WaveState free_gaussian_reference(const Grid& grid, const PacketSpec& spec, double eps, double t);

/// <x_axis> of a state.
double position_expectation(const WaveState& psi, int axis);

}  // namespace boa
