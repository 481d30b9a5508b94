#pragma once

#include "boa/effective.hpp"

namespace boa {

/// Time-step control. Times are in the slow (macroscopic) variable t of
/// i eps d_t psi = H psi; internally both propagators step tau = t/eps.
struct DtPolicy {
    bool adaptive = true;
    double dt_init = 0.0;    // 0: seeded with eps * (min cell)^2
    double local_tol = 1e-9;
    double dt_min = 1e-12;
    int fixed_steps = 0;     // adaptive == false: exactly this many steps
    int krylov_dim = 24;     // effective propagator subspace size
};

struct PropagationResult {
    WaveState state;
    std::vector<double> times;       // accepted step times (t units), starts at 0
    std::vector<double> step_sizes;  // accepted dt per step
    double norm_drift = 0.0;         // max |  ||psi(t)|| - ||psi(0)||  |
    double energy_drift = 0.0;       // max | <H>(t) - <H>(0) | over checkpoints
    long steps = 0;
    long rejected = 0;
};

/// Full molecular dynamics i eps d_t Psi = (-eps^2/2 Lap + H_e) Psi by Strang
/// splitting with nodewise matrix exponentials of H_e and an exact Fourier
/// kinetic step. Adaptive runs compare dt against two dt/2 substeps and keep
/// the substep result; AccuracyError if dt collapses below dt_min.
PropagationResult propagate_full(const ElectronicModel& model, double eps,
                                 const MolecularState& psi0, double T, const DtPolicy& policy = {});

/// Effective dynamics i eps d_t psi = H_eff psi by short-iterative Lanczos
/// with matrix-free operator application (the Berry and mass terms are
/// diagonal in neither position nor momentum space). Norm is preserved to
/// reorthogonalization accuracy. SupportError if more than 1e-6 of the mass
/// enters the hard-excluded region (1e-8 at t = 0).
PropagationResult propagate_effective(const EffectiveHamiltonian& heff, const NucleonicState& psi0,
                                      double T, const DtPolicy& policy = {});

/// Generic Lanczos propagation for any self-adjoint StateOperator.
PropagationResult propagate_lanczos(const StateOperator& op, const WaveState& psi0, double T,
                                    double eps, const DtPolicy& policy = {},
                                    const EffectiveHamiltonian* support_guard = nullptr);

enum class IntertwineDirection { ToMolecular, ToNucleonic };

/// Psi = U^* psi (ToMolecular) or psi = U Psi (ToNucleonic).
WaveState intertwine(const Intertwiner& u, IntertwineDirection dir, const WaveState& state);

/// Diabatic/adiabatic pair for the conical model:
///   h_dia = p^2/2 + W(x) in the constant canonical basis,
///   h_adi = (p - eps A)^2/2 + diag(E-, E+) with the exact closed-form
///           connection A = -e_phi/(2|x|) [[1, i], [-i, 1]] (bands ascending),
///   s     = nodewise change to the smooth eigenframe.
/// The singular A is masked inside r_min_cells cells of the origin, so the
/// identity s h_dia s^{-1} = h_adi holds on states supported outside.
struct AdiDiaPair {
    EffectiveHamiltonian h_dia;
    EffectiveHamiltonian h_adi;
    Intertwiner s;
};

AdiDiaPair adi_dia_pair(double C, double eps, const Grid& grid, double r_min_cells = 2.0);

}  // namespace boa
