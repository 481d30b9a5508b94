#pragma once

#include "boa/superadiabatic.hpp"

namespace boa {

/// Realization of the velocity-dependent mass correction M(x,p).
///  - Symmetric: (1/2) sum_lk (m_lk p_l p_k + p_l p_k m_lk), the default.
///  - AngularLgL: L g L with g the angular contraction of the mass tensor;
///    available in d = 2, annihilates zero-angular-momentum states exactly.
enum class MQuantization { Symmetric, AngularLgL };

/// Smooth cutoff around band crossings: 0 inside r_min, cosine ramp to 1 at
/// 2 r_min. Singular ingredients (A, phi, mass tensor) are multiplied by the
/// mask at build time; nodes inside r_min form the hard-excluded region.
struct Regularization {
    double r_min = 0.0;
    std::vector<Point> centers;

    double mask(const Point& x, int dim) const;
    bool hard_excluded(const Point& x, int dim) const;
    bool active() const { return r_min > 0.0 && !centers.empty(); }
};

/// Applyable effective Born-Oppenheimer Hamiltonian acting on nucleonic
/// wavefunctions with l components:
///   order 0: p^2/2 + W
///   order 1: (p - eps A)^2 / 2 + W
///   order 2 (one band): (p - eps A)^2 / 2 + E + eps^2/2 phi - eps^2 M
/// Every ingredient is stored flattened and pre-masked; application is
/// matrix-free (spectral momenta, nodewise fields) and self-adjoint on the
/// discretized space.
class EffectiveHamiltonian : public StateOperator {
public:
    int order = 0;
    BandSelector bands;
    double eps = 1.0;
    MQuantization quantization = MQuantization::Symmetric;
    Regularization regularization;

    Grid grid_;
    int l = 1;
    std::vector<cplx> w;        // l x l blocks per node (E_j for one band)
    std::vector<cplx> a;        // [axis][node] l x l blocks; empty if absent
    std::vector<double> phi;    // per node; empty if absent
    std::vector<cplx> mass;     // d x d blocks per node; empty if absent
    std::vector<double> g_ang;  // per node angular contraction; empty if absent
    std::vector<uint8_t> hard_excluded;

    WaveState apply(const WaveState& psi) const override;
    int ncomp() const override { return l; }
    const Grid& grid() const override { return grid_; }

    bool has_berry() const { return !a.empty(); }
    bool has_phi() const { return !phi.empty(); }
    bool has_mass() const { return !mass.empty() || !g_ang.empty(); }
    /// Mass of psi inside the hard-excluded region.
    double excluded_mass(const WaveState& psi) const;
};

/// Assemble from the model's eigenframe in the chosen gauge. For l > 1 only
/// orders 0 and 1 are supported (OrderError); W is diagonal in the band
/// energies and A is the frame's Berry connection.
EffectiveHamiltonian build_effective(const ElectronicModel& model, const Grid& grid,
                                     const BandSelector& bands, int order, double eps,
                                     GaugeKind gauge = GaugeKind::ParallelTransport,
                                     DerivScheme scheme = DerivScheme::CenteredFd4,
                                     MQuantization quant = MQuantization::Symmetric,
                                     double r_min_cells = 2.0, double gap_threshold = 1e-6);

/// Assemble from an arbitrary smooth orthonormal basis of an invariant
/// subspace (diabatic representations); W and A from multiband_matrices.
EffectiveHamiltonian build_effective_from_basis(const ElectronicModel& model,
                                                const FiberField& basis, int order, double eps,
                                                DerivScheme scheme = DerivScheme::CenteredFd4);

/// One-band conical Hamiltonian h_+/- from the closed forms
///   E = s C |x|, A = -e_phi/(2|x|), phi = 1/(4|x|^2),
///   m = -s/(8C|x|^3) e_phi (x) e_phi,  g_ang = -s/(8C|x|^5),
/// s = +1 upper band, -1 lower. include_phi / include_mass select the
/// order-2 ingredients (the "phi only" study variant drops the mass term).
EffectiveHamiltonian conical_effective_closed_form(double C, const Grid& grid, bool upper,
                                                   int order, double eps,
                                                   MQuantization quant = MQuantization::Symmetric,
                                                   double r_min_cells = 2.0, bool include_phi = true,
                                                   bool include_mass = true);

}  // namespace boa
