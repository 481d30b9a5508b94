#pragma once

#include <utility>

#include "boa/fiber_field.hpp"
#include "boa/model.hpp"

namespace boa {

enum class GaugeKind { ParallelTransport, Analytic, Raw };

enum class BornHuangMethod { EigenvectorForm, TraceForm };

/// Smooth eigenframe of the selected bands plus their energies.
struct EigenFrame {
    BandSelector bands;
    FiberField energies;  // Scalar kind, ncomp = l, real 1x1 entries, ascending
    FiberField frame;     // Frame kind, m x l per node, columns ordered as bands.indices
    bool seam_warning = false;
    std::vector<long> seam_nodes;  // plaquette anchors (or wrap node in 1d) with bad holonomy
};

/// Per-node eigendecomposition of H_e with one of three gauge fixings:
///  - ParallelTransport: lexicographic comb sweep, each node's frame rotated
///    (polar alignment of the overlap) to the previous node's; deterministic.
///  - Analytic: the model's closed-form frame (ConfigError if absent).
///  - Raw: eigensolver output as is (per-node phases arbitrary).
/// Nodes within exclusion_radius_cells * max spacing of a declared crossing
/// are marked excluded; the gap condition is enforced on the rest
/// (GapViolation). Parallel transport sets seam_warning when a closed grid
/// loop has holonomy far from the identity.
EigenFrame eigendecompose_smooth(const ElectronicModel& model, const Grid& grid,
                                 const BandSelector& selector, GaugeKind gauge,
                                 double gap_threshold = 1e-6, double exclusion_radius_cells = 2.0);

/// Band projector P0(x) = F F^dagger; gauge independent.
FiberField projector_field(const FiberField& frame);

/// Max over nodes of || F^dagger F - 1 ||_max.
double frame_orthonormality_defect(const FiberField& frame);

/// Berry connection A_a = i <chi_m, d_a chi_n>, assembled in the
/// symmetrized form (i/2)(F^dag dF - (dF)^dag F) so that A is Hermitian
/// exactly on the discrete level. Returns ncomp = d blocks of l x l.
FiberField berry_connection(const FiberField& frame, DerivScheme scheme);

/// Born-Huang potential phi(x) >= 0 of a single band.
///  - EigenvectorForm: sum_a <d_a chi, (1-P0) d_a chi> from the frame.
///  - TraceForm: sum_a Tr(d_a P0 d_a P0 (1-P0)) from the projector samples
///    (gauge independent by construction). Accepts a Frame (projector built
///    internally) or a Matrix field holding P0 directly.
FiberField born_huang(const FiberField& frame_or_projector, BornHuangMethod method,
                      DerivScheme scheme);

/// Mass tensor m_lk(x) = <d_l chi_j, (H_e - E_j)^{-1} (1 - P0) d_k chi_j>,
/// with the reduced resolvent assembled spectrally per node. The input frame
/// must be one-band. Throws GapViolation if the band approaches another at a
/// non-excluded node.
FiberField mass_tensor(const ElectronicModel& model, const EigenFrame& frame, DerivScheme scheme,
                       double gap_threshold = 1e-6);

/// omega_ij = -i (d_i A_j - d_j A_i) + A_j A_i - A_i A_j for i < j.
/// Requires d = 2; the single component is omega_01.
FiberField curvature(const FiberField& berry, DerivScheme scheme);

struct MultibandMatrices {
    FiberField W;  // l x l Hermitian
    FiberField A;  // ncomp = d blocks of l x l Hermitian
};

/// W_ab = <phi_a, H_e phi_b>, A_ab = i <phi_a, grad phi_b> for a smooth
/// orthonormal basis spanning an invariant subspace of H_e. BasisError if
/// the basis is not orthonormal or not invariant to 1e-8.
MultibandMatrices multiband_matrices(const ElectronicModel& model, const FiberField& basis,
                                     DerivScheme scheme = DerivScheme::CenteredFd4);

/// Basis change phi_tilde_b = sum_a phi_a G_ab:
///   W~ = G^-1 W G,   A~ = G^-1 A G + i G^-1 grad G.
std::pair<FiberField, FiberField> gauge_transform(const FiberField& W, const FiberField& A,
                                                  const GaugeMap& gauge, DerivScheme scheme);

}  // namespace boa
