#pragma once

#include <cstdint>
#include <memory>
#include <utility>

#include "boa/fourier.hpp"
#include "boa/geometry.hpp"

namespace boa {

/// Linear operator on grid wavefunctions. Implementations must be linear to
/// machine precision and preserve the state's shape.
class StateOperator {
public:
    virtual ~StateOperator() = default;
    virtual WaveState apply(const WaveState& psi) const = 0;
    virtual int ncomp() const = 0;
    virtual const Grid& grid() const = 0;
};

/// H^eps = -eps^2/2 Laplacian + H_e(x), matrix-free.
class FullHamiltonian : public StateOperator {
public:
    FullHamiltonian(const ElectronicModel& model, const Grid& grid, double eps);
    WaveState apply(const WaveState& psi) const override;
    int ncomp() const override { return m_; }
    const Grid& grid() const override { return grid_; }
    double eps() const { return eps_; }
    /// H_e(x) block at a node, row-major m x m.
    const cplx* block(long node) const { return he_.data() + node * m_ * m_; }

private:
    Grid grid_;
    int m_;
    double eps_;
    std::vector<cplx> he_;
};

/// B(x) = -i P0 (grad P0) (H_e - E_j)^{-1} (1 - P0), one m x m block per
/// nuclear axis. Assembled from the projector samples (gauge independent);
/// exactly block-off-diagonal: P0 B P0 = (1-P0) B (1-P0) = 0.
FiberField build_b_field(const ElectronicModel& model, const Grid& grid, int band,
                         DerivScheme scheme = DerivScheme::CenteredFd4,
                         double gap_threshold = 1e-6, double exclusion_radius_cells = 2.0);

/// P1 = p . B + B^* . p with p applied spectrally and B nodewise.
/// The momentum carries the state's own eps.
class P1Operator : public StateOperator {
public:
    explicit P1Operator(const FiberField& b_field);
    WaveState apply(const WaveState& psi) const override;
    int ncomp() const override { return m_; }
    const Grid& grid() const override { return grid_; }

private:
    Grid grid_;
    int m_, dim_;
    std::vector<cplx> b_;  // [axis][node] m x m row-major
};

/// Nodewise multiplication by the band projector P0(x).
class BandProjector : public StateOperator {
public:
    explicit BandProjector(const FiberField& frame);
    WaveState apply(const WaveState& psi) const override;
    int ncomp() const override { return m_; }
    const Grid& grid() const override { return grid_; }

private:
    Grid grid_;
    int m_;
    std::vector<cplx> p0_;
};

/// P^eps_(order) = P0 (+ eps P1).
class CorrectedProjector : public StateOperator {
public:
    CorrectedProjector(std::shared_ptr<BandProjector> p0, std::shared_ptr<P1Operator> p1,
                       double eps, int order);
    WaveState apply(const WaveState& psi) const override;
    int ncomp() const override { return p0_->ncomp(); }
    const Grid& grid() const override { return p0_->grid(); }

private:
    std::shared_ptr<BandProjector> p0_;
    std::shared_ptr<P1Operator> p1_;
    double eps_;
    int order_;
};

/// U_(order): molecular -> nucleonic reference space and its adjoint.
/// order 0: U0 psi = F(x)^dagger Psi(x); order 1 adds eps U0 p.B and the
/// adjoint adds eps B^*.p U0^*. U2 is never constructed; round-trip defects
/// are measured instead.
class Intertwiner {
public:
    Intertwiner(const FiberField& frame, FiberField b_field, double eps, int order);
    /// Frame-only variant (order 0).
    Intertwiner(const FiberField& frame, double eps);

    NucleonicState project(const MolecularState& psi) const;  // U psi
    MolecularState embed(const NucleonicState& phi) const;    // U^* phi
    int order() const { return order_; }
    double eps() const { return eps_; }
    const Grid& grid() const { return grid_; }
    int bands() const { return l_; }
    int fiber_dim() const { return m_; }

private:
    Grid grid_;
    int m_, l_, dim_, order_;
    double eps_;
    std::vector<cplx> frame_;          // m x l row-major per node
    std::vector<cplx> b_;              // as in P1Operator; empty for order 0
    WaveState p_dot_b(const WaveState& psi) const;
    WaveState bstar_dot_p(const WaveState& psi) const;
};

struct EnsembleSpec {
    int count = 32;
    double kinetic_bound = 3.0;
    std::uint64_t seed = 2024;
};

struct DefectMeasurement {
    std::vector<double> epsilons;
    std::vector<double> defects;  // max over the ensemble, one per epsilon
    EnsembleSpec ensemble;
    double slope = 0.0;  // log-log fit, filled by measure_* helpers
};

/// Deterministic bounded-kinetic-energy Gaussian ensembles. Packet
/// parameters are drawn once from the seed and reused for every epsilon;
/// only the 1/eps phase changes. Throws EnsembleError if a generated state
/// loses more than 1e-8 mass under kinetic_cutoff(kinetic_bound).
std::vector<MolecularState> molecular_ensemble(const ElectronicModel& model, const Grid& grid,
                                               double eps, const EnsembleSpec& spec);
std::vector<NucleonicState> nucleonic_ensemble(const Grid& grid, int l, double eps,
                                               const EnsembleSpec& spec);

/// Idempotency and commutator defects of P^eps_(order) over an epsilon sweep:
/// max_psi ||(P^2 - P) psi|| and max_psi ||[P, H^eps] psi||.
std::pair<DefectMeasurement, DefectMeasurement> projector_defect(
    const ElectronicModel& model, const Grid& grid, int band, const std::vector<double>& epsilons,
    const EnsembleSpec& spec, int order = 1, DerivScheme scheme = DerivScheme::CenteredFd4);

/// Round-trip unitarity defect max_psi ||U_(order) U_(order)^* psi - psi||.
DefectMeasurement unitarity_defect(const ElectronicModel& model, const Grid& grid, int band,
                                   const std::vector<double>& epsilons, const EnsembleSpec& spec,
                                   int order = 1, DerivScheme scheme = DerivScheme::CenteredFd4);

}  // namespace boa
