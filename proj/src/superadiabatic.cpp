#include "boa/superadiabatic.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "boa/errors.hpp"
#include "boa/fit.hpp"

namespace boa {

namespace {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw GridMismatch(what);
}

// out_node += block * in_node for m x m row-major blocks
inline void block_mul_add(cplx* out, const cplx* block, const cplx* in, int m) {
    for (int r = 0; r < m; ++r) {
        cplx acc{0.0, 0.0};
        for (int c = 0; c < m; ++c) acc += block[r * m + c] * in[c];
        out[r] += acc;
    }
}

// out_node += block^dagger * in_node
inline void block_adjoint_mul_add(cplx* out, const cplx* block, const cplx* in, int m) {
    for (int r = 0; r < m; ++r) {
        cplx acc{0.0, 0.0};
        for (int c = 0; c < m; ++c) acc += std::conj(block[c * m + r]) * in[c];
        out[r] += acc;
    }
}

}  // namespace

FullHamiltonian::FullHamiltonian(const ElectronicModel& model, const Grid& grid, double eps)
    : grid_(grid), m_(model.dim_electronic), eps_(eps), he_(grid.total_nodes() * m_ * m_) {
    if (grid.dim != model.dim_nuclear) throw GridMismatch("FullHamiltonian grid vs model");
    for (long node = 0; node < grid.total_nodes(); ++node) {
        const Eigen::MatrixXcd h = eval_electronic(model, grid.point(node));
        for (int r = 0; r < m_; ++r)
            for (int c = 0; c < m_; ++c) he_[node * m_ * m_ + r * m_ + c] = h(r, c);
    }
}

WaveState FullHamiltonian::apply(const WaveState& psi) const {
    require_same_grid(psi.grid, grid_, "FullHamiltonian::apply");
    if (psi.ncomp != m_) throw GridMismatch("FullHamiltonian: component mismatch");
    WaveState out = kinetic_apply(psi);
    for (long node = 0; node < grid_.total_nodes(); ++node)
        block_mul_add(&out.values[node * m_], block(node), &psi.values[node * m_], m_);
    return out;
}

FiberField build_b_field(const ElectronicModel& model, const Grid& grid, int band,
                         DerivScheme scheme, double gap_threshold, double exclusion_radius_cells) {
    if (band < 0 || band >= model.dim_electronic) throw ConfigError("band index out of range");
    const int m = model.dim_electronic;

    // Projector samples are gauge free; differentiate those.
    EigenFrame ef = eigendecompose_smooth(model, grid, BandSelector::single(band), GaugeKind::Raw,
                                          gap_threshold, exclusion_radius_cells);
    const FiberField p0 = projector_field(ef.frame);

    FiberField b(grid, FieldKind::Vector, m, m, grid.dim, "invariant");
    b.excluded = p0.excluded;

    std::vector<FiberField> dp;
    for (int axis = 0; axis < grid.dim; ++axis) dp.push_back(derivative(p0, axis, scheme));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
    for (long node = 0; node < grid.total_nodes(); ++node) {
        solver.compute(eval_electronic(model, grid.point(node)));
        const Eigen::VectorXd& e = solver.eigenvalues();
        const Eigen::MatrixXcd& v = solver.eigenvectors();
        Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            if (i == band) continue;
            const double gap = e(i) - e(band);
            if (std::abs(gap) < gap_threshold) {
                if (!b.is_excluded(node))
                    throw GapViolation("build_b_field: gap below threshold at node " +
                                       std::to_string(node));
                continue;
            }
            reduced += v.col(i) * v.col(i).adjoint() / gap;
        }
        for (int axis = 0; axis < grid.dim; ++axis)
            b.at(node, axis) = cplx{0.0, -1.0} * p0.at(node) * dp[axis].at(node) * reduced;
    }
    return b;
}

P1Operator::P1Operator(const FiberField& b_field)
    : grid_(b_field.grid), m_(b_field.rows), dim_(b_field.ncomp) {
    b_.resize(static_cast<size_t>(dim_) * grid_.total_nodes() * m_ * m_);
    for (int axis = 0; axis < dim_; ++axis)
        for (long node = 0; node < grid_.total_nodes(); ++node)
            for (int r = 0; r < m_; ++r)
                for (int c = 0; c < m_; ++c)
                    b_[(static_cast<size_t>(axis) * grid_.total_nodes() + node) * m_ * m_ + r * m_ +
                       c] = b_field.at(node, axis)(r, c);
}

WaveState P1Operator::apply(const WaveState& psi) const {
    require_same_grid(psi.grid, grid_, "P1Operator::apply");
    if (psi.ncomp != m_) throw GridMismatch("P1Operator: component mismatch");
    WaveState out(grid_, m_, psi.eps);
    const long n = grid_.total_nodes();
    for (int axis = 0; axis < dim_; ++axis) {
        const cplx* blocks = b_.data() + static_cast<size_t>(axis) * n * m_ * m_;
        // p_axis (B_axis psi)
        WaveState u(grid_, m_, psi.eps);
        for (long node = 0; node < n; ++node)
            block_mul_add(&u.values[node * m_], blocks + node * m_ * m_, &psi.values[node * m_], m_);
        u = momentum_apply(axis, u);
        // B_axis^dagger (p_axis psi)
        const WaveState v = momentum_apply(axis, psi);
        for (long node = 0; node < n; ++node) {
            for (int c = 0; c < m_; ++c) out.values[node * m_ + c] += u.values[node * m_ + c];
            block_adjoint_mul_add(&out.values[node * m_], blocks + node * m_ * m_,
                                  &v.values[node * m_], m_);
        }
    }
    return out;
}

BandProjector::BandProjector(const FiberField& frame)
    : grid_(frame.grid), m_(frame.rows), p0_(grid_.total_nodes() * m_ * m_) {
    for (long node = 0; node < grid_.total_nodes(); ++node) {
        const Eigen::MatrixXcd p = frame.at(node) * frame.at(node).adjoint();
        for (int r = 0; r < m_; ++r)
            for (int c = 0; c < m_; ++c) p0_[node * m_ * m_ + r * m_ + c] = p(r, c);
    }
}

WaveState BandProjector::apply(const WaveState& psi) const {
    require_same_grid(psi.grid, grid_, "BandProjector::apply");
    WaveState out(grid_, m_, psi.eps);
    for (long node = 0; node < grid_.total_nodes(); ++node)
        block_mul_add(&out.values[node * m_], p0_.data() + node * m_ * m_, &psi.values[node * m_],
                      m_);
    return out;
}

CorrectedProjector::CorrectedProjector(std::shared_ptr<BandProjector> p0,
                                       std::shared_ptr<P1Operator> p1, double eps, int order)
    : p0_(std::move(p0)), p1_(std::move(p1)), eps_(eps), order_(order) {
    if (order_ < 0 || order_ > 1) throw OrderError("corrected projector supports orders 0 and 1");
    if (order_ == 1 && !p1_) throw ConfigError("order 1 projector needs P1");
}

WaveState CorrectedProjector::apply(const WaveState& psi) const {
    WaveState out = p0_->apply(psi);
    if (order_ == 1) axpy(cplx{eps_, 0.0}, p1_->apply(psi), out);
    return out;
}

Intertwiner::Intertwiner(const FiberField& frame, FiberField b_field, double eps, int order)
    : grid_(frame.grid), m_(frame.rows), l_(frame.cols), dim_(grid_.dim), order_(order), eps_(eps) {
    if (order_ < 0 || order_ > 1) throw OrderError("intertwiner supports orders 0 and 1");
    frame_.resize(grid_.total_nodes() * m_ * l_);
    for (long node = 0; node < grid_.total_nodes(); ++node)
        for (int r = 0; r < m_; ++r)
            for (int c = 0; c < l_; ++c) frame_[node * m_ * l_ + r * l_ + c] = frame.at(node)(r, c);
    if (order_ == 1) {
        require_same_grid(frame.grid, b_field.grid, "Intertwiner frame vs B");
        b_.resize(static_cast<size_t>(dim_) * grid_.total_nodes() * m_ * m_);
        for (int axis = 0; axis < dim_; ++axis)
            for (long node = 0; node < grid_.total_nodes(); ++node)
                for (int r = 0; r < m_; ++r)
                    for (int c = 0; c < m_; ++c)
                        b_[(static_cast<size_t>(axis) * grid_.total_nodes() + node) * m_ * m_ +
                           r * m_ + c] = b_field.at(node, axis)(r, c);
    }
}

Intertwiner::Intertwiner(const FiberField& frame, double eps)
    : Intertwiner(frame, FiberField{}, eps, 0) {}

WaveState Intertwiner::p_dot_b(const WaveState& psi) const {
    WaveState out(grid_, m_, psi.eps);
    const long n = grid_.total_nodes();
    for (int axis = 0; axis < dim_; ++axis) {
        const cplx* blocks = b_.data() + static_cast<size_t>(axis) * n * m_ * m_;
        WaveState u(grid_, m_, psi.eps);
        for (long node = 0; node < n; ++node)
            block_mul_add(&u.values[node * m_], blocks + node * m_ * m_, &psi.values[node * m_], m_);
        u = momentum_apply(axis, u);
        axpy(cplx{1.0, 0.0}, u, out);
    }
    return out;
}

WaveState Intertwiner::bstar_dot_p(const WaveState& psi) const {
    WaveState out(grid_, m_, psi.eps);
    const long n = grid_.total_nodes();
    for (int axis = 0; axis < dim_; ++axis) {
        const cplx* blocks = b_.data() + static_cast<size_t>(axis) * n * m_ * m_;
        const WaveState v = momentum_apply(axis, psi);
        for (long node = 0; node < n; ++node)
            block_adjoint_mul_add(&out.values[node * m_], blocks + node * m_ * m_,
                                  &v.values[node * m_], m_);
    }
    return out;
}

NucleonicState Intertwiner::project(const MolecularState& psi) const {
    require_same_grid(psi.grid, grid_, "Intertwiner::project");
    if (psi.ncomp != m_) throw GridMismatch("Intertwiner::project component mismatch");
    WaveState src = psi;
    if (order_ == 1) {
        src.eps = psi.eps;
        axpy(cplx{eps_, 0.0}, p_dot_b(psi), src);
    }
    NucleonicState out(grid_, l_, psi.eps);
    for (long node = 0; node < grid_.total_nodes(); ++node) {
        const cplx* f = frame_.data() + node * m_ * l_;
        for (int a = 0; a < l_; ++a) {
            cplx acc{0.0, 0.0};
            for (int bidx = 0; bidx < m_; ++bidx)
                acc += std::conj(f[bidx * l_ + a]) * src.values[node * m_ + bidx];
            out.values[node * l_ + a] = acc;
        }
    }
    return out;
}

MolecularState Intertwiner::embed(const NucleonicState& phi) const {
    require_same_grid(phi.grid, grid_, "Intertwiner::embed");
    if (phi.ncomp != l_) throw GridMismatch("Intertwiner::embed component mismatch");
    MolecularState out(grid_, m_, phi.eps);
    for (long node = 0; node < grid_.total_nodes(); ++node) {
        const cplx* f = frame_.data() + node * m_ * l_;
        for (int bidx = 0; bidx < m_; ++bidx) {
            cplx acc{0.0, 0.0};
            for (int a = 0; a < l_; ++a) acc += f[bidx * l_ + a] * phi.values[node * l_ + a];
            out.values[node * m_ + bidx] = acc;
        }
    }
    if (order_ == 1) axpy(cplx{eps_, 0.0}, bstar_dot_p(out), out);
    return out;
}

namespace {

struct PacketDraw {
    Point center;
    double sigma;
    Point momentum;
    Eigen::VectorXcd spinor;
};

std::vector<PacketDraw> draw_packets(const Grid& grid, int spinor_dim, const EnsembleSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<PacketDraw> out;
    out.reserve(spec.count);
    const double l0 = grid.length(0);
    for (int s = 0; s < spec.count; ++s) {
        PacketDraw d;
        for (int a = 0; a < grid.dim; ++a)
            d.center[a] = grid.lo[a] + grid.length(a) * (0.35 + 0.3 * unit(rng));
        d.sigma = l0 * (0.04 + 0.02 * unit(rng));
        const double mag = 0.3 + 0.7 * unit(rng);
        if (grid.dim == 1) {
            d.momentum = {unit(rng) < 0.5 ? -mag : mag, 0.0};
        } else {
            const double ang = 2.0 * M_PI * unit(rng);
            d.momentum = {mag * std::cos(ang), mag * std::sin(ang)};
        }
        d.spinor = Eigen::VectorXcd(spinor_dim);
        for (int c = 0; c < spinor_dim; ++c) d.spinor(c) = cplx{unit(rng) - 0.5, unit(rng) - 0.5};
        d.spinor.normalize();
        out.push_back(std::move(d));
    }
    return out;
}

WaveState realize_packet(const Grid& grid, const PacketDraw& d, double eps, double kinetic_bound) {
    PacketSpec spec;
    spec.center = d.center;
    spec.sigma = d.sigma;
    spec.momentum = d.momentum;
    spec.spinor = d.spinor;
    WaveState psi = gaussian_packet(grid, spec, eps);
    const double loss = cutoff_mass_loss(kinetic_bound, psi);
    if (loss > 1e-8)
        throw EnsembleError("ensemble state loses " + std::to_string(loss) +
                            " mass under the kinetic cutoff");
    return psi;
}

}  // namespace

std::vector<MolecularState> molecular_ensemble(const ElectronicModel& model, const Grid& grid,
                                               double eps, const EnsembleSpec& spec) {
    const auto draws = draw_packets(grid, model.dim_electronic, spec);
    std::vector<MolecularState> out;
    out.reserve(draws.size());
    for (const auto& d : draws) out.push_back(realize_packet(grid, d, eps, spec.kinetic_bound));
    return out;
}

std::vector<NucleonicState> nucleonic_ensemble(const Grid& grid, int l, double eps,
                                               const EnsembleSpec& spec) {
    const auto draws = draw_packets(grid, l, spec);
    std::vector<NucleonicState> out;
    out.reserve(draws.size());
    for (const auto& d : draws) out.push_back(realize_packet(grid, d, eps, spec.kinetic_bound));
    return out;
}

std::pair<DefectMeasurement, DefectMeasurement> projector_defect(
    const ElectronicModel& model, const Grid& grid, int band, const std::vector<double>& epsilons,
    const EnsembleSpec& spec, int order, DerivScheme scheme) {
    EigenFrame ef =
        eigendecompose_smooth(model, grid, BandSelector::single(band), GaugeKind::Raw);
    auto p0 = std::make_shared<BandProjector>(ef.frame);
    std::shared_ptr<P1Operator> p1;
    if (order >= 1) p1 = std::make_shared<P1Operator>(build_b_field(model, grid, band, scheme));

    DefectMeasurement idem, comm;
    idem.ensemble = comm.ensemble = spec;
    for (double eps : epsilons) {
        CorrectedProjector proj(p0, p1, eps, order);
        FullHamiltonian ham(model, grid, eps);
        double worst_idem = 0.0, worst_comm = 0.0;
        for (const MolecularState& psi : molecular_ensemble(model, grid, eps, spec)) {
            const WaveState p_psi = proj.apply(psi);
            WaveState defect = proj.apply(p_psi);
            axpy(cplx{-1.0, 0.0}, p_psi, defect);
            worst_idem = std::max(worst_idem, norm(defect));

            WaveState commutator = proj.apply(ham.apply(psi));
            axpy(cplx{-1.0, 0.0}, ham.apply(p_psi), commutator);
            worst_comm = std::max(worst_comm, norm(commutator));
        }
        idem.epsilons.push_back(eps);
        idem.defects.push_back(worst_idem);
        comm.epsilons.push_back(eps);
        comm.defects.push_back(worst_comm);
    }
    auto fit = [](DefectMeasurement& m) {
        std::vector<std::pair<double, double>> curve;
        for (size_t i = 0; i < m.epsilons.size(); ++i) curve.push_back({m.epsilons[i], m.defects[i]});
        try {
            m.slope = fit_slope(curve).slope;
        } catch (const DegenerateFit&) {
            m.slope = 0.0;  // identically-zero defects (constant frame)
        }
    };
    fit(idem);
    fit(comm);
    return {idem, comm};
}

DefectMeasurement unitarity_defect(const ElectronicModel& model, const Grid& grid, int band,
                                   const std::vector<double>& epsilons, const EnsembleSpec& spec,
                                   int order, DerivScheme scheme) {
    EigenFrame ef = eigendecompose_smooth(model, grid, BandSelector::single(band),
                                          GaugeKind::ParallelTransport);
    FiberField b;
    if (order >= 1) b = build_b_field(model, grid, band, scheme);

    DefectMeasurement out;
    out.ensemble = spec;
    for (double eps : epsilons) {
        const Intertwiner u = order >= 1 ? Intertwiner(ef.frame, b, eps, 1)
                                         : Intertwiner(ef.frame, eps);
        double worst = 0.0;
        for (const NucleonicState& phi : nucleonic_ensemble(grid, 1, eps, spec)) {
            WaveState round = u.project(u.embed(phi));
            axpy(cplx{-1.0, 0.0}, phi, round);
            worst = std::max(worst, norm(round));
        }
        out.epsilons.push_back(eps);
        out.defects.push_back(worst);
    }
    std::vector<std::pair<double, double>> curve;
    for (size_t i = 0; i < out.epsilons.size(); ++i) curve.push_back({out.epsilons[i], out.defects[i]});
    try {
        out.slope = fit_slope(curve).slope;
    } catch (const DegenerateFit&) {
        out.slope = 0.0;
    }
    return out;
}

}  // namespace boa
