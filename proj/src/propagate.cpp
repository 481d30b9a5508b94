#include "boa/propagate.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "boa/errors.hpp"

namespace boa {

namespace {

// One Strang stepper bound to a model sampled on a grid. Stepping is done in
// the fast time tau = t/eps, where a step is
//   exp(-i H_e dtau/2) . exp(-i eps^2 |k|^2/2 dtau) . exp(-i H_e dtau/2).
class StrangStepper {
public:
    StrangStepper(const ElectronicModel& model, const Grid& grid, double eps)
        : grid_(grid), m_(model.dim_electronic), eps_(eps), ws_(grid, m_) {
        const long n = grid.total_nodes();
        evecs_.resize(n * m_ * m_);
        evals_.resize(n * m_);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
        for (long node = 0; node < n; ++node) {
            solver.compute(eval_electronic(model, grid.point(node)));
            for (int r = 0; r < m_; ++r) {
                evals_[node * m_ + r] = solver.eigenvalues()(r);
                for (int c = 0; c < m_; ++c)
                    evecs_[node * m_ * m_ + r * m_ + c] = solver.eigenvectors()(r, c);
            }
        }
        k2_.resize(n);
        for (long node = 0; node < n; ++node) {
            const auto ij = grid.unflatten(node);
            double k2 = grid.wavenumber(0, ij[0]) * grid.wavenumber(0, ij[0]);
            if (grid.dim == 2) k2 += grid.wavenumber(1, ij[1]) * grid.wavenumber(1, ij[1]);
            k2_[node] = k2;
        }
    }

    void set_dtau(double dtau) {
        if (dtau == dtau_) return;
        dtau_ = dtau;
        const long n = grid_.total_nodes();
        pot_half_.assign(n * m_ * m_, cplx{0.0, 0.0});
        for (long node = 0; node < n; ++node) {
            // V diag(exp(-i lambda dtau/2)) V^dagger
            for (int r = 0; r < m_; ++r)
                for (int c = 0; c < m_; ++c) {
                    cplx acc{0.0, 0.0};
                    for (int j = 0; j < m_; ++j) {
                        const cplx ph = std::exp(cplx{0.0, -evals_[node * m_ + j] * dtau * 0.5});
                        acc += evecs_[node * m_ * m_ + r * m_ + j] * ph *
                               std::conj(evecs_[node * m_ * m_ + c * m_ + j]);
                    }
                    pot_half_[node * m_ * m_ + r * m_ + c] = acc;
                }
        }
        kin_.resize(n);
        for (long node = 0; node < n; ++node)
            kin_[node] = std::exp(cplx{0.0, -0.5 * eps_ * eps_ * k2_[node] * dtau_});
    }

    void step(std::vector<cplx>& v) const {
        apply_pot_half(v);
        ws_.forward(v);
        const long n = grid_.total_nodes();
        for (long node = 0; node < n; ++node)
            for (int c = 0; c < m_; ++c) v[node * m_ + c] *= kin_[node];
        ws_.backward(v);
        apply_pot_half(v);
    }

private:
    void apply_pot_half(std::vector<cplx>& v) const {
        const long n = grid_.total_nodes();
        std::array<cplx, 8> tmp;  // m <= 8 fast path
        for (long node = 0; node < n; ++node) {
            const cplx* blk = pot_half_.data() + node * m_ * m_;
            cplx* x = v.data() + node * m_;
            for (int r = 0; r < m_; ++r) {
                cplx acc{0.0, 0.0};
                for (int c = 0; c < m_; ++c) acc += blk[r * m_ + c] * x[c];
                tmp[r] = acc;
            }
            for (int r = 0; r < m_; ++r) x[r] = tmp[r];
        }
    }

    Grid grid_;
    int m_;
    double eps_;
    Spectral ws_;
    std::vector<cplx> evecs_;
    std::vector<double> evals_;
    std::vector<double> k2_;
    double dtau_ = -1.0;
    std::vector<cplx> pot_half_;
    std::vector<cplx> kin_;
};

double state_energy(const FullHamiltonian& h, const WaveState& psi) {
    return inner(psi, h.apply(psi)).real();
}

double diff_norm(const std::vector<cplx>& a, const std::vector<cplx>& b, double cell_volume) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s * cell_volume);
}

}  // namespace

PropagationResult propagate_full(const ElectronicModel& model, double eps,
                                 const MolecularState& psi0, double T, const DtPolicy& policy) {
    if (psi0.ncomp != model.dim_electronic)
        throw GridMismatch("propagate_full: state components != dim_electronic");
    PropagationResult res;
    res.state = psi0;
    res.state.eps = eps;
    res.times = {0.0};
    if (T == 0.0) return res;

    StrangStepper stepper(model, psi0.grid, eps);
    FullHamiltonian ham(model, psi0.grid, eps);
    const double norm0 = norm(res.state);
    const double energy0 = state_energy(ham, res.state);
    const double cell = psi0.grid.cell_volume();

    const double tau_final = T / eps;
    double tau = 0.0;
    double dtau = policy.dt_init > 0.0 ? policy.dt_init / eps
                                       : psi0.grid.min_spacing() * psi0.grid.min_spacing();
    if (!policy.adaptive && policy.fixed_steps > 0) dtau = tau_final / policy.fixed_steps;
    dtau = std::min(dtau, tau_final);

    long since_check = 0;
    while (tau < tau_final * (1.0 - 1e-15)) {
        dtau = std::min(dtau, tau_final - tau);
        if (!policy.adaptive) {
            stepper.set_dtau(dtau);
            stepper.step(res.state.values);
        } else {
            bool accepted = false;
            for (int attempt = 0; attempt < 64 && !accepted; ++attempt) {
                std::vector<cplx> big = res.state.values;
                stepper.set_dtau(dtau);
                stepper.step(big);
                std::vector<cplx> small = res.state.values;
                stepper.set_dtau(0.5 * dtau);
                stepper.step(small);
                stepper.step(small);
                const double err = diff_norm(big, small, cell);
                if (err <= policy.local_tol) {
                    res.state.values = std::move(small);
                    accepted = true;
                    if (err < policy.local_tol / 32.0) dtau *= 1.41;
                } else {
                    dtau *= 0.5;
                    ++res.rejected;
                    if (dtau < policy.dt_min / eps)
                        throw AccuracyError("propagate_full: step size collapsed below dt_min");
                }
            }
            if (!accepted) throw AccuracyError("propagate_full: no acceptable step in 64 halvings");
        }
        tau += dtau;
        ++res.steps;
        res.times.push_back(tau * eps);
        res.step_sizes.push_back(dtau * eps);
        res.norm_drift = std::max(res.norm_drift, std::abs(norm(res.state) - norm0));
        if (++since_check == 64) {
            since_check = 0;
            res.energy_drift =
                std::max(res.energy_drift, std::abs(state_energy(ham, res.state) - energy0));
        }
    }
    res.energy_drift = std::max(res.energy_drift, std::abs(state_energy(ham, res.state) - energy0));
    return res;
}

PropagationResult propagate_lanczos(const StateOperator& op, const WaveState& psi0, double T,
                                    double eps, const DtPolicy& policy,
                                    const EffectiveHamiltonian* support_guard) {
    PropagationResult res;
    res.state = psi0;
    res.state.eps = eps;
    res.times = {0.0};
    if (support_guard && support_guard->excluded_mass(res.state) > 1e-8)
        throw SupportError("initial state overlaps the excluded region beyond 1e-8");
    if (T == 0.0) return res;

    const double norm0 = norm(res.state);
    const double energy0 = inner(res.state, op.apply(res.state)).real();
    const int kmax = std::max(4, policy.krylov_dim);
    const double tau_final = T / eps;
    double tau = 0.0;
    double dtau_prev = 0.0;

    std::vector<WaveState> v;
    std::vector<double> alpha, beta;

    while (tau < tau_final * (1.0 - 1e-15)) {
        const double beta0 = norm(res.state);
        v.clear();
        alpha.clear();
        beta.clear();
        WaveState v0 = res.state;
        scale(v0, cplx{1.0 / beta0, 0.0});
        v.push_back(std::move(v0));
        int k = kmax;
        for (int j = 0; j < kmax; ++j) {
            WaveState w = op.apply(v[j]);
            const double aj = inner(v[j], w).real();
            alpha.push_back(aj);
            axpy(cplx{-aj, 0.0}, v[j], w);
            if (j > 0) axpy(cplx{-beta[j - 1], 0.0}, v[j - 1], w);
            for (size_t i = 0; i < v.size(); ++i) {  // full reorthogonalization
                const cplx c = inner(v[i], w);
                axpy(-c, v[i], w);
            }
            const double bj = norm(w);
            if (bj < 1e-13 * std::abs(alpha[0] + 1.0)) {
                k = j + 1;  // happy breakdown: exact in the current subspace
                break;
            }
            if (j + 1 < kmax) {
                beta.push_back(bj);
                scale(w, cplx{1.0 / bj, 0.0});
                v.push_back(std::move(w));
            } else {
                beta.push_back(bj);  // residual coupling used in the error estimate
            }
        }

        Eigen::MatrixXd tmat = Eigen::MatrixXd::Zero(k, k);
        for (int j = 0; j < k; ++j) {
            tmat(j, j) = alpha[j];
            if (j + 1 < k) tmat(j, j + 1) = tmat(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tmat);
        const Eigen::VectorXd theta = es.eigenvalues();
        const Eigen::MatrixXd q = es.eigenvectors();
        const Eigen::VectorXd q1 = q.row(0);

        auto coeffs = [&](double dt) {
            Eigen::VectorXcd y(k);
            for (int r = 0; r < k; ++r) {
                cplx acc{0.0, 0.0};
                for (int j = 0; j < k; ++j)
                    acc += q(r, j) * std::exp(cplx{0.0, -theta(j) * dt}) * q1(j);
                y(r) = acc;
            }
            return y;
        };

        double dtau;
        Eigen::VectorXcd y;
        if (!policy.adaptive && policy.fixed_steps > 0) {
            dtau = std::min(tau_final / policy.fixed_steps, tau_final - tau);
            y = coeffs(dtau);
        } else {
            dtau = dtau_prev > 0.0 ? std::min(1.2 * dtau_prev, tau_final - tau) : tau_final - tau;
            y = coeffs(dtau);
            if (k == kmax) {  // adapt so the last basis vector stays unpopulated
                while (std::abs(y(k - 1)) > policy.local_tol) {
                    dtau *= 0.7;
                    ++res.rejected;
                    if (dtau < policy.dt_min / eps)
                        throw AccuracyError("propagate_lanczos: step size collapsed below dt_min");
                    y = coeffs(dtau);
                }
            }
        }

        WaveState next(res.state.grid, res.state.ncomp, eps);
        for (int j = 0; j < k; ++j) axpy(beta0 * y(j), v[j], next);
        res.state = std::move(next);
        tau += dtau;
        dtau_prev = dtau;
        ++res.steps;
        res.times.push_back(tau * eps);
        res.step_sizes.push_back(dtau * eps);
        res.norm_drift = std::max(res.norm_drift, std::abs(norm(res.state) - norm0));
        if (support_guard && support_guard->excluded_mass(res.state) > 1e-6)
            throw SupportError("wavepacket mass entered the excluded region");
    }
    res.energy_drift = std::abs(inner(res.state, op.apply(res.state)).real() - energy0);
    return res;
}

PropagationResult propagate_effective(const EffectiveHamiltonian& heff, const NucleonicState& psi0,
                                      double T, const DtPolicy& policy) {
    if (!(psi0.grid == heff.grid())) throw GridMismatch("propagate_effective grid");
    if (psi0.ncomp != heff.ncomp()) throw GridMismatch("propagate_effective components");
    const EffectiveHamiltonian* guard = heff.regularization.active() ? &heff : nullptr;
    return propagate_lanczos(heff, psi0, T, heff.eps, policy, guard);
}

WaveState intertwine(const Intertwiner& u, IntertwineDirection dir, const WaveState& state) {
    return dir == IntertwineDirection::ToMolecular ? u.embed(state) : u.project(state);
}

AdiDiaPair adi_dia_pair(double C, double eps, const Grid& grid, double r_min_cells) {
    if (grid.dim != 2) throw GridMismatch("adi_dia_pair needs a 2d grid");
    const ElectronicModel model = make_conical(C, 10.0 + std::max(std::abs(grid.lo[0]), grid.hi[0]));

    // Diabatic side: constant canonical basis, W(x) = H_e(x), A = 0 exactly.
    FiberField canonical(grid, FieldKind::Frame, 2, 2, 1, "diabatic");
    for (long node = 0; node < grid.total_nodes(); ++node)
        canonical.at(node) = Eigen::MatrixXcd::Identity(2, 2);
    EffectiveHamiltonian h_dia = build_effective_from_basis(model, canonical, 0, eps);

    // Adiabatic side: exact closed-form connection in the ascending (-, +)
    // band ordering, masked around the crossing.
    EffectiveHamiltonian h_adi;
    {
        Regularization reg;
        reg.r_min = r_min_cells * std::max(grid.spacing(0), grid.spacing(1));
        reg.centers = {{0.0, 0.0}};
        h_adi.order = 1;
        h_adi.bands = BandSelector::range(0, 2);
        h_adi.eps = eps;
        h_adi.regularization = reg;
        h_adi.grid_ = grid;
        h_adi.l = 2;
        const long n = grid.total_nodes();
        h_adi.w.assign(n * 4, cplx{0.0, 0.0});
        h_adi.a.assign(2 * n * 4, cplx{0.0, 0.0});
        h_adi.hard_excluded.assign(n, 0);
        for (long node = 0; node < n; ++node) {
            const Point x = grid.point(node);
            const double r = std::hypot(x[0], x[1]);
            h_adi.w[node * 4 + 0] = -C * r;
            h_adi.w[node * 4 + 3] = C * r;
            const double m = reg.mask(x, 2);
            h_adi.hard_excluded[node] = reg.hard_excluded(x, 2) ? 1 : 0;
            // A_axis = -e_phi_axis/(2r) * [[1, i], [-i, 1]]
            const double e0 = x[1] / (r * r), e1 = -x[0] / (r * r);
            const cplx k11{1.0, 0.0}, k12{0.0, 1.0}, k21{0.0, -1.0}, k22{1.0, 0.0};
            const cplx f0{-0.5 * m * e0, 0.0}, f1{-0.5 * m * e1, 0.0};
            h_adi.a[(0 * n + node) * 4 + 0] = f0 * k11;
            h_adi.a[(0 * n + node) * 4 + 1] = f0 * k12;
            h_adi.a[(0 * n + node) * 4 + 2] = f0 * k21;
            h_adi.a[(0 * n + node) * 4 + 3] = f0 * k22;
            h_adi.a[(1 * n + node) * 4 + 0] = f1 * k11;
            h_adi.a[(1 * n + node) * 4 + 1] = f1 * k12;
            h_adi.a[(1 * n + node) * 4 + 2] = f1 * k21;
            h_adi.a[(1 * n + node) * 4 + 3] = f1 * k22;
        }
    }

    EigenFrame ef = eigendecompose_smooth(model, grid, BandSelector::range(0, 2),
                                          GaugeKind::Analytic, 1e-6, 0.0);
    Intertwiner s(ef.frame, eps);
    return AdiDiaPair{std::move(h_dia), std::move(h_adi), std::move(s)};
}

}  // namespace boa
