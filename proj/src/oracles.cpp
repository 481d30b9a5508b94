#include "boa/oracles.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "boa/errors.hpp"

namespace boa {

namespace {

struct EigenPoint {
    Eigen::VectorXd evals;
    Eigen::MatrixXcd evecs;
};

EigenPoint solve_at(const ElectronicModel& model, const Point& x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(eval_electronic(model, x));
    return {solver.eigenvalues(), solver.eigenvectors()};
}

// Eigenvector of the band at x, phase-aligned so <ref, chi> is real positive.
Eigen::VectorXcd aligned_vector(const ElectronicModel& model, const Point& x, int band,
                                const Eigen::VectorXcd& ref) {
    Eigen::VectorXcd v = solve_at(model, x).evecs.col(band);
    const cplx ov = ref.dot(v);
    if (std::abs(ov) < 1e-12) throw SingularNode("oracle alignment failed (orthogonal vectors)");
    return v * (std::conj(ov) / std::abs(ov));
}

Eigen::MatrixXcd projector_at(const ElectronicModel& model, const Point& x, int band) {
    const Eigen::VectorXcd v = solve_at(model, x).evecs.col(band);
    return v * v.adjoint();
}

Point shifted(const Point& x, int axis, double h) {
    Point y = x;
    y[axis] += h;
    return y;
}

// Richardson-extrapolated centered difference: (4 D(h/2) - D(h)) / 3.
template <typename F>
auto richardson(F f, double h) {
    const auto coarse = f(h);
    const auto fine = f(0.5 * h);
    return ((4.0 * fine - coarse) / 3.0).eval();
}

}  // namespace

AdiabaticPointOracle adiabatic_point_oracle(const ElectronicModel& model, const Point& x, int band,
                                            double h) {
    const int m = model.dim_electronic;
    const int d = model.dim_nuclear;
    AdiabaticPointOracle out;
    out.berry.setZero();
    out.mass.setZero();

    const EigenPoint center = solve_at(model, x);
    const Eigen::VectorXcd chi0 = center.evecs.col(band);
    Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        if (i == band) continue;
        reduced += center.evecs.col(i) * center.evecs.col(i).adjoint() /
                   (center.evals(i) - center.evals(band));
    }
    const Eigen::MatrixXcd p0 = chi0 * chi0.adjoint();
    const Eigen::MatrixXcd q0 = Eigen::MatrixXcd::Identity(m, m) - p0;

    // Gauge-invariant pieces from projector / aligned-eigenvector derivatives.
    std::vector<Eigen::MatrixXcd> dp;   // d_a P0
    std::vector<Eigen::VectorXcd> dchi; // d_a chi in the local parallel gauge
    for (int a = 0; a < d; ++a) {
        dp.push_back(richardson(
            [&](double hh) {
                return ((projector_at(model, shifted(x, a, hh), band) -
                         projector_at(model, shifted(x, a, -hh), band)) /
                        (2.0 * hh))
                    .eval();
            },
            h));
        dchi.push_back(richardson(
            [&](double hh) {
                return ((aligned_vector(model, shifted(x, a, hh), band, chi0) -
                         aligned_vector(model, shifted(x, a, -hh), band, chi0)) /
                        (2.0 * hh))
                    .eval();
            },
            h));
    }

    for (int a = 0; a < d; ++a)
        out.born_huang += (dp[a] * dp[a] * q0).trace().real();

    for (int la = 0; la < d; ++la)
        for (int ka = 0; ka < d; ++ka) out.mass(la, ka) = dchi[la].dot(reduced * q0 * dchi[ka]);

    double b2 = 0.0;
    for (int a = 0; a < d; ++a) {
        const Eigen::MatrixXcd b = cplx{0.0, -1.0} * p0 * dp[a] * reduced * q0;
        b2 += b.operatorNorm() * b.operatorNorm();
    }
    out.b_norm = std::sqrt(b2);

    // Berry connection in the analytic-frame gauge.
    if (model.analytic_frame) {
        for (int a = 0; a < d; ++a) {
            const Eigen::VectorXcd dxi = richardson(
                [&](double hh) {
                    return ((model.analytic_frame(shifted(x, a, hh)).col(band) -
                             model.analytic_frame(shifted(x, a, -hh)).col(band)) /
                            (2.0 * hh))
                        .eval();
                },
                h);
            const Eigen::VectorXcd xi = model.analytic_frame(x).col(band);
            out.berry(a) = (cplx{0.0, 1.0} * xi.dot(dxi)).real();
        }
    }
    return out;
}

double gaussian_kinetic_expectation(const Point& momentum, double sigma, double eps, int dim) {
    double k2 = 0.0;
    for (int a = 0; a < dim; ++a) k2 += momentum[a] * momentum[a];
    return 0.5 * k2 + dim * eps * eps / (8.0 * sigma * sigma);
}

WaveState free_gaussian_reference(const Grid& grid, const PacketSpec& spec, double eps, double t) {
    WaveState psi(grid, 1, eps);
    const double s2 = spec.sigma * spec.sigma;
    const cplx a{s2, 0.5 * eps * t};
    const cplx width_factor = spec.sigma / std::sqrt(a);
    for (long node = 0; node < grid.total_nodes(); ++node) {
        const Point x = grid.point(node);
        cplx amp{1.0, 0.0};
        for (int ax = 0; ax < grid.dim; ++ax) {
            const double kappa = spec.momentum[ax] / eps;
            const double delta = x[ax] - spec.center[ax];
            const cplx arg = (-delta * delta + cplx{0.0, 4.0 * s2 * kappa} * delta -
                              cplx{0.0, 2.0 * eps * t * s2 * kappa * kappa}) /
                             (4.0 * a);
            amp *= width_factor * std::exp(arg) *
                   std::exp(cplx{0.0, spec.momentum[ax] * spec.center[ax] / eps});
        }
        psi.at(node, 0) = amp;
    }
    normalize(psi);  // matches the discrete normalization of gaussian_packet
    return psi;
}

double position_expectation(const WaveState& psi, int axis) {
    double acc = 0.0;
    for (long node = 0; node < psi.grid.total_nodes(); ++node) {
        const Point x = psi.grid.point(node);
        double w = 0.0;
        for (int c = 0; c < psi.ncomp; ++c) w += std::norm(psi.at(node, c));
        acc += x[axis] * w;
    }
    return acc * psi.grid.cell_volume() / norm_sq(psi);
}

}  // namespace boa
