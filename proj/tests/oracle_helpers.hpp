// Test-side oracle machinery: dense operator construction from first
// principles (naive DFT, nodewise blocks), independent of the library's
// FFT-based application path.
#pragma once

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "boa/effective.hpp"
#include "boa/superadiabatic.hpp"

namespace oracle {

using boa::cplx;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Unitary DFT matrix (naive O(n^2) construction).
inline Matrix dft_matrix(int n) {
    Matrix f(n, n);
    const double w = -2.0 * M_PI / n;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) f(r, c) = std::exp(cplx{0.0, w * r * c}) / std::sqrt(double(n));
    return f;
}

/// Dense p_0 = -i eps d/dx on a 1d grid with ncomp components.
inline Matrix dense_momentum(const boa::Grid& grid, int ncomp, double eps) {
    const int n = grid.nodes[0];
    Matrix f = dft_matrix(n);
    Eigen::VectorXd k(n);
    for (int i = 0; i < n; ++i) k(i) = grid.wavenumber(0, i);
    Matrix p1 = f.adjoint() * (eps * k.asDiagonal().toDenseMatrix()) * f;
    if (ncomp == 1) return p1;
    Matrix out = Matrix::Zero(n * ncomp, n * ncomp);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < ncomp; ++a) out(r * ncomp + a, c * ncomp + a) = p1(r, c);
    return out;
}

/// Dense block-diagonal matrix from per-node blocks (row-major storage).
inline Matrix dense_blocks(const std::vector<cplx>& blocks, long n, int m) {
    Matrix out = Matrix::Zero(n * m, n * m);
    for (long node = 0; node < n; ++node)
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) out(node * m + r, node * m + c) = blocks[node * m * m + r * m + c];
    return out;
}

inline Matrix dense_field_blocks(const boa::FiberField& f, int comp) {
    const long n = f.grid.total_nodes();
    Matrix out = Matrix::Zero(n * f.rows, n * f.rows);
    for (long node = 0; node < n; ++node)
        for (int r = 0; r < f.rows; ++r)
            for (int c = 0; c < f.cols; ++c) out(node * f.rows + r, node * f.rows + c) = f.at(node, comp)(r, c);
    return out;
}

/// Dense P1 = p.B + B^*.p on a 1d grid.
inline Matrix dense_p1(const boa::FiberField& b, double eps) {
    const int m = b.rows;
    const Matrix p = dense_momentum(b.grid, m, eps);
    const Matrix bb = dense_field_blocks(b, 0);
    return p * bb + bb.adjoint() * p;
}

/// Dense one-band effective Hamiltonian matching EffectiveHamiltonian's
/// ingredient arrays (1d, l = 1).
inline Matrix dense_effective(const boa::EffectiveHamiltonian& h, double eps) {
    const boa::Grid& g = h.grid();
    const long n = g.total_nodes();
    const Matrix p = dense_momentum(g, 1, eps);
    Matrix out = 0.5 * p * p;
    for (long node = 0; node < n; ++node) out(node, node) += h.w[node];
    if (h.has_berry()) {
        Matrix a = Matrix::Zero(n, n);
        for (long node = 0; node < n; ++node) a(node, node) = h.a[node];
        out += -0.5 * eps * (p * a + a * p) + 0.5 * eps * eps * a * a;
    }
    if (h.has_phi())
        for (long node = 0; node < n; ++node) out(node, node) += 0.5 * eps * eps * h.phi[node];
    if (!h.mass.empty()) {
        Matrix mm = Matrix::Zero(n, n);
        for (long node = 0; node < n; ++node) mm(node, node) = h.mass[node];
        out += -0.5 * eps * eps * (mm * p * p + p * p * mm);
    }
    return out;
}

/// Dense U_(order) as an l*n x m*n matrix (1d).
inline Matrix dense_intertwiner(const boa::FiberField& frame, const boa::FiberField& b, double eps,
                                int order) {
    const boa::Grid& g = frame.grid;
    const long n = g.total_nodes();
    const int m = frame.rows, l = frame.cols;
    Matrix u0 = Matrix::Zero(n * l, n * m);
    for (long node = 0; node < n; ++node)
        for (int a = 0; a < l; ++a)
            for (int bc = 0; bc < m; ++bc)
                u0(node * l + a, node * m + bc) = std::conj(frame.at(node)(bc, a));
    if (order == 0) return u0;
    const Matrix p = dense_momentum(g, m, eps);
    const Matrix bb = dense_field_blocks(b, 0);
    return u0 + eps * u0 * p * bb;
}

inline Vector random_state(long dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(dim);
    for (long i = 0; i < dim; ++i) v(i) = cplx{gauss(rng), gauss(rng)};
    v.normalize();
    return v;
}

inline boa::WaveState to_state(const boa::Grid& grid, int ncomp, double eps, const Vector& v) {
    boa::WaveState psi(grid, ncomp, eps);
    for (long i = 0; i < v.size(); ++i) psi.values[i] = v(i);
    return psi;
}

inline Vector to_vector(const boa::WaveState& psi) {
    Vector v(psi.size());
    for (long i = 0; i < psi.size(); ++i) v(i) = psi.values[i];
    return v;
}

}  // namespace oracle
