#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "boa/grid.hpp"

namespace boa {

using cplx = std::complex<double>;

/// Wavefunction on a nuclear grid with ncomp internal components.
/// Molecular states carry ncomp = m (full electronic fiber), nucleonic
/// states ncomp = l (reference space of the selected bands). Values are
/// stored node-major with the component index fastest.
struct WaveState {
    Grid grid;
    int ncomp = 1;
    double eps = 1.0;
    std::vector<cplx> values;

    WaveState() = default;
    WaveState(const Grid& g, int ncomp_, double eps_)
        : grid(g), ncomp(ncomp_), eps(eps_), values(g.total_nodes() * ncomp_, cplx{0.0, 0.0}) {}

    cplx& at(long node, int c = 0) { return values[node * ncomp + c]; }
    const cplx& at(long node, int c = 0) const { return values[node * ncomp + c]; }
    long size() const { return static_cast<long>(values.size()); }
};

using MolecularState = WaveState;
using NucleonicState = WaveState;

/// L2 inner product with the cell-volume measure.
cplx inner(const WaveState& a, const WaveState& b);
double norm(const WaveState& a);
double norm_sq(const WaveState& a);
void scale(WaveState& a, cplx factor);
void axpy(cplx alpha, const WaveState& x, WaveState& y);  // y += alpha x
void normalize(WaveState& a);

/// Pointwise fiber norm <Psi(x), Psi(x)>; integrates to ||Psi||^2.
std::vector<double> fiber_density(const WaveState& psi);

struct PacketSpec {
    Point center{0.0, 0.0};
    double sigma = 1.0;
    Point momentum{0.0, 0.0};            // semiclassical momentum k0; phase is exp(i k0.x / eps)
    Eigen::VectorXcd spinor;             // internal components; defaults to (1)
};

/// Normalized Gaussian packet exp(-(x-x0)^2/(4 sigma^2) + i k0.x/eps).
/// The 1/eps momentum scaling keeps the kinetic energy O(1) in eps.
/// Throws BoundaryError unless the center sits >= 5 sigma from every boundary.
WaveState gaussian_packet(const Grid& grid, const PacketSpec& spec, double eps);

/// Binary state container (little-endian, doubles):
/// magic "BOASTATE", u32 version, grid record, eps, ncomp, payload of
/// (re, im) pairs row-major with the component index fastest.
void save_state(const std::string& path, const WaveState& psi);
WaveState load_state(const std::string& path);

}  // namespace boa
