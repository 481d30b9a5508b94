#pragma once

#include <vector>

#include "boa/state.hpp"

namespace boa {

/// FFT workspace bound to a (grid, ncomp) pair. Transforms act on all
/// components at once (component index fastest). Plans are cached for the
/// process lifetime and shared; execution on distinct arrays is thread-safe.
class Spectral {
public:
    Spectral(const Grid& grid, int ncomp);

    void forward(std::vector<cplx>& values) const;   // in place, unnormalized
    void backward(std::vector<cplx>& values) const;  // in place, divides by N

    const Grid& grid() const { return grid_; }
    int ncomp() const { return ncomp_; }

private:
    Grid grid_;
    int ncomp_;
    void* fwd_ = nullptr;  // fftw_plan, opaque here
    void* bwd_ = nullptr;
};

/// -eps^2/2 Laplacian via the Fourier multiplier eps^2 |k|^2 / 2.
WaveState kinetic_apply(const WaveState& psi);

/// Sharp spectral projection onto modes with eps^2 |k|^2 / 2 <= E.
WaveState kinetic_cutoff(double E, const WaveState& psi);

/// p_axis = -i eps d/dx_axis.
WaveState momentum_apply(int axis, const WaveState& psi);

/// <psi, -eps^2/2 Laplacian psi> (real for any state).
double kinetic_energy(const WaveState& psi);

/// Mass removed by kinetic_cutoff(E): ||psi||^2 - ||cutoff psi||^2.
double cutoff_mass_loss(double E, const WaveState& psi);

}  // namespace boa
