#include "boa/fourier.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "boa/errors.hpp"

namespace boa {

namespace {

std::mutex plan_mutex;

struct PlanPair {
    fftw_plan fwd;
    fftw_plan bwd;
};

// Plans are keyed by shape only and kept for the process lifetime. They are
// created with FFTW_UNALIGNED so new-array execution is valid for any buffer.
PlanPair& plans_for(const Grid& grid, int ncomp) {
    using Key = std::tuple<int, int, int, int>;
    static std::map<Key, PlanPair> cache;
    const Key key{grid.dim, grid.nodes[0], grid.nodes[1], ncomp};
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const long total = grid.total_nodes() * ncomp;
    std::vector<cplx> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    int n[2] = {grid.nodes[0], grid.nodes[1]};
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.fwd = fftw_plan_many_dft(grid.dim, n, ncomp, buf, nullptr, ncomp, 1, buf, nullptr, ncomp, 1,
                               FFTW_FORWARD, flags);
    p.bwd = fftw_plan_many_dft(grid.dim, n, ncomp, buf, nullptr, ncomp, 1, buf, nullptr, ncomp, 1,
                               FFTW_BACKWARD, flags);
    if (!p.fwd || !p.bwd) throw ConfigError("fftw plan creation failed");
    return cache.emplace(key, p).first->second;
}

}  // namespace

Spectral::Spectral(const Grid& grid, int ncomp) : grid_(grid), ncomp_(ncomp) {
    PlanPair& p = plans_for(grid, ncomp);
    fwd_ = p.fwd;
    bwd_ = p.bwd;
}

void Spectral::forward(std::vector<cplx>& values) const {
    auto* buf = reinterpret_cast<fftw_complex*>(values.data());
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), buf, buf);
}

void Spectral::backward(std::vector<cplx>& values) const {
    auto* buf = reinterpret_cast<fftw_complex*>(values.data());
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), buf, buf);
    const double inv = 1.0 / grid_.total_nodes();
    for (cplx& v : values) v *= inv;
}

namespace {

template <typename MultiplierFn>
WaveState fourier_multiplier(const WaveState& psi, MultiplierFn mult) {
    WaveState out = psi;
    Spectral ws(psi.grid, psi.ncomp);
    ws.forward(out.values);
    const Grid& g = psi.grid;
    for (long node = 0; node < g.total_nodes(); ++node) {
        const auto ij = g.unflatten(node);
        double k0 = g.wavenumber(0, ij[0]);
        double k1 = (g.dim == 2) ? g.wavenumber(1, ij[1]) : 0.0;
        const cplx m = mult(k0, k1);
        for (int c = 0; c < psi.ncomp; ++c) out.at(node, c) *= m;
    }
    ws.backward(out.values);
    return out;
}

}  // namespace

WaveState kinetic_apply(const WaveState& psi) {
    const double e2 = psi.eps * psi.eps;
    return fourier_multiplier(
        psi, [e2](double k0, double k1) { return cplx{0.5 * e2 * (k0 * k0 + k1 * k1), 0.0}; });
}

WaveState kinetic_cutoff(double E, const WaveState& psi) {
    const double e2 = psi.eps * psi.eps;
    return fourier_multiplier(psi, [e2, E](double k0, double k1) {
        return cplx{0.5 * e2 * (k0 * k0 + k1 * k1) <= E ? 1.0 : 0.0, 0.0};
    });
}

WaveState momentum_apply(int axis, const WaveState& psi) {
    if (axis < 0 || axis >= psi.grid.dim) throw DomainError("momentum axis out of range");
    const double eps = psi.eps;
    if (axis == 0)
        return fourier_multiplier(psi, [eps](double k0, double) { return cplx{eps * k0, 0.0}; });
    return fourier_multiplier(psi, [eps](double, double k1) { return cplx{eps * k1, 0.0}; });
}

double kinetic_energy(const WaveState& psi) {
    const WaveState t = kinetic_apply(psi);
    return inner(psi, t).real();
}

double cutoff_mass_loss(double E, const WaveState& psi) {
    const WaveState cut = kinetic_cutoff(E, psi);
    return norm_sq(psi) - norm_sq(cut);
}

}  // namespace boa
