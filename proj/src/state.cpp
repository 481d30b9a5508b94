#include "boa/state.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "boa/errors.hpp"

namespace boa {

cplx inner(const WaveState& a, const WaveState& b) {
    if (!(a.grid == b.grid) || a.ncomp != b.ncomp)
        throw GridMismatch("inner product between states on different grids");
    cplx s{0.0, 0.0};
    for (long i = 0; i < a.size(); ++i) s += std::conj(a.values[i]) * b.values[i];
    return s * a.grid.cell_volume();
}

double norm_sq(const WaveState& a) {
    double s = 0.0;
    for (const cplx& v : a.values) s += std::norm(v);
    return s * a.grid.cell_volume();
}

double norm(const WaveState& a) { return std::sqrt(norm_sq(a)); }

void scale(WaveState& a, cplx factor) {
    for (cplx& v : a.values) v *= factor;
}

void axpy(cplx alpha, const WaveState& x, WaveState& y) {
    if (x.size() != y.size()) throw GridMismatch("axpy size mismatch");
    for (long i = 0; i < x.size(); ++i) y.values[i] += alpha * x.values[i];
}

void normalize(WaveState& a) {
    const double n = norm(a);
    if (n == 0.0) throw DomainError("cannot normalize the zero state");
    scale(a, cplx{1.0 / n, 0.0});
}

std::vector<double> fiber_density(const WaveState& psi) {
    std::vector<double> rho(psi.grid.total_nodes(), 0.0);
    for (long node = 0; node < psi.grid.total_nodes(); ++node)
        for (int c = 0; c < psi.ncomp; ++c) rho[node] += std::norm(psi.at(node, c));
    return rho;
}

WaveState gaussian_packet(const Grid& grid, const PacketSpec& spec, double eps) {
    for (int a = 0; a < grid.dim; ++a) {
        const double margin = std::min(spec.center[a] - grid.lo[a], grid.hi[a] - spec.center[a]);
        if (margin < 5.0 * spec.sigma)
            throw BoundaryError("packet center within 5 sigma of the boundary on axis " +
                                std::to_string(a));
    }
    Eigen::VectorXcd spinor = spec.spinor;
    if (spinor.size() == 0) {
        spinor = Eigen::VectorXcd::Zero(1);
        spinor(0) = 1.0;
    }
    WaveState psi(grid, static_cast<int>(spinor.size()), eps);
    const double s4 = 4.0 * spec.sigma * spec.sigma;
    for (long node = 0; node < grid.total_nodes(); ++node) {
        const Point x = grid.point(node);
        double r2 = 0.0, phase = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
            const double d = x[a] - spec.center[a];
            r2 += d * d;
            phase += spec.momentum[a] * x[a];
        }
        const cplx amp = std::exp(cplx{-r2 / s4, phase / eps});
        for (int c = 0; c < psi.ncomp; ++c) psi.at(node, c) = amp * spinor(c);
    }
    normalize(psi);
    return psi;
}

namespace {

constexpr char kMagic[8] = {'B', 'O', 'A', 'S', 'T', 'A', 'T', 'E'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("truncated state file");
    return v;
}

}  // namespace

void save_state(const std::string& path, const WaveState& psi) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    put(out, kVersion);
    put(out, static_cast<std::int32_t>(psi.grid.dim));
    for (int a = 0; a < 2; ++a) put(out, static_cast<std::int32_t>(psi.grid.nodes[a]));
    for (int a = 0; a < 2; ++a) put(out, psi.grid.lo[a]);
    for (int a = 0; a < 2; ++a) put(out, psi.grid.hi[a]);
    put(out, static_cast<std::int32_t>(psi.grid.half_cell_offset ? 1 : 0));
    put(out, psi.eps);
    put(out, static_cast<std::int32_t>(psi.ncomp));
    for (const cplx& v : psi.values) {
        put(out, v.real());
        put(out, v.imag());
    }
    if (!out) throw IoError("write failure on " + path);
}

WaveState load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError(path + " is not a state container");
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion) throw IoError("unsupported state container version");
    Grid g;
    g.dim = get<std::int32_t>(in);
    for (int a = 0; a < 2; ++a) g.nodes[a] = get<std::int32_t>(in);
    for (int a = 0; a < 2; ++a) g.lo[a] = get<double>(in);
    for (int a = 0; a < 2; ++a) g.hi[a] = get<double>(in);
    g.half_cell_offset = get<std::int32_t>(in) != 0;
    validate(g);
    const double eps = get<double>(in);
    const int ncomp = get<std::int32_t>(in);
    WaveState psi(g, ncomp, eps);
    for (cplx& v : psi.values) {
        const double re = get<double>(in);
        const double im = get<double>(in);
        v = cplx{re, im};
    }
    return psi;
}

}  // namespace boa
