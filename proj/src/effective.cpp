#include "boa/effective.hpp"

#include <cmath>

#include "boa/errors.hpp"

namespace boa {

double Regularization::mask(const Point& x, int dim) const {
    if (!active()) return 1.0;
    double m = 1.0;
    for (const Point& c : centers) {
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        const double r = std::sqrt(r2);
        double f;
        if (r <= r_min)
            f = 0.0;
        else if (r >= 2.0 * r_min)
            f = 1.0;
        else
            f = 0.5 * (1.0 - std::cos(M_PI * (r - r_min) / r_min));
        m = std::min(m, f);
    }
    return m;
}

bool Regularization::hard_excluded(const Point& x, int dim) const {
    if (!active()) return false;
    for (const Point& c : centers) {
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        if (r2 < r_min * r_min) return true;
    }
    return false;
}

namespace {

inline void block_mul_add(cplx* out, const cplx* block, const cplx* in, int m, cplx weight) {
    for (int r = 0; r < m; ++r) {
        cplx acc{0.0, 0.0};
        for (int c = 0; c < m; ++c) acc += block[r * m + c] * in[c];
        out[r] += weight * acc;
    }
}

}  // namespace

WaveState EffectiveHamiltonian::apply(const WaveState& psi) const {
    if (!(psi.grid == grid_)) throw GridMismatch("EffectiveHamiltonian::apply");
    if (psi.ncomp != l) throw GridMismatch("EffectiveHamiltonian: component mismatch");
    const Grid& g = grid_;
    const long n = g.total_nodes();
    const int d = g.dim;
    const double e = psi.eps;

    Spectral ws(g, l);
    std::vector<cplx> spec = psi.values;
    ws.forward(spec);

    auto mode_k = [&](long node, int axis) {
        const auto ij = g.unflatten(node);
        return g.wavenumber(axis, ij[axis]);
    };

    WaveState out(g, l, e);

    // p^2/2
    {
        std::vector<cplx> buf(spec.size());
        for (long node = 0; node < n; ++node) {
            double k2 = mode_k(node, 0) * mode_k(node, 0);
            if (d == 2) k2 += mode_k(node, 1) * mode_k(node, 1);
            const double mult = 0.5 * e * e * k2;
            for (int c = 0; c < l; ++c) buf[node * l + c] = mult * spec[node * l + c];
        }
        ws.backward(buf);
        for (long i = 0; i < out.size(); ++i) out.values[i] += buf[i];
    }

    // W (or E_j) nodewise
    for (long node = 0; node < n; ++node)
        block_mul_add(&out.values[node * l], w.data() + node * l * l, &psi.values[node * l], l,
                      cplx{1.0, 0.0});

    std::vector<WaveState> p_psi;  // p_a psi, kept for the Berry and mass terms
    if (has_berry() || !g_ang.empty()) {
        for (int axis = 0; axis < d; ++axis) {
            WaveState pa(g, l, e);
            std::vector<cplx>& buf = pa.values;
            for (long node = 0; node < n; ++node) {
                const double mult = e * mode_k(node, axis);
                for (int c = 0; c < l; ++c) buf[node * l + c] = mult * spec[node * l + c];
            }
            ws.backward(buf);
            p_psi.push_back(std::move(pa));
        }
    }

    if (has_berry()) {
        // -(eps/2) (A . p + p . A) + (eps^2/2) A . A
        std::vector<cplx> acc(spec.size(), cplx{0.0, 0.0});  // spectral accumulator for p.(A psi)
        for (int axis = 0; axis < d; ++axis) {
            const cplx* blocks = a.data() + static_cast<size_t>(axis) * n * l * l;
            WaveState u(g, l, e);
            for (long node = 0; node < n; ++node) {
                block_mul_add(&u.values[node * l], blocks + node * l * l, &psi.values[node * l], l,
                              cplx{1.0, 0.0});
                // A_a (p_a psi) and A_a (A_a psi) directly into out
                block_mul_add(&out.values[node * l], blocks + node * l * l,
                              &p_psi[axis].values[node * l], l, cplx{-0.5 * eps, 0.0});
            }
            for (long node = 0; node < n; ++node)
                block_mul_add(&out.values[node * l], blocks + node * l * l, &u.values[node * l], l,
                              cplx{0.5 * eps * eps, 0.0});
            ws.forward(u.values);
            for (long node = 0; node < n; ++node) {
                const double mult = e * mode_k(node, axis);
                for (int c = 0; c < l; ++c) acc[node * l + c] += mult * u.values[node * l + c];
            }
        }
        ws.backward(acc);
        for (long i = 0; i < out.size(); ++i) out.values[i] += cplx{-0.5 * eps, 0.0} * acc[i];
    }

    if (has_phi()) {
        const double w2 = 0.5 * eps * eps;
        for (long node = 0; node < n; ++node)
            for (int c = 0; c < l; ++c) out.values[node * l + c] += w2 * phi[node] * psi.values[node * l + c];
    }

    if (!mass.empty() && quantization == MQuantization::Symmetric) {
        // -eps^2 M, M = 1/2 sum_lk (m_lk p_l p_k + p_l p_k m_lk)
        std::vector<cplx> acc(spec.size(), cplx{0.0, 0.0});
        for (int la = 0; la < d; ++la)
            for (int ka = 0; ka < d; ++ka) {
                // m_lk (p_l p_k psi): direct from the spectrum
                WaveState u(g, l, e);
                for (long node = 0; node < n; ++node) {
                    const double mult = e * e * mode_k(node, la) * mode_k(node, ka);
                    for (int c = 0; c < l; ++c) u.values[node * l + c] = mult * spec[node * l + c];
                }
                ws.backward(u.values);
                for (long node = 0; node < n; ++node) {
                    const cplx mlk = mass[node * d * d + la * d + ka];
                    for (int c = 0; c < l; ++c)
                        out.values[node * l + c] += cplx{-0.5 * eps * eps, 0.0} * mlk * u.values[node * l + c];
                }
                // p_l p_k (m_lk psi): accumulate spectrally
                WaveState v(g, l, e);
                for (long node = 0; node < n; ++node) {
                    const cplx mlk = mass[node * d * d + la * d + ka];
                    for (int c = 0; c < l; ++c) v.values[node * l + c] = mlk * psi.values[node * l + c];
                }
                ws.forward(v.values);
                for (long node = 0; node < n; ++node) {
                    const double mult = e * e * mode_k(node, la) * mode_k(node, ka);
                    for (int c = 0; c < l; ++c) acc[node * l + c] += mult * v.values[node * l + c];
                }
            }
        ws.backward(acc);
        for (long i = 0; i < out.size(); ++i) out.values[i] += cplx{-0.5 * eps * eps, 0.0} * acc[i];
    }

    if (!g_ang.empty() && quantization == MQuantization::AngularLgL) {
        // -eps^2 L g L with L = x0 p1 - x1 p0
        WaveState lw(g, l, e);
        for (long node = 0; node < n; ++node) {
            const Point x = g.point(node);
            for (int c = 0; c < l; ++c)
                lw.values[node * l + c] =
                    g_ang[node] * (x[0] * p_psi[1].values[node * l + c] -
                                   x[1] * p_psi[0].values[node * l + c]);
        }
        ws.forward(lw.values);
        std::vector<cplx> s0(spec.size()), s1(spec.size());
        for (long node = 0; node < n; ++node) {
            const double m0 = e * mode_k(node, 0);
            const double m1 = e * mode_k(node, 1);
            for (int c = 0; c < l; ++c) {
                s0[node * l + c] = m0 * lw.values[node * l + c];
                s1[node * l + c] = m1 * lw.values[node * l + c];
            }
        }
        ws.backward(s0);
        ws.backward(s1);
        for (long node = 0; node < n; ++node) {
            const Point x = g.point(node);
            for (int c = 0; c < l; ++c)
                out.values[node * l + c] +=
                    cplx{-eps * eps, 0.0} * (x[0] * s1[node * l + c] - x[1] * s0[node * l + c]);
        }
    }

    return out;
}

double EffectiveHamiltonian::excluded_mass(const WaveState& psi) const {
    if (hard_excluded.empty()) return 0.0;
    double m = 0.0;
    for (long node = 0; node < grid_.total_nodes(); ++node) {
        if (!hard_excluded[node]) continue;
        for (int c = 0; c < l; ++c) m += std::norm(psi.values[node * l + c]);
    }
    return m * grid_.cell_volume();
}

namespace {

Regularization regularization_for(const ElectronicModel& model, const Grid& grid,
                                  double r_min_cells) {
    Regularization reg;
    if (model.crossing_points.empty() || r_min_cells <= 0.0) return reg;
    double h = grid.spacing(0);
    for (int a = 1; a < grid.dim; ++a) h = std::max(h, grid.spacing(a));
    reg.r_min = r_min_cells * h;
    reg.centers = model.crossing_points;
    return reg;
}

void init_shell(EffectiveHamiltonian& h, const Grid& grid, const BandSelector& bands, int order,
                double eps, MQuantization quant, const Regularization& reg) {
    h.order = order;
    h.bands = bands;
    h.eps = eps;
    h.quantization = quant;
    h.regularization = reg;
    h.grid_ = grid;
    h.l = bands.count();
    h.w.assign(grid.total_nodes() * h.l * h.l, cplx{0.0, 0.0});
    h.hard_excluded.assign(grid.total_nodes(), 0);
    if (reg.active())
        for (long node = 0; node < grid.total_nodes(); ++node)
            h.hard_excluded[node] = reg.hard_excluded(grid.point(node), grid.dim) ? 1 : 0;
}

}  // namespace

EffectiveHamiltonian build_effective(const ElectronicModel& model, const Grid& grid,
                                     const BandSelector& bands, int order, double eps,
                                     GaugeKind gauge, DerivScheme scheme, MQuantization quant,
                                     double r_min_cells, double gap_threshold) {
    if (order < 0 || order > 2) throw OrderError("effective order must be 0, 1 or 2");
    if (order == 2 && bands.count() > 1)
        throw OrderError("order 2 is one-band only; multiband stops at order 1");

    EffectiveHamiltonian h;
    init_shell(h, grid, bands, order, eps, quant, regularization_for(model, grid, r_min_cells));

    EigenFrame ef = eigendecompose_smooth(model, grid, bands, gauge, gap_threshold, r_min_cells);
    const int l = h.l;
    for (long node = 0; node < grid.total_nodes(); ++node)
        for (int a = 0; a < l; ++a)
            h.w[node * l * l + a * l + a] = ef.energies.at(node, a)(0, 0);

    if (order >= 1) {
        const FiberField berry = berry_connection(ef.frame, scheme);
        h.a.assign(static_cast<size_t>(grid.dim) * grid.total_nodes() * l * l, cplx{0.0, 0.0});
        for (int axis = 0; axis < grid.dim; ++axis)
            for (long node = 0; node < grid.total_nodes(); ++node) {
                const double m = h.regularization.mask(grid.point(node), grid.dim);
                for (int r = 0; r < l; ++r)
                    for (int c = 0; c < l; ++c)
                        h.a[(static_cast<size_t>(axis) * grid.total_nodes() + node) * l * l + r * l +
                            c] = m * berry.at(node, axis)(r, c);
            }
    }
    if (order == 2) {
        const FiberField bh = born_huang(ef.frame, BornHuangMethod::EigenvectorForm, scheme);
        const FiberField mt = mass_tensor(model, ef, scheme, gap_threshold);
        const int d = grid.dim;
        h.phi.assign(grid.total_nodes(), 0.0);
        for (long node = 0; node < grid.total_nodes(); ++node)
            h.phi[node] = h.regularization.mask(grid.point(node), d) * bh.real_scalar(node);
        if (quant == MQuantization::Symmetric) {
            h.mass.assign(grid.total_nodes() * d * d, cplx{0.0, 0.0});
            for (long node = 0; node < grid.total_nodes(); ++node) {
                const double m = h.regularization.mask(grid.point(node), d);
                for (int la = 0; la < d; ++la)
                    for (int ka = 0; ka < d; ++ka)
                        h.mass[node * d * d + la * d + ka] = m * mt.at(node)(la, ka);
            }
        } else {
            if (d != 2) throw OrderError("angular quantization requires d = 2");
            h.g_ang.assign(grid.total_nodes(), 0.0);
            for (long node = 0; node < grid.total_nodes(); ++node) {
                const Point x = grid.point(node);
                const double r2 = x[0] * x[0] + x[1] * x[1];
                if (r2 == 0.0) continue;
                const double u0 = x[1] / std::sqrt(r2), u1 = -x[0] / std::sqrt(r2);
                Eigen::Vector2cd u(u0, u1);
                const double c = (u.adjoint() * mt.at(node) * u)(0).real();
                h.g_ang[node] = h.regularization.mask(x, d) * c / r2;
            }
        }
    }
    return h;
}

EffectiveHamiltonian build_effective_from_basis(const ElectronicModel& model,
                                                const FiberField& basis, int order, double eps,
                                                DerivScheme scheme) {
    if (order < 0 || order > 1) throw OrderError("basis-driven assembly supports orders 0 and 1");
    const Grid& grid = basis.grid;
    const int l = basis.cols;
    const MultibandMatrices wa = multiband_matrices(model, basis, scheme);

    EffectiveHamiltonian h;
    init_shell(h, grid, BandSelector::range(0, l), order, eps, MQuantization::Symmetric, {});
    for (long node = 0; node < grid.total_nodes(); ++node)
        for (int r = 0; r < l; ++r)
            for (int c = 0; c < l; ++c) h.w[node * l * l + r * l + c] = wa.W.at(node)(r, c);
    if (order >= 1) {
        h.a.assign(static_cast<size_t>(grid.dim) * grid.total_nodes() * l * l, cplx{0.0, 0.0});
        for (int axis = 0; axis < grid.dim; ++axis)
            for (long node = 0; node < grid.total_nodes(); ++node)
                for (int r = 0; r < l; ++r)
                    for (int c = 0; c < l; ++c)
                        h.a[(static_cast<size_t>(axis) * grid.total_nodes() + node) * l * l + r * l +
                            c] = wa.A.at(node, axis)(r, c);
    }
    return h;
}

EffectiveHamiltonian conical_effective_closed_form(double C, const Grid& grid, bool upper,
                                                   int order, double eps, MQuantization quant,
                                                   double r_min_cells, bool include_phi,
                                                   bool include_mass) {
    if (grid.dim != 2) throw GridMismatch("conical closed forms live on a 2d grid");
    if (order < 0 || order > 2) throw OrderError("effective order must be 0, 1 or 2");
    const double s = upper ? 1.0 : -1.0;

    Regularization reg;
    double h_cell = std::max(grid.spacing(0), grid.spacing(1));
    reg.r_min = r_min_cells * h_cell;
    reg.centers = {{0.0, 0.0}};

    EffectiveHamiltonian h;
    init_shell(h, grid, BandSelector::single(upper ? 1 : 0), order, eps, quant, reg);

    const long n = grid.total_nodes();
    if (order >= 1) h.a.assign(static_cast<size_t>(2) * n, cplx{0.0, 0.0});
    if (order == 2 && include_phi) h.phi.assign(n, 0.0);
    if (order == 2 && include_mass) {
        if (quant == MQuantization::Symmetric)
            h.mass.assign(n * 4, cplx{0.0, 0.0});
        else
            h.g_ang.assign(n, 0.0);
    }

    for (long node = 0; node < n; ++node) {
        const Point x = grid.point(node);
        const double r = std::hypot(x[0], x[1]);
        h.w[node] = s * C * r;
        const double m = reg.mask(x, 2);
        if (order >= 1) {
            // A = -e_phi / (2 r), e_phi = (x2, -x1)/r, both bands
            h.a[node] = cplx{-m * x[1] / (2.0 * r * r), 0.0};
            h.a[n + node] = cplx{m * x[0] / (2.0 * r * r), 0.0};
        }
        if (order == 2 && include_phi) h.phi[node] = m / (4.0 * r * r);
        if (order == 2 && include_mass) {
            const double c = -s / (8.0 * C * r * r * r);
            if (quant == MQuantization::Symmetric) {
                const double u0 = x[1] / r, u1 = -x[0] / r;
                h.mass[node * 4 + 0] = m * c * u0 * u0;
                h.mass[node * 4 + 1] = m * c * u0 * u1;
                h.mass[node * 4 + 2] = m * c * u1 * u0;
                h.mass[node * 4 + 3] = m * c * u1 * u1;
            } else {
                h.g_ang[node] = m * c / (r * r);
            }
        }
    }
    return h;
}

}  // namespace boa
