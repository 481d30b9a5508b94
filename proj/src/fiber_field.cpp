#include "boa/fiber_field.hpp"

#include <cstdio>
#include <fstream>

#include "boa/errors.hpp"
#include "boa/fourier.hpp"

namespace boa {

FiberField::FiberField(const Grid& g, FieldKind k, int r, int c, int nc, std::string gauge)
    : grid(g),
      kind(k),
      rows(r),
      cols(c),
      ncomp(nc),
      gauge_id(std::move(gauge)),
      data(g.total_nodes() * nc, Eigen::MatrixXcd::Zero(r, c)),
      excluded(g.total_nodes(), 0) {}

long FiberField::n_excluded() const {
    long n = 0;
    for (uint8_t e : excluded) n += e != 0;
    return n;
}

const Eigen::MatrixXcd& FiberField::checked(long node, int c) const {
    if (is_excluded(node)) throw SingularNode("field value requested at excluded node " + std::to_string(node));
    return at(node, c);
}

namespace {

FiberField fd_derivative(const FiberField& f, int axis, bool fourth_order) {
    const Grid& g = f.grid;
    FiberField out(g, f.kind, f.rows, f.cols, f.ncomp, f.gauge_id);
    out.excluded = f.excluded;
    const double h = g.spacing(axis);
    auto shifted = [&](long node, int offset) -> long {
        auto ij = g.unflatten(node);
        ij[axis] = g.wrap(axis, ij[axis] + offset);
        return g.index(ij[0], ij[1]);
    };
    for (long node = 0; node < g.total_nodes(); ++node) {
        const long p1 = shifted(node, +1), m1 = shifted(node, -1);
        for (int c = 0; c < f.ncomp; ++c) {
            if (fourth_order) {
                const long p2 = shifted(node, +2), m2 = shifted(node, -2);
                out.at(node, c) = (-f.at(p2, c) + 8.0 * f.at(p1, c) - 8.0 * f.at(m1, c) + f.at(m2, c)) /
                                  (12.0 * h);
            } else {
                out.at(node, c) = (f.at(p1, c) - f.at(m1, c)) / (2.0 * h);
            }
        }
    }
    return out;
}

FiberField spectral_derivative(const FiberField& f, int axis) {
    const Grid& g = f.grid;
    const int entries = f.rows * f.cols * f.ncomp;
    WaveState buf(g, entries, 1.0);
    for (long node = 0; node < g.total_nodes(); ++node) {
        int e = 0;
        for (int c = 0; c < f.ncomp; ++c)
            for (int r = 0; r < f.rows; ++r)
                for (int col = 0; col < f.cols; ++col) buf.at(node, e++) = f.at(node, c)(r, col);
    }
    Spectral ws(g, entries);
    ws.forward(buf.values);
    for (long node = 0; node < g.total_nodes(); ++node) {
        const auto ij = g.unflatten(node);
        const cplx ik{0.0, g.wavenumber(axis, ij[axis])};
        for (int e = 0; e < entries; ++e) buf.at(node, e) *= ik;
    }
    ws.backward(buf.values);
    FiberField out(g, f.kind, f.rows, f.cols, f.ncomp, f.gauge_id);
    out.excluded = f.excluded;
    for (long node = 0; node < g.total_nodes(); ++node) {
        int e = 0;
        for (int c = 0; c < f.ncomp; ++c)
            for (int r = 0; r < f.rows; ++r)
                for (int col = 0; col < f.cols; ++col) out.at(node, c)(r, col) = buf.at(node, e++);
    }
    return out;
}

}  // namespace

FiberField derivative(const FiberField& f, int axis, DerivScheme scheme) {
    if (axis < 0 || axis >= f.grid.dim) throw DomainError("derivative axis out of range");
    switch (scheme) {
        case DerivScheme::CenteredFd2: return fd_derivative(f, axis, false);
        case DerivScheme::CenteredFd4: return fd_derivative(f, axis, true);
        case DerivScheme::Spectral: return spectral_derivative(f, axis);
    }
    throw ConfigError("unknown derivative scheme");
}

void write_field_csv(const FiberField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "node,x0";
    if (f.grid.dim == 2) out << ",x1";
    out << ",excluded";
    const int entries = f.rows * f.cols * f.ncomp;
    for (int e = 0; e < entries; ++e) out << ",v" << e << "_re,v" << e << "_im";
    out << ",gauge_id\n";
    char buf[64];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ',' << buf;
    };
    for (long node = 0; node < f.grid.total_nodes(); ++node) {
        const Point x = f.grid.point(node);
        out << node;
        emit(x[0]);
        if (f.grid.dim == 2) emit(x[1]);
        out << ',' << (f.is_excluded(node) ? 1 : 0);
        for (int c = 0; c < f.ncomp; ++c)
            for (int r = 0; r < f.rows; ++r)
                for (int col = 0; col < f.cols; ++col) {
                    emit(f.at(node, c)(r, col).real());
                    emit(f.at(node, c)(r, col).imag());
                }
        out << ',' << f.gauge_id << '\n';
    }
    if (!out) throw IoError("write failure on " + path);
}

void GaugeMap::validate(double tol) const {
    for (long node = 0; node < grid.total_nodes(); ++node) {
        const Eigen::MatrixXcd& m = g[node];
        const double defect =
            (m.adjoint() * m - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
        if (defect > tol)
            throw NonOrthogonal("gauge map violates unitarity at node " + std::to_string(node) +
                                ", defect " + std::to_string(defect));
    }
}

}  // namespace boa
