#include "boa/geometry.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "boa/errors.hpp"

namespace boa {

namespace {

// Rotation R maximizing Re tr(Overlap * R), via the polar decomposition.
Eigen::MatrixXcd polar_alignment(const Eigen::MatrixXcd& overlap) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixV() * svd.matrixU().adjoint();
}

std::vector<uint8_t> exclusion_mask(const ElectronicModel& model, const Grid& grid,
                                    double radius_cells) {
    std::vector<uint8_t> mask(grid.total_nodes(), 0);
    if (model.crossing_points.empty() || radius_cells <= 0.0) return mask;
    double h = grid.spacing(0);
    for (int a = 1; a < grid.dim; ++a) h = std::max(h, grid.spacing(a));
    const double r_min = radius_cells * h;
    for (long node = 0; node < grid.total_nodes(); ++node) {
        const Point x = grid.point(node);
        for (const Point& c : model.crossing_points) {
            double r2 = 0.0;
            for (int a = 0; a < grid.dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
            if (r2 < r_min * r_min) {
                mask[node] = 1;
                break;
            }
        }
    }
    return mask;
}

}  // namespace

EigenFrame eigendecompose_smooth(const ElectronicModel& model, const Grid& grid,
                                 const BandSelector& selector, GaugeKind gauge,
                                 double gap_threshold, double exclusion_radius_cells) {
    selector.validate(model.dim_electronic);
    if (grid.dim != model.dim_nuclear) throw GridMismatch("grid dimension does not match model");
    const int m = model.dim_electronic;
    const int l = selector.count();

    EigenFrame out;
    out.bands = selector;
    out.energies = FiberField(grid, FieldKind::Scalar, 1, 1, l);
    out.frame = FiberField(grid, FieldKind::Frame, m, l, 1);
    out.energies.excluded = exclusion_mask(model, grid, exclusion_radius_cells);
    out.frame.excluded = out.energies.excluded;

    const char* gauge_name = gauge == GaugeKind::ParallelTransport ? "parallel_transport"
                             : gauge == GaugeKind::Analytic        ? "analytic"
                                                                   : "raw";
    out.energies.gauge_id = gauge_name;
    out.frame.gauge_id = gauge_name;

    if (gauge == GaugeKind::Analytic && !model.analytic_frame)
        throw ConfigError("model " + model.name + " has no analytic frame");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
    for (long node = 0; node < grid.total_nodes(); ++node) {
        const Point x = grid.point(node);
        solver.compute(eval_electronic(model, x));
        const Eigen::VectorXd& e = solver.eigenvalues();
        for (int a = 0; a < l; ++a) out.energies.at(node, a)(0, 0) = e(selector.indices[a]);

        if (!out.energies.is_excluded(node)) {
            for (int j : selector.indices)
                for (int i = 0; i < m; ++i) {
                    if (selector.contains(i)) continue;
                    if (std::abs(e(i) - e(j)) < gap_threshold)
                        throw GapViolation("gap " + std::to_string(std::abs(e(i) - e(j))) +
                                           " below threshold at node " + std::to_string(node));
                }
        }

        Eigen::MatrixXcd f(m, l);
        if (gauge == GaugeKind::Analytic) {
            const Eigen::MatrixXcd full = model.analytic_frame(x);
            for (int a = 0; a < l; ++a) f.col(a) = full.col(selector.indices[a]);
        } else {
            for (int a = 0; a < l; ++a) f.col(a) = solver.eigenvectors().col(selector.indices[a]);
        }
        out.frame.at(node) = f;
    }

    if (gauge == GaugeKind::ParallelTransport) {
        // Comb sweep: row 0 transported along axis 1, every other node aligned
        // to the node directly preceding it along axis 0. Sequential by design.
        const int n0 = grid.nodes[0];
        const int n1 = grid.dim == 2 ? grid.nodes[1] : 1;
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j < n1; ++j) {
                if (i == 0 && j == 0) continue;
                const long node = grid.index(i, j);
                const long ref = (i == 0) ? grid.index(0, j - 1) : grid.index(i - 1, j);
                const Eigen::MatrixXcd overlap = out.frame.at(ref).adjoint() * out.frame.at(node);
                out.frame.at(node) = out.frame.at(node) * polar_alignment(overlap);
            }
        }
        // Holonomy check around the wrap loop (1d) or every plaquette (2d).
        auto link = [&](long a, long b) {
            return polar_alignment(out.frame.at(a).adjoint() * out.frame.at(b));
        };
        const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(l, l);
        if (grid.dim == 1) {
            Eigen::MatrixXcd hol = link(grid.index(n0 - 1), grid.index(0));
            if ((hol - eye).cwiseAbs().maxCoeff() > 0.5) {
                out.seam_warning = true;
                out.seam_nodes.push_back(grid.index(n0 - 1));
            }
        } else {
            for (int i = 0; i < n0; ++i)
                for (int j = 0; j < n1; ++j) {
                    const long a = grid.index(i, j);
                    const long b = grid.index(grid.wrap(0, i + 1), j);
                    const long c = grid.index(grid.wrap(0, i + 1), grid.wrap(1, j + 1));
                    const long d = grid.index(i, grid.wrap(1, j + 1));
                    const Eigen::MatrixXcd hol = link(a, b) * link(b, c) * link(c, d) * link(d, a);
                    if ((hol - eye).cwiseAbs().maxCoeff() > 0.5) {
                        out.seam_warning = true;
                        out.seam_nodes.push_back(a);
                    }
                }
        }
    }
    return out;
}

FiberField projector_field(const FiberField& frame) {
    FiberField p(frame.grid, FieldKind::Matrix, frame.rows, frame.rows, 1, "invariant");
    p.excluded = frame.excluded;
    for (long node = 0; node < frame.grid.total_nodes(); ++node)
        p.at(node) = frame.at(node) * frame.at(node).adjoint();
    return p;
}

double frame_orthonormality_defect(const FiberField& frame) {
    double worst = 0.0;
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(frame.cols, frame.cols);
    for (long node = 0; node < frame.grid.total_nodes(); ++node) {
        if (frame.is_excluded(node)) continue;
        const Eigen::MatrixXcd& f = frame.at(node);
        worst = std::max(worst, (f.adjoint() * f - eye).cwiseAbs().maxCoeff());
    }
    return worst;
}

FiberField berry_connection(const FiberField& frame, DerivScheme scheme) {
    if (frame.kind != FieldKind::Frame) throw ConfigError("berry_connection expects a frame field");
    const Grid& g = frame.grid;
    const int l = frame.cols;
    FiberField a(g, FieldKind::Vector, l, l, g.dim, frame.gauge_id);
    a.excluded = frame.excluded;
    for (int axis = 0; axis < g.dim; ++axis) {
        const FiberField df = derivative(frame, axis, scheme);
        for (long node = 0; node < g.total_nodes(); ++node) {
            const Eigen::MatrixXcd& f = frame.at(node);
            const Eigen::MatrixXcd& d = df.at(node);
            a.at(node, axis) = cplx{0.0, 0.5} * (f.adjoint() * d - d.adjoint() * f);
        }
    }
    return a;
}

FiberField born_huang(const FiberField& frame_or_projector, BornHuangMethod method,
                      DerivScheme scheme) {
    const Grid& g = frame_or_projector.grid;
    FiberField phi(g, FieldKind::Scalar, 1, 1, 1, frame_or_projector.gauge_id);
    phi.excluded = frame_or_projector.excluded;

    if (method == BornHuangMethod::EigenvectorForm) {
        if (frame_or_projector.kind != FieldKind::Frame || frame_or_projector.cols != 1)
            throw ConfigError("eigenvector form needs a one-band frame");
        for (int axis = 0; axis < g.dim; ++axis) {
            const FiberField df = derivative(frame_or_projector, axis, scheme);
            for (long node = 0; node < g.total_nodes(); ++node) {
                const Eigen::VectorXcd chi = frame_or_projector.at(node).col(0);
                const Eigen::VectorXcd u = df.at(node).col(0);
                const double full = u.squaredNorm();
                const cplx proj = chi.dot(u);  // <chi, u>
                phi.at(node)(0, 0) += full - std::norm(proj);
            }
        }
        return phi;
    }

    // Trace form from the projector samples; gauge independent.
    FiberField p = frame_or_projector;
    if (frame_or_projector.kind == FieldKind::Frame) {
        if (frame_or_projector.cols != 1) throw ConfigError("trace form needs a one-band input");
        p = projector_field(frame_or_projector);
    } else if (frame_or_projector.kind != FieldKind::Matrix) {
        throw ConfigError("trace form needs a frame or projector field");
    }
    phi.gauge_id = "invariant";
    for (int axis = 0; axis < g.dim; ++axis) {
        const FiberField dp = derivative(p, axis, scheme);
        for (long node = 0; node < g.total_nodes(); ++node) {
            const Eigen::MatrixXcd& pd = p.at(node);
            const Eigen::MatrixXcd& d = dp.at(node);
            const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(pd.rows(), pd.cols());
            phi.at(node)(0, 0) += (d * d * (eye - pd)).trace();
        }
    }
    // The trace is real analytically; drop roundoff-level imaginary parts.
    for (long node = 0; node < g.total_nodes(); ++node)
        phi.at(node)(0, 0) = cplx{phi.at(node)(0, 0).real(), 0.0};
    return phi;
}

FiberField mass_tensor(const ElectronicModel& model, const EigenFrame& ef, DerivScheme scheme,
                       double gap_threshold) {
    if (ef.frame.cols != 1) throw ConfigError("mass_tensor expects a one-band frame");
    const int band = ef.bands.indices[0];
    const Grid& g = ef.frame.grid;
    const int d = g.dim;
    FiberField mt(g, FieldKind::Matrix, d, d, 1, ef.frame.gauge_id);
    mt.excluded = ef.frame.excluded;

    std::vector<FiberField> dchi;
    for (int axis = 0; axis < d; ++axis) dchi.push_back(derivative(ef.frame, axis, scheme));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
    for (long node = 0; node < g.total_nodes(); ++node) {
        solver.compute(eval_electronic(model, g.point(node)));
        const Eigen::VectorXd& e = solver.eigenvalues();
        const Eigen::MatrixXcd& v = solver.eigenvectors();
        Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Zero(model.dim_electronic, model.dim_electronic);
        for (int i = 0; i < model.dim_electronic; ++i) {
            if (i == band) continue;
            const double gap = e(i) - e(band);
            if (std::abs(gap) < gap_threshold) {
                if (!mt.is_excluded(node))
                    throw GapViolation("mass_tensor: band gap below threshold at node " +
                                       std::to_string(node));
                continue;  // excluded node, leave the near-degenerate term out
            }
            reduced += v.col(i) * v.col(i).adjoint() / gap;
        }
        for (int l = 0; l < d; ++l)
            for (int k = 0; k < d; ++k) {
                const Eigen::VectorXcd ul = dchi[l].at(node).col(0);
                const Eigen::VectorXcd uk = dchi[k].at(node).col(0);
                mt.at(node)(l, k) = ul.dot(reduced * uk);
            }
    }
    return mt;
}

FiberField curvature(const FiberField& berry, DerivScheme scheme) {
    const Grid& g = berry.grid;
    if (g.dim != 2) throw DomainError("curvature requires two nuclear dimensions");
    if (berry.ncomp != 2) throw ConfigError("curvature expects a d=2 connection field");
    FiberField w(g, FieldKind::Matrix, berry.rows, berry.cols, 1, berry.gauge_id);
    w.excluded = berry.excluded;
    const FiberField d0 = derivative(berry, 0, scheme);
    const FiberField d1 = derivative(berry, 1, scheme);
    for (long node = 0; node < g.total_nodes(); ++node) {
        const Eigen::MatrixXcd& a0 = berry.at(node, 0);
        const Eigen::MatrixXcd& a1 = berry.at(node, 1);
        // d_0 A_1 - d_1 A_0, each derivative taken componentwise
        const Eigen::MatrixXcd dA = d0.at(node, 1) - d1.at(node, 0);
        w.at(node) = cplx{0.0, -1.0} * dA + a1 * a0 - a0 * a1;
    }
    return w;
}

MultibandMatrices multiband_matrices(const ElectronicModel& model, const FiberField& basis,
                                     DerivScheme scheme) {
    if (basis.kind != FieldKind::Frame) throw ConfigError("multiband_matrices expects a frame");
    const Grid& g = basis.grid;
    const int l = basis.cols;
    if (frame_orthonormality_defect(basis) > 1e-8)
        throw BasisError("basis columns are not orthonormal to 1e-8");

    MultibandMatrices out{FiberField(g, FieldKind::Matrix, l, l, 1, basis.gauge_id),
                          berry_connection(basis, scheme)};
    out.W.excluded = basis.excluded;
    for (long node = 0; node < g.total_nodes(); ++node) {
        const Eigen::MatrixXcd h = eval_electronic(model, g.point(node));
        const Eigen::MatrixXcd& f = basis.at(node);
        const Eigen::MatrixXcd w = f.adjoint() * h * f;
        if (!basis.is_excluded(node)) {
            const double invariance = (h * f - f * w).cwiseAbs().maxCoeff();
            if (invariance > 1e-8)
                throw BasisError("basis does not span an invariant subspace, residual " +
                                 std::to_string(invariance));
        }
        out.W.at(node) = w;
    }
    return out;
}

std::pair<FiberField, FiberField> gauge_transform(const FiberField& W, const FiberField& A,
                                                  const GaugeMap& gauge, DerivScheme scheme) {
    if (!(W.grid == A.grid) || !(W.grid == gauge.grid)) throw GridMismatch("gauge_transform inputs");
    gauge.validate();
    const Grid& g = W.grid;
    FiberField gfield(g, FieldKind::Matrix, W.rows, W.cols, 1);
    for (long node = 0; node < g.total_nodes(); ++node) gfield.at(node) = gauge.at(node);
    gfield.excluded = W.excluded;

    FiberField wt = W;
    FiberField at = A;
    for (long node = 0; node < g.total_nodes(); ++node) {
        const Eigen::MatrixXcd& gm = gauge.at(node);
        wt.at(node) = gm.adjoint() * W.at(node) * gm;
    }
    for (int axis = 0; axis < g.dim; ++axis) {
        const FiberField dg = derivative(gfield, axis, scheme);
        for (long node = 0; node < g.total_nodes(); ++node) {
            const Eigen::MatrixXcd& gm = gauge.at(node);
            at.at(node, axis) =
                gm.adjoint() * A.at(node, axis) * gm + cplx{0.0, 1.0} * gm.adjoint() * dg.at(node);
        }
    }
    return {wt, at};
}

}  // namespace boa
