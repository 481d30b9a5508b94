#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "boa/grid.hpp"
#include "boa/state.hpp"

namespace boa {

enum class FieldKind { Scalar, Vector, Matrix, Frame };

enum class DerivScheme { CenteredFd2, CenteredFd4, Spectral };

/// Samples of an x-dependent object on a grid: per node `ncomp` blocks of
/// rows x cols complex matrices (scalars are 1x1). `excluded` marks nodes
/// inside the exclusion radius of a band crossing; their sample values are
/// kept finite so derivative stencils remain usable, but consumers must not
/// trust them quantitatively.
struct FiberField {
    Grid grid;
    FieldKind kind = FieldKind::Scalar;
    int rows = 1, cols = 1, ncomp = 1;
    std::string gauge_id = "none";
    std::vector<Eigen::MatrixXcd> data;
    std::vector<uint8_t> excluded;

    FiberField() = default;
    FiberField(const Grid& g, FieldKind k, int r, int c, int nc, std::string gauge = "none");

    Eigen::MatrixXcd& at(long node, int c = 0) { return data[node * ncomp + c]; }
    const Eigen::MatrixXcd& at(long node, int c = 0) const { return data[node * ncomp + c]; }
    bool is_excluded(long node) const { return excluded[node] != 0; }
    long n_excluded() const;

    /// Checked access: throws SingularNode at excluded nodes.
    const Eigen::MatrixXcd& checked(long node, int c = 0) const;

    double real_scalar(long node) const { return at(node, 0)(0, 0).real(); }
};

/// Componentwise centered finite difference (periodic wrap) or spectral
/// derivative along `axis`. Exclusion markers are copied from the input.
FiberField derivative(const FiberField& f, int axis, DerivScheme scheme);

/// Columnar dump: one row per node with node index, coordinates, excluded
/// flag, flattened (re, im) pairs, and the gauge id. 17 significant digits.
void write_field_csv(const FiberField& f, const std::string& path);

/// Per-node l x l gauge matrix, G(x)^dagger G(x) = 1.
struct GaugeMap {
    Grid grid;
    std::vector<Eigen::MatrixXcd> g;

    const Eigen::MatrixXcd& at(long node) const { return g[node]; }
    /// Throws NonOrthogonal if any node violates unitarity beyond tol.
    void validate(double tol = 1e-10) const;
};

}  // namespace boa
