#pragma once

#include <array>
#include <cstdint>

#include "boa/errors.hpp"

namespace boa {

using Point = std::array<double, 2>;  // x[1] unused when dim == 1

/// Uniform periodic grid in one or two nuclear dimensions.
///
/// Domains are always periodic; experiments size them so that wavepackets
/// never reach the boundary. With half_cell_offset the nodes sit at
/// lo + (i + 1/2) h, which keeps singular fields finite when a band
/// crossing coincides with a lattice point of the plain grid.
struct Grid {
    int dim = 1;
    std::array<int, 2> nodes{16, 1};
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    bool half_cell_offset = false;

    static Grid line(int n, double lo, double hi, bool offset = false);
    static Grid square(int n, double lo, double hi, bool offset = false);
    static Grid rect(int n0, int n1, Point lo, Point hi, bool offset = false);

    long total_nodes() const { return static_cast<long>(nodes[0]) * (dim == 2 ? nodes[1] : 1); }
    double length(int axis) const { return hi[axis] - lo[axis]; }
    double spacing(int axis) const { return length(axis) / nodes[axis]; }
    double cell_volume() const;
    double min_spacing() const;

    double coord(int axis, int i) const {
        return lo[axis] + (i + (half_cell_offset ? 0.5 : 0.0)) * spacing(axis);
    }
    Point point(long flat) const;

    long index(int i, int j = 0) const {
        return dim == 2 ? static_cast<long>(i) * nodes[1] + j : static_cast<long>(i);
    }
    std::array<int, 2> unflatten(long flat) const;
    int wrap(int axis, int i) const;

    /// Angular wavenumber 2*pi/L * f with f the signed DFT frequency of bin i.
    double wavenumber(int axis, int i) const;

    bool operator==(const Grid&) const = default;
};

/// Throws ConfigError unless node counts are powers of two >= 16 (>= 1 on
/// unused axes) and extents are ordered.
void validate(const Grid& grid);

}  // namespace boa
