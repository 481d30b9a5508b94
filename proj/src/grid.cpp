#include "boa/grid.hpp"

#include <cmath>
#include <string>

namespace boa {

namespace {
bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid Grid::line(int n, double lo, double hi, bool offset) {
    Grid g;
    g.dim = 1;
    g.nodes = {n, 1};
    g.lo = {lo, 0.0};
    g.hi = {hi, 1.0};
    g.half_cell_offset = offset;
    validate(g);
    return g;
}

Grid Grid::square(int n, double lo, double hi, bool offset) {
    return rect(n, n, {lo, lo}, {hi, hi}, offset);
}

Grid Grid::rect(int n0, int n1, Point lo, Point hi, bool offset) {
    Grid g;
    g.dim = 2;
    g.nodes = {n0, n1};
    g.lo = lo;
    g.hi = hi;
    g.half_cell_offset = offset;
    validate(g);
    return g;
}

double Grid::cell_volume() const {
    double v = spacing(0);
    if (dim == 2) v *= spacing(1);
    return v;
}

double Grid::min_spacing() const {
    double h = spacing(0);
    if (dim == 2) h = std::min(h, spacing(1));
    return h;
}

Point Grid::point(long flat) const {
    auto ij = unflatten(flat);
    Point p{coord(0, ij[0]), 0.0};
    if (dim == 2) p[1] = coord(1, ij[1]);
    return p;
}

std::array<int, 2> Grid::unflatten(long flat) const {
    if (dim == 2) {
        return {static_cast<int>(flat / nodes[1]), static_cast<int>(flat % nodes[1])};
    }
    return {static_cast<int>(flat), 0};
}

int Grid::wrap(int axis, int i) const {
    const int n = nodes[axis];
    int r = i % n;
    return r < 0 ? r + n : r;
}

double Grid::wavenumber(int axis, int i) const {
    const int n = nodes[axis];
    const int f = (i < n / 2) ? i : i - n;  // bins n/2..n-1 carry negative frequencies
    return 2.0 * M_PI / length(axis) * f;
}

void validate(const Grid& grid) {
    if (grid.dim != 1 && grid.dim != 2)
        throw ConfigError("grid dim must be 1 or 2, got " + std::to_string(grid.dim));
    for (int a = 0; a < grid.dim; ++a) {
        if (!power_of_two(grid.nodes[a]) || grid.nodes[a] < 16)
            throw ConfigError("node count per axis must be a power of two >= 16, got " +
                              std::to_string(grid.nodes[a]));
        if (!(grid.hi[a] > grid.lo[a])) throw ConfigError("grid extents must satisfy hi > lo");
    }
    if (grid.dim == 1 && grid.nodes[1] != 1) throw ConfigError("1d grid must have nodes[1] == 1");
}

}  // namespace boa
