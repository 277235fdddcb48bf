#ifndef EEQT_GRID_HPP
#define EEQT_GRID_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace eeqt {

using cplx = std::complex<double>;

// Uniform spatial grid. Node i sits at x_min + i*dx; both endpoints are nodes.
struct Grid {
    double x_min = 0.0;
    double x_max = 0.0;
    double dx = 1.0;
    int n = 0;

    Grid() = default;
    Grid(double xmin, double xmax, double step) : x_min(xmin), x_max(xmax), dx(step) {
        if (!(step > 0.0) || !(xmax > xmin))
            throw std::invalid_argument("Grid: need x_max > x_min and dx > 0");
        n = static_cast<int>(std::lround((xmax - xmin) / step)) + 1;
    }

    double x(int i) const { return x_min + dx * i; }

    bool same_as(const Grid& o) const {
        return n == o.n && std::abs(x_min - o.x_min) < 1e-12 && std::abs(dx - o.dx) < 1e-12;
    }
};

// Complex 4-component field on a Grid at one time label (units Angstrom/c).
// Component c of node i lives at values[4*i + c].
struct SpinorSlice {
    Grid grid;
    std::vector<cplx> values;
    double label = 0.0;

    SpinorSlice() = default;
    explicit SpinorSlice(const Grid& g, double t = 0.0)
        : grid(g), values(static_cast<size_t>(4) * g.n), label(t) {}

    cplx& at(int i, int c) { return values[4 * static_cast<size_t>(i) + c]; }
    const cplx& at(int i, int c) const { return values[4 * static_cast<size_t>(i) + c]; }

    // dx * sum_i Psi^+ Psi, the t = const scalar-product norm.
    double norm2() const {
        double s = 0.0;
        for (const cplx& v : values) s += std::norm(v);
        return grid.dx * s;
    }

    double node_density(int i) const {
        double s = 0.0;
        for (int c = 0; c < 4; ++c) s += std::norm(at(i, c));
        return s;
    }

    void scale(double f) {
        for (cplx& v : values) v *= f;
    }
};

}  // namespace eeqt

#endif
