#include "eeqt/detectors.hpp"

#include <stdexcept>

namespace eeqt {

CouplingWindow make_window(const DetectorSpec& spec, const Grid& grid, const ModelParams& params) {
    if (!(spec.width > 0.0) || !(spec.height_mc2 > 0.0))
        throw std::invalid_argument("make_window: width and height must be > 0");
    if (spec.x_pos - spec.width / 2 < grid.x_min || spec.x_pos + spec.width / 2 > grid.x_max)
        throw std::invalid_argument("make_window: detector support lies outside the grid");

    CouplingWindow w;
    w.grid = grid;
    w.g.assign(grid.n, 0.0);
    w.frame_shift = 0.0;
    w.destructive = spec.destructive;
    // W_D in 1/time: height * m c^2 / hbar = height * mhat (c = 1).
    const double amp = std::sqrt(2.0 * spec.height_mc2 * params.mhat);
    w.lo = grid.n;
    w.hi = 0;
    for (int i = 0; i < grid.n; ++i) {
        const double f = bump_profile(grid.x(i) - spec.x_pos, spec.width / 2.0);
        if (f > 0.0) {
            w.g[i] = amp * f;
            w.lo = std::min(w.lo, i);
            w.hi = std::max(w.hi, i + 1);
        }
    }
    if (w.lo >= w.hi) { w.lo = w.hi = 0; }
    return w;
}

double detection_rate(const SpinorSlice& omega, const CouplingWindow& window) {
    if (!omega.grid.same_as(window.grid))
        throw std::invalid_argument("detection_rate: slice and window grids differ");
    double s = 0.0;
    for (int i = window.lo; i < window.hi; ++i)
        s += window.g[i] * window.g[i] * omega.node_density(i);
    return omega.grid.dx * s;
}

}  // namespace eeqt
