#ifndef EEQT_DETECTORS_HPP
#define EEQT_DETECTORS_HPP

#include "eeqt/relkin.hpp"

namespace eeqt {

struct DetectorSpec {
    double x_pos = 0.0;       // rest position, Angstrom
    double width = 0.01;      // full window width Delta_x_D, Angstrom
    double height_mc2 = 1e-5; // W_D in units of m*c^2
    bool destructive = true;

    // Rest-frame trajectory z(tau) = (c*tau + x0 - x_pos, x_pos); the time
    // component is relative to the preparation event at (0, x0).
    std::pair<double, double> trajectory(double tau, double x0) const {
        return {tau + x0 - x_pos, x_pos};
    }
};

// Sampled coupling profile g(x) = sqrt(2 W_D) * F_{width/2}(x - x_pos), with
// W_D converted to inverse time via mhat. Acts as a scalar on spinor components.
struct CouplingWindow {
    Grid grid;
    std::vector<double> g;   // size grid.n, zero outside the support
    int lo = 0, hi = 0;      // support node range [lo, hi)
    double frame_shift = 0.0; // x-distance to this window's co-moving frame
    bool destructive = true;
};

// Throws if the detector support does not fit inside the grid.
CouplingWindow make_window(const DetectorSpec& spec, const Grid& grid, const ModelParams& params);

// dx * sum g^2 |Omega|^2, in 1/time, for a slice expressed in the window's frame.
double detection_rate(const SpinorSlice& omega, const CouplingWindow& window);

}  // namespace eeqt

#endif
