#ifndef EEQT_ARRIVAL_HPP
#define EEQT_ARRIVAL_HPP

#include <string>

#include "eeqt/propagator.hpp"

namespace eeqt {

// Sampled 1D probability density; uniform abscissa spacing.
struct DensityCurve {
    std::vector<double> abscissa;  // tau or t, Angstrom/c
    std::vector<double> density;   // c/Angstrom
    double spacing = 0.0;
    double total_mass = 1.0;       // mass before normalization
    double frame_velocity = 0.0;   // v/c of the frame the curve lives in

    double mass() const;  // integral of the stored density
    double mean() const;
};

struct ArrivalResult {
    double P_inf = 0.0;
    DensityCurve proper_density;  // p(tau)
    DensityCurve rest_density;    // rho_0(t), shifted copy of p
    double T_a0 = 0.0;
    double error_T_a0 = 0.0;      // filled by paired-step runs
    double wall_loss = 0.0;
    bool leakage_warning = false;
    // config echo
    InitialStateSpec initial;
    DetectorSpec detector;
    GridSpec grid;
    ModelParams params;
};

// Runs the single-detector time-of-arrival pipeline in the detector rest frame.
// Throws if P_inf < 1e-8 ("no detection").
ArrivalResult run_arrival(const InitialStateSpec& initial, const DetectorSpec& detector,
                          const GridSpec& grid, const ModelParams& params);

// Frame transform of the arrival density and mean to K_v. The returned mean is
// the closed form gamma*(T_a0 - v*x_D); integrating the returned curve
// reproduces it to round-off.
std::pair<DensityCurve, double> boost_arrival(const ArrivalResult& result, double v_over_c);

// (dx_B/(dx_A - dx_B)) * |value_B - value_A|, dx_A > dx_B > 0.
double richardson_error(double value_b, double value_a, double dx_b, double dx_a);

}  // namespace eeqt

#endif
