#include "eeqt/arrival.hpp"

#include <stdexcept>

namespace eeqt {

double DensityCurve::mass() const {
    double s = 0.0;
    for (double d : density) s += d;
    return s * spacing;
}

double DensityCurve::mean() const {
    double s = 0.0;
    for (size_t i = 0; i < density.size(); ++i) s += abscissa[i] * density[i];
    return s * spacing / mass();
}

ArrivalResult run_arrival(const InitialStateSpec& initial, const DetectorSpec& detector,
                          const GridSpec& gridspec, const ModelParams& params) {
    if (!(detector.x_pos > initial.x0))
        throw std::invalid_argument("run_arrival: detector must sit ahead of the packet (x_D > x0)");

    const Grid grid = gridspec.make_grid();
    const CouplingWindow window = make_window(detector, grid, params);

    // Co-moving initial condition Omega(0, x) = Psi_0 at frame time (x0 - x_D)/c.
    SpinorSlice omega =
        build_initial_state(initial, params, grid, initial.x0 - detector.x_pos);
    EvolutionRecord rec = evolve(omega, std::span(&window, 1), gridspec, params);

    ArrivalResult res;
    res.initial = initial;
    res.detector = detector;
    res.grid = gridspec;
    res.params = params;
    res.P_inf = rec.window_loss(0);
    res.wall_loss = rec.wall_loss();
    res.leakage_warning = rec.leakage_warning;
    if (res.P_inf < 1e-8)
        throw std::runtime_error("run_arrival: no detection (P_inf < 1e-8), density undefined");

    const int m = rec.n_steps();
    const double shift = detector.x_pos - initial.x0;  // (x_D - x0)/c with c = 1
    res.proper_density.spacing = rec.dtau;
    res.rest_density.spacing = rec.dtau;
    res.proper_density.total_mass = res.P_inf;
    res.rest_density.total_mass = res.P_inf;
    for (int s = 0; s < m; ++s) {
        const double p = rec.rate[0][s] / res.P_inf;
        res.proper_density.abscissa.push_back(rec.tau_mid(s));
        res.proper_density.density.push_back(p);
        res.rest_density.abscissa.push_back(rec.tau_mid(s) - shift);
        res.rest_density.density.push_back(p);
    }
    res.T_a0 = res.proper_density.mean() - shift;
    return res;
}

std::pair<DensityCurve, double> boost_arrival(const ArrivalResult& result, double v_over_c) {
    if (!(std::abs(v_over_c) < 1.0))
        throw std::domain_error("boost_arrival: |v/c| must be < 1");
    const double root = std::sqrt(1.0 - v_over_c * v_over_c);
    const double shift = (result.detector.x_pos - result.initial.x0) +
                         v_over_c * result.detector.x_pos;

    DensityCurve rho;
    rho.spacing = result.proper_density.spacing / root;
    rho.frame_velocity = v_over_c;
    rho.total_mass = result.proper_density.total_mass;
    for (size_t i = 0; i < result.proper_density.density.size(); ++i) {
        rho.abscissa.push_back((result.proper_density.abscissa[i] - shift) / root);
        rho.density.push_back(root * result.proper_density.density[i]);
    }
    const double mean = (result.T_a0 - v_over_c * result.detector.x_pos) / root;
    return {std::move(rho), mean};
}

double richardson_error(double value_b, double value_a, double dx_b, double dx_a) {
    if (!(dx_a > dx_b) || !(dx_b > 0.0))
        throw std::invalid_argument("richardson_error: need dx_a > dx_b > 0");
    return dx_b / (dx_a - dx_b) * std::abs(value_b - value_a);
}

}  // namespace eeqt
