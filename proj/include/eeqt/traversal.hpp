#ifndef EEQT_TRAVERSAL_HPP
#define EEQT_TRAVERSAL_HPP

#include <map>

#include "eeqt/arrival.hpp"

namespace eeqt {

// Phase A: evolution of Omega_A in the D1 frame with both dampings active
// (D2's conjugated by the translation T). Compact g1-masked snapshots are kept
// at strided step boundaries for later collapse.
struct PhaseARun {
    GridSpec gridspec;
    ModelParams params;
    InitialStateSpec initial;
    DetectorSpec d1, d2;
    CouplingWindow w1;          // aligned
    CouplingWindow w2;          // frame_shift = x2 - x1
    double separation = 0.0;    // x2 - x1
    int stride = 1;
    EvolutionRecord rec;        // rate[0]: D1, rate[1]: D2 (first-detection channel)
    std::map<int, std::vector<cplx>> masked;  // boundary step -> g1*Omega_A over w1 support

    const std::vector<double>& p1_raw() const { return rec.rate[0]; }
};

PhaseARun run_phase_a(const InitialStateSpec& initial, const DetectorSpec& d1,
                      const DetectorSpec& d2, const GridSpec& gridspec,
                      const ModelParams& params, int tau1_stride);

// Conditional phase B branch started from the collapsed state at boundary step
// tau1 = step * dtau: Omega_B = T^-1 g1 Omega_A / ||g1 Omega_A||.
struct BranchRun {
    int boundary_step = 0;
    double tau1 = 0.0;
    EvolutionRecord rec;        // rate[0]: D2
    double P_inf = 0.0;         // conditional second-detection probability
    double final_norm2 = 0.0;
    double wall_loss = 0.0;
};

BranchRun launch_branch(const PhaseARun& a, int boundary_step);

// Builds the collapsed phase-B initial state for a boundary with a snapshot.
SpinorSlice collapsed_state(const PhaseARun& a, int boundary_step);

struct JointDensity {
    std::vector<double> tau1;                     // branch times
    std::vector<double> weight;                   // unnormalized p1-density * stride*dtau
    std::vector<double> branch_P_inf;
    std::vector<std::vector<double>> conditional; // per-branch unnormalized D2 rate series
    double dtau = 0.0;
    int stride = 1;
};

struct TraversalResult {
    double P_inf_1 = 0.0;
    double P_inf_12 = 0.0;
    double P_inf_2_first = 0.0;   // detected by D2 without prior D1 detection
    JointDensity joint;
    DensityCurve rest_density;    // rho_0(t), t = tau2 - tau1 - (x2-x1)/c
    double T_t0 = 0.0;
    double error_T_t0 = 0.0;
    double error_P_inf_12 = 0.0;
    double wall_loss = 0.0;
    bool leakage_warning = false;
    // config echo
    InitialStateSpec initial;
    DetectorSpec d1, d2;
    GridSpec grid;
    ModelParams params;
    int tau1_stride = 1;
};

// Two-detector traversal pipeline. Branches are launched at every tau1_stride-th
// step boundary inside the support of p1 (above 1e-6 of its peak) and run in
// parallel on n_threads workers (0 = hardware concurrency).
TraversalResult run_traversal(const InitialStateSpec& initial, const DetectorSpec& d1,
                              const DetectorSpec& d2, const GridSpec& gridspec,
                              const ModelParams& params, int tau1_stride, int n_threads = 0);

std::pair<DensityCurve, double> boost_traversal(const TraversalResult& result, double v_over_c);

// Richardson error bars (error_T_t0, error_P_inf_12) from a step-size pair;
// run_b must be the finer run. Throws if the configs differ in anything else.
std::pair<double, double> traversal_error_bars(const TraversalResult& run_b,
                                               const TraversalResult& run_a);

}  // namespace eeqt

#endif
