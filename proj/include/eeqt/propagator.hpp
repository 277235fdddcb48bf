#ifndef EEQT_PROPAGATOR_HPP
#define EEQT_PROPAGATOR_HPP

#include <functional>
#include <span>

#include "eeqt/detectors.hpp"

namespace eeqt {

enum class Boundary { HardWalls };

struct GridSpec {
    double x_min = -6.0;
    double x_max = 4.0;
    double dx = 0.002;
    double dtau = 0.0;     // 0 means dtau = dx (c = 1), the default coupling
    double tau_cut = 4.5;
    Boundary boundary = Boundary::HardWalls;

    double step() const { return dtau > 0.0 ? dtau : dx; }
    int n_steps() const { return static_cast<int>(std::lround(tau_cut / step())); }
    Grid make_grid() const { return Grid(x_min, x_max, dx); }
};

// Per-step record of a damped proper-time evolution.
//
// Detector rates are discrete per-step loss rates attributed at step midpoints:
// rate[j][m] * dtau is exactly the norm^2 removed from the state by window j
// during step m, so the norm bookkeeping identity
//   1 - norm2[m] = sum_{s<m} dtau*(sum_j rate[j][s] + wall_rate[s])
// holds to round-off at every step boundary.
struct EvolutionRecord {
    double dtau = 0.0;
    double tau_start = 0.0;
    std::vector<double> tau;                 // step boundaries, n_steps+1 entries
    std::vector<double> norm2;               // at boundaries
    std::vector<std::vector<double>> rate;   // [window][step], at midpoints
    std::vector<double> wall_rate;           // [step] boundary-node zeroing loss rate
    bool leakage_warning = false;

    int n_steps() const { return static_cast<int>(wall_rate.size()); }
    double tau_mid(int m) const { return tau_start + dtau * (m + 0.5); }
    double window_loss(int j) const;         // dtau * sum rate[j]
    double wall_loss() const;
    // cumulative detector loss at each boundary (size n_steps+1)
    std::vector<double> cumulative_loss() const;
};

struct EvolveOptions {
    double tau_start = 0.0;
    bool conditional = false;  // post-collapse branch: skip the norm2 == 1 check
    // called after each completed step with (step index, state at boundary step+1)
    std::function<void(int, const SpinorSlice&)> observer;
};

// One Strang step of the damped proper-time dynamics: half damping, spectral
// kinetic step, half damping. Windows with a nonzero frame_shift have their
// damping conjugated by the translation T = exp(-shift*i*H0).
SpinorSlice damped_step(const SpinorSlice& omega, std::span<const CouplingWindow> windows,
                        const ModelParams& params, double dtau);

// T = exp(-distance * i * H0); equals free propagation by dt = distance (c = 1).
SpinorSlice translation_T(const SpinorSlice& omega, const ModelParams& params, double distance);

// Steps omega from tau_start to tau_cut, recording norm2 and per-window rates.
// Hard walls are enforced by zeroing boundary nodes after each step; the norm
// removed there is recorded in wall_rate. Throws on norm growth > 1e-10.
EvolutionRecord evolve(SpinorSlice& omega, std::span<const CouplingWindow> windows,
                       const GridSpec& spec, const ModelParams& params,
                       const EvolveOptions& opts = {});

}  // namespace eeqt

#endif
